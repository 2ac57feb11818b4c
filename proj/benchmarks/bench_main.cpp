#include <bagstack/ensembles.hpp>
#include <bagstack/features.hpp>
#include <bagstack/metrics.hpp>
#include <bagstack/random.hpp>
#include <bagstack/synth.hpp>

#include <benchmark/benchmark.h>

using namespace bagstack;

namespace {

SynthConfig bench_synth() {
    SynthConfig cfg;
    cfg.n_subjects = 2;
    cfg.seconds_per_subject = 120.0;
    cfg.sample_rate_hz = 64.0;
    return cfg;
}

std::pair<Matrix, std::vector<int>> bench_matrices(std::size_t stride) {
    const auto [x, y] = to_supervised(generate_dataset(bench_synth(), 1).dataset, FeatureConfig{});
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < x.n_rows(); i += stride) rows.push_back(i);
    std::vector<int> classes;
    for (auto r : rows) classes.push_back(y.classes[r]);
    return {x.values.select_rows(rows), classes};
}

LearnerSpec bench_gbm() {
    auto spec = LearnerSpec::make(LearnerKind::gbm);
    spec.gbm.n_rounds = 20;
    return spec;
}

void BM_ExtractWindowFeatures(benchmark::State& state) {
    const auto data = generate_dataset(bench_synth(), 2).dataset;
    const FeatureConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(extract_window_features(data.recordings[0], cfg));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.recordings[0].size()));
}
BENCHMARK(BM_ExtractWindowFeatures)->Unit(benchmark::kMillisecond);

void BM_FitGbm(benchmark::State& state) {
    const auto [x, y] = bench_matrices(static_cast<std::size_t>(state.range(0)));
    const auto spec = bench_gbm();
    for (auto _ : state) benchmark::DoNotOptimize(fit_model(spec, x, y, 3));
    state.counters["rows"] = static_cast<double>(x.rows());
}
BENCHMARK(BM_FitGbm)->Arg(16)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_FitBagStacking(benchmark::State& state) {
    const auto [x, y] = bench_matrices(8);
    auto meta = LearnerSpec::make(LearnerKind::logistic);
    meta.logistic.max_iterations = 200;
    const auto k = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_bagstacking(bench_gbm(), meta, x, y, k, 4, MetaMode::paper_literal));
    }
}
BENCHMARK(BM_FitBagStacking)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_PredictBagging(benchmark::State& state) {
    const auto [x, y] = bench_matrices(8);
    const auto model = fit_bagging(bench_gbm(), x, y, 10, 5);
    for (auto _ : state) benchmark::DoNotOptimize(predict_bagging(model, x));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.rows()));
}
BENCHMARK(BM_PredictBagging)->Unit(benchmark::kMillisecond);

void BM_MapScore(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(6);
    Matrix p(n, 4);
    for (auto& v : p.values()) v = rng.uniform();
    TargetVector t;
    for (std::size_t i = 0; i < n; ++i) {
        t.classes.push_back(static_cast<int>(rng.below(4)));
        t.valid.push_back(true);
    }
    for (auto _ : state) benchmark::DoNotOptimize(map_score(p, t));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_MapScore)->Arg(1000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
