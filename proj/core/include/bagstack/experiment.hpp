#pragma once

#include <bagstack/ensembles.hpp>
#include <bagstack/features.hpp>
#include <bagstack/metrics.hpp>
#include <bagstack/model_io.hpp>
#include <bagstack/synth.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bagstack {

enum class Method { gbm, bagging, stacking, bagstacking };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);

inline constexpr Method kAllMethods[] = {Method::gbm, Method::bagging, Method::stacking, Method::bagstacking};

/// Flat `key = value` configuration shared by every command.
struct ExperimentConfig {
    Method method = Method::bagstacking;
    LearnerSpec base = LearnerSpec::make(LearnerKind::gbm);
    LearnerSpec meta = LearnerSpec::make(LearnerKind::logistic);
    std::size_t k = 10;
    int folds = 5;
    MetaMode mode = MetaMode::paper_literal;
    FeatureConfig features;
    std::uint64_t seed = 0;

    /// Keep every n-th row of the training / evaluation matrices.
    std::size_t train_stride = 1;
    std::size_t eval_stride = 1;
    double sample_rate_hz = 128.0;

    SynthConfig synth;

    std::size_t bench_seeds = 20;
    std::uint64_t bench_first_seed = 1;
    double holdout_fraction = 0.2;
    /// Optional fixed dataset for benchmarking; synthetic data is generated per seed otherwise.
    std::string bench_data_dir;

    unsigned threads = 1;

    void check() const;
};

/// Applies one key. Throws Error(config) on unknown keys or bad values.
void set_config_field(ExperimentConfig& cfg, std::string_view key, std::string_view value);
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Every key with its default, as accepted by parse_config.
std::string config_reference();

/// Rows 0, stride, 2*stride, ... of x and y.
std::pair<FeatureMatrix, TargetVector> take_stride(const FeatureMatrix& x, const TargetVector& y, std::size_t stride);

/// Fits `method` on (x, y) with the config's learners and ensemble settings.
ModelBundle::Model fit_method(Method method, const ExperimentConfig& cfg, const Matrix& x, std::span<const int> y,
                              std::uint64_t seed);

struct TrainSummary {
    ModelBundle bundle;
    std::size_t rows = 0;
    std::size_t features = 0;
    double wall_time_s = 0.0;
};

TrainSummary train_pipeline(const ExperimentConfig& cfg, const Dataset& train);

/// Featurizes `data` with the bundle's config and scores it.
MapReport evaluate_pipeline(const ModelBundle& bundle, const Dataset& data, std::size_t eval_stride = 1,
                            unsigned threads = 1);

// --- benchmark ---------------------------------------------------------------------

struct BenchmarkRow {
    Method method = Method::gbm;
    std::uint64_t seed = 0;
    MapReport report;
    double cross_entropy = 0.0;  // held-out, valid rows only
    double wall_time_s = 0.0;
};

struct BenchmarkAggregate {
    Method method = Method::gbm;
    double map_mean = 0.0, map_std = 0.0;
    std::array<std::optional<double>, 3> ap_mean{};
    double wall_mean = 0.0, wall_std = 0.0;
    double ce_mean = 0.0;
};

struct BenchmarkResult {
    std::vector<BenchmarkRow> rows;
    /// Per seed: content hash of the shared train/valid matrices.
    std::vector<std::pair<std::uint64_t, std::uint64_t>> data_hashes;

    std::vector<BenchmarkAggregate> aggregates() const;
};

/// One seed: data, subject split, featurization, then all four methods on the same matrices.
std::vector<BenchmarkRow> run_benchmark_seed(const ExperimentConfig& cfg, std::uint64_t seed,
                                             std::uint64_t* data_hash = nullptr);

/// All seeds; `parallel` seeds run concurrently, rows are ordered by seed then method.
BenchmarkResult run_benchmark(const ExperimentConfig& cfg, unsigned parallel = 1, std::ostream* log = nullptr);

/// Header `method,seed,map,ap_sh,ap_turn,ap_walk,wall_time_s`; per-seed rows then
/// `mean` and `std` aggregate rows per method.
void write_benchmark_csv(std::ostream& out, const BenchmarkResult& result);

/// FNV-1a over the matrix bytes and targets.
std::uint64_t content_hash(const FeatureMatrix& x, const TargetVector& y);

void write_features_csv(std::ostream& out, const FeatureMatrix& x);

// --- commands (exit status: 0 ok, 1 data/runtime error, 2 usage/config error) --------

struct CommandOptions {
    std::string config_path;
    std::string data_dir;
    std::string out;
    std::string model_path;
    std::string dump_features;
    std::optional<std::uint64_t> seed;
    unsigned parallel = 1;
};

int cmd_synth(const CommandOptions& opts, std::ostream& log, std::ostream& err);
int cmd_train(const CommandOptions& opts, std::ostream& log, std::ostream& err);
int cmd_predict(const CommandOptions& opts, std::ostream& log, std::ostream& err);
int cmd_evaluate(const CommandOptions& opts, std::ostream& log, std::ostream& err);
int cmd_benchmark(const CommandOptions& opts, std::ostream& log, std::ostream& err);

}  // namespace bagstack
