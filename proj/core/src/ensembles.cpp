#include <bagstack/ensembles.hpp>
#include <bagstack/error.hpp>
#include <bagstack/random.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace bagstack {

namespace {

constexpr std::uint64_t kBaseStream = 0xba5e;
constexpr std::uint64_t kFoldStream = 0xf01d;
constexpr std::uint64_t kMetaStream = 0x3e7a;
constexpr std::uint64_t kInBagStream = 0x1ba9;

/// Runs body(i) for i in [0, count). Each index writes only its own output slot,
/// so results are independent of the thread count.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        while (true) {
            const auto i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const auto n_workers = std::min<std::size_t>(threads, count);
    pool.reserve(n_workers);
    for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

std::vector<int> select_targets(std::span<const int> y, std::span<const std::size_t> rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(y[r]);
    return out;
}

void check_ensemble_inputs(const Matrix& x, std::span<const int> y) {
    if (x.rows() == 0) throw Error(ErrorKind::empty_input, "no training rows");
    if (x.rows() != y.size()) throw Error(ErrorKind::shape, "feature rows differ from target length");
}

void copy_block(Matrix& dst, std::size_t dst_row, std::size_t block, const ProbabilityMatrix& src,
                std::size_t src_row) {
    for (std::size_t c = 0; c < kNumClasses; ++c) dst(dst_row, block * kNumClasses + c) = src(src_row, c);
}

std::uint64_t fold_model_seed(std::uint64_t seed, std::size_t model, std::size_t fold) {
    return derive_seed({seed, kFoldStream, model, fold});
}

}  // namespace

std::string_view to_string(MetaMode mode) {
    return mode == MetaMode::paper_literal ? "paper_literal" : "out_of_fold";
}

MetaMode parse_meta_mode(std::string_view name) {
    if (name == "paper_literal") return MetaMode::paper_literal;
    if (name == "out_of_fold") return MetaMode::out_of_fold;
    throw Error(ErrorKind::config, "unknown meta mode '" + std::string(name) + "'");
}

std::uint64_t member_seed(std::uint64_t master_seed, std::size_t index) {
    return derive_seed({master_seed, kBaseStream, index});
}

BootstrapPlan bootstrap_indices(std::size_t n, std::size_t k, std::uint64_t master_seed) {
    if (n == 0) throw Error(ErrorKind::empty_input, "bootstrap over zero rows");
    if (k == 0) throw Error(ErrorKind::config, "bootstrap needs k >= 1");
    BootstrapPlan plan{n, k, master_seed, {}};
    plan.index_sets.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        Rng rng(derive_seed({master_seed, i}));
        auto& set = plan.index_sets[i];
        set.resize(n);
        for (auto& idx : set) idx = static_cast<std::size_t>(rng.below(n));
    }
    return plan;
}

// --- bagging ----------------------------------------------------------------

BaggingModel fit_bagging(const LearnerSpec& spec, const Matrix& x, std::span<const int> y, std::size_t k,
                         std::uint64_t seed, const EnsembleOptions& options) {
    if (k < 2) throw Error(ErrorKind::config, "bagging needs k >= 2");
    spec.check();
    check_ensemble_inputs(x, y);
    BaggingModel model;
    model.plan = bootstrap_indices(x.rows(), k, seed);
    model.members.resize(k);
    parallel_for(k, options.threads, [&](std::size_t i) {
        const auto& rows = model.plan.index_sets[i];
        const auto xi = x.select_rows(rows);
        const auto yi = select_targets(y, rows);
        model.members[i] = fit_model(spec, xi, yi, member_seed(seed, i));
    });
    return model;
}

ProbabilityMatrix predict_bagging(const BaggingModel& model, const Matrix& x, const EnsembleOptions& options) {
    if (model.members.empty()) throw Error(ErrorKind::config, "bagging model has no members");
    std::vector<ProbabilityMatrix> parts(model.members.size());
    parallel_for(parts.size(), options.threads, [&](std::size_t i) { parts[i] = predict_proba(model.members[i], x); });
    ProbabilityMatrix out(x.rows(), kNumClasses);
    auto acc = out.values();
    for (const auto& p : parts) {
        const auto v = p.values();
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += v[j];
    }
    const double k = static_cast<double>(parts.size());
    for (auto& v : acc) v /= k;
    return out;
}

// --- stacking -----------------------------------------------------------------

std::vector<int> fold_assignment(std::size_t n, int folds, std::uint64_t seed) {
    if (folds < 2) throw Error(ErrorKind::fold, "need at least 2 folds");
    if (static_cast<std::size_t>(folds) > n) {
        throw Error(ErrorKind::fold, std::to_string(folds) + " folds for " + std::to_string(n) + " rows");
    }
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    Rng rng(derive_seed({seed, kFoldStream}));
    rng.shuffle(perm.begin(), perm.end());
    std::vector<int> fold(n);
    for (std::size_t j = 0; j < n; ++j) fold[perm[j]] = static_cast<int>(j % static_cast<std::size_t>(folds));
    return fold;
}

Matrix build_meta_features(std::span<const TrainedModel> models, const Matrix& x, const EnsembleOptions& options) {
    std::vector<ProbabilityMatrix> parts(models.size());
    parallel_for(parts.size(), options.threads, [&](std::size_t i) { parts[i] = predict_proba(models[i], x); });
    Matrix meta(x.rows(), models.size() * kNumClasses);
    for (std::size_t b = 0; b < parts.size(); ++b) {
        for (std::size_t r = 0; r < x.rows(); ++r) copy_block(meta, r, b, parts[b], r);
    }
    return meta;
}

Matrix stacking_meta_features(std::span<const LearnerSpec> base_specs, const Matrix& x, std::span<const int> y,
                              int folds, std::uint64_t seed, const EnsembleOptions& options) {
    check_ensemble_inputs(x, y);
    const auto fold = fold_assignment(x.rows(), folds, seed);
    std::vector<std::vector<std::size_t>> train_rows(static_cast<std::size_t>(folds));
    std::vector<std::vector<std::size_t>> held_rows(static_cast<std::size_t>(folds));
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (int f = 0; f < folds; ++f) (fold[r] == f ? held_rows : train_rows)[static_cast<std::size_t>(f)].push_back(r);
    }

    Matrix meta(x.rows(), base_specs.size() * kNumClasses);
    const std::size_t n_tasks = base_specs.size() * static_cast<std::size_t>(folds);
    std::vector<ProbabilityMatrix> held_pred(n_tasks);
    parallel_for(n_tasks, options.threads, [&](std::size_t task) {
        const std::size_t b = task / static_cast<std::size_t>(folds);
        const std::size_t f = task % static_cast<std::size_t>(folds);
        const auto xt = x.select_rows(train_rows[f]);
        const auto yt = select_targets(y, train_rows[f]);
        const auto model = fit_model(base_specs[b], xt, yt, fold_model_seed(seed, b, f));
        held_pred[task] = predict_proba(model, x.select_rows(held_rows[f]));
    });
    for (std::size_t task = 0; task < n_tasks; ++task) {
        const std::size_t b = task / static_cast<std::size_t>(folds);
        const std::size_t f = task % static_cast<std::size_t>(folds);
        for (std::size_t j = 0; j < held_rows[f].size(); ++j) copy_block(meta, held_rows[f][j], b, held_pred[task], j);
    }
    return meta;
}

StackingModel fit_stacking(std::span<const LearnerSpec> base_specs, const LearnerSpec& meta_spec, const Matrix& x,
                           std::span<const int> y, int folds, std::uint64_t seed, const EnsembleOptions& options,
                           Matrix* meta_features_out) {
    if (base_specs.size() < 2) throw Error(ErrorKind::config, "stacking needs at least 2 base specs");
    for (const auto& s : base_specs) s.check();
    meta_spec.check();
    check_ensemble_inputs(x, y);

    auto meta = stacking_meta_features(base_specs, x, y, folds, seed, options);

    StackingModel model;
    model.folds = folds;
    model.seed = seed;
    model.base_models.resize(base_specs.size());
    parallel_for(base_specs.size(), options.threads, [&](std::size_t b) {
        model.base_models[b] = fit_model(base_specs[b], x, y, member_seed(seed, b));
    });
    model.meta_model = fit_model(meta_spec, meta, y, derive_seed({seed, kMetaStream}));
    if (meta_features_out) *meta_features_out = std::move(meta);
    return model;
}

ProbabilityMatrix predict_stacking(const StackingModel& model, const Matrix& x, const EnsembleOptions& options) {
    return predict_proba(model.meta_model, build_meta_features(model.base_models, x, options));
}

// --- bagstacking ----------------------------------------------------------------

namespace {

/// Meta-feature block for member i where no row is scored by a model trained on it.
void out_of_fold_block(const LearnerSpec& spec, const Matrix& x, std::span<const int> y,
                       const std::vector<std::size_t>& bag, const TrainedModel& member, std::size_t member_index,
                       std::uint64_t seed, ProbabilityMatrix& block) {
    const std::size_t n = x.rows();
    std::vector<char> in_bag(n, 0);
    for (auto r : bag) in_bag[r] = 1;
    std::vector<std::size_t> distinct, out_of_bag;
    for (std::size_t r = 0; r < n; ++r) (in_bag[r] ? distinct : out_of_bag).push_back(r);

    block = ProbabilityMatrix(n, kNumClasses);
    if (!out_of_bag.empty()) {
        const auto p = predict_proba(member, x.select_rows(out_of_bag));
        for (std::size_t j = 0; j < out_of_bag.size(); ++j) {
            for (std::size_t c = 0; c < kNumClasses; ++c) block(out_of_bag[j], c) = p(j, c);
        }
    }

    const int folds = static_cast<int>(std::min<std::size_t>(kInBagFolds, distinct.size()));
    if (folds < 2) throw Error(ErrorKind::fold, "bootstrap set has fewer than 2 distinct rows");
    const auto fold_of_distinct =
        fold_assignment(distinct.size(), folds, derive_seed({seed, kInBagStream, member_index}));
    std::vector<int> fold_of_row(n, -1);
    for (std::size_t j = 0; j < distinct.size(); ++j) fold_of_row[distinct[j]] = fold_of_distinct[j];

    for (int f = 0; f < folds; ++f) {
        std::vector<std::size_t> train, held;
        for (auto r : bag) {
            if (fold_of_row[r] != f) train.push_back(r);
        }
        for (auto r : distinct) {
            if (fold_of_row[r] == f) held.push_back(r);
        }
        const auto model = fit_model(spec, x.select_rows(train), select_targets(y, train),
                                     fold_model_seed(seed, member_index, static_cast<std::size_t>(f)));
        const auto p = predict_proba(model, x.select_rows(held));
        for (std::size_t j = 0; j < held.size(); ++j) {
            for (std::size_t c = 0; c < kNumClasses; ++c) block(held[j], c) = p(j, c);
        }
    }
}

}  // namespace

BagStackingModel fit_bagstacking(const LearnerSpec& spec, const LearnerSpec& meta_spec, const Matrix& x,
                                 std::span<const int> y, std::size_t k, std::uint64_t seed, MetaMode mode,
                                 const EnsembleOptions& options, Matrix* meta_features_out) {
    if (k < 2) throw Error(ErrorKind::config, "bagstacking needs k >= 2");
    spec.check();
    meta_spec.check();
    check_ensemble_inputs(x, y);

    BagStackingModel model;
    model.mode = mode;
    model.plan = bootstrap_indices(x.rows(), k, seed);
    model.base_models.resize(k);
    parallel_for(k, options.threads, [&](std::size_t i) {
        const auto& rows = model.plan.index_sets[i];
        model.base_models[i] = fit_model(spec, x.select_rows(rows), select_targets(y, rows), member_seed(seed, i));
    });

    Matrix meta;
    if (mode == MetaMode::paper_literal) {
        meta = build_meta_features(model.base_models, x, options);
    } else {
        std::vector<ProbabilityMatrix> blocks(k);
        parallel_for(k, options.threads, [&](std::size_t i) {
            out_of_fold_block(spec, x, y, model.plan.index_sets[i], model.base_models[i], i, seed, blocks[i]);
        });
        meta = Matrix(x.rows(), k * kNumClasses);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t r = 0; r < x.rows(); ++r) copy_block(meta, r, i, blocks[i], r);
        }
    }
    model.meta_model = fit_model(meta_spec, meta, y, derive_seed({seed, kMetaStream}));
    if (meta_features_out) *meta_features_out = std::move(meta);
    return model;
}

ProbabilityMatrix predict_bagstacking(const BagStackingModel& model, const Matrix& x, const EnsembleOptions& options) {
    if (model.meta_model.n_features != model.base_models.size() * kNumClasses) {
        throw Error(ErrorKind::shape, "meta-model input width does not match 4 * k");
    }
    return predict_proba(model.meta_model, build_meta_features(model.base_models, x, options));
}

}  // namespace bagstack
