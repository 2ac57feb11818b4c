#pragma once

#include <bagstack/learners.hpp>

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace bagstack {

/// k bootstrap multisets over rows [0, n). Set i is drawn from its own stream
/// seeded by derive_seed({master_seed, i}), so any set can be regenerated alone.
struct BootstrapPlan {
    std::size_t n = 0;
    std::size_t k = 0;
    std::uint64_t master_seed = 0;
    std::vector<std::vector<std::size_t>> index_sets;

    friend bool operator==(const BootstrapPlan&, const BootstrapPlan&) = default;
};

BootstrapPlan bootstrap_indices(std::size_t n, std::size_t k, std::uint64_t master_seed);

/// How BagStacking builds the meta-learner's training inputs.
///  paper_literal: every base model predicts the full original training set.
///  out_of_fold:   a row is only ever scored by models that did not train on it
///                 (out-of-bag rows by the member itself, in-bag rows by a
///                 5-fold CV surrogate inside the member's bootstrap set).
enum class MetaMode { paper_literal, out_of_fold };

std::string_view to_string(MetaMode mode);
MetaMode parse_meta_mode(std::string_view name);

struct EnsembleOptions {
    /// Worker threads for member training/prediction. Results do not depend on it.
    unsigned threads = 1;
};

struct BaggingModel {
    std::vector<TrainedModel> members;
    BootstrapPlan plan;

    friend bool operator==(const BaggingModel&, const BaggingModel&) = default;
};

struct StackingModel {
    std::vector<TrainedModel> base_models;
    TrainedModel meta_model;
    int folds = 5;
    std::uint64_t seed = 0;

    friend bool operator==(const StackingModel&, const StackingModel&) = default;
};

struct BagStackingModel {
    std::vector<TrainedModel> base_models;
    TrainedModel meta_model;
    BootstrapPlan plan;
    MetaMode mode = MetaMode::paper_literal;

    friend bool operator==(const BagStackingModel&, const BagStackingModel&) = default;
};

inline constexpr int kInBagFolds = 5;

// --- bagging ----------------------------------------------------------------

BaggingModel fit_bagging(const LearnerSpec& spec, const Matrix& x, std::span<const int> y, std::size_t k,
                         std::uint64_t seed, const EnsembleOptions& options = {});

/// Arithmetic mean of the member probability matrices.
ProbabilityMatrix predict_bagging(const BaggingModel& model, const Matrix& x, const EnsembleOptions& options = {});

// --- stacking -----------------------------------------------------------------

/// Seeded fold id in [0, folds) for each of n rows; fold sizes differ by at most one.
std::vector<int> fold_assignment(std::size_t n, int folds, std::uint64_t seed);

/// Concatenation [p_1 | ... | p_k] of each model's probabilities on x.
Matrix build_meta_features(std::span<const TrainedModel> models, const Matrix& x,
                           const EnsembleOptions& options = {});

/// Out-of-fold meta-features for classic stacking (n x 4 * base_specs.size()).
Matrix stacking_meta_features(std::span<const LearnerSpec> base_specs, const Matrix& x, std::span<const int> y,
                              int folds, std::uint64_t seed, const EnsembleOptions& options = {});

StackingModel fit_stacking(std::span<const LearnerSpec> base_specs, const LearnerSpec& meta_spec, const Matrix& x,
                           std::span<const int> y, int folds, std::uint64_t seed,
                           const EnsembleOptions& options = {}, Matrix* meta_features_out = nullptr);

ProbabilityMatrix predict_stacking(const StackingModel& model, const Matrix& x, const EnsembleOptions& options = {});

// --- bagstacking ----------------------------------------------------------------

BagStackingModel fit_bagstacking(const LearnerSpec& spec, const LearnerSpec& meta_spec, const Matrix& x,
                                 std::span<const int> y, std::size_t k, std::uint64_t seed, MetaMode mode,
                                 const EnsembleOptions& options = {}, Matrix* meta_features_out = nullptr);

ProbabilityMatrix predict_bagstacking(const BagStackingModel& model, const Matrix& x,
                                      const EnsembleOptions& options = {});

/// Seed used for member `index` of an ensemble with the given master seed.
std::uint64_t member_seed(std::uint64_t master_seed, std::size_t index);

}  // namespace bagstack
