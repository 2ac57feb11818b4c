#pragma once

#include <bagstack/matrix.hpp>

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace bagstack {

enum class LearnerKind { tree, gbm, logistic };

std::string_view to_string(LearnerKind kind);
LearnerKind parse_learner_kind(std::string_view name);

struct TreeParams {
    int max_depth = 6;
    int min_samples_leaf = 20;
    int candidate_thresholds_per_feature = 32;

    friend bool operator==(const TreeParams&, const TreeParams&) = default;
};

struct GbmParams {
    int n_rounds = 100;
    double learning_rate = 0.1;
    int max_depth = 4;
    double row_subsample = 1.0;
    int min_samples_leaf = 20;
    int candidate_thresholds_per_feature = 32;

    friend bool operator==(const GbmParams&, const GbmParams&) = default;
};

struct LogisticParams {
    double l2_lambda = 1.0;
    int max_iterations = 500;
    double step_size = 0.1;
    double convergence_tol = 1e-6;

    friend bool operator==(const LogisticParams&, const LogisticParams&) = default;
};

/// Learner family plus the hyperparameters of every family; only the block
/// matching `kind` is used.
struct LearnerSpec {
    LearnerKind kind = LearnerKind::gbm;
    TreeParams tree;
    GbmParams gbm;
    LogisticParams logistic;

    void check() const;

    static LearnerSpec make(LearnerKind kind) {
        LearnerSpec s;
        s.kind = kind;
        return s;
    }

    friend bool operator==(const LearnerSpec&, const LearnerSpec&) = default;
};

// --- model parameters -------------------------------------------------------

/// Classification tree node. Rows with x[feature] <= threshold go left.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::array<double, kNumClasses> distribution{};

    bool is_leaf() const noexcept { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct TreeModel {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    const std::array<double, kNumClasses>& leaf_for(std::span<const double> x) const;
    friend bool operator==(const TreeModel&, const TreeModel&) = default;
};

struct RegressionNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf output, already scaled by the learning rate

    bool is_leaf() const noexcept { return feature < 0; }
    friend bool operator==(const RegressionNode&, const RegressionNode&) = default;
};

struct RegressionTree {
    std::vector<RegressionNode> nodes;

    double predict(std::span<const double> x) const;
    friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

/// Multiclass boosted trees: score_c(x) = initial_scores[c] + sum over rounds of rounds[r][c](x).
struct GbmModel {
    std::array<double, kNumClasses> initial_scores{};
    std::vector<std::array<RegressionTree, kNumClasses>> rounds;

    friend bool operator==(const GbmModel&, const GbmModel&) = default;
};

/// softmax(x * weights + bias); weights is d x 4.
struct LogisticModel {
    Matrix weights;
    std::array<double, kNumClasses> bias{};

    friend bool operator==(const LogisticModel&, const LogisticModel&) = default;
};

struct TrainedModel {
    LearnerSpec spec;
    std::size_t n_features = 0;
    std::variant<TreeModel, GbmModel, LogisticModel> params;

    friend bool operator==(const TrainedModel&, const TrainedModel&) = default;
};

// --- fitting ------------------------------------------------------------------

/// Greedy CART on weighted Gini impurity. `weights` may be empty (unit weights).
TrainedModel fit_tree(const Matrix& x, std::span<const int> y, std::span<const double> weights,
                      const LearnerSpec& spec);

TrainedModel fit_gbm(const Matrix& x, std::span<const int> y, const LearnerSpec& spec, std::uint64_t seed);

TrainedModel fit_logistic(const Matrix& x, std::span<const int> y, const LearnerSpec& spec);

/// Same as fit_logistic, also returning the objective after every accepted step
/// (the first entry is the objective at the zero initialisation).
std::pair<TrainedModel, std::vector<double>> fit_logistic_traced(const Matrix& x, std::span<const int> y,
                                                                 const LearnerSpec& spec);

/// Dispatches on spec.kind. The seed only matters for stochastic learners.
TrainedModel fit_model(const LearnerSpec& spec, const Matrix& x, std::span<const int> y, std::uint64_t seed);

ProbabilityMatrix predict_proba(const TrainedModel& model, const Matrix& x);

// --- logistic objective (exposed for gradient checks) -------------------------

struct LogisticObjective {
    double value = 0.0;
    Matrix grad_weights;
    std::array<double, kNumClasses> grad_bias{};
};

/// (1/n) * [ sum_i CE(softmax(x_i W + b), y_i) + (lambda/2) * ||W||^2 ]. Bias is not penalised.
LogisticObjective logistic_objective(const Matrix& x, std::span<const int> y, const LogisticModel& model,
                                     double l2_lambda);

// --- helpers --------------------------------------------------------------------

/// In-place numerically stable softmax.
void softmax_inplace(std::span<double> scores);

/// Mean softmax cross-entropy of probability rows against class targets.
double cross_entropy(const ProbabilityMatrix& proba, std::span<const int> y);

/// Throws if any entry leaves [0,1] or a row does not sum to 1 within tol.
void check_row_stochastic(const ProbabilityMatrix& proba, double tol = 1e-9);

}  // namespace bagstack
