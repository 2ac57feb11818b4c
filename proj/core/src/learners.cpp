#include <bagstack/error.hpp>
#include <bagstack/learners.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace bagstack {

std::string_view to_string(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::tree: return "tree";
        case LearnerKind::gbm: return "gbm";
        case LearnerKind::logistic: return "logistic";
    }
    return "?";
}

LearnerKind parse_learner_kind(std::string_view name) {
    for (auto k : {LearnerKind::tree, LearnerKind::gbm, LearnerKind::logistic}) {
        if (to_string(k) == name) return k;
    }
    throw Error(ErrorKind::config, "unknown learner kind '" + std::string(name) + "'");
}

void LearnerSpec::check() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw Error(ErrorKind::config, what);
    };
    require(tree.max_depth >= 1, "tree.max_depth must be positive");
    require(tree.min_samples_leaf >= 1, "tree.min_samples_leaf must be positive");
    require(tree.candidate_thresholds_per_feature >= 1 && tree.candidate_thresholds_per_feature <= 255,
            "tree.candidate_thresholds_per_feature must be in [1, 255]");
    require(gbm.n_rounds >= 0, "gbm.n_rounds must be non-negative");
    require(gbm.learning_rate > 0.0 && std::isfinite(gbm.learning_rate), "gbm.learning_rate must be positive");
    require(gbm.max_depth >= 1, "gbm.max_depth must be positive");
    require(gbm.row_subsample > 0.0 && gbm.row_subsample <= 1.0, "gbm.row_subsample must be in (0, 1]");
    require(gbm.min_samples_leaf >= 1, "gbm.min_samples_leaf must be positive");
    require(gbm.candidate_thresholds_per_feature >= 1 && gbm.candidate_thresholds_per_feature <= 255,
            "gbm.candidate_thresholds_per_feature must be in [1, 255]");
    require(logistic.l2_lambda >= 0.0 && std::isfinite(logistic.l2_lambda), "logistic.l2_lambda must be >= 0");
    require(logistic.max_iterations >= 0, "logistic.max_iterations must be non-negative");
    require(logistic.step_size > 0.0 && std::isfinite(logistic.step_size), "logistic.step_size must be positive");
    require(logistic.convergence_tol > 0.0, "logistic.convergence_tol must be positive");
}

void softmax_inplace(std::span<double> scores) {
    const double mx = *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    for (auto& s : scores) {
        s = std::exp(s - mx);
        sum += s;
    }
    for (auto& s : scores) s /= sum;
}

double cross_entropy(const ProbabilityMatrix& proba, std::span<const int> y) {
    if (proba.rows() != y.size()) throw Error(ErrorKind::shape, "cross_entropy: row count mismatch");
    if (y.empty()) throw Error(ErrorKind::empty_input, "cross_entropy: no rows");
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        total -= std::log(std::max(proba(i, static_cast<std::size_t>(y[i])), 1e-15));
    }
    return total / static_cast<double>(y.size());
}

void check_row_stochastic(const ProbabilityMatrix& proba, double tol) {
    for (std::size_t i = 0; i < proba.rows(); ++i) {
        double sum = 0.0;
        for (double p : proba.row(i)) {
            if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::shape, "probability outside [0,1]");
            sum += p;
        }
        if (std::abs(sum - 1.0) > tol) throw Error(ErrorKind::shape, "probability row does not sum to 1");
    }
}

const std::array<double, kNumClasses>& TreeModel::leaf_for(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
        const auto& n = nodes[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[i].distribution;
}

double RegressionTree::predict(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
        const auto& n = nodes[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[i].value;
}

TrainedModel fit_model(const LearnerSpec& spec, const Matrix& x, std::span<const int> y, std::uint64_t seed) {
    switch (spec.kind) {
        case LearnerKind::tree: return fit_tree(x, y, {}, spec);
        case LearnerKind::gbm: return fit_gbm(x, y, spec, seed);
        case LearnerKind::logistic: return fit_logistic(x, y, spec);
    }
    throw Error(ErrorKind::config, "unknown learner kind");
}

ProbabilityMatrix predict_proba(const TrainedModel& model, const Matrix& x) {
    if (x.cols() != model.n_features) {
        throw Error(ErrorKind::shape, "model expects " + std::to_string(model.n_features) + " features, got " +
                                          std::to_string(x.cols()));
    }
    ProbabilityMatrix out(x.rows(), kNumClasses);
    if (const auto* tree = std::get_if<TreeModel>(&model.params)) {
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const auto& dist = tree->leaf_for(x.row(i));
            std::copy(dist.begin(), dist.end(), out.row(i).begin());
        }
    } else if (const auto* gbm = std::get_if<GbmModel>(&model.params)) {
        for (std::size_t i = 0; i < x.rows(); ++i) {
            auto scores = gbm->initial_scores;
            const auto row = x.row(i);
            for (const auto& round : gbm->rounds) {
                for (std::size_t c = 0; c < kNumClasses; ++c) scores[c] += round[c].predict(row);
            }
            softmax_inplace(scores);
            std::copy(scores.begin(), scores.end(), out.row(i).begin());
        }
    } else {
        const auto& lr = std::get<LogisticModel>(model.params);
        for (std::size_t i = 0; i < x.rows(); ++i) {
            auto scores = lr.bias;
            const auto row = x.row(i);
            for (std::size_t j = 0; j < row.size(); ++j) {
                const double v = row[j];
                for (std::size_t c = 0; c < kNumClasses; ++c) scores[c] += v * lr.weights(j, c);
            }
            softmax_inplace(scores);
            std::copy(scores.begin(), scores.end(), out.row(i).begin());
        }
    }
    return out;
}

}  // namespace bagstack
