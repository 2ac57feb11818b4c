#include "learner_common.hpp"

#include <bagstack/learners.hpp>

#include <algorithm>
#include <cmath>

namespace bagstack {

LogisticObjective logistic_objective(const Matrix& x, std::span<const int> y, const LogisticModel& model,
                                     double l2_lambda) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    LogisticObjective out;
    out.grad_weights = Matrix(d, kNumClasses);
    double loss = 0.0;
    std::array<double, kNumClasses> p{};
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = x.row(i);
        p = model.bias;
        for (std::size_t j = 0; j < d; ++j) {
            for (std::size_t c = 0; c < kNumClasses; ++c) p[c] += row[j] * model.weights(j, c);
        }
        // log-sum-exp before normalising
        const double mx = *std::max_element(p.begin(), p.end());
        double z = 0.0;
        for (double s : p) z += std::exp(s - mx);
        const double lse = mx + std::log(z);
        const auto yi = static_cast<std::size_t>(y[i]);
        loss += lse - p[yi];
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            const double g = std::exp(p[c] - lse) - (c == yi ? 1.0 : 0.0);
            out.grad_bias[c] += g;
            for (std::size_t j = 0; j < d; ++j) out.grad_weights(j, c) += g * row[j];
        }
    }
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            const double w = model.weights(j, c);
            sq += w * w;
            out.grad_weights(j, c) += l2_lambda * w;
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    out.value = (loss + 0.5 * l2_lambda * sq) * inv_n;
    for (auto& g : out.grad_weights.values()) g *= inv_n;
    for (auto& g : out.grad_bias) g *= inv_n;
    return out;
}

std::pair<TrainedModel, std::vector<double>> fit_logistic_traced(const Matrix& x, std::span<const int> y,
                                                                 const LearnerSpec& spec) {
    spec.check();
    detail::check_training_inputs(x, y);
    const auto& params = spec.logistic;

    LogisticModel current;
    current.weights = Matrix(x.cols(), kNumClasses);
    auto obj = logistic_objective(x, y, current, params.l2_lambda);
    std::vector<double> trace{obj.value};

    double step = params.step_size;
    LogisticModel candidate = current;
    for (int it = 0; it < params.max_iterations; ++it) {
        double gmax = 0.0;
        for (double g : obj.grad_weights.values()) gmax = std::max(gmax, std::abs(g));
        for (double g : obj.grad_bias) gmax = std::max(gmax, std::abs(g));
        if (gmax < params.convergence_tol) break;

        auto cw = candidate.weights.values();
        const auto w = current.weights.values();
        const auto gw = obj.grad_weights.values();
        for (std::size_t k = 0; k < cw.size(); ++k) cw[k] = w[k] - step * gw[k];
        for (std::size_t c = 0; c < kNumClasses; ++c) candidate.bias[c] = current.bias[c] - step * obj.grad_bias[c];

        auto next = logistic_objective(x, y, candidate, params.l2_lambda);
        if (next.value <= obj.value) {
            std::swap(current, candidate);
            obj = std::move(next);
            trace.push_back(obj.value);
        } else {
            step *= 0.5;
        }
    }

    TrainedModel model;
    model.spec = spec;
    model.spec.kind = LearnerKind::logistic;
    model.n_features = x.cols();
    model.params = std::move(current);
    return {std::move(model), std::move(trace)};
}

TrainedModel fit_logistic(const Matrix& x, std::span<const int> y, const LearnerSpec& spec) {
    return fit_logistic_traced(x, y, spec).first;
}

}  // namespace bagstack
