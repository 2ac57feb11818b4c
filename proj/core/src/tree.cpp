#include "learner_common.hpp"

#include <bagstack/learners.hpp>

#include <algorithm>
#include <limits>

namespace bagstack {

namespace {

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity();
};

double gini_weighted(const std::array<double, kNumClasses>& w, double total) {
    if (total <= 0.0) return 0.0;
    double sq = 0.0;
    for (double v : w) sq += (v / total) * (v / total);
    return total * (1.0 - sq);
}

class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, std::span<const int> y, std::span<const double> w, const TreeParams& params)
        : x_(x), y_(y), w_(w), params_(params) {}

    TreeModel build() {
        std::vector<std::size_t> rows(x_.rows());
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
        grow(rows, 0);
        return std::move(model_);
    }

private:
    double weight(std::size_t i) const { return w_.empty() ? 1.0 : w_[i]; }

    int grow(std::vector<std::size_t>& rows, int depth) {
        const int id = static_cast<int>(model_.nodes.size());
        model_.nodes.emplace_back();

        std::array<double, kNumClasses> cw{};
        double total = 0.0;
        for (auto r : rows) {
            cw[static_cast<std::size_t>(y_[r])] += weight(r);
            total += weight(r);
        }
        auto& dist = model_.nodes[static_cast<std::size_t>(id)].distribution;
        for (std::size_t c = 0; c < kNumClasses; ++c) dist[c] = total > 0.0 ? cw[c] / total : 0.25;

        const auto n_present = std::count_if(cw.begin(), cw.end(), [](double v) { return v > 0.0; });
        const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
        if (depth >= params_.max_depth || n_present <= 1 || rows.size() < 2 * min_leaf) return id;

        const auto split = best_split(rows, min_leaf);
        if (split.feature < 0) return id;

        const auto f = static_cast<std::size_t>(split.feature);
        std::vector<std::size_t> left, right;
        for (auto r : rows) (x_(r, f) <= split.threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        const int l = grow(left, depth + 1);
        const int rt = grow(right, depth + 1);
        auto& node = model_.nodes[static_cast<std::size_t>(id)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = l;
        node.right = rt;
        return id;
    }

    SplitChoice best_split(const std::vector<std::size_t>& rows, std::size_t min_leaf) const {
        SplitChoice best;
        const std::size_t n = rows.size();
        std::vector<std::pair<double, std::size_t>> pairs(n);
        std::vector<double> sorted(n);
        for (std::size_t f = 0; f < x_.cols(); ++f) {
            for (std::size_t i = 0; i < n; ++i) pairs[i] = {x_(rows[i], f), rows[i]};
            std::sort(pairs.begin(), pairs.end());
            for (std::size_t i = 0; i < n; ++i) sorted[i] = pairs[i].first;
            const auto candidates = detail::quantile_candidates(sorted, params_.candidate_thresholds_per_feature);

            std::array<double, kNumClasses> left{}, right{};
            double wl = 0.0, wr = 0.0;
            for (const auto& [v, r] : pairs) {
                right[static_cast<std::size_t>(y_[r])] += weight(r);
                wr += weight(r);
            }
            std::size_t p = 0;
            for (double t : candidates) {
                while (p < n && pairs[p].first <= t) {
                    const auto c = static_cast<std::size_t>(y_[pairs[p].second]);
                    const double w = weight(pairs[p].second);
                    left[c] += w;
                    right[c] -= w;
                    wl += w;
                    wr -= w;
                    ++p;
                }
                if (p < min_leaf || n - p < min_leaf) continue;
                const double imp = gini_weighted(left, wl) + gini_weighted(right, wr);
                if (imp < best.impurity) {
                    best.impurity = imp;
                    best.feature = static_cast<int>(f);
                    best.threshold = t;
                }
            }
        }
        return best;
    }

    const Matrix& x_;
    std::span<const int> y_;
    std::span<const double> w_;
    const TreeParams& params_;
    TreeModel model_;
};

}  // namespace

TrainedModel fit_tree(const Matrix& x, std::span<const int> y, std::span<const double> weights,
                      const LearnerSpec& spec) {
    spec.check();
    detail::check_training_inputs(x, y);
    if (!weights.empty()) {
        if (weights.size() != y.size()) throw Error(ErrorKind::shape, "weights length differs from targets");
        double total = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorKind::invalid_feature, "weights must be >= 0");
            total += w;
        }
        if (!(total > 0.0)) throw Error(ErrorKind::invalid_feature, "weights sum to zero");
    }
    TrainedModel model;
    model.spec = spec;
    model.spec.kind = LearnerKind::tree;
    model.n_features = x.cols();
    model.params = TreeBuilder(x, y, weights, spec.tree).build();
    return model;
}

}  // namespace bagstack
