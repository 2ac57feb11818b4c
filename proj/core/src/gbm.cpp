#include "learner_common.hpp"

#include <bagstack/learners.hpp>
#include <bagstack/random.hpp>

#include <algorithm>
#include <cmath>

namespace bagstack {

namespace {

// Floor on class priors so an absent class starts from a finite score.
constexpr double kPriorFloor = 1e-12;

/// Features quantised once against global quantile edges. Bin b of feature f
/// holds values v with edges[b-1] < v <= edges[b]; "bin <= j" is "v <= edges[j]".
struct BinnedFeatures {
    std::size_t rows = 0;
    std::vector<std::vector<double>> edges;       // per feature
    std::vector<std::vector<std::uint8_t>> bins;  // per feature, per row

    BinnedFeatures(const Matrix& x, int max_candidates) : rows(x.rows()), edges(x.cols()), bins(x.cols()) {
        std::vector<double> col(x.rows());
        for (std::size_t f = 0; f < x.cols(); ++f) {
            for (std::size_t i = 0; i < x.rows(); ++i) col[i] = x(i, f);
            std::vector<double> sorted = col;
            std::sort(sorted.begin(), sorted.end());
            edges[f] = detail::quantile_candidates(sorted, max_candidates);
            auto& b = bins[f];
            b.resize(x.rows());
            for (std::size_t i = 0; i < x.rows(); ++i) {
                b[i] = static_cast<std::uint8_t>(std::lower_bound(edges[f].begin(), edges[f].end(), col[i]) -
                                                 edges[f].begin());
            }
        }
    }
};

class RegressionTreeBuilder {
public:
    RegressionTreeBuilder(const BinnedFeatures& data, std::span<const double> target, const GbmParams& params)
        : data_(data), target_(target), params_(params) {}

    RegressionTree build(std::vector<std::size_t> rows) {
        grow(rows, 0);
        return std::move(tree_);
    }

private:
    struct Split {
        int feature = -1;
        int bin = -1;
        double gain = 0.0;
    };

    int grow(std::vector<std::size_t>& rows, int depth) {
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        double sum = 0.0;
        for (auto r : rows) sum += target_[r];
        tree_.nodes[static_cast<std::size_t>(id)].value =
            rows.empty() ? 0.0 : params_.learning_rate * sum / static_cast<double>(rows.size());

        const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
        if (depth >= params_.max_depth || rows.size() < 2 * min_leaf) return id;

        const Split split = best_split(rows, sum, min_leaf);
        if (split.feature < 0) return id;

        const auto& fb = data_.bins[static_cast<std::size_t>(split.feature)];
        std::vector<std::size_t> left, right;
        for (auto r : rows) (fb[r] <= split.bin ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        const int l = grow(left, depth + 1);
        const int rt = grow(right, depth + 1);
        auto& node = tree_.nodes[static_cast<std::size_t>(id)];
        node.feature = split.feature;
        node.threshold = data_.edges[static_cast<std::size_t>(split.feature)][static_cast<std::size_t>(split.bin)];
        node.left = l;
        node.right = rt;
        return id;
    }

    Split best_split(const std::vector<std::size_t>& rows, double total, std::size_t min_leaf) {
        Split best;
        const double n = static_cast<double>(rows.size());
        const double parent = total * total / n;
        for (std::size_t f = 0; f < data_.edges.size(); ++f) {
            const auto n_edges = data_.edges[f].size();
            if (n_edges == 0) continue;
            hist_sum_.assign(n_edges + 1, 0.0);
            hist_cnt_.assign(n_edges + 1, 0);
            const auto& fb = data_.bins[f];
            for (auto r : rows) {
                hist_sum_[fb[r]] += target_[r];
                ++hist_cnt_[fb[r]];
            }
            double sl = 0.0;
            std::size_t nl = 0;
            for (std::size_t b = 0; b < n_edges; ++b) {
                sl += hist_sum_[b];
                nl += hist_cnt_[b];
                const std::size_t nr = rows.size() - nl;
                if (nl < min_leaf || nr < min_leaf) continue;
                const double sr = total - sl;
                const double gain = sl * sl / static_cast<double>(nl) + sr * sr / static_cast<double>(nr) - parent;
                if (gain > best.gain + 1e-12) {
                    best.gain = gain;
                    best.feature = static_cast<int>(f);
                    best.bin = static_cast<int>(b);
                }
            }
        }
        return best;
    }

    const BinnedFeatures& data_;
    std::span<const double> target_;
    const GbmParams& params_;
    RegressionTree tree_;
    std::vector<double> hist_sum_;
    std::vector<std::size_t> hist_cnt_;
};

double predict_binned(const RegressionTree& tree, const BinnedFeatures& data, std::size_t row) {
    std::size_t i = 0;
    while (!tree.nodes[i].is_leaf()) {
        const auto& n = tree.nodes[i];
        const auto f = static_cast<std::size_t>(n.feature);
        // edges are strictly increasing, so e[b] <= threshold is exactly bin <= split bin
        const auto& e = data.edges[f];
        const auto b = data.bins[f][row];
        const bool go_left = b < e.size() && e[b] <= n.threshold;
        i = static_cast<std::size_t>(go_left ? n.left : n.right);
    }
    return tree.nodes[i].value;
}

}  // namespace

TrainedModel fit_gbm(const Matrix& x, std::span<const int> y, const LearnerSpec& spec, std::uint64_t seed) {
    spec.check();
    detail::check_training_inputs(x, y);
    const auto& params = spec.gbm;
    const std::size_t n = x.rows();

    GbmModel gbm;
    std::array<double, kNumClasses> counts{};
    for (int c : y) counts[static_cast<std::size_t>(c)] += 1.0;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        gbm.initial_scores[c] = std::log(std::max(counts[c] / static_cast<double>(n), kPriorFloor));
    }

    if (params.n_rounds > 0) {
        const BinnedFeatures data(x, params.candidate_thresholds_per_feature);
        std::vector<double> scores(n * kNumClasses);
        for (std::size_t i = 0; i < n; ++i) {
            std::copy(gbm.initial_scores.begin(), gbm.initial_scores.end(), scores.begin() + static_cast<std::ptrdiff_t>(i * kNumClasses));
        }
        std::vector<double> proba(n * kNumClasses);
        std::vector<double> residual(n);
        std::vector<std::size_t> all_rows(n);
        for (std::size_t i = 0; i < n; ++i) all_rows[i] = i;
        const auto n_sub = static_cast<std::size_t>(
            std::max(1.0, std::ceil(params.row_subsample * static_cast<double>(n))));

        for (int round = 0; round < params.n_rounds; ++round) {
            for (std::size_t i = 0; i < n; ++i) {
                std::span<double> p(proba.data() + i * kNumClasses, kNumClasses);
                std::copy_n(scores.begin() + static_cast<std::ptrdiff_t>(i * kNumClasses), kNumClasses, p.begin());
                softmax_inplace(p);
            }
            std::vector<std::size_t> rows;
            if (n_sub < n) {
                std::vector<std::size_t> perm = all_rows;
                Rng rng(derive_seed({seed, static_cast<std::uint64_t>(round), 0x6b6d}));
                // partial Fisher-Yates: first n_sub entries form the subset
                for (std::size_t i = 0; i < n_sub; ++i) {
                    const auto j = i + rng.below(n - i);
                    std::swap(perm[i], perm[j]);
                }
                perm.resize(n_sub);
                std::sort(perm.begin(), perm.end());
                rows = std::move(perm);
            } else {
                rows = all_rows;
            }

            auto& trees = gbm.rounds.emplace_back();
            for (std::size_t c = 0; c < kNumClasses; ++c) {
                for (std::size_t i = 0; i < n; ++i) {
                    residual[i] = (y[i] == static_cast<int>(c) ? 1.0 : 0.0) - proba[i * kNumClasses + c];
                }
                trees[c] = RegressionTreeBuilder(data, residual, params).build(rows);
            }
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t c = 0; c < kNumClasses; ++c) {
                    scores[i * kNumClasses + c] += predict_binned(trees[c], data, i);
                }
            }
        }
    }

    TrainedModel model;
    model.spec = spec;
    model.spec.kind = LearnerKind::gbm;
    model.n_features = x.cols();
    model.params = std::move(gbm);
    return model;
}

}  // namespace bagstack
