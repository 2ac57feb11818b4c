#pragma once

// Independent reference implementations used as test oracles. They favour
// obviousness over speed and share no code with the library.

#include <bagstack/data.hpp>
#include <bagstack/features.hpp>
#include <bagstack/learners.hpp>
#include <bagstack/matrix.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <vector>

namespace oracle {

/// AP from the precision/recall curve: one operating point per distinct score
/// threshold t (predict positive iff score >= t).
inline std::optional<double> average_precision(const std::vector<double>& scores, const std::vector<bool>& pos) {
    std::size_t total_pos = 0;
    for (bool p : pos) total_pos += p ? 1 : 0;
    if (total_pos == 0) return std::nullopt;
    std::set<double, std::greater<>> thresholds(scores.begin(), scores.end());
    double ap = 0.0, prev_recall = 0.0;
    for (double t : thresholds) {
        std::size_t tp = 0, predicted = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] >= t) {
                ++predicted;
                tp += pos[i] ? 1 : 0;
            }
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(predicted);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return ap;
}

struct MapResult {
    std::array<std::optional<double>, 3> ap{};
    std::optional<double> map;
};

inline MapResult map_score(const bagstack::Matrix& proba, const bagstack::TargetVector& t) {
    MapResult out;
    double sum = 0.0;
    int counted = 0;
    for (int c = 1; c <= 3; ++c) {
        std::vector<double> s;
        std::vector<bool> p;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (!t.valid[i]) continue;
            s.push_back(proba(i, static_cast<std::size_t>(c)));
            p.push_back(t.classes[i] == c);
        }
        out.ap[static_cast<std::size_t>(c - 1)] = average_precision(s, p);
        if (out.ap[static_cast<std::size_t>(c - 1)]) {
            sum += *out.ap[static_cast<std::size_t>(c - 1)];
            ++counted;
        }
    }
    if (counted > 0) out.map = sum / counted;
    return out;
}

struct Stats {
    double mean, median, min, max, std;
};

inline Stats window_stats(std::vector<double> v) {
    const double n = static_cast<double>(v.size());
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();
    const double median = m % 2 ? v[m / 2] : (v[m / 2 - 1] + v[m / 2]) / 2.0;
    return {mean, median, v.front(), v.back(), std::sqrt(ss / n)};
}

inline double stat_of(const Stats& s, bagstack::Statistic which) {
    switch (which) {
        case bagstack::Statistic::mean: return s.mean;
        case bagstack::Statistic::median: return s.median;
        case bagstack::Statistic::min: return s.min;
        case bagstack::Statistic::max: return s.max;
        case bagstack::Statistic::std: return s.std;
    }
    return 0.0;
}

/// Per-cell recomputation over explicitly materialized trailing windows.
inline bagstack::Matrix window_features(const bagstack::Recording& rec, const bagstack::FeatureConfig& cfg) {
    const std::size_t n = rec.size();
    bagstack::Matrix out(n, cfg.window_seconds.size() * 3 * cfg.statistics.size());
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t col = 0;
        for (double sec : cfg.window_seconds) {
            const auto w = static_cast<std::size_t>(std::llround(sec * rec.sample_rate_hz));
            const std::size_t lo = i + 1 >= w ? i + 1 - w : 0;
            for (int axis = 0; axis < 3; ++axis) {
                std::vector<double> win;
                for (std::size_t j = lo; j <= i; ++j) {
                    const auto& s = rec.samples[j];
                    win.push_back(axis == 0 ? s.acc_v : axis == 1 ? s.acc_ml : s.acc_ap);
                }
                const auto st = window_stats(win);
                for (auto stat : cfg.statistics) out(i, col++) = stat_of(st, stat);
            }
        }
    }
    return out;
}

inline double tree_value(const bagstack::RegressionTree& tree, std::span<const double> x) {
    int node = 0;
    while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
        node = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
    }
    return tree.nodes[static_cast<std::size_t>(node)].value;
}

/// softmax(initial + sum of per-round tree outputs), accumulated naively.
inline std::array<double, 4> gbm_proba(const bagstack::GbmModel& m, std::span<const double> x) {
    std::array<double, 4> score = m.initial_scores;
    for (const auto& round : m.rounds) {
        for (std::size_t c = 0; c < 4; ++c) score[c] += tree_value(round[c], x);
    }
    const double mx = *std::max_element(score.begin(), score.end());
    double z = 0.0;
    for (auto& s : score) z += (s = std::exp(s - mx));
    for (auto& s : score) s /= z;
    return score;
}

/// Regularized softmax cross-entropy of a logistic model, written out directly.
inline double logistic_objective(const bagstack::Matrix& x, const std::vector<int>& y, const bagstack::Matrix& w,
                                 const std::array<double, 4>& b, double lambda) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        std::array<double, 4> z = b;
        for (std::size_t c = 0; c < 4; ++c) {
            for (std::size_t j = 0; j < x.cols(); ++j) z[c] += x(i, j) * w(j, c);
        }
        const double mx = *std::max_element(z.begin(), z.end());
        double lse = 0.0;
        for (double v : z) lse += std::exp(v - mx);
        total += mx + std::log(lse) - z[static_cast<std::size_t>(y[i])];
    }
    double sq = 0.0;
    for (double v : w.values()) sq += v * v;
    return (total + 0.5 * lambda * sq) / static_cast<double>(x.rows());
}

}  // namespace oracle
