#pragma once

#include <bagstack/error.hpp>
#include <bagstack/matrix.hpp>

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace bagstack::detail {

inline void check_training_inputs(const Matrix& x, std::span<const int> y) {
    if (x.rows() == 0) throw Error(ErrorKind::empty_input, "no training rows");
    if (x.rows() != y.size()) {
        throw Error(ErrorKind::shape, "feature rows (" + std::to_string(x.rows()) + ") != targets (" +
                                          std::to_string(y.size()) + ")");
    }
    for (double v : x.values()) {
        if (!std::isfinite(v)) throw Error(ErrorKind::invalid_feature, "non-finite feature value");
    }
    for (int c : y) {
        if (c < 0 || c >= static_cast<int>(kNumClasses)) {
            throw Error(ErrorKind::label_consistency, "class " + std::to_string(c) + " outside [0, 3]");
        }
    }
}

/// Candidate thresholds from ascending `sorted` values: the order statistics at
/// positions floor(j * n / (m + 1)), j = 1..m, deduplicated, excluding the
/// maximum (which would leave the right side empty). Thresholds are data
/// values, so splits commute with strictly increasing feature transforms.
inline std::vector<double> quantile_candidates(std::span<const double> sorted, int m) {
    std::vector<double> out;
    const std::size_t n = sorted.size();
    if (n < 2) return out;
    for (int j = 1; j <= m; ++j) {
        const auto idx = static_cast<std::size_t>(j) * n / static_cast<std::size_t>(m + 1);
        const double t = sorted[std::min(idx, n - 1)];
        if (t >= sorted[n - 1]) continue;
        if (out.empty() || t > out.back()) out.push_back(t);
    }
    return out;
}

}  // namespace bagstack::detail
