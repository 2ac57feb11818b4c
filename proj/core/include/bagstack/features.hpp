#pragma once

#include <bagstack/data.hpp>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bagstack {

enum class Statistic { mean, median, min, max, std };

std::string_view to_string(Statistic s);
Statistic parse_statistic(std::string_view name);

/// Multi-scale trailing-window configuration. Defaults: 50 s and 5 s windows,
/// all five statistics.
struct FeatureConfig {
    std::vector<double> window_seconds{50.0, 5.0};
    std::vector<Statistic> statistics{Statistic::mean, Statistic::median, Statistic::min, Statistic::max,
                                      Statistic::std};

    void check() const;
    std::size_t n_features() const { return window_seconds.size() * 3 * statistics.size(); }
    std::vector<std::string> column_names() const;

    friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

struct WindowStats {
    double mean = 0.0;
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
    double std = 0.0;

    double get(Statistic s) const;
};

/// Two-pass statistics over a materialized window. Population std (divide by n).
WindowStats compute_window_stats(std::span<const double> values);

/// Window length in samples: round(seconds * rate), must be >= 1.
std::size_t window_length(double seconds, double sample_rate_hz);

/// One row per sample. Columns ordered (window, axis V/ML/AP, statistic) in
/// config order. Window at sample i covers [max(0, i - w + 1), i].
FeatureMatrix extract_window_features(const Recording& recording, const FeatureConfig& config);

/// Concatenates per-recording features and labels in recording order.
std::pair<FeatureMatrix, TargetVector> to_supervised(const Dataset& dataset, const FeatureConfig& config);

}  // namespace bagstack
