#pragma once

#include <bagstack/data.hpp>
#include <bagstack/matrix.hpp>

#include <array>
#include <optional>
#include <span>
#include <string>

namespace bagstack {

/// Average precision with block-atomic ties: rows with equal scores are
/// consumed together and precision is read after the whole block.
/// Returns nullopt when there are no positives. Throws on NaN scores.
std::optional<double> average_precision(std::span<const double> scores, std::span<const bool> positives);

/// Convenience overload for std::vector<bool>.
std::optional<double> average_precision(std::span<const double> scores, const std::vector<bool>& positives);

struct MapReport {
    /// Indexed start_hesitation, turn, walking. nullopt = no valid positives.
    std::array<std::optional<double>, 3> per_class_ap{};
    double map = 0.0;
    int counted_classes = 0;
    std::size_t n_valid_rows = 0;

    /// key=value lines, one per field.
    std::string to_text() const;
    /// `map,ap_sh,ap_turn,ap_walk` values; undefined APs are empty cells.
    std::string to_csv_row() const;
    static std::string csv_header() { return "map,ap_sh,ap_turn,ap_walk"; }

    friend bool operator==(const MapReport&, const MapReport&) = default;
};

/// Validity-masked mean AP over the three event classes (columns 1..3 of proba).
MapReport map_score(const ProbabilityMatrix& proba, const TargetVector& targets);

}  // namespace bagstack
