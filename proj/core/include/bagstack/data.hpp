#pragma once

#include <bagstack/matrix.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace bagstack {

/// Per-sample event class. `none` means no freezing event is annotated.
enum class EventClass : std::uint8_t { none = 0, start_hesitation = 1, turn = 2, walking = 3 };

struct Sample {
    std::int64_t t_index = 0;
    double acc_v = 0.0;
    double acc_ml = 0.0;
    double acc_ap = 0.0;

    friend bool operator==(const Sample&, const Sample&) = default;
};

/// One subject's lower-back accelerometer trace with labels and validity mask.
struct Recording {
    std::string subject_id;
    int recording_index = 0;
    double sample_rate_hz = 128.0;
    std::vector<Sample> samples;
    std::vector<EventClass> labels;
    std::vector<bool> valid;

    std::size_t size() const noexcept { return samples.size(); }

    /// Throws Error if samples are not contiguous from 0 or lengths disagree.
    void check() const;

    friend bool operator==(const Recording&, const Recording&) = default;
};

struct Dataset {
    std::vector<Recording> recordings;

    std::size_t total_samples() const noexcept;

    /// Throws Error on a duplicate (subject_id, recording_index) or an invalid recording.
    void check() const;
};

struct FeatureMatrix {
    Matrix values;
    std::vector<std::string> column_names;

    std::size_t n_rows() const noexcept { return values.rows(); }
    std::size_t n_cols() const noexcept { return values.cols(); }
};

struct TargetVector {
    std::vector<int> classes;
    std::vector<bool> valid;

    std::size_t size() const noexcept { return classes.size(); }
};

/// CSV header: Time,AccV,AccML,AccAP,StartHesitation,Turn,Walking,Valid
Recording parse_recording_csv(std::istream& in, double sample_rate_hz, std::string subject_id = {});
void write_recording_csv(std::ostream& out, const Recording& rec);

/// Directory layout: one `<subject_id>_<recording_index>.csv` per recording.
/// Files are read in lexicographic filename order.
Dataset load_dataset_dir(const std::filesystem::path& dir, double sample_rate_hz);
void write_dataset_dir(const std::filesystem::path& dir, const Dataset& dataset);

/// Subject-wise split; every subject ends up on exactly one side.
std::pair<Dataset, Dataset> split_by_subject(const Dataset& dataset, double holdout_fraction,
                                             std::uint64_t seed);

}  // namespace bagstack
