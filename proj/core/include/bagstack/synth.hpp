#pragma once

#include <bagstack/data.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace bagstack {

/// Parameters of the synthetic freezing-of-gait generator.
struct SynthConfig {
    int n_subjects = 10;
    double seconds_per_subject = 300.0;
    double sample_rate_hz = 128.0;
    double episode_rate_per_minute = 1.5;
    /// Relative weights over start_hesitation, turn, walking.
    std::array<double, 3> class_mix{1.0, 1.0, 1.0};
    double noise_sigma = 0.3;
    double invalid_fraction = 0.05;
    double gait_freq_min_hz = 0.8;
    double gait_freq_max_hz = 2.2;
    double episode_min_seconds = 2.0;
    double episode_max_seconds = 15.0;

    void check() const;

    /// Expected fraction of samples inside an episode: rate * mean_duration / 60.
    double expected_event_fraction() const;
};

/// Ground-truth episode; end_index is inclusive.
struct Episode {
    EventClass cls = EventClass::none;
    std::size_t start_index = 0;
    std::size_t end_index = 0;

    friend bool operator==(const Episode&, const Episode&) = default;
};

struct SyntheticDataset {
    Dataset dataset;
    /// Keyed by subject_id.
    std::map<std::string, std::vector<Episode>> episodes;
};

SyntheticDataset generate_dataset(const SynthConfig& config, std::uint64_t seed);

/// `class,start_index,end_index` sidecar (class as start_hesitation/turn/walking).
void write_episodes_csv(std::ostream& out, const std::vector<Episode>& episodes);
std::vector<Episode> parse_episodes_csv(std::istream& in);

/// Writes recordings plus one `<subject_id>.episodes.csv` per subject.
void write_synthetic_dir(const std::filesystem::path& dir, const SyntheticDataset& data);

}  // namespace bagstack
