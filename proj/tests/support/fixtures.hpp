#pragma once

// Small data builders shared by the unit and acceptance tests.

#include <bagstack/data.hpp>
#include <bagstack/matrix.hpp>
#include <bagstack/random.hpp>
#include <bagstack/synth.hpp>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

namespace fixture {

inline bagstack::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double lo = -1.0,
                                      double hi = 1.0) {
    bagstack::Rng rng(seed);
    bagstack::Matrix m(rows, cols);
    for (auto& v : m.values()) v = rng.uniform(lo, hi);
    return m;
}

inline std::vector<int> random_classes(std::size_t n, std::uint64_t seed) {
    bagstack::Rng rng(seed);
    std::vector<int> y(n);
    for (auto& c : y) c = static_cast<int>(rng.below(4));
    return y;
}

/// Random row-stochastic n x 4 matrix.
inline bagstack::Matrix random_proba(std::size_t n, std::uint64_t seed) {
    bagstack::Rng rng(seed);
    bagstack::Matrix p(n, 4);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < 4; ++c) s += (p(i, c) = rng.uniform() + 1e-3);
        for (std::size_t c = 0; c < 4; ++c) p(i, c) /= s;
    }
    return p;
}

/// Four Gaussian blobs in d dimensions, one per class, centre spacing `sep`.
inline std::pair<bagstack::Matrix, std::vector<int>> blobs(std::size_t n, std::size_t d, double sep,
                                                           std::uint64_t seed) {
    bagstack::Rng rng(seed);
    bagstack::Matrix x(n, d);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int c = static_cast<int>(i % 4);
        y[i] = c;
        for (std::size_t j = 0; j < d; ++j) {
            const double centre = (j % 4 == static_cast<std::size_t>(c)) ? sep : 0.0;
            x(i, j) = centre + rng.normal();
        }
    }
    return {x, y};
}

inline bagstack::Recording random_recording(std::size_t n, double rate, std::uint64_t seed,
                                            const std::string& subject = "R") {
    bagstack::Rng rng(seed);
    bagstack::Recording r;
    r.subject_id = subject;
    r.sample_rate_hz = rate;
    for (std::size_t i = 0; i < n; ++i) {
        r.samples.push_back({static_cast<std::int64_t>(i), rng.normal(), rng.normal() * 0.5, rng.uniform(-2.0, 2.0)});
        r.labels.push_back(static_cast<bagstack::EventClass>(rng.below(4)));
        r.valid.push_back(rng.uniform() > 0.1);
    }
    return r;
}

/// Small synthetic dataset: `subjects` x `seconds` at 32 Hz.
inline bagstack::SyntheticDataset small_synth(int subjects, double seconds, std::uint64_t seed) {
    bagstack::SynthConfig cfg;
    cfg.n_subjects = subjects;
    cfg.seconds_per_subject = seconds;
    cfg.sample_rate_hz = 32.0;
    cfg.episode_rate_per_minute = 4.0;
    return bagstack::generate_dataset(cfg, seed);
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("bagstack_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace fixture
