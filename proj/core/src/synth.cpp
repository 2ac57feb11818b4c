#include <bagstack/error.hpp>
#include <bagstack/random.hpp>
#include <bagstack/synth.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>

namespace bagstack {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Baseline gait amplitudes per axis (V, ML, AP) and offsets, in g.
constexpr std::array<double, 3> kBaseAmplitude{0.6, 0.3, 0.4};
constexpr std::array<double, 3> kBaseOffset{-1.0, 0.0, 0.2};

// Per-class regimes.
constexpr double kHesitationDamping = 0.1;
constexpr double kTremorAmplitude = 0.15;
constexpr double kTurnGain = 2.0;
constexpr double kTurnDriftHz = 0.3;
constexpr double kWalkingGain = 1.5;

std::string_view class_name(EventClass c) {
    switch (c) {
        case EventClass::start_hesitation: return "start_hesitation";
        case EventClass::turn: return "turn";
        case EventClass::walking: return "walking";
        case EventClass::none: return "none";
    }
    return "none";
}

EventClass pick_class(Rng& rng, const std::array<double, 3>& mix) {
    const double total = mix[0] + mix[1] + mix[2];
    double u = rng.uniform() * total;
    for (std::size_t c = 0; c < 3; ++c) {
        if (u < mix[c]) return static_cast<EventClass>(c + 1);
        u -= mix[c];
    }
    // Rounding fallthrough: last class with positive weight.
    for (std::size_t c = 3; c-- > 0;) {
        if (mix[c] > 0.0) return static_cast<EventClass>(c + 1);
    }
    return EventClass::walking;
}

}  // namespace

void SynthConfig::check() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw Error(ErrorKind::config, what);
    };
    require(n_subjects >= 1, "synth.n_subjects must be positive");
    require(seconds_per_subject > 0.0, "synth.seconds_per_subject must be positive");
    require(sample_rate_hz > 0.0, "synth.sample_rate_hz must be positive");
    require(episode_rate_per_minute >= 0.0, "synth.episode_rate_per_minute must be non-negative");
    require(class_mix[0] >= 0.0 && class_mix[1] >= 0.0 && class_mix[2] >= 0.0, "synth.class_mix weights must be >= 0");
    require(class_mix[0] + class_mix[1] + class_mix[2] > 0.0, "synth.class_mix must have a positive weight");
    require(noise_sigma >= 0.0, "synth.noise_sigma must be non-negative");
    require(invalid_fraction >= 0.0 && invalid_fraction < 1.0, "synth.invalid_fraction must be in [0, 1)");
    require(gait_freq_min_hz > 0.0 && gait_freq_max_hz >= gait_freq_min_hz, "synth gait frequency range invalid");
    require(episode_min_seconds > 0.0 && episode_max_seconds >= episode_min_seconds,
            "synth episode duration range invalid");
    require(episode_max_seconds <= seconds_per_subject, "episodes can be longer than the recording");
}

double SynthConfig::expected_event_fraction() const {
    return episode_rate_per_minute * 0.5 * (episode_min_seconds + episode_max_seconds) / 60.0;
}

SyntheticDataset generate_dataset(const SynthConfig& config, std::uint64_t seed) {
    config.check();
    SyntheticDataset out;
    const auto n = static_cast<std::size_t>(std::llround(config.seconds_per_subject * config.sample_rate_hz));
    const double fs = config.sample_rate_hz;
    const double mean_duration = 0.5 * (config.episode_min_seconds + config.episode_max_seconds);

    for (int s = 0; s < config.n_subjects; ++s) {
        Rng rng(derive_seed({seed, static_cast<std::uint64_t>(s), 0x5e7}));
        char id[16];
        std::snprintf(id, sizeof id, "S%03d", s);

        const double gait_hz = rng.uniform(config.gait_freq_min_hz, config.gait_freq_max_hz);
        const double scale = rng.uniform(0.7, 1.3);
        std::array<double, 3> phase{}, offset{};
        for (std::size_t a = 0; a < 3; ++a) {
            phase[a] = rng.uniform(0.0, kTwoPi);
            offset[a] = kBaseOffset[a] + 0.05 * rng.normal();
        }

        // Episodes: alternating gap / episode so the labelled fraction matches
        // rate * mean_duration / 60 in expectation.
        std::vector<Episode> episodes;
        if (config.episode_rate_per_minute > 0.0) {
            const double mean_gap = std::max(60.0 / config.episode_rate_per_minute - mean_duration, 1.0);
            double t = rng.exponential(mean_gap);
            while (true) {
                const double dur = rng.uniform(config.episode_min_seconds, config.episode_max_seconds);
                const auto cls = pick_class(rng, config.class_mix);
                const auto start = static_cast<std::size_t>(std::llround(t * fs));
                const auto len = static_cast<std::size_t>(std::llround(dur * fs));
                if (len == 0 || start + len > n) break;
                episodes.push_back({cls, start, start + len - 1});
                t += dur + rng.exponential(mean_gap);
            }
        }

        Recording rec;
        rec.subject_id = id;
        rec.sample_rate_hz = fs;
        rec.samples.resize(n);
        rec.labels.assign(n, EventClass::none);
        rec.valid.assign(n, true);
        for (const auto& e : episodes) {
            for (std::size_t i = e.start_index; i <= e.end_index; ++i) rec.labels[i] = e.cls;
        }

        std::size_t next_episode = 0;
        double tremor_hz = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / fs;
            while (next_episode < episodes.size() && episodes[next_episode].end_index < i) ++next_episode;
            EventClass regime = EventClass::none;
            double t_in = 0.0;
            if (next_episode < episodes.size() && episodes[next_episode].start_index <= i) {
                const auto& e = episodes[next_episode];
                regime = e.cls;
                t_in = static_cast<double>(i - e.start_index) / fs;
                if (i == e.start_index) tremor_hz = rng.uniform(3.0, 8.0);
            }

            std::array<double, 3> amp{}, ph = phase;
            for (std::size_t a = 0; a < 3; ++a) amp[a] = kBaseAmplitude[a] * scale;
            double tremor = 0.0;
            switch (regime) {
                case EventClass::start_hesitation:
                    for (auto& v : amp) v *= kHesitationDamping;
                    tremor = kTremorAmplitude * std::sin(kTwoPi * tremor_hz * t_in);
                    break;
                case EventClass::turn:
                    amp[1] *= kTurnGain;
                    ph[1] += kTwoPi * kTurnDriftHz * t_in;
                    break;
                case EventClass::walking:
                    amp[0] *= kWalkingGain;
                    break;
                case EventClass::none: break;
            }

            double acc[3];
            for (std::size_t a = 0; a < 3; ++a) {
                acc[a] = offset[a] + amp[a] * std::sin(kTwoPi * gait_hz * t + ph[a]) + config.noise_sigma * rng.normal();
            }
            acc[2] += tremor;
            rec.samples[i] = {static_cast<std::int64_t>(i), acc[0], acc[1], acc[2]};
        }

        const auto n_invalid = static_cast<std::size_t>(std::llround(config.invalid_fraction * static_cast<double>(n)));
        if (n_invalid > 0) {
            std::vector<std::size_t> perm(n);
            for (std::size_t i = 0; i < n; ++i) perm[i] = i;
            for (std::size_t i = 0; i < n_invalid; ++i) {
                std::swap(perm[i], perm[i + rng.below(n - i)]);
                rec.valid[perm[i]] = false;
            }
        }

        out.episodes[rec.subject_id] = std::move(episodes);
        out.dataset.recordings.push_back(std::move(rec));
    }
    return out;
}

void write_episodes_csv(std::ostream& out, const std::vector<Episode>& episodes) {
    out << "class,start_index,end_index\n";
    for (const auto& e : episodes) out << class_name(e.cls) << ',' << e.start_index << ',' << e.end_index << '\n';
}

std::vector<Episode> parse_episodes_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::empty_input, "empty episodes file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "class,start_index,end_index") throw Error(ErrorKind::schema, "bad episodes header '" + line + "'");
    std::vector<Episode> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) {
            throw Error(ErrorKind::schema, "episodes row " + std::to_string(row) + ": expected 3 columns");
        }
        Episode e;
        const auto name = std::string_view(line).substr(0, c1);
        if (name == "start_hesitation") e.cls = EventClass::start_hesitation;
        else if (name == "turn") e.cls = EventClass::turn;
        else if (name == "walking") e.cls = EventClass::walking;
        else throw Error(ErrorKind::parse, "episodes row " + std::to_string(row) + ": unknown class");
        auto parse = [&](std::size_t from, std::size_t to, std::size_t& v) {
            auto [p, ec] = std::from_chars(line.data() + from, line.data() + to, v);
            if (ec != std::errc{} || p != line.data() + to) {
                throw Error(ErrorKind::parse, "episodes row " + std::to_string(row) + ": bad index");
            }
        };
        parse(c1 + 1, c2, e.start_index);
        parse(c2 + 1, line.size(), e.end_index);
        out.push_back(e);
    }
    return out;
}

void write_synthetic_dir(const std::filesystem::path& dir, const SyntheticDataset& data) {
    write_dataset_dir(dir, data.dataset);
    for (const auto& [subject, episodes] : data.episodes) {
        const auto path = dir / (subject + ".episodes.csv");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
        write_episodes_csv(out, episodes);
    }
}

}  // namespace bagstack
