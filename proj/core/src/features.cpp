#include <bagstack/error.hpp>
#include <bagstack/features.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <numeric>

namespace bagstack {

std::string_view to_string(Statistic s) {
    switch (s) {
        case Statistic::mean: return "mean";
        case Statistic::median: return "median";
        case Statistic::min: return "min";
        case Statistic::max: return "max";
        case Statistic::std: return "std";
    }
    return "?";
}

Statistic parse_statistic(std::string_view name) {
    for (auto s : {Statistic::mean, Statistic::median, Statistic::min, Statistic::max, Statistic::std}) {
        if (to_string(s) == name) return s;
    }
    throw Error(ErrorKind::config, "unknown statistic '" + std::string(name) + "'");
}

void FeatureConfig::check() const {
    if (window_seconds.empty()) throw Error(ErrorKind::config, "window_seconds must be non-empty");
    if (statistics.empty()) throw Error(ErrorKind::config, "statistics must be non-empty");
    for (std::size_t i = 0; i < window_seconds.size(); ++i) {
        if (!(window_seconds[i] > 0.0) || !std::isfinite(window_seconds[i])) {
            throw Error(ErrorKind::config, "window lengths must be positive");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (window_seconds[j] == window_seconds[i]) throw Error(ErrorKind::config, "duplicate window length");
        }
    }
    for (std::size_t i = 0; i < statistics.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (statistics[j] == statistics[i]) throw Error(ErrorKind::config, "duplicate statistic");
        }
    }
}

std::vector<std::string> FeatureConfig::column_names() const {
    static constexpr const char* kAxes[] = {"V", "ML", "AP"};
    std::vector<std::string> names;
    names.reserve(n_features());
    for (double w : window_seconds) {
        char buf[32];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, w);
        const std::string ws(buf, ptr);
        for (const char* axis : kAxes) {
            for (auto s : statistics) names.push_back("w" + ws + "s_" + axis + "_" + std::string(to_string(s)));
        }
    }
    return names;
}

double WindowStats::get(Statistic s) const {
    switch (s) {
        case Statistic::mean: return mean;
        case Statistic::median: return median;
        case Statistic::min: return min;
        case Statistic::max: return max;
        case Statistic::std: return std;
    }
    return 0.0;
}

WindowStats compute_window_stats(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorKind::empty_input, "empty window");
    const auto n = static_cast<double>(values.size());
    WindowStats st;
    double sum = 0.0;
    for (double v : values) sum += v;
    st.mean = sum / n;
    double ss = 0.0;
    for (double v : values) ss += (v - st.mean) * (v - st.mean);
    st.std = std::sqrt(ss / n);

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    st.min = sorted.front();
    st.max = sorted.back();
    const std::size_t m = sorted.size();
    st.median = (m % 2 == 1) ? sorted[m / 2] : (sorted[m / 2 - 1] + sorted[m / 2]) / 2.0;
    // Floating-point rounding can push the mean a hair outside [min, max].
    st.mean = std::clamp(st.mean, st.min, st.max);
    return st;
}

std::size_t window_length(double seconds, double sample_rate_hz) {
    const double w = std::round(seconds * sample_rate_hz);
    if (!(w >= 1.0)) {
        throw Error(ErrorKind::config, "window of " + std::to_string(seconds) + " s is shorter than one sample at " +
                                           std::to_string(sample_rate_hz) + " Hz");
    }
    return static_cast<std::size_t>(w);
}

namespace {

// Windows at or below this length are computed directly with the two-pass formulas.
constexpr std::size_t kDirectMomentWindow = 64;

/// Order-statistic index over value ranks (Fenwick tree).
class RankCounter {
public:
    explicit RankCounter(std::size_t n) : tree_(n + 1, 0) {
        step_ = 1;
        while (step_ * 2 <= n) step_ *= 2;
    }

    void add(std::size_t rank, int delta) {
        for (std::size_t i = rank + 1; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
    }

    /// 0-based rank of the k-th smallest element currently present.
    std::size_t kth(std::size_t k) const {
        std::size_t pos = 0;
        auto remaining = static_cast<int>(k) + 1;
        for (std::size_t step = step_; step > 0; step >>= 1) {
            if (pos + step < tree_.size() && tree_[pos + step] < remaining) {
                pos += step;
                remaining -= tree_[pos];
            }
        }
        return pos;
    }

private:
    std::vector<int> tree_;
    std::size_t step_;
};

struct AxisWindowStats {
    std::vector<double> mean, median, min, max, std;
};

AxisWindowStats rolling_stats(const std::vector<double>& x, std::size_t w) {
    const std::size_t n = x.size();
    AxisWindowStats out;
    out.mean.resize(n);
    out.median.resize(n);
    out.min.resize(n);
    out.max.resize(n);
    out.std.resize(n);

    // Moments: prefix sums in extended precision for long windows.
    std::vector<long double> s1(n + 1, 0.0L), s2(n + 1, 0.0L);
    for (std::size_t i = 0; i < n; ++i) {
        s1[i + 1] = s1[i] + x[i];
        s2[i + 1] = s2[i] + static_cast<long double>(x[i]) * x[i];
    }

    // Ranks for the running median.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<std::size_t> rank(n);
    for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;
    RankCounter counter(n);

    std::deque<std::size_t> min_q, max_q;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = (i + 1 >= w) ? i + 1 - w : 0;
        const std::size_t m = i - lo + 1;

        counter.add(rank[i], +1);
        if (i >= w) counter.add(rank[i - w], -1);

        while (!min_q.empty() && x[min_q.back()] >= x[i]) min_q.pop_back();
        min_q.push_back(i);
        while (min_q.front() < lo) min_q.pop_front();
        while (!max_q.empty() && x[max_q.back()] <= x[i]) max_q.pop_back();
        max_q.push_back(i);
        while (max_q.front() < lo) max_q.pop_front();
        out.min[i] = x[min_q.front()];
        out.max[i] = x[max_q.front()];

        if (m % 2 == 1) {
            out.median[i] = x[order[counter.kth(m / 2)]];
        } else {
            out.median[i] = (x[order[counter.kth(m / 2 - 1)]] + x[order[counter.kth(m / 2)]]) / 2.0;
        }

        double mean, sd;
        if (m <= kDirectMomentWindow) {
            double sum = 0.0;
            for (std::size_t j = lo; j <= i; ++j) sum += x[j];
            mean = sum / static_cast<double>(m);
            double ss = 0.0;
            for (std::size_t j = lo; j <= i; ++j) ss += (x[j] - mean) * (x[j] - mean);
            sd = std::sqrt(ss / static_cast<double>(m));
        } else {
            const long double lm = static_cast<long double>(m);
            const long double mu = (s1[i + 1] - s1[lo]) / lm;
            const long double var = (s2[i + 1] - s2[lo]) / lm - mu * mu;
            mean = static_cast<double>(mu);
            sd = var > 0.0L ? static_cast<double>(std::sqrt(var)) : 0.0;
        }
        out.mean[i] = std::clamp(mean, out.min[i], out.max[i]);
        out.std[i] = sd;
    }
    return out;
}

}  // namespace

FeatureMatrix extract_window_features(const Recording& recording, const FeatureConfig& config) {
    config.check();
    if (recording.samples.empty()) throw Error(ErrorKind::empty_input, "recording has no samples");
    const std::size_t n = recording.size();
    const std::size_t n_stats = config.statistics.size();

    std::vector<std::size_t> windows;
    for (double s : config.window_seconds) windows.push_back(window_length(s, recording.sample_rate_hz));

    std::vector<double> axes[3];
    for (auto& a : axes) a.reserve(n);
    for (const auto& s : recording.samples) {
        axes[0].push_back(s.acc_v);
        axes[1].push_back(s.acc_ml);
        axes[2].push_back(s.acc_ap);
    }

    FeatureMatrix fm;
    fm.column_names = config.column_names();
    fm.values = Matrix(n, config.n_features());
    for (std::size_t wi = 0; wi < windows.size(); ++wi) {
        for (std::size_t axis = 0; axis < 3; ++axis) {
            const auto st = rolling_stats(axes[axis], windows[wi]);
            const std::size_t base = (wi * 3 + axis) * n_stats;
            for (std::size_t si = 0; si < n_stats; ++si) {
                const std::vector<double>* col = nullptr;
                switch (config.statistics[si]) {
                    case Statistic::mean: col = &st.mean; break;
                    case Statistic::median: col = &st.median; break;
                    case Statistic::min: col = &st.min; break;
                    case Statistic::max: col = &st.max; break;
                    case Statistic::std: col = &st.std; break;
                }
                for (std::size_t i = 0; i < n; ++i) fm.values(i, base + si) = (*col)[i];
            }
        }
    }
    return fm;
}

std::pair<FeatureMatrix, TargetVector> to_supervised(const Dataset& dataset, const FeatureConfig& config) {
    config.check();
    if (dataset.recordings.empty() || dataset.total_samples() == 0) {
        throw Error(ErrorKind::empty_input, "dataset has no samples");
    }
    FeatureMatrix fm;
    fm.column_names = config.column_names();
    fm.values = Matrix(dataset.total_samples(), config.n_features());
    TargetVector tv;
    tv.classes.reserve(dataset.total_samples());
    tv.valid.reserve(dataset.total_samples());

    std::size_t offset = 0;
    for (const auto& rec : dataset.recordings) {
        rec.check();
        const auto part = extract_window_features(rec, config);
        const auto src = part.values.values();
        std::copy(src.begin(), src.end(), fm.values.values().begin() + static_cast<std::ptrdiff_t>(offset * fm.n_cols()));
        for (std::size_t i = 0; i < rec.size(); ++i) {
            tv.classes.push_back(static_cast<int>(rec.labels[i]));
            tv.valid.push_back(rec.valid[i]);
        }
        offset += rec.size();
    }
    return {std::move(fm), std::move(tv)};
}

}  // namespace bagstack
