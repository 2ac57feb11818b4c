#include <bagstack/error.hpp>
#include <bagstack/experiment.hpp>
#include <bagstack/random.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace bagstack {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::strchr(" \t\r", s.front())) s.remove_prefix(1);
    while (!s.empty() && std::strchr(" \t\r", s.back())) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view s) {
    std::vector<std::string_view> out;
    while (true) {
        const auto comma = s.find(',');
        out.push_back(trim(s.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
    try {
        if constexpr (std::is_floating_point_v<T>) {
            return parse_double_strict(value);
        } else {
            T v{};
            auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (ec != std::errc{} || ptr != value.data() + value.size() || value.empty()) throw Error(ErrorKind::parse, "");
            return v;
        }
    } catch (const Error&) {
        throw Error(ErrorKind::config, "bad value '" + std::string(value) + "' for '" + std::string(key) + "'");
    }
}

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::config, what);
}

}  // namespace

std::string_view to_string(Method m) {
    switch (m) {
        case Method::gbm: return "gbm";
        case Method::bagging: return "bagging";
        case Method::stacking: return "stacking";
        case Method::bagstacking: return "bagstacking";
    }
    return "?";
}

Method parse_method(std::string_view name) {
    for (auto m : kAllMethods) {
        if (to_string(m) == name) return m;
    }
    throw Error(ErrorKind::config, "unknown method '" + std::string(name) + "'");
}

void ExperimentConfig::check() const {
    base.check();
    meta.check();
    features.check();
    synth.check();
    require(k >= 2, "k must be >= 2");
    require(folds >= 2, "folds must be >= 2");
    require(train_stride >= 1 && eval_stride >= 1, "strides must be >= 1");
    require(sample_rate_hz > 0.0, "data.sample_rate_hz must be positive");
    require(bench_seeds >= 1, "benchmark.seeds must be >= 1");
    require(holdout_fraction > 0.0 && holdout_fraction < 1.0, "benchmark.holdout_fraction must be in (0, 1)");
    require(threads >= 1, "threads must be >= 1");
}

void set_config_field(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
    auto starts = [&](std::string_view prefix) { return key.substr(0, prefix.size()) == prefix; };
    if (key == "method") cfg.method = parse_method(value);
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "k") cfg.k = parse_number<std::size_t>(key, value);
    else if (key == "folds") cfg.folds = parse_number<int>(key, value);
    else if (key == "mode") cfg.mode = parse_meta_mode(value);
    else if (key == "threads") cfg.threads = parse_number<unsigned>(key, value);
    else if (starts("base.")) set_spec_field(cfg.base, key.substr(5), value);
    else if (starts("meta.")) set_spec_field(cfg.meta, key.substr(5), value);
    else if (key == "features.window_seconds") {
        cfg.features.window_seconds.clear();
        for (auto w : split_commas(value)) cfg.features.window_seconds.push_back(parse_number<double>(key, w));
    } else if (key == "features.statistics") {
        cfg.features.statistics.clear();
        for (auto s : split_commas(value)) cfg.features.statistics.push_back(parse_statistic(s));
    } else if (key == "data.sample_rate_hz") cfg.sample_rate_hz = parse_number<double>(key, value);
    else if (key == "train.stride") cfg.train_stride = parse_number<std::size_t>(key, value);
    else if (key == "eval.stride") cfg.eval_stride = parse_number<std::size_t>(key, value);
    else if (key == "synth.n_subjects") cfg.synth.n_subjects = parse_number<int>(key, value);
    else if (key == "synth.seconds_per_subject") cfg.synth.seconds_per_subject = parse_number<double>(key, value);
    else if (key == "synth.sample_rate_hz") cfg.synth.sample_rate_hz = parse_number<double>(key, value);
    else if (key == "synth.episode_rate_per_minute") cfg.synth.episode_rate_per_minute = parse_number<double>(key, value);
    else if (key == "synth.class_mix") {
        const auto parts = split_commas(value);
        require(parts.size() == 3, "synth.class_mix needs 3 weights");
        for (std::size_t i = 0; i < 3; ++i) cfg.synth.class_mix[i] = parse_number<double>(key, parts[i]);
    } else if (key == "synth.noise_sigma") cfg.synth.noise_sigma = parse_number<double>(key, value);
    else if (key == "synth.invalid_fraction") cfg.synth.invalid_fraction = parse_number<double>(key, value);
    else if (key == "synth.gait_freq_min_hz") cfg.synth.gait_freq_min_hz = parse_number<double>(key, value);
    else if (key == "synth.gait_freq_max_hz") cfg.synth.gait_freq_max_hz = parse_number<double>(key, value);
    else if (key == "synth.episode_min_seconds") cfg.synth.episode_min_seconds = parse_number<double>(key, value);
    else if (key == "synth.episode_max_seconds") cfg.synth.episode_max_seconds = parse_number<double>(key, value);
    else if (key == "benchmark.seeds") cfg.bench_seeds = parse_number<std::size_t>(key, value);
    else if (key == "benchmark.first_seed") cfg.bench_first_seed = parse_number<std::uint64_t>(key, value);
    else if (key == "benchmark.holdout_fraction") cfg.holdout_fraction = parse_number<double>(key, value);
    else if (key == "benchmark.data_dir") cfg.bench_data_dir = std::string(value);
    else throw Error(ErrorKind::config, "unknown config key '" + std::string(key) + "'");
}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view s = line;
        if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorKind::config, "line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        try {
            set_config_field(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
        } catch (const Error& e) {
            throw Error(ErrorKind::config, "line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    cfg.check();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::config, "cannot open config " + path.string());
    return parse_config(in);
}

std::string config_reference() {
    const ExperimentConfig d;
    std::ostringstream out;
    out << "method = " << to_string(d.method) << "        # gbm | bagging | stacking | bagstacking\n"
        << "seed = " << d.seed << '\n'
        << "k = " << d.k << "                    # bootstrap sets / base models\n"
        << "folds = " << d.folds << "                # stacking folds\n"
        << "mode = " << to_string(d.mode) << "     # paper_literal | out_of_fold\n"
        << "threads = " << d.threads << '\n';
    for (const auto& [k, v] : spec_fields(d.base)) out << "base." << k << " = " << v << '\n';
    for (const auto& [k, v] : spec_fields(d.meta)) out << "meta." << k << " = " << v << '\n';
    out << "features.window_seconds = 50,5\n"
        << "features.statistics = mean,median,min,max,std\n"
        << "data.sample_rate_hz = " << format_double(d.sample_rate_hz) << '\n'
        << "train.stride = " << d.train_stride << '\n'
        << "eval.stride = " << d.eval_stride << '\n'
        << "synth.n_subjects = " << d.synth.n_subjects << '\n'
        << "synth.seconds_per_subject = " << format_double(d.synth.seconds_per_subject) << '\n'
        << "synth.sample_rate_hz = " << format_double(d.synth.sample_rate_hz) << '\n'
        << "synth.episode_rate_per_minute = " << format_double(d.synth.episode_rate_per_minute) << '\n'
        << "synth.class_mix = 1,1,1\n"
        << "synth.noise_sigma = " << format_double(d.synth.noise_sigma) << '\n'
        << "synth.invalid_fraction = " << format_double(d.synth.invalid_fraction) << '\n'
        << "synth.gait_freq_min_hz = " << format_double(d.synth.gait_freq_min_hz) << '\n'
        << "synth.gait_freq_max_hz = " << format_double(d.synth.gait_freq_max_hz) << '\n'
        << "synth.episode_min_seconds = " << format_double(d.synth.episode_min_seconds) << '\n'
        << "synth.episode_max_seconds = " << format_double(d.synth.episode_max_seconds) << '\n'
        << "benchmark.seeds = " << d.bench_seeds << '\n'
        << "benchmark.first_seed = " << d.bench_first_seed << '\n'
        << "benchmark.holdout_fraction = " << format_double(d.holdout_fraction) << '\n'
        << "benchmark.data_dir =              # empty: generate synthetic data per seed\n";
    return out.str();
}

std::pair<FeatureMatrix, TargetVector> take_stride(const FeatureMatrix& x, const TargetVector& y, std::size_t stride) {
    if (stride <= 1) return {x, y};
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < x.n_rows(); i += stride) rows.push_back(i);
    FeatureMatrix fx;
    fx.column_names = x.column_names;
    fx.values = x.values.select_rows(rows);
    TargetVector ty;
    for (auto r : rows) {
        ty.classes.push_back(y.classes[r]);
        ty.valid.push_back(y.valid[r]);
    }
    return {std::move(fx), std::move(ty)};
}

ModelBundle::Model fit_method(Method method, const ExperimentConfig& cfg, const Matrix& x, std::span<const int> y,
                              std::uint64_t seed) {
    const EnsembleOptions opts{cfg.threads};
    switch (method) {
        case Method::gbm: return fit_model(cfg.base, x, y, member_seed(seed, 0));
        case Method::bagging: return fit_bagging(cfg.base, x, y, cfg.k, seed, opts);
        case Method::stacking: {
            const std::vector<LearnerSpec> bases(cfg.k, cfg.base);
            return fit_stacking(bases, cfg.meta, x, y, cfg.folds, seed, opts);
        }
        case Method::bagstacking: return fit_bagstacking(cfg.base, cfg.meta, x, y, cfg.k, seed, cfg.mode, opts);
    }
    throw Error(ErrorKind::config, "unknown method");
}

namespace {

TrainSummary train_on_matrices(const ExperimentConfig& cfg, const FeatureMatrix& x_full, const TargetVector& y_full) {
    const auto [x, y] = take_stride(x_full, y_full, cfg.train_stride);
    const auto start = Clock::now();
    TrainSummary summary;
    summary.bundle.features = cfg.features;
    summary.bundle.column_names = x.column_names;
    summary.bundle.model = fit_method(cfg.method, cfg, x.values, y.classes, cfg.seed);
    summary.wall_time_s = seconds_since(start);
    summary.rows = x.n_rows();
    summary.features = x.n_cols();
    return summary;
}

}  // namespace

TrainSummary train_pipeline(const ExperimentConfig& cfg, const Dataset& train) {
    cfg.check();
    const auto [x, y] = to_supervised(train, cfg.features);
    return train_on_matrices(cfg, x, y);
}

MapReport evaluate_pipeline(const ModelBundle& bundle, const Dataset& data, std::size_t eval_stride, unsigned threads) {
    const auto [x_full, y_full] = to_supervised(data, bundle.features);
    const auto [x, y] = take_stride(x_full, y_full, eval_stride);
    return map_score(bundle.predict(x.values, EnsembleOptions{threads}), y);
}

// --- benchmark -----------------------------------------------------------------------

std::uint64_t content_hash(const FeatureMatrix& x, const TargetVector& y) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&](const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    const auto v = x.values.values();
    feed(v.data(), v.size() * sizeof(double));
    feed(y.classes.data(), y.classes.size() * sizeof(int));
    for (bool b : y.valid) {
        const unsigned char c = b ? 1 : 0;
        feed(&c, 1);
    }
    return h;
}

std::vector<BenchmarkRow> run_benchmark_seed(const ExperimentConfig& cfg, std::uint64_t seed, std::uint64_t* data_hash) {
    Dataset data = cfg.bench_data_dir.empty() ? generate_dataset(cfg.synth, seed).dataset
                                              : load_dataset_dir(cfg.bench_data_dir, cfg.sample_rate_hz);
    const auto [train, valid] = split_by_subject(data, cfg.holdout_fraction, seed);
    const auto [xt_full, yt_full] = to_supervised(train, cfg.features);
    const auto [xv_full, yv_full] = to_supervised(valid, cfg.features);
    const auto [xt, yt] = take_stride(xt_full, yt_full, cfg.train_stride);
    const auto [xv, yv] = take_stride(xv_full, yv_full, cfg.eval_stride);
    if (data_hash) *data_hash = content_hash(xt, yt) ^ mix64(content_hash(xv, yv));

    std::vector<int> valid_classes;
    std::vector<std::size_t> valid_rows;
    for (std::size_t i = 0; i < yv.size(); ++i) {
        if (yv.valid[i]) {
            valid_rows.push_back(i);
            valid_classes.push_back(yv.classes[i]);
        }
    }

    std::vector<BenchmarkRow> rows;
    for (auto method : kAllMethods) {
        ModelBundle bundle;
        bundle.features = cfg.features;
        bundle.column_names = xt.column_names;
        const auto start = Clock::now();
        bundle.model = fit_method(method, cfg, xt.values, yt.classes, seed);
        const auto proba = bundle.predict(xv.values, EnsembleOptions{cfg.threads});
        BenchmarkRow row;
        row.wall_time_s = seconds_since(start);
        row.method = method;
        row.seed = seed;
        row.report = map_score(proba, yv);
        row.cross_entropy = cross_entropy(proba.select_rows(valid_rows), valid_classes);
        rows.push_back(row);
    }
    return rows;
}

BenchmarkResult run_benchmark(const ExperimentConfig& cfg, unsigned parallel, std::ostream* log) {
    cfg.check();
    const std::size_t n = cfg.bench_seeds;
    std::vector<std::vector<BenchmarkRow>> per_seed(n);
    std::vector<std::uint64_t> hashes(n);
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    std::exception_ptr failure;

    auto worker = [&] {
        while (true) {
            const auto i = next.fetch_add(1);
            if (i >= n) return;
            const std::uint64_t seed = cfg.bench_first_seed + i;
            try {
                per_seed[i] = run_benchmark_seed(cfg, seed, &hashes[i]);
            } catch (...) {
                std::lock_guard lock(log_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
            if (log) {
                std::lock_guard lock(log_mutex);
                *log << "seed " << seed << " data_hash=" << std::hex << hashes[i] << std::dec;
                for (const auto& r : per_seed[i]) *log << ' ' << to_string(r.method) << '=' << r.report.map;
                *log << '\n' << std::flush;
            }
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(parallel, static_cast<unsigned>(n)));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    BenchmarkResult result;
    for (std::size_t i = 0; i < n; ++i) {
        result.rows.insert(result.rows.end(), per_seed[i].begin(), per_seed[i].end());
        result.data_hashes.emplace_back(cfg.bench_first_seed + i, hashes[i]);
    }
    return result;
}

std::vector<BenchmarkAggregate> BenchmarkResult::aggregates() const {
    std::vector<BenchmarkAggregate> out;
    for (auto method : kAllMethods) {
        std::vector<const BenchmarkRow*> mine;
        for (const auto& r : rows) {
            if (r.method == method) mine.push_back(&r);
        }
        if (mine.empty()) continue;
        BenchmarkAggregate agg;
        agg.method = method;
        const double n = static_cast<double>(mine.size());
        for (const auto* r : mine) {
            agg.map_mean += r->report.map / n;
            agg.wall_mean += r->wall_time_s / n;
            agg.ce_mean += r->cross_entropy / n;
        }
        for (const auto* r : mine) {
            agg.map_std += (r->report.map - agg.map_mean) * (r->report.map - agg.map_mean);
            agg.wall_std += (r->wall_time_s - agg.wall_mean) * (r->wall_time_s - agg.wall_mean);
        }
        // sample std over seeds; zero for a single seed
        agg.map_std = mine.size() > 1 ? std::sqrt(agg.map_std / (n - 1)) : 0.0;
        agg.wall_std = mine.size() > 1 ? std::sqrt(agg.wall_std / (n - 1)) : 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
            double sum = 0.0;
            int count = 0;
            for (const auto* r : mine) {
                if (r->report.per_class_ap[c]) {
                    sum += *r->report.per_class_ap[c];
                    ++count;
                }
            }
            if (count > 0) agg.ap_mean[c] = sum / count;
        }
        out.push_back(agg);
    }
    return out;
}

void write_benchmark_csv(std::ostream& out, const BenchmarkResult& result) {
    out << "method,seed,map,ap_sh,ap_turn,ap_walk,wall_time_s\n";
    for (const auto& r : result.rows) {
        out << to_string(r.method) << ',' << r.seed << ',' << r.report.to_csv_row() << ','
            << format_double(r.wall_time_s) << '\n';
    }
    for (const auto& a : result.aggregates()) {
        out << to_string(a.method) << ",mean," << format_double(a.map_mean);
        for (const auto& ap : a.ap_mean) out << ',' << (ap ? format_double(*ap) : "");
        out << ',' << format_double(a.wall_mean) << '\n';
        out << to_string(a.method) << ",std," << format_double(a.map_std) << ",,,," << format_double(a.wall_std)
            << '\n';
    }
}

void write_features_csv(std::ostream& out, const FeatureMatrix& x) {
    for (std::size_t c = 0; c < x.column_names.size(); ++c) out << (c ? "," : "") << x.column_names[c];
    out << '\n';
    std::string line;
    for (std::size_t r = 0; r < x.n_rows(); ++r) {
        line.clear();
        for (std::size_t c = 0; c < x.n_cols(); ++c) {
            if (c) line += ',';
            line += format_double(x.values(r, c));
        }
        out << line << '\n';
    }
}

// --- commands -----------------------------------------------------------------------

namespace {

/// Loads the config (defaults if no path) and applies --seed / --parallel overrides.
ExperimentConfig command_config(const CommandOptions& opts) {
    ExperimentConfig cfg;
    if (!opts.config_path.empty()) cfg = load_config(opts.config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    cfg.threads = std::max(1u, opts.parallel);
    cfg.check();
    return cfg;
}

int report_error(std::ostream& err, const std::exception& e) {
    err << "error: " << e.what() << '\n';
    if (const auto* be = dynamic_cast<const Error*>(&e); be && be->kind() == ErrorKind::config) return 2;
    return 1;
}

void dump_features(const std::string& path, const FeatureMatrix& x) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path);
    write_features_csv(out, x);
}

template <class Body>
int run_command(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const Error& e) {
        return report_error(err, e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int cmd_synth(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
    return run_command(err, [&] {
        const auto cfg = command_config(opts);
        if (opts.out.empty()) throw Error(ErrorKind::config, "synth requires --out <dir>");
        const auto data = generate_dataset(cfg.synth, cfg.seed);
        write_synthetic_dir(opts.out, data);
        log << "wrote " << data.dataset.recordings.size() << " recordings (" << data.dataset.total_samples()
            << " samples) to " << opts.out << '\n';
        return 0;
    });
}

int cmd_train(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
    return run_command(err, [&] {
        const auto cfg = command_config(opts);
        if (opts.data_dir.empty() || opts.out.empty()) {
            throw Error(ErrorKind::config, "train requires --data-dir and --out");
        }
        const auto data = load_dataset_dir(opts.data_dir, cfg.sample_rate_hz);
        const auto [x, y] = to_supervised(data, cfg.features);
        dump_features(opts.dump_features, x);
        const auto summary = train_on_matrices(cfg, x, y);
        save_model(opts.out, summary.bundle);
        log << "method=" << to_string(cfg.method) << " rows=" << summary.rows << " features=" << summary.features
            << " wall_time_s=" << format_double(summary.wall_time_s) << " model=" << opts.out << '\n';
        return 0;
    });
}

int cmd_predict(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
    return run_command(err, [&] {
        const auto cfg = command_config(opts);
        if (opts.model_path.empty() || opts.data_dir.empty() || opts.out.empty()) {
            throw Error(ErrorKind::config, "predict requires --model, --data-dir and --out");
        }
        const auto bundle = load_model(opts.model_path);
        const auto data = load_dataset_dir(opts.data_dir, cfg.sample_rate_hz);
        const auto [x, y] = to_supervised(data, bundle.features);
        dump_features(opts.dump_features, x);
        const auto proba = bundle.predict(x.values, EnsembleOptions{cfg.threads});

        std::ofstream out(opts.out, std::ios::binary);
        if (!out) throw Error(ErrorKind::io, "cannot write " + opts.out);
        out << "subject_id,recording_index,Time,p_none,p_start_hesitation,p_turn,p_walking\n";
        std::size_t row = 0;
        for (const auto& rec : data.recordings) {
            for (std::size_t i = 0; i < rec.size(); ++i, ++row) {
                out << rec.subject_id << ',' << rec.recording_index << ',' << rec.samples[i].t_index;
                for (std::size_t c = 0; c < kNumClasses; ++c) out << ',' << format_double(proba(row, c));
                out << '\n';
            }
        }
        log << "wrote " << row << " predictions to " << opts.out << '\n';
        return 0;
    });
}

int cmd_evaluate(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
    return run_command(err, [&] {
        const auto cfg = command_config(opts);
        if (opts.model_path.empty() || opts.data_dir.empty()) {
            throw Error(ErrorKind::config, "evaluate requires --model and --data-dir");
        }
        const auto bundle = load_model(opts.model_path);
        const auto data = load_dataset_dir(opts.data_dir, cfg.sample_rate_hz);
        const auto [x_full, y_full] = to_supervised(data, bundle.features);
        dump_features(opts.dump_features, x_full);
        const auto [x, y] = take_stride(x_full, y_full, cfg.eval_stride);
        const auto report = map_score(bundle.predict(x.values, EnsembleOptions{cfg.threads}), y);
        if (!opts.out.empty()) {
            std::ofstream out(opts.out, std::ios::binary);
            if (!out) throw Error(ErrorKind::io, "cannot write " + opts.out);
            out << report.to_text();
        }
        log << report.to_text();
        return 0;
    });
}

int cmd_benchmark(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
    return run_command(err, [&] {
        auto cfg = command_config(opts);
        // seeds run in parallel; members within one seed stay sequential for fair timing
        cfg.threads = 1;
        if (opts.seed) cfg.bench_first_seed = *opts.seed;
        if (opts.out.empty()) throw Error(ErrorKind::config, "benchmark requires --out <csv>");
        const auto result = run_benchmark(cfg, std::max(1u, opts.parallel), &log);
        std::ofstream out(opts.out, std::ios::binary);
        if (!out) throw Error(ErrorKind::io, "cannot write " + opts.out);
        write_benchmark_csv(out, result);
        for (const auto& a : result.aggregates()) {
            log << to_string(a.method) << " mean_map=" << format_double(a.map_mean)
                << " std_map=" << format_double(a.map_std) << " mean_wall_s=" << format_double(a.wall_mean) << '\n';
        }
        return 0;
    });
}

}  // namespace bagstack
