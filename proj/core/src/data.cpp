#include <bagstack/data.hpp>
#include <bagstack/error.hpp>
#include <bagstack/random.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace bagstack {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::schema: return "schema";
        case ErrorKind::parse: return "parse";
        case ErrorKind::label_consistency: return "label-consistency";
        case ErrorKind::empty_input: return "empty-input";
        case ErrorKind::split_infeasible: return "split-infeasible";
        case ErrorKind::config: return "config";
        case ErrorKind::invalid_feature: return "invalid-feature";
        case ErrorKind::shape: return "shape";
        case ErrorKind::fold: return "fold";
        case ErrorKind::invalid_score: return "invalid-score";
        case ErrorKind::no_positives: return "no-positives";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
    Matrix out(indices.size(), cols_);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const auto src = row(indices[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

void Recording::check() const {
    if (labels.size() != samples.size() || valid.size() != samples.size()) {
        throw Error(ErrorKind::shape, "recording '" + subject_id + "': labels/valid length differs from samples");
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].t_index != static_cast<std::int64_t>(i)) {
            throw Error(ErrorKind::parse, "recording '" + subject_id + "': Time not contiguous at row " +
                                              std::to_string(i + 1));
        }
    }
}

std::size_t Dataset::total_samples() const noexcept {
    std::size_t n = 0;
    for (const auto& r : recordings) n += r.size();
    return n;
}

void Dataset::check() const {
    std::set<std::pair<std::string, int>> seen;
    for (const auto& r : recordings) {
        if (!seen.emplace(r.subject_id, r.recording_index).second) {
            throw Error(ErrorKind::config, "duplicate recording " + r.subject_id + "_" +
                                               std::to_string(r.recording_index));
        }
        r.check();
    }
}

namespace {

constexpr std::string_view kHeader = "Time,AccV,AccML,AccAP,StartHesitation,Turn,Walking,Valid";

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

[[noreturn]] void cell_error(std::size_t row, std::string_view column, std::string_view cell) {
    throw Error(ErrorKind::parse, "line " + std::to_string(row) + ", column " + std::string(column) +
                                      ": cannot parse '" + std::string(cell) + "'");
}

double parse_double(std::string_view cell, std::size_t row, std::string_view column) {
    cell = trim(cell);
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty() || !std::isfinite(v)) {
        cell_error(row, column, cell);
    }
    return v;
}

std::int64_t parse_int(std::string_view cell, std::size_t row, std::string_view column) {
    cell = trim(cell);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty()) cell_error(row, column, cell);
    return v;
}

bool parse_flag(std::string_view cell, std::size_t row, std::string_view column, bool allow_words) {
    cell = trim(cell);
    if (cell == "0") return false;
    if (cell == "1") return true;
    if (allow_words) {
        if (cell == "true" || cell == "True" || cell == "TRUE") return true;
        if (cell == "false" || cell == "False" || cell == "FALSE") return false;
    }
    cell_error(row, column, cell);
}

void append_double(std::string& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, ptr);
}

}  // namespace

Recording parse_recording_csv(std::istream& in, double sample_rate_hz, std::string subject_id) {
    if (!(sample_rate_hz > 0.0)) throw Error(ErrorKind::config, "sample rate must be positive");
    std::string line;
    if (!std::getline(in, line) || trim(line).empty()) throw Error(ErrorKind::empty_input, "empty CSV stream");
    std::string_view header = trim(line);
    if (header.size() >= 3 && header.substr(0, 3) == "\xEF\xBB\xBF") header.remove_prefix(3);
    if (header != kHeader) {
        throw Error(ErrorKind::schema, "expected header '" + std::string(kHeader) + "', got '" +
                                           std::string(header) + "'");
    }

    static constexpr std::string_view kColumns[] = {"Time", "AccV", "AccML", "AccAP",
                                                    "StartHesitation", "Turn", "Walking", "Valid"};
    Recording rec;
    rec.subject_id = std::move(subject_id);
    rec.sample_rate_hz = sample_rate_hz;
    std::size_t row = 1;
    std::string_view cells[8];
    while (std::getline(in, line)) {
        ++row;
        std::string_view rest = trim(line);
        if (rest.empty()) continue;
        std::size_t n_cells = 0;
        while (true) {
            const auto comma = rest.find(',');
            if (n_cells == 8) throw Error(ErrorKind::schema, "line " + std::to_string(row) + ": too many columns");
            cells[n_cells++] = rest.substr(0, comma);
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (n_cells != 8) throw Error(ErrorKind::schema, "line " + std::to_string(row) + ": expected 8 columns");

        Sample s;
        s.t_index = parse_int(cells[0], row, kColumns[0]);
        if (s.t_index < 0) cell_error(row, kColumns[0], cells[0]);
        if (s.t_index != static_cast<std::int64_t>(rec.samples.size())) {
            throw Error(ErrorKind::parse, "line " + std::to_string(row) + ": Time " + std::to_string(s.t_index) +
                                              " breaks contiguity (expected " +
                                              std::to_string(rec.samples.size()) + ")");
        }
        s.acc_v = parse_double(cells[1], row, kColumns[1]);
        s.acc_ml = parse_double(cells[2], row, kColumns[2]);
        s.acc_ap = parse_double(cells[3], row, kColumns[3]);
        const bool sh = parse_flag(cells[4], row, kColumns[4], false);
        const bool turn = parse_flag(cells[5], row, kColumns[5], false);
        const bool walk = parse_flag(cells[6], row, kColumns[6], false);
        const bool valid = parse_flag(cells[7], row, kColumns[7], true);
        if (int(sh) + int(turn) + int(walk) > 1) {
            throw Error(ErrorKind::label_consistency,
                        "line " + std::to_string(row) + ": more than one event indicator set");
        }
        rec.samples.push_back(s);
        rec.labels.push_back(sh ? EventClass::start_hesitation
                                : turn ? EventClass::turn : walk ? EventClass::walking : EventClass::none);
        rec.valid.push_back(valid);
    }
    if (rec.samples.empty()) throw Error(ErrorKind::empty_input, "CSV has a header but no rows");
    return rec;
}

void write_recording_csv(std::ostream& out, const Recording& rec) {
    rec.check();
    std::string buf;
    buf.reserve(64 * (rec.size() + 1));
    buf.append(kHeader).push_back('\n');
    for (std::size_t i = 0; i < rec.size(); ++i) {
        const auto& s = rec.samples[i];
        buf.append(std::to_string(s.t_index)).push_back(',');
        append_double(buf, s.acc_v);
        buf.push_back(',');
        append_double(buf, s.acc_ml);
        buf.push_back(',');
        append_double(buf, s.acc_ap);
        const auto c = rec.labels[i];
        buf.append(c == EventClass::start_hesitation ? ",1" : ",0");
        buf.append(c == EventClass::turn ? ",1" : ",0");
        buf.append(c == EventClass::walking ? ",1" : ",0");
        buf.append(rec.valid[i] ? ",1\n" : ",0\n");
    }
    out << buf;
}

Dataset load_dataset_dir(const std::filesystem::path& dir, double sample_rate_hz) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw Error(ErrorKind::io, "not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto& p = entry.path();
        if (!entry.is_regular_file() || p.extension() != ".csv") continue;
        // Ground-truth sidecars live next to the recordings.
        if (p.stem().extension() == ".episodes") continue;
        files.push_back(p);
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(ErrorKind::empty_input, "no recording CSVs in " + dir.string());

    Dataset ds;
    for (const auto& p : files) {
        const std::string stem = p.stem().string();
        const auto us = stem.rfind('_');
        std::string subject = stem;
        int index = 0;
        if (us != std::string::npos && us > 0) {
            const std::string_view tail = std::string_view(stem).substr(us + 1);
            auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), index);
            if (ec == std::errc{} && ptr == tail.data() + tail.size() && !tail.empty()) {
                subject = stem.substr(0, us);
            } else {
                index = 0;
            }
        }
        std::ifstream in(p);
        if (!in) throw Error(ErrorKind::io, "cannot open " + p.string());
        try {
            auto rec = parse_recording_csv(in, sample_rate_hz, subject);
            rec.recording_index = index;
            ds.recordings.push_back(std::move(rec));
        } catch (const Error& e) {
            throw Error(e.kind(), p.filename().string() + ": " + e.what());
        }
    }
    ds.check();
    return ds;
}

void write_dataset_dir(const std::filesystem::path& dir, const Dataset& dataset) {
    std::filesystem::create_directories(dir);
    for (const auto& rec : dataset.recordings) {
        const auto path = dir / (rec.subject_id + "_" + std::to_string(rec.recording_index) + ".csv");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
        write_recording_csv(out, rec);
    }
}

std::pair<Dataset, Dataset> split_by_subject(const Dataset& dataset, double holdout_fraction, std::uint64_t seed) {
    if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
        throw Error(ErrorKind::config, "holdout fraction must lie in (0, 1)");
    }
    std::vector<std::string> subjects;
    for (const auto& r : dataset.recordings) subjects.push_back(r.subject_id);
    std::sort(subjects.begin(), subjects.end());
    subjects.erase(std::unique(subjects.begin(), subjects.end()), subjects.end());
    if (subjects.size() < 2) throw Error(ErrorKind::split_infeasible, "need at least two subjects to split");

    const auto n = subjects.size();
    auto n_valid = static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(n)));
    n_valid = std::clamp<std::size_t>(n_valid, 1, n - 1);

    Rng rng(derive_seed({seed, 0x5b1e}));
    rng.shuffle(subjects.begin(), subjects.end());
    const std::set<std::string> held(subjects.begin(), subjects.begin() + static_cast<std::ptrdiff_t>(n_valid));

    std::pair<Dataset, Dataset> out;
    for (const auto& r : dataset.recordings) {
        (held.count(r.subject_id) ? out.second : out.first).recordings.push_back(r);
    }
    return out;
}

}  // namespace bagstack
