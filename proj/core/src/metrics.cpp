#include <bagstack/error.hpp>
#include <bagstack/metrics.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

namespace bagstack {

namespace {

std::optional<double> average_precision_impl(std::span<const double> scores, auto&& is_positive) {
    const std::size_t n = scores.size();
    std::size_t total_pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isnan(scores[i])) throw Error(ErrorKind::invalid_score, "NaN score at row " + std::to_string(i));
        if (is_positive(i)) ++total_pos;
    }
    if (total_pos == 0) return std::nullopt;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    double ap = 0.0;
    std::size_t seen = 0, tp = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        std::size_t block_pos = 0;
        while (j < n && scores[order[j]] == scores[order[i]]) {
            if (is_positive(order[j])) ++block_pos;
            ++j;
        }
        seen += j - i;
        tp += block_pos;
        if (block_pos > 0) {
            const double recall_gain = static_cast<double>(block_pos) / static_cast<double>(total_pos);
            const double precision = static_cast<double>(tp) / static_cast<double>(seen);
            ap += recall_gain * precision;
        }
        i = j;
    }
    return std::min(ap, 1.0);
}

void append_number(std::string& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, ptr);
}

}  // namespace

std::optional<double> average_precision(std::span<const double> scores, std::span<const bool> positives) {
    if (scores.size() != positives.size()) throw Error(ErrorKind::shape, "scores and labels differ in length");
    return average_precision_impl(scores, [&](std::size_t i) { return positives[i]; });
}

std::optional<double> average_precision(std::span<const double> scores, const std::vector<bool>& positives) {
    if (scores.size() != positives.size()) throw Error(ErrorKind::shape, "scores and labels differ in length");
    return average_precision_impl(scores, [&](std::size_t i) { return static_cast<bool>(positives[i]); });
}

MapReport map_score(const ProbabilityMatrix& proba, const TargetVector& targets) {
    if (proba.rows() != targets.size() || targets.valid.size() != targets.size()) {
        throw Error(ErrorKind::shape, "probability rows differ from target length");
    }
    if (proba.cols() != kNumClasses) throw Error(ErrorKind::shape, "probability matrix must have 4 columns");

    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets.valid[i]) rows.push_back(i);
    }
    if (rows.empty()) throw Error(ErrorKind::empty_input, "no valid rows to score");

    MapReport report;
    report.n_valid_rows = rows.size();
    std::vector<double> scores(rows.size());
    std::vector<bool> positives(rows.size());
    double sum = 0.0;
    for (std::size_t c = 1; c < kNumClasses; ++c) {
        for (std::size_t j = 0; j < rows.size(); ++j) {
            scores[j] = proba(rows[j], c);
            positives[j] = targets.classes[rows[j]] == static_cast<int>(c);
        }
        report.per_class_ap[c - 1] = average_precision(scores, positives);
        if (report.per_class_ap[c - 1]) {
            sum += *report.per_class_ap[c - 1];
            ++report.counted_classes;
        }
    }
    if (report.counted_classes == 0) throw Error(ErrorKind::no_positives, "no event class has a valid positive");
    report.map = sum / report.counted_classes;
    return report;
}

std::string MapReport::to_text() const {
    static constexpr const char* kNames[] = {"ap_start_hesitation", "ap_turn", "ap_walking"};
    std::string out = "map=";
    append_number(out, map);
    out += '\n';
    for (std::size_t c = 0; c < 3; ++c) {
        out += kNames[c];
        out += '=';
        if (per_class_ap[c]) {
            append_number(out, *per_class_ap[c]);
        } else {
            out += "undefined";
        }
        out += '\n';
    }
    out += "counted_classes=" + std::to_string(counted_classes) + '\n';
    out += "n_valid_rows=" + std::to_string(n_valid_rows) + '\n';
    return out;
}

std::string MapReport::to_csv_row() const {
    std::string out;
    append_number(out, map);
    for (const auto& ap : per_class_ap) {
        out += ',';
        if (ap) append_number(out, *ap);
    }
    return out;
}

}  // namespace bagstack
