#include <bagstack/error.hpp>
#include <bagstack/features.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace bagstack;

namespace {

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

void check_against_oracle(const Recording& rec, const FeatureConfig& cfg) {
    const auto fm = extract_window_features(rec, cfg);
    const auto ref = oracle::window_features(rec, cfg);
    REQUIRE(fm.values.rows() == ref.rows());
    REQUIRE(fm.values.cols() == ref.cols());
    std::size_t bad = 0;
    for (std::size_t i = 0; i < ref.rows(); ++i) {
        std::size_t col = 0;
        for (std::size_t w = 0; w < cfg.window_seconds.size(); ++w) {
            for (int axis = 0; axis < 3; ++axis) {
                for (auto stat : cfg.statistics) {
                    const double got = fm.values(i, col), want = ref(i, col);
                    const bool exact = stat == Statistic::min || stat == Statistic::max || stat == Statistic::median;
                    if (exact ? got != want : !rel_close(got, want, 1e-9)) ++bad;
                    ++col;
                }
            }
        }
    }
    CHECK(bad == 0);
}

}  // namespace

TEST_CASE("compute_window_stats: constant signal") {
    const std::vector<double> v{2.5, 2.5, 2.5};
    const auto s = compute_window_stats(v);
    CHECK(s.mean == 2.5);
    CHECK(s.median == 2.5);
    CHECK(s.min == 2.5);
    CHECK(s.max == 2.5);
    CHECK(s.std == 0.0);
}

TEST_CASE("compute_window_stats: 1..5") {
    const std::vector<double> v{4, 1, 5, 3, 2};
    const auto s = compute_window_stats(v);
    CHECK(s.mean == 3.0);
    CHECK(s.median == 3.0);
    CHECK(s.min == 1.0);
    CHECK(s.max == 5.0);
    CHECK(s.std == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("compute_window_stats: even length median") {
    const std::vector<double> v{4, 1, 3, 2};
    CHECK(compute_window_stats(v).median == 2.5);
}

TEST_CASE("compute_window_stats: 1000 random values against the naive oracle") {
    Rng rng(3);
    std::vector<double> v(1000);
    for (auto& x : v) x = rng.normal() * 10.0 + 3.0;
    const auto s = compute_window_stats(v);
    const auto r = oracle::window_stats(v);
    CHECK(rel_close(s.mean, r.mean, 1e-12));
    CHECK(rel_close(s.std, r.std, 1e-12));
    CHECK(s.median == r.median);
    CHECK(s.min == r.min);
    CHECK(s.max == r.max);
}

TEST_CASE("compute_window_stats: invariants and empty input") {
    Rng rng(8);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> v(1 + rng.below(50));
        for (auto& x : v) x = rng.uniform(-1e3, 1e3);
        const auto s = compute_window_stats(v);
        CHECK(s.min <= s.median);
        CHECK(s.median <= s.max);
        CHECK(s.min <= s.mean);
        CHECK(s.mean <= s.max);
        CHECK(s.std >= 0.0);
    }
    try {
        compute_window_stats({});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::empty_input);
    }
}

TEST_CASE("FeatureConfig: defaults, names and validation") {
    const FeatureConfig cfg;
    CHECK(cfg.n_features() == 30);
    const auto names = cfg.column_names();
    REQUIRE(names.size() == 30);
    CHECK(names.front() == "w50s_V_mean");
    CHECK(names[5] == "w50s_ML_mean");
    CHECK(names[14] == "w50s_AP_std");
    CHECK(names[15] == "w5s_V_mean");
    CHECK(window_length(50.0, 128.0) == 6400);
    CHECK(window_length(5.0, 100.0) == 500);

    CHECK_THROWS_AS((FeatureConfig{{}, {Statistic::mean}}.check()), Error);
    CHECK_THROWS_AS((FeatureConfig{{5.0}, {}}.check()), Error);
    CHECK_THROWS_AS((FeatureConfig{{5.0, 5.0}, {Statistic::mean}}.check()), Error);
    CHECK_THROWS_AS((FeatureConfig{{5.0}, {Statistic::mean, Statistic::mean}}.check()), Error);
    CHECK_THROWS_AS((FeatureConfig{{-1.0}, {Statistic::mean}}.check()), Error);
    CHECK(parse_statistic("median") == Statistic::median);
    CHECK_THROWS_AS(parse_statistic("variance"), Error);
}

TEST_CASE("extract_window_features: window shorter than one sample") {
    const auto rec = fixture::random_recording(10, 100.0, 1);
    try {
        extract_window_features(rec, FeatureConfig{{0.001}, {Statistic::mean}});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::config);
    }
}

TEST_CASE("extract_window_features: first row is the first sample") {
    const auto rec = fixture::random_recording(50, 128.0, 2);
    const auto fm = extract_window_features(rec, FeatureConfig{});
    CHECK(fm.values.cols() == 30);
    const double axis_value[3] = {rec.samples[0].acc_v, rec.samples[0].acc_ml, rec.samples[0].acc_ap};
    std::size_t col = 0;
    for (int w = 0; w < 2; ++w) {
        for (int a = 0; a < 3; ++a) {
            for (int s = 0; s < 4; ++s) CHECK(fm.values(0, col++) == axis_value[a]);
            CHECK(fm.values(0, col++) == 0.0);
        }
    }
}

TEST_CASE("extract_window_features: random 2000-sample recording matches the per-cell oracle") {
    // Windows below and above the direct/rolling switch point
    check_against_oracle(fixture::random_recording(2000, 10.0, 11), FeatureConfig{{50.0, 5.0}, FeatureConfig{}.statistics});
    check_against_oracle(fixture::random_recording(2000, 10.0, 12),
                         FeatureConfig{{3.0, 0.4, 9.7}, {Statistic::std, Statistic::min, Statistic::median}});
}

TEST_CASE("extract_window_features: repeated values keep median and extrema exact") {
    auto rec = fixture::random_recording(1500, 20.0, 13);
    for (auto& s : rec.samples) {
        s.acc_v = std::round(s.acc_v * 2.0);
        s.acc_ml = 1.0;
    }
    check_against_oracle(rec, FeatureConfig{{10.0, 1.0}, FeatureConfig{}.statistics});
}

TEST_CASE("property: causality") {
    auto rec = fixture::random_recording(900, 20.0, 14);
    const FeatureConfig cfg{{10.0, 2.0}, FeatureConfig{}.statistics};
    const auto before = extract_window_features(rec, cfg);
    const std::size_t cut = 600;
    for (std::size_t i = cut; i < rec.size(); ++i) {
        rec.samples[i].acc_v += 100.0;
        rec.samples[i].acc_ap = -rec.samples[i].acc_ap;
    }
    const auto after = extract_window_features(rec, cfg);
    bool same = true;
    for (std::size_t i = 0; i < cut; ++i) {
        for (std::size_t c = 0; c < cfg.n_features(); ++c) same = same && before.values(i, c) == after.values(i, c);
    }
    CHECK(same);
    CHECK(before.values(cut, 0) != after.values(cut, 0));
}

TEST_CASE("property: shift equivariance on interior points") {
    const auto rec = fixture::random_recording(400, 10.0, 15);
    const FeatureConfig cfg{{5.0}, FeatureConfig{}.statistics};
    const std::size_t w = 50, shift = 37;
    Recording shifted = rec;
    shifted.samples.erase(shifted.samples.begin(), shifted.samples.begin() + shift);
    shifted.labels.erase(shifted.labels.begin(), shifted.labels.begin() + shift);
    shifted.valid.erase(shifted.valid.begin(), shifted.valid.begin() + shift);
    for (std::size_t i = 0; i < shifted.samples.size(); ++i) shifted.samples[i].t_index = static_cast<std::int64_t>(i);

    const auto a = extract_window_features(rec, cfg);
    const auto b = extract_window_features(shifted, cfg);
    bool ok = true;
    for (std::size_t i = shift + w - 1; i < rec.size(); ++i) {
        for (std::size_t c = 0; c < cfg.n_features(); ++c) {
            ok = ok && rel_close(a.values(i, c), b.values(i - shift, c), 1e-9);
        }
    }
    CHECK(ok);
}

TEST_CASE("property: determinism") {
    const auto rec = fixture::random_recording(3000, 128.0, 16);
    const FeatureConfig cfg;
    CHECK(extract_window_features(rec, cfg).values == extract_window_features(rec, cfg).values);
}

TEST_CASE("extract_window_features: empty recording") {
    Recording rec;
    rec.subject_id = "E";
    CHECK_THROWS_AS(extract_window_features(rec, FeatureConfig{}), Error);
}

TEST_CASE("to_supervised: windows never span recordings") {
    Dataset ds;
    ds.recordings.push_back(fixture::random_recording(30, 10.0, 17, "A"));
    ds.recordings.push_back(fixture::random_recording(30, 10.0, 18, "B"));
    const FeatureConfig cfg{{2.0}, {Statistic::mean, Statistic::min}};
    const auto [x, y] = to_supervised(ds, cfg);
    const auto second = extract_window_features(ds.recordings[1], cfg);
    for (std::size_t i = 0; i < 30; ++i) {
        for (std::size_t c = 0; c < x.n_cols(); ++c) CHECK(x.values(30 + i, c) == second.values(i, c));
    }
}
