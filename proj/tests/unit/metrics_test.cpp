#include <bagstack/error.hpp>
#include <bagstack/metrics.hpp>
#include <bagstack/random.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

using namespace bagstack;

namespace {

double ap(const std::vector<double>& s, const std::vector<bool>& p) { return average_precision(s, p).value(); }

/// Random instance with rows from several tie levels, so tie blocks are common.
TargetVector random_targets(std::size_t n, Rng& rng) {
    TargetVector t;
    for (std::size_t i = 0; i < n; ++i) {
        t.classes.push_back(static_cast<int>(rng.below(4)));
        t.valid.push_back(rng.uniform() > 0.2);
    }
    return t;
}

Matrix tied_proba(std::size_t n, Rng& rng) {
    Matrix p(n, 4);
    for (auto& v : p.values()) v = static_cast<double>(rng.below(6)) / 5.0;
    return p;
}

}  // namespace

TEST_CASE("average_precision: perfect ranking") {
    CHECK(ap({0.9, 0.8, 0.3, 0.1}, {true, true, false, false}) == 1.0);
    CHECK(ap({0.2, 0.9, 0.1}, {false, true, false}) == 1.0);
}

TEST_CASE("average_precision: worked example") {
    const double got = ap({0.9, 0.8, 0.7, 0.6}, {true, false, true, false});
    CHECK(got == doctest::Approx(0.5 * (1.0 + 2.0 / 3.0)).epsilon(1e-15));
    CHECK(got == doctest::Approx(*oracle::average_precision({0.9, 0.8, 0.7, 0.6}, {true, false, true, false})));
}

TEST_CASE("average_precision: one tie block gives the prevalence") {
    for (std::size_t n = 1; n <= 12; ++n) {
        for (std::size_t pcount = 1; pcount <= n; ++pcount) {
            std::vector<double> s(n, 0.5);
            std::vector<bool> p(n, false);
            for (std::size_t i = 0; i < pcount; ++i) p[i] = true;
            const double expected = static_cast<double>(pcount) / static_cast<double>(n);
            CHECK(ap(s, p) == doctest::Approx(expected).epsilon(1e-15));
            // any order of the tied rows yields the same value
            std::sort(p.begin(), p.end());
            do {
                CHECK(ap(s, p) == doctest::Approx(expected).epsilon(1e-15));
            } while (n <= 6 && std::next_permutation(p.begin(), p.end()));
        }
    }
}

TEST_CASE("average_precision: no positives, NaN, length mismatch") {
    CHECK_FALSE(average_precision(std::vector<double>{0.1, 0.2}, std::vector<bool>{false, false}).has_value());
    try {
        average_precision(std::vector<double>{0.1, std::numeric_limits<double>::quiet_NaN()},
                          std::vector<bool>{true, false});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::invalid_score);
    }
    CHECK_THROWS_AS(average_precision(std::vector<double>{0.1}, std::vector<bool>{true, false}), Error);
}

TEST_CASE("average_precision: random instances match the precision/recall curve oracle") {
    Rng rng(1);
    for (int t = 0; t < 300; ++t) {
        const std::size_t n = 1 + rng.below(60);
        std::vector<double> s(n);
        std::vector<bool> p(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = t % 2 ? rng.uniform() : static_cast<double>(rng.below(4));
            p[i] = rng.uniform() < 0.4;
        }
        const auto want = oracle::average_precision(s, p);
        const auto got = average_precision(s, p);
        REQUIRE(want.has_value() == got.has_value());
        if (got) {
            CHECK(*got == doctest::Approx(*want).epsilon(1e-12));
            CHECK(*got > 0.0);
            CHECK(*got <= 1.0);
        }
    }
}

TEST_CASE("property: AP is 1 exactly when positives strictly outrank negatives") {
    Rng rng(2);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 2 + rng.below(20);
        std::vector<double> s(n);
        std::vector<bool> p(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = static_cast<double>(rng.below(5));
            p[i] = rng.uniform() < 0.5;
        }
        if (std::none_of(p.begin(), p.end(), [](bool b) { return b; })) p[0] = true;
        double min_pos = 1e9, max_neg = -1e9;
        for (std::size_t i = 0; i < n; ++i) {
            if (p[i]) min_pos = std::min(min_pos, s[i]);
            else max_neg = std::max(max_neg, s[i]);
        }
        CHECK((ap(s, p) == 1.0) == (min_pos > max_neg));
    }
}

TEST_CASE("property: rank invariance and permutation invariance") {
    Rng rng(3);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 5 + rng.below(80);
        std::vector<double> s(n);
        std::vector<bool> p(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = rng.below(3) == 0 ? 0.5 : rng.uniform();
            p[i] = rng.uniform() < 0.3;
        }
        p[0] = true;
        const double base = ap(s, p);
        std::vector<double> g(n);
        for (std::size_t i = 0; i < n; ++i) g[i] = std::exp(3.0 * s[i]) - 7.0;
        CHECK(ap(g, p) == base);

        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm.begin(), perm.end());
        std::vector<double> ps(n);
        std::vector<bool> pp(n);
        for (std::size_t i = 0; i < n; ++i) {
            ps[i] = s[perm[i]];
            pp[i] = p[perm[i]];
        }
        CHECK(ap(ps, pp) == base);
    }
}

TEST_CASE("property: random scores give AP near the prevalence") {
    // Exact expectation for a uniformly random ranking of P positives among n rows:
    // E[AP] = (1/n) * sum_k [1/k + (P-1)(k-1) / ((n-1) k)], which tends to the prevalence P/n.
    auto expected_ap = [](std::size_t n, std::size_t pos) {
        double e = 0.0;
        for (std::size_t k = 1; k <= n; ++k) {
            const double kd = static_cast<double>(k);
            e += 1.0 / kd + static_cast<double>(pos - 1) * (kd - 1.0) / (static_cast<double>(n - 1) * kd);
        }
        return e / static_cast<double>(n);
    };
    Rng rng(4);
    const std::size_t n = 200;
    std::vector<double> diff;
    double prevalence = 0.0, mean_ap = 0.0;
    for (int t = 0; t < 1000; ++t) {
        std::vector<double> s(n);
        std::vector<bool> p(n);
        std::size_t pos = 0;
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = rng.uniform();
            p[i] = rng.uniform() < 0.3;
            pos += p[i];
        }
        if (pos == 0) continue;
        const double a = ap(s, p);
        diff.push_back(a - expected_ap(n, pos));
        mean_ap += a;
        prevalence += static_cast<double>(pos) / static_cast<double>(n);
    }
    const double m = std::accumulate(diff.begin(), diff.end(), 0.0) / static_cast<double>(diff.size());
    double var = 0.0;
    for (double d : diff) var += (d - m) * (d - m);
    const double se = std::sqrt(var / static_cast<double>(diff.size() - 1) / static_cast<double>(diff.size()));
    CHECK(std::abs(m) <= 3.0 * se);
    CHECK(std::abs(mean_ap - prevalence) / static_cast<double>(diff.size()) < 0.03);
}

TEST_CASE("map_score: one-hot perfect predictions") {
    const std::vector<int> cls{0, 1, 2, 3, 1, 2, 3, 0};
    Matrix p(cls.size(), 4);
    for (std::size_t i = 0; i < cls.size(); ++i) p(i, static_cast<std::size_t>(cls[i])) = 1.0;
    const auto r = map_score(p, TargetVector{cls, std::vector<bool>(cls.size(), true)});
    CHECK(r.map == 1.0);
    CHECK(r.counted_classes == 3);
    CHECK(r.n_valid_rows == cls.size());
}

TEST_CASE("map_score: invalid rows are ignored") {
    Rng rng(5);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 10 + rng.below(100);
        auto tv = random_targets(n, rng);
        auto p = tied_proba(n, rng);
        for (int c = 1; c <= 3; ++c) {
            tv.classes[static_cast<std::size_t>(c)] = c;
            tv.valid[static_cast<std::size_t>(c)] = true;
        }
        const auto base = map_score(p, tv);
        for (std::size_t i = 0; i < n; ++i) {
            if (tv.valid[i]) continue;
            tv.classes[i] = static_cast<int>(rng.below(4));
            for (std::size_t c = 0; c < 4; ++c) p(i, c) = rng.uniform();
        }
        CHECK(map_score(p, tv) == base);
    }
}

TEST_CASE("map_score: undefined classes are excluded from the mean") {
    const std::vector<int> cls{0, 1, 1, 0, 3};
    std::vector<bool> valid{true, true, true, true, false};
    Matrix p(5, 4, 0.25);
    p(1, 1) = 0.9;
    p(2, 1) = 0.8;
    const auto r = map_score(p, TargetVector{cls, valid});
    CHECK(r.counted_classes == 1);
    CHECK_FALSE(r.per_class_ap[1].has_value());
    CHECK_FALSE(r.per_class_ap[2].has_value());
    CHECK(r.map == 1.0);
    CHECK(r.n_valid_rows == 4);
    CHECK(r.to_csv_row() == "1,1,,");
    CHECK(MapReport::csv_header() == "map,ap_sh,ap_turn,ap_walk");
    CHECK(r.to_text().find("counted_classes=1") != std::string::npos);
}

TEST_CASE("map_score: errors") {
    Matrix p(3, 4, 0.25);
    try {
        map_score(p, TargetVector{{0, 0, 0}, {true, true, true}});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::no_positives);
    }
    try {
        map_score(p, TargetVector{{1, 2, 3}, {false, false, false}});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::empty_input);
    }
    CHECK_THROWS_AS(map_score(p, TargetVector{{1, 2}, {true, true}}), Error);
}

TEST_CASE("map_score: random 200-row instances match the oracle") {
    Rng rng(6);
    for (int t = 0; t < 50; ++t) {
        auto tv = random_targets(200, rng);
        const auto p = t % 2 ? fixture::random_proba(200, rng.next()) : tied_proba(200, rng);
        const auto got = map_score(p, tv);
        const auto want = oracle::map_score(p, tv);
        REQUIRE(want.map.has_value());
        CHECK(got.map == doctest::Approx(*want.map).epsilon(1e-9));
        for (std::size_t c = 0; c < 3; ++c) {
            REQUIRE(got.per_class_ap[c].has_value() == want.ap[c].has_value());
            if (got.per_class_ap[c]) CHECK(std::abs(*got.per_class_ap[c] - *want.ap[c]) <= 1e-9);
        }
    }
}
