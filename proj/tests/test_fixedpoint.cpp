#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "tanhseed/fixedpoint.hpp"
#include "tanhseed/rng.hpp"

using namespace tanhseed;

// Reference values computed independently with high-precision decimal
// bisection on x = tanh(a x), frozen here to full double precision.
struct XiOracle {
    double a, xi;
};
static const XiOracle kXiOracle[] = {
    {1.05, 0.37070573256992806}, {1.2, 0.65856966040575404}, {1.5, 0.85855963664011037},
    {2.0, 0.95750402407726876},  {3.0, 0.99490152845262891}, {5.0, 0.9999091217152325},
    {10.0, 0.99999999587769239},
};

TEST_CASE("xi matches the high-precision oracle") {
    for (const auto& [a, want] : kXiOracle) {
        CAPTURE(a);
        CHECK(std::abs(xi(a) - want) <= 1e-10);   // advertised tolerance
        CHECK(std::abs(xi(a) - want) <= 1e-14);   // polish typically does much better
    }
}

TEST_CASE("xi is zero at and below the critical gain") {
    CHECK(xi(0.3) == 0.0);
    CHECK(xi(0.9999) == 0.0);
    CHECK(xi(1.0) == 0.0);
}

TEST_CASE("xi is a true fixed point and increases with the gain") {
    double prev = 0.0;
    for (double a = 1.01; a < 6.0; a += 0.13) {
        double v = xi(a);
        CAPTURE(a);
        CHECK(v > prev);
        CHECK(v < 1.0);
        CHECK(std::abs(std::tanh(a * v) - v) <= 1e-12);
        prev = v;
    }
}

TEST_CASE("xi honours a coarse tolerance") {
    for (const auto& [a, want] : kXiOracle) CHECK(std::abs(xi(a, 1e-3) - want) <= 1e-3);
}

TEST_CASE("xi rejects bad inputs") {
    CHECK_THROWS_AS(xi(2.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(xi(2.0, -1e-9), std::invalid_argument);
}

TEST_CASE("iterate_map: zero start is an immediate fixed point") {
    auto r = iterate_map(2.0, 0.0);
    CHECK(r.classification == FixedPointClass::ZERO);
    CHECK(r.limit == 0.0);
    CHECK(r.iterations_used == 0);
}

TEST_CASE("iterate_map: subcritical gains collapse to zero") {
    for (double a : {0.3, 0.8, 0.98}) {
        for (double x0 : {-2.0, 0.4, 3.0}) {
            CAPTURE(a);
            CAPTURE(x0);
            auto r = iterate_map(a, x0, 2000000, 1e-10);
            CHECK(r.classification == FixedPointClass::ZERO);
            CHECK(std::abs(r.limit) <= 1e-10);
        }
    }
}

TEST_CASE("iterate_map: the critical gain exhausts any feasible budget") {
    // at gain exactly 1 the iterates shrink like sqrt(3/(2n)), so no
    // realistic budget reaches 1e-10; the truthful answer is MAX_ITER
    // with a small but nonzero remaining value
    auto r = iterate_map(1.0, 0.4, 2000000, 1e-10);
    CHECK(r.classification == FixedPointClass::MAX_ITER);
    CHECK(std::abs(r.limit) < 1e-3);
    CHECK(std::abs(r.limit) > 1e-10);
}

TEST_CASE("iterate_map: supercritical gains settle on the signed fixed point") {
    for (const auto& [a, want] : kXiOracle) {
        auto rp = iterate_map(a, 0.7);
        CAPTURE(a);
        CHECK(rp.classification == FixedPointClass::POS_FIXED);
        CHECK(std::abs(rp.limit - want) <= 1e-9);
        auto rn = iterate_map(a, -0.7);
        CHECK(rn.classification == FixedPointClass::NEG_FIXED);
        CHECK(std::abs(rn.limit + want) <= 1e-9);
        // odd map: the two trajectories are exact mirrors
        CHECK(rn.limit == -rp.limit);
        CHECK(rn.iterations_used == rp.iterations_used);
    }
}

TEST_CASE("iterate_map: starting above the fixed point converges from above") {
    auto r = iterate_map(2.0, 5.0);
    CHECK(r.classification == FixedPointClass::POS_FIXED);
    CHECK(std::abs(r.limit - 0.95750402407726876) <= 1e-9);
    CHECK(r.limit >= 0.95750402407726876 - 1e-9);
}

TEST_CASE("iterate_map: iteration budget is respected") {
    auto r = iterate_map(0.999, 1.0, 3, 1e-10);
    CHECK(r.classification == FixedPointClass::MAX_ITER);
    CHECK(r.iterations_used == 3);
    // the reported value is the third iterate
    double x = 1.0;
    for (int i = 0; i < 3; ++i) x = std::tanh(0.999 * x);
    CHECK(r.limit == x);
}

TEST_CASE("iterate_map: random gains classify by sign rule") {
    Rng rng(20240817);
    int zeros = 0, signs = 0;
    for (int trial = 0; trial < 200; ++trial) {
        double a = rng.uniform(0.2, 3.0);
        // the classifier is not asked to resolve gains straddling the
        // critical point within floating noise; keep a clear margin
        if (std::abs(a - 1.0) < 1e-3) continue;
        double x0 = rng.uniform(-3.0, 3.0);
        if (x0 == 0.0) continue;
        auto r = iterate_map(a, x0, 4000000, 1e-10);
        CAPTURE(a);
        CAPTURE(x0);
        if (a <= 1.0) {
            CHECK(r.classification == FixedPointClass::ZERO);
            CHECK(std::abs(r.limit) <= 1e-10);
            ++zeros;
        } else {
            auto want = x0 > 0 ? FixedPointClass::POS_FIXED : FixedPointClass::NEG_FIXED;
            CHECK(r.classification == want);
            CHECK(std::abs(std::abs(r.limit) - xi(a)) <= 1e-8);
            ++signs;
        }
    }
    CHECK(zeros > 20);
    CHECK(signs > 20);
}

TEST_CASE("GainSequence validates entries") {
    CHECK_THROWS_AS(GainSequence({1.0, 0.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(GainSequence({-0.5}), std::invalid_argument);
    GainSequence ok({0.5, 2.0});
    CHECK(ok.size() == 2);
}

TEST_CASE("compose_limit: uniform supercritical tail reaches its fixed point") {
    GainSequence seq({2.0, 2.0});
    double lim = compose_limit(seq, 0.7, 2.0, 5000, 1e-10);
    CHECK(std::abs(lim - 0.95750402407726876) <= 1e-9);
}

TEST_CASE("compose_limit: varied prefix cannot change the tail's destination") {
    GainSequence seq({0.5, 3.0, 1.2});
    double lim = compose_limit(seq, 0.9, 1.5, 4000, 1e-9);
    double want = 0.85855963664011037;  // fixed point of the tail gain
    CHECK(std::abs(lim - want) <= 1e-6);
    // sign never flips under positive gains
    double neg = compose_limit(seq, -0.9, 1.5, 4000, 1e-9);
    CHECK(std::abs(neg + want) <= 1e-6);
}

TEST_CASE("compose_limit: the tail fixed point lower-bounds the magnitude") {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> prefix(5);
        for (auto& g : prefix) g = rng.uniform(0.2, 3.0);
        double tail = rng.uniform(1.1, 3.0);
        double x0 = rng.uniform(0.05, 2.0);
        double lim = compose_limit(GainSequence(prefix), x0, tail, 6000, 1e-9);
        CAPTURE(tail);
        CHECK(std::abs(lim) >= xi(tail) - 1e-6);
    }
}

TEST_CASE("compose_limit: zero start stays zero") {
    GainSequence seq({2.0, 0.3});
    CHECK(compose_limit(seq, 0.0, 2.5, 100) == 0.0);
}

TEST_CASE("compose_limit: empty prefix is the pure tail map") {
    GainSequence empty(std::vector<double>{});
    double lim = compose_limit(empty, 0.4, 2.0, 5000, 1e-10);
    CHECK(std::abs(lim - 0.95750402407726876) <= 1e-9);
}

TEST_CASE("scan_fixed_points matches xi pointwise") {
    std::vector<double> grid = {0.5, 0.9, 1.0, 1.2, 2.0, 5.0};
    auto scan = scan_fixed_points(grid);
    REQUIRE(scan.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(scan[i].first == grid[i]);
        CHECK(scan[i].second == xi(grid[i]));
    }
}
