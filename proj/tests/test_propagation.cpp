#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "tanhseed/fixedpoint.hpp"
#include "tanhseed/propagation.hpp"

using namespace tanhseed;

namespace {

Mat linspace_row(double lo, double hi, std::size_t n) {
    Mat m(1, n);
    for (std::size_t j = 0; j < n; ++j)
        m(0, j) = lo + (hi - lo) * double(j) / double(n - 1);
    return m;
}

WeightFn constant_gain(double a) {
    return [a](std::size_t) {
        Mat w(1, 1);
        w(0, 0) = a;
        return w;
    };
}

}  // namespace

TEST_CASE("width-1 stats equal the scalar iteration exactly") {
    const double a = 2.0;
    const std::size_t depth = 30, batch = 21;
    NetworkArch arch(std::vector<std::size_t>(depth + 1, 1));
    Mat inputs = linspace_row(-1.0, 1.0, batch);

    SpreadTrace trace = propagate_stats_fn(arch, constant_gain(a), inputs);
    REQUIRE(trace.layers.size() == depth);

    std::vector<double> xs(batch);
    for (std::size_t j = 0; j < batch; ++j) xs[j] = inputs(0, j);
    for (std::size_t l = 0; l < depth; ++l) {
        double mn = 1e300, mx = -1e300;
        std::size_t sat = 0;
        for (auto& x : xs) {
            x = std::tanh(a * x);
            mn = std::min(mn, x);
            mx = std::max(mx, x);
            if (std::abs(x) > 0.9) ++sat;
        }
        CAPTURE(l);
        CHECK(trace.layers[l].min == mn);
        CHECK(trace.layers[l].max == mx);
        CHECK(trace.layers[l].spread() == mx - mn);
        CHECK(trace.layers[l].sat_frac == double(sat) / double(batch));
    }
}

TEST_CASE("deep supercritical width-1 chains settle at the two fixed points") {
    const double a = 2.0;
    const std::size_t depth = 200;
    NetworkArch arch(std::vector<std::size_t>(depth + 1, 1));
    Mat inputs = linspace_row(-1.0, 1.0, 41);  // includes exactly 0
    SpreadTrace trace = propagate_stats_fn(arch, constant_gain(a), inputs);
    double want = xi(a);
    CHECK(trace.layers.back().max == doctest::Approx(want).epsilon(1e-12));
    CHECK(trace.layers.back().min == doctest::Approx(-want).epsilon(1e-12));
    // the exactly-zero column never saturates; everything else does at 0.9
    CHECK(trace.layers.back().sat_frac == doctest::Approx(40.0 / 41.0));
}

TEST_CASE("deep subcritical width-1 chains collapse") {
    const std::size_t depth = 200;
    NetworkArch arch(std::vector<std::size_t>(depth + 1, 1));
    Mat inputs = linspace_row(-1.0, 1.0, 11);
    SpreadTrace trace = propagate_stats_fn(arch, constant_gain(0.8), inputs);
    CHECK(trace.layers.back().spread() <= 1e-15);
    CHECK(trace.layers.back().sat_frac == 0.0);
}

TEST_CASE("saturation threshold is an option") {
    const std::size_t depth = 5;
    NetworkArch arch(std::vector<std::size_t>(depth + 1, 1));
    Mat inputs = linspace_row(0.5, 1.0, 8);
    PropagateOptions strict;
    strict.sat_threshold = 1e-6;  // everything positive counts
    SpreadTrace trace = propagate_stats_fn(arch, constant_gain(2.0), inputs, strict);
    CHECK(trace.layers.back().sat_frac == 1.0);
}

TEST_CASE("zero-noise diagonal scheme is a per-unit tanh iteration") {
    const std::size_t width = 7, depth = 12, batch = 9;
    NetworkArch arch(std::vector<std::size_t>(depth + 1, width));
    Mat inputs(width, batch);
    Rng rng(11);
    for (std::size_t i = 0; i < inputs.size(); ++i) inputs.data()[i] = rng.uniform(-1.0, 1.0);

    SpreadTrace trace = propagate_stats(arch, InitScheme::mod_diag(0.0), inputs, 123);

    Mat acts = inputs;
    for (std::size_t l = 0; l < depth; ++l) {
        double mn = 1e300, mx = -1e300;
        for (std::size_t i = 0; i < acts.size(); ++i) {
            acts.data()[i] = std::tanh(acts.data()[i]);
            mn = std::min(mn, acts.data()[i]);
            mx = std::max(mx, acts.data()[i]);
        }
        CAPTURE(l);
        CHECK(trace.layers[l].min == mn);
        CHECK(trace.layers[l].max == mx);
    }
}

TEST_CASE("results are identical for any thread count") {
    const std::size_t width = 40, depth = 25, batch = 101;  // odd batch, uneven chunks
    NetworkArch arch(std::vector<std::size_t>(depth + 1, width));
    Mat inputs(width, batch);
    Rng rng(3);
    for (std::size_t i = 0; i < inputs.size(); ++i) inputs.data()[i] = rng.uniform(-1.0, 1.0);

    PropagateOptions one, four;
    one.threads = 1;
    four.threads = 4;
    auto scheme = InitScheme::mod_diag(0.085);
    SpreadTrace t1 = propagate_stats(arch, scheme, inputs, 999, one);
    SpreadTrace t4 = propagate_stats(arch, scheme, inputs, 999, four);
    REQUIRE(t1.layers.size() == t4.layers.size());
    for (std::size_t l = 0; l < t1.layers.size(); ++l) {
        CHECK(t1.layers[l].min == t4.layers[l].min);
        CHECK(t1.layers[l].max == t4.layers[l].max);
        CHECK(t1.layers[l].sat_frac == t4.layers[l].sat_frac);
    }
}

TEST_CASE("seed reproducibility and sensitivity") {
    const std::size_t width = 30, depth = 10, batch = 50;
    NetworkArch arch(std::vector<std::size_t>(depth + 1, width));
    Mat inputs(width, batch);
    Rng rng(8);
    for (std::size_t i = 0; i < inputs.size(); ++i) inputs.data()[i] = rng.uniform(-1.0, 1.0);
    auto scheme = InitScheme::xavier_normal();

    SpreadTrace a = propagate_stats(arch, scheme, inputs, 42);
    SpreadTrace b = propagate_stats(arch, scheme, inputs, 42);
    SpreadTrace c = propagate_stats(arch, scheme, inputs, 43);
    bool same = true, differs = false;
    for (std::size_t l = 0; l < depth; ++l) {
        same = same && a.layers[l].min == b.layers[l].min && a.layers[l].max == b.layers[l].max;
        differs = differs || a.layers[l].min != c.layers[l].min;
    }
    CHECK(same);
    CHECK(differs);
}

TEST_CASE("alpha sweep shares inputs and seed across alphas") {
    const std::size_t width = 20, depth = 15, batch = 40;
    NetworkArch arch(std::vector<std::size_t>(depth + 1, width));
    Mat inputs(width, batch);
    Rng rng(21);
    for (std::size_t i = 0; i < inputs.size(); ++i) inputs.data()[i] = rng.uniform(-1.0, 1.0);

    std::vector<double> alphas = {0.0, 0.085, 0.4};
    auto traces = alpha_sweep(arch, alphas, inputs, 5);
    REQUIRE(traces.size() == 3);
    // each sweep entry is exactly a propagate_stats run at that alpha
    for (std::size_t k = 0; k < alphas.size(); ++k) {
        SpreadTrace direct = propagate_stats(arch, InitScheme::mod_diag(alphas[k]), inputs, 5);
        for (std::size_t l = 0; l < depth; ++l) {
            CHECK(traces[k].layers[l].min == direct.layers[l].min);
            CHECK(traces[k].layers[l].max == direct.layers[l].max);
            CHECK(traces[k].layers[l].sat_frac == direct.layers[l].sat_frac);
        }
    }
}

TEST_CASE("input shape must match the architecture") {
    NetworkArch arch({4, 4, 4});
    Mat inputs(3, 10);
    CHECK_THROWS_AS(propagate_stats(arch, InitScheme::mod_diag(), inputs, 1),
                    std::invalid_argument);
}
