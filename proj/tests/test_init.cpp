#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "tanhseed/init.hpp"

using namespace tanhseed;

TEST_CASE("d_matrix wraps the diagonal cyclically down the rows") {
    Mat d = d_matrix(5, 3);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(d(i, j) == (j == i % 3 ? 1.0 : 0.0));
}

TEST_CASE("square d_matrix is the identity") {
    Mat d = d_matrix(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(d(i, j) == (i == j ? 1.0 : 0.0));
}

TEST_CASE("wide d_matrix keeps one 1 per row") {
    Mat d = d_matrix(3, 7);
    for (std::size_t i = 0; i < 3; ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < 7; ++j) row_sum += d(i, j);
        CHECK(row_sum == 1.0);
        CHECK(d(i, i) == 1.0);  // i < n_in here, so i % n_in == i
    }
}

TEST_CASE("zero noise reduces the diagonal scheme to d_matrix exactly") {
    Rng rng(1);
    Mat w = init_weights(InitScheme::mod_diag(0.0), 6, 4, rng);
    Mat d = d_matrix(6, 4);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(w.data()[i] == d.data()[i]);
}

TEST_CASE("diagonal scheme noise has the advertised scale") {
    const std::size_t n = 60;
    const double alpha = 0.2;
    Rng rng(77);
    double sum = 0.0, sum2 = 0.0;
    std::size_t count = 0;
    for (int rep = 0; rep < 30; ++rep) {
        Mat w = init_weights(InitScheme::mod_diag(alpha), n, n, rng);
        Mat d = d_matrix(n, n);
        for (std::size_t i = 0; i < w.size(); ++i) {
            double z = w.data()[i] - d.data()[i];
            sum += z;
            sum2 += z * z;
            ++count;
        }
    }
    double mean = sum / double(count);
    double var = sum2 / double(count) - mean * mean;
    double want_sd = alpha / std::sqrt(double(n));
    // 108000 draws: the sample sd of the variance is ~ var * sqrt(2/N) < 0.5%
    CHECK(std::abs(mean) <= 4.0 * want_sd / std::sqrt(double(count)));
    CHECK(var == doctest::Approx(want_sd * want_sd).epsilon(0.02));
}

TEST_CASE("xavier normal has variance 2/(fan_in + fan_out)") {
    const std::size_t n_out = 80, n_in = 40;
    Rng rng(5);
    double sum2 = 0.0;
    std::size_t count = 0;
    for (int rep = 0; rep < 40; ++rep) {
        Mat w = init_weights(InitScheme::xavier_normal(), n_out, n_in, rng);
        for (std::size_t i = 0; i < w.size(); ++i) sum2 += w.data()[i] * w.data()[i], ++count;
    }
    double want = 2.0 / double(n_in + n_out);
    CHECK(sum2 / double(count) == doctest::Approx(want).epsilon(0.03));
}

TEST_CASE("xavier uniform stays inside its bound and fills it") {
    const std::size_t n_out = 50, n_in = 30;
    double bound = std::sqrt(6.0 / double(n_in + n_out));
    Rng rng(9);
    double hi = 0.0, sum2 = 0.0;
    std::size_t count = 0;
    for (int rep = 0; rep < 40; ++rep) {
        Mat w = init_weights(InitScheme::xavier_uniform(), n_out, n_in, rng);
        for (std::size_t i = 0; i < w.size(); ++i) {
            double v = w.data()[i];
            CHECK(std::abs(v) < bound);
            hi = std::max(hi, std::abs(v));
            sum2 += v * v;
            ++count;
        }
    }
    CHECK(hi > 0.99 * bound);
    // uniform on [-b, b] has variance b^2/3 = 2/(fan_in + fan_out)
    CHECK(sum2 / double(count) == doctest::Approx(bound * bound / 3.0).epsilon(0.03));
}

TEST_CASE("same seed reproduces the same weights") {
    Rng r1(123), r2(123);
    Mat a = init_weights(InitScheme::mod_diag(), 7, 5, r1);
    Mat b = init_weights(InitScheme::mod_diag(), 7, 5, r2);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.data()[i] == b.data()[i]);
}

TEST_CASE("gain coefficients factor the affine map exactly") {
    // defining property: (W x)_i == a_i * x_{i mod n_in}
    Rng rng(31);
    for (int rep = 0; rep < 10; ++rep) {
        std::size_t n_out = 6, n_in = 4;
        Mat w = init_weights(InitScheme::xavier_normal(), n_out, n_in, rng);
        std::vector<double> x(n_in);
        for (auto& v : x) v = rng.uniform(0.3, 1.5) * (rng.uniform(0.0, 1.0) < 0.5 ? -1 : 1);
        auto gains = gain_coefficients(w, x);
        REQUIRE(gains.size() == n_out);
        for (std::size_t i = 0; i < n_out; ++i) {
            double wx = 0.0;
            for (std::size_t j = 0; j < n_in; ++j) wx += w(i, j) * x[j];
            CHECK(wx == doctest::Approx(gains[i] * x[i % n_in]).epsilon(1e-10));
        }
    }
}

TEST_CASE("gain coefficients reject zero coordinates") {
    Mat w = d_matrix(3, 3);
    std::vector<double> x = {1.0, 0.0, 1.0};
    CHECK_THROWS_AS(gain_coefficients(w, x), std::invalid_argument);
}

TEST_CASE("noise-free gains are exactly one") {
    std::vector<double> x = {0.4, -0.9, 1.3};
    auto gains = gain_coefficients(d_matrix(7, 3), x);
    for (double g : gains) CHECK(g == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("gain distribution matches the closed-form prediction") {
    const std::size_t n = 50;
    const double alpha = 0.085;
    std::vector<double> x(n);
    Rng xr(4);
    for (auto& v : x) v = xr.uniform(0.4, 1.2);
    Rng rng(2024);
    const std::size_t samples = 40000;
    GainStats stats = gain_distribution_check(n, alpha, x, samples, rng, 3);

    // prediction recomputed here independently of the library
    double ratio2 = 0.0;
    std::size_t jstar = 3 % n;
    for (std::size_t j = 0; j < n; ++j)
        if (j != jstar) ratio2 += (x[j] / x[jstar]) * (x[j] / x[jstar]);
    double want_var = alpha * alpha / double(n) * (1.0 + ratio2);

    CHECK(stats.predicted_variance == doctest::Approx(want_var).epsilon(1e-12));
    // sampling error of the variance is ~ sqrt(2/N) ~ 0.7%
    CHECK(stats.variance == doctest::Approx(want_var).epsilon(0.04));
    CHECK(std::abs(stats.mean - 1.0) <= 5.0 * std::sqrt(want_var / double(samples)));
}
