#include "tanhseed/init.hpp"

#include <cmath>
#include <stdexcept>

namespace tanhseed {

Mat d_matrix(std::size_t n_out, std::size_t n_in) {
    if (n_out == 0 || n_in == 0) throw std::invalid_argument("d_matrix: dimensions must be positive");
    Mat d(n_out, n_in);
    for (std::size_t i = 0; i < n_out; ++i) d(i, i % n_in) = 1.0;
    return d;
}

Mat init_weights(const InitScheme& scheme, std::size_t n_out, std::size_t n_in, Rng& rng) {
    if (n_out == 0 || n_in == 0)
        throw std::invalid_argument("init_weights: dimensions must be positive");
    Mat w(n_out, n_in);
    switch (scheme.kind) {
        case InitKind::XAVIER_UNIFORM: {
            double bound = std::sqrt(6.0 / static_cast<double>(n_in + n_out));
            for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
            break;
        }
        case InitKind::XAVIER_NORMAL: {
            double sd = std::sqrt(2.0 / static_cast<double>(n_in + n_out));
            for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = rng.normal(0.0, sd);
            break;
        }
        case InitKind::MOD_DIAG: {
            if (!(scheme.alpha >= 0.0) || !std::isfinite(scheme.alpha))
                throw std::invalid_argument("init_weights: alpha must be nonnegative");
            double sd = scheme.alpha / std::sqrt(static_cast<double>(n_in));
            for (std::size_t i = 0; i < n_out; ++i)
                for (std::size_t j = 0; j < n_in; ++j)
                    w(i, j) = (j == i % n_in ? 1.0 : 0.0) + (sd > 0.0 ? rng.normal(0.0, sd) : 0.0);
            break;
        }
    }
    return w;
}

std::vector<double> gain_coefficients(const Mat& w, std::span<const double> x_prev) {
    if (x_prev.size() != w.cols())
        throw std::invalid_argument("gain_coefficients: x size must match fan-in");
    for (double x : x_prev)
        if (x == 0.0) throw std::invalid_argument("gain_coefficients: x entries must be nonzero");

    std::vector<double> gains(w.rows());
    for (std::size_t i = 0; i < w.rows(); ++i) {
        std::size_t diag = i % w.cols();
        double a = w(i, diag);
        for (std::size_t j = 0; j < w.cols(); ++j)
            if (j != diag) a += w(i, j) * x_prev[j] / x_prev[diag];
        gains[i] = a;
    }
    return gains;
}

GainStats gain_distribution_check(std::size_t n, double alpha, std::span<const double> x_prev,
                                  std::size_t samples, Rng& rng, std::size_t unit_index) {
    if (n == 0 || samples < 2)
        throw std::invalid_argument("gain_distribution_check: need n > 0 and samples >= 2");
    if (unit_index >= n) throw std::invalid_argument("gain_distribution_check: unit_index out of range");
    if (x_prev.size() != n)
        throw std::invalid_argument("gain_distribution_check: x size must match n");

    for (double x : x_prev)
        if (x == 0.0) throw std::invalid_argument("gain_distribution_check: x entries must be nonzero");

    // Entries are iid across the matrix, so drawing only the row feeding
    // unit_index gives the same gain distribution at 1/n the cost.
    double sd = alpha / std::sqrt(static_cast<double>(n));
    std::size_t row_diag = unit_index % n;
    double s = 0.0, s2 = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        double a = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double w = (j == row_diag ? 1.0 : 0.0) + rng.normal(0.0, sd);
            a += (j == row_diag) ? w : w * x_prev[j] / x_prev[row_diag];
        }
        s += a;
        s2 += a * a;
    }
    double m = s / static_cast<double>(samples);

    GainStats st;
    st.mean = m;
    st.variance = (s2 - static_cast<double>(samples) * m * m) / static_cast<double>(samples - 1);
    double ratio2 = 0.0;
    std::size_t diag = unit_index % n;
    for (std::size_t j = 0; j < n; ++j)
        if (j != diag) ratio2 += (x_prev[j] / x_prev[diag]) * (x_prev[j] / x_prev[diag]);
    st.predicted_variance = alpha * alpha / static_cast<double>(n) * (1.0 + ratio2);
    return st;
}

}  // namespace tanhseed
