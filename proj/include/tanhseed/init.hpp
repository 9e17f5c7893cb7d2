#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tanhseed/mat.hpp"
#include "tanhseed/rng.hpp"

namespace tanhseed {

// Weight initialization schemes. MOD_DIAG draws W = D + Z where D is the
// wrapped-diagonal 0/1 matrix from d_matrix and Z is iid Gaussian noise
// with stddev alpha / sqrt(fan_in); the Xavier variants are the usual
// fan-in/fan-out scaled baselines.
enum class InitKind { XAVIER_UNIFORM, XAVIER_NORMAL, MOD_DIAG };

struct InitScheme {
    InitKind kind = InitKind::XAVIER_NORMAL;
    double alpha = 0.085;  // noise scale, MOD_DIAG only

    static InitScheme xavier_uniform() { return {InitKind::XAVIER_UNIFORM, 0.0}; }
    static InitScheme xavier_normal() { return {InitKind::XAVIER_NORMAL, 0.0}; }
    static InitScheme mod_diag(double alpha = 0.085) { return {InitKind::MOD_DIAG, alpha}; }
};

// 0/1 matrix with ones where row == col (mod n_in): an identity wrapped
// cyclically down the rows, so every input unit feeds exactly
// ceil-or-floor(n_out / n_in) output units.
Mat d_matrix(std::size_t n_out, std::size_t n_in);

// One weight matrix (n_out x n_in) drawn per the scheme. Entries are drawn
// row-major, so a fixed rng seed pins the matrix exactly.
Mat init_weights(const InitScheme& scheme, std::size_t n_out, std::size_t n_in, Rng& rng);

// Per-unit gain of the affine map at input x: writing the preactivation of
// unit i as a_i * x_{j*} with j* = i mod n_in (the wrapped diagonal entry),
//   a_i = W[i][j*] + sum_{j != j*} W[i][j] * x[j] / x[j*].
// All entries of x must be nonzero.
std::vector<double> gain_coefficients(const Mat& w, std::span<const double> x_prev);

struct GainStats {
    double mean = 0.0;
    double variance = 0.0;            // unbiased sample variance
    double predicted_variance = 0.0;  // alpha^2/n * (1 + sum_{j != j*} (x_j/x_{j*})^2)
};

// Draws `samples` MOD_DIAG matrices (n x n) and accumulates the empirical
// distribution of the gain of one unit, against the closed-form Gaussian
// prediction mean 1, variance as above.
GainStats gain_distribution_check(std::size_t n, double alpha, std::span<const double> x_prev,
                                  std::size_t samples, Rng& rng, std::size_t unit_index = 0);

}  // namespace tanhseed
