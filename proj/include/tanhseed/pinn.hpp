#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tanhseed/jet.hpp"
#include "tanhseed/network.hpp"
#include "tanhseed/rng.hpp"

namespace tanhseed {

// Physics-informed training on the space-time box x in [-1, 1], t in
// [0, 1], for two scalar PDEs with Dirichlet boundaries:
//   Burgers      u_t + u u_x - coeff u_xx = 0, u(x,0) = -sin(pi x),
//                u(+-1,t) = 0
//   Allen-Cahn   u_t - coeff u_xx + reaction(u)/coeff = 0,
//                u(x,0) = x^2 cos(pi x), u(+-1,t) = -1
// with reaction either u^3 - u (MINUS_LINEAR) or u^3 + u (PLUS_LINEAR).

enum class PdeKind { BURGERS, ALLEN_CAHN };
enum class AcReaction { MINUS_LINEAR, PLUS_LINEAR };

struct PdeProblem {
    PdeKind kind = PdeKind::BURGERS;
    double coeff = 0.01;
    AcReaction reaction = AcReaction::MINUS_LINEAR;

    static PdeProblem burgers(double nu = 0.01);
    static PdeProblem allen_cahn(double d = 0.01,
                                 AcReaction reaction = AcReaction::MINUS_LINEAR);

    double initial_value(double x) const;
    double boundary_value() const;  // both walls share one value
};

double burgers_residual(double u, double u_t, double u_x, double u_xx, double nu);
double allen_cahn_residual(double u, double u_t, double u_xx, double d, AcReaction reaction);

// Elementwise tape forms over batched rows.
Value burgers_residual(Tape& tape, Value u, Value u_t, Value u_x, Value u_xx, double nu);
Value allen_cahn_residual(Tape& tape, Value u, Value u_t, Value u_xx, double d,
                          AcReaction reaction);

// Point groups as (x; t) columns. Any group may be empty.
struct CollocationSet {
    Mat interior;  // 2 x n_interior
    Mat initial;   // 2 x n_initial, t = 0
    Mat boundary;  // 2 x n_boundary, x alternating -1, +1
};

CollocationSet sample_collocation(std::size_t n_interior, std::size_t n_initial,
                                  std::size_t n_boundary, Rng& rng);

// Mean-square residual, initial and boundary mismatch, unit-weighted sum.
// Empty groups contribute exact zeros.
struct PinnTerms {
    Value total, residual, ic, bc;
};

PinnTerms pinn_loss(Tape& tape, const TapedNet& net, const PdeProblem& problem,
                    const CollocationSet& colloc);

struct PinnConfig {
    std::size_t n_interior = 2000, n_initial = 200, n_boundary = 200;
    std::size_t adam_iters = 300, lbfgs_iters = 300;
    double adam_lr = 1e-3;
    std::uint64_t seed = 0;
};

struct PinnTraceRow {
    std::size_t iter = 0;       // continuous across phases
    const char* phase = "";     // "adam" or "lbfgs"
    double loss = 0.0, residual = 0.0, ic = 0.0, bc = 0.0;
};

struct PinnResult {
    std::vector<PinnTraceRow> trace;
    Weights weights;
    double final_loss = 0.0;
};

// Full-batch Adam for adam_iters steps, then L-BFGS. One trace row per
// Adam step and per accepted L-BFGS iterate; the L-BFGS segment is
// non-increasing in loss. Initialization and collocation sampling both
// derive from config.seed.
PinnResult train_pinn(const NetworkArch& arch, const InitScheme& scheme,
                      const PdeProblem& problem, const PinnConfig& config);

// Network field values on the tensor grid: entry (i, j) = u(xs[i], ts[j]).
Mat evaluate_solution(const NetworkArch& arch, const Weights& weights,
                      std::span<const double> xs, std::span<const double> ts);

}  // namespace tanhseed
