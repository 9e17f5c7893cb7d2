#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace tanhseed {

// Limited-memory BFGS with a strong Wolfe line search.
//
// The inverse Hessian is represented by the last `memory` curvature pairs
// via the two-loop recursion, seeded each iteration with the s'y / y'y
// scaling of the newest pair. Pairs with s'y <= 0 are discarded, which
// keeps the recursion positive definite even when the line search stops
// at a sufficient-decrease-only point.

// Evaluates f at x and writes the gradient into grad (same length).
using Objective = std::function<double(std::span<const double>, std::span<double>)>;

// Called after every accepted iterate.
using IterCallback = std::function<void(std::size_t, std::span<const double>, double)>;

struct LbfgsOptions {
    std::size_t max_iter = 300;
    std::size_t memory = 10;
    double grad_tol = 1e-10;  // stop when the gradient 2-norm drops below
    double c1 = 1e-4;         // sufficient decrease
    double c2 = 0.9;          // curvature; tighten toward 0 for a near-exact search
    std::size_t max_line_iter = 30;
};

enum class LbfgsStatus { GRAD_CONVERGED, MAX_ITER, LINE_SEARCH_FAILED };

struct LbfgsResult {
    std::vector<double> x;
    double f = 0.0;
    std::size_t iterations = 0;
    LbfgsStatus status = LbfgsStatus::MAX_ITER;
    std::vector<double> trace;  // f at x0, then after each accepted step
};

// Minimizes obj from x0. If a line search along the quasi-Newton direction
// fails, the memory is dropped and one steepest-descent restart is tried
// before giving up; an x0 already at grad_tol returns with 0 iterations.
LbfgsResult lbfgs_optimize(const Objective& obj, std::vector<double> x0,
                           const LbfgsOptions& opts = {},
                           const IterCallback& on_iterate = {});

}  // namespace tanhseed
