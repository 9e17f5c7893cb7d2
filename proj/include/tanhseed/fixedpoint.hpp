#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace tanhseed {

// Scalar analysis of the map x -> tanh(a*x). The map has a unique positive
// fixed point xi(a) exactly when a > 1; below that the only fixed point is 0.

// Positive fixed point of tanh(a*x) for a > 1, else 0. Bisection bracket
// followed by Newton polish; absolute error at most tol.
double xi(double a, double tol = 1e-10);

enum class FixedPointClass { ZERO, POS_FIXED, NEG_FIXED, MAX_ITER };

struct ConvergenceReport {
    double limit = 0.0;
    std::size_t iterations_used = 0;
    FixedPointClass classification = FixedPointClass::ZERO;
};

// Iterates x -> tanh(a*x) from x0. Stops when the iterate is within tol of
// a fixed point (|x| <= tol, or successive difference <= tol away from 0),
// else reports MAX_ITER. Classification is the sign of the reached limit.
ConvergenceReport iterate_map(double a, double x0, std::size_t max_iter = 100000,
                              double tol = 1e-10);

// Finite sequence of per-layer gain values; all entries must be positive.
class GainSequence {
public:
    GainSequence() = default;
    explicit GainSequence(std::vector<double> values);

    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }

private:
    std::vector<double> values_;
};

// Applies the maps tanh(a_n * .) for each entry of seq, then up to tail_len
// further maps with gain tail_value, with early exit once successive
// iterates differ by at most tol. Models an infinite tail of identical
// layers appended to a finite prefix.
double compose_limit(const GainSequence& seq, double x0, double tail_value,
                     std::size_t tail_len, double tol = 1e-10);

// xi over a grid of gains, as (a, xi(a)) pairs.
std::vector<std::pair<double, double>> scan_fixed_points(std::span<const double> a_grid);

}  // namespace tanhseed
