#include "tanhseed/fixedpoint.hpp"

#include <cmath>
#include <stdexcept>

namespace tanhseed {

namespace {

void check_gain(double a) {
    if (!std::isfinite(a) || a <= 0.0)
        throw std::invalid_argument("gain must be positive and finite");
}

void check_tol(double tol) {
    if (!std::isfinite(tol) || tol <= 0.0)
        throw std::invalid_argument("tolerance must be positive and finite");
}

}  // namespace

double xi(double a, double tol) {
    check_gain(a);
    check_tol(tol);
    if (a <= 1.0) return 0.0;

    // g(x) = tanh(a*x) - x has g > 0 just above 0 and g(1) < 0 for a > 1,
    // so bisection on [lo, 1] is safe once lo is small enough to be on the
    // positive side.
    auto g = [a](double x) { return std::tanh(a * x) - x; };
    double lo = 1e-12, hi = 1.0;
    while (g(lo) <= 0.0) {
        lo *= 0.5;
        if (lo < 1e-300) throw std::runtime_error("xi: failed to bracket fixed point");
    }
    for (int i = 0; i < 60 && hi - lo > tol * 0.5; ++i) {
        double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    // Newton polish; the root is simple (g'(xi) = a*sech^2 - 1 < 0), so a
    // few steps reach machine accuracy from the bisection estimate.
    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 4; ++i) {
        double th = std::tanh(a * x);
        double deriv = a * (1.0 - th * th) - 1.0;
        if (deriv == 0.0) break;
        x -= (th - x) / deriv;
    }
    return x;
}

ConvergenceReport iterate_map(double a, double x0, std::size_t max_iter, double tol) {
    check_gain(a);
    check_tol(tol);
    if (!std::isfinite(x0)) throw std::invalid_argument("x0 must be finite");
    if (max_iter == 0) throw std::invalid_argument("max_iter must be at least 1");

    ConvergenceReport rep;
    double x = x0;
    if (x == 0.0) {
        // exact fixed point at the origin; no iterations needed
        rep.limit = 0.0;
        rep.iterations_used = 0;
        rep.classification = FixedPointClass::ZERO;
        return rep;
    }
    for (std::size_t n = 1; n <= max_iter; ++n) {
        double xn = std::tanh(a * x);
        rep.iterations_used = n;
        if (std::abs(xn) <= tol) {
            rep.limit = xn;
            rep.classification = FixedPointClass::ZERO;
            return rep;
        }
        // The successive-difference stop is only valid where a nonzero
        // fixed point exists (a > 1); for a <= 1 the trajectory decays to 0
        // and must be run until it actually enters the zero band, else a
        // slowly decaying iterate would be misread as a fixed point.
        if (a > 1.0 && std::abs(xn - x) <= tol) {
            rep.limit = xn;
            rep.classification = xn > 0.0 ? FixedPointClass::POS_FIXED
                                          : FixedPointClass::NEG_FIXED;
            return rep;
        }
        x = xn;
    }
    rep.limit = x;
    rep.classification = FixedPointClass::MAX_ITER;
    return rep;
}

GainSequence::GainSequence(std::vector<double> values) : values_(std::move(values)) {
    for (double a : values_) check_gain(a);
}

double compose_limit(const GainSequence& seq, double x0, double tail_value,
                     std::size_t tail_len, double tol) {
    check_gain(tail_value);
    check_tol(tol);
    if (!std::isfinite(x0)) throw std::invalid_argument("x0 must be finite");

    double x = x0;
    for (double a : seq.values()) x = std::tanh(a * x);
    for (std::size_t n = 0; n < tail_len; ++n) {
        double xn = std::tanh(tail_value * x);
        bool settled = std::abs(xn - x) <= tol;
        x = xn;
        if (settled) break;
    }
    return x;
}

std::vector<std::pair<double, double>> scan_fixed_points(std::span<const double> a_grid) {
    std::vector<std::pair<double, double>> out;
    out.reserve(a_grid.size());
    for (double a : a_grid) out.emplace_back(a, xi(a));
    return out;
}

}  // namespace tanhseed
