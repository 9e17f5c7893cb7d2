#include "tanhseed/lbfgs.hpp"

#include <cmath>
#include <stdexcept>

namespace tanhseed {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double nrm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

struct Eval {
    double phi = 0.0, dphi = 0.0;
};

// phi(alpha) = f(x + alpha d) and its derivative along d; the gradient at
// the trial point is left in g.
Eval eval_phi(const Objective& obj, std::span<const double> x, std::span<const double> d,
              double alpha, std::vector<double>& xt, std::vector<double>& g) {
    for (std::size_t i = 0; i < x.size(); ++i) xt[i] = x[i] + alpha * d[i];
    Eval e;
    e.phi = obj(xt, g);
    e.dphi = dot(g, d);
    return e;
}

// Minimizer of the cubic through (a, fa, da) and (b, fb, db), clamped away
// from the interval ends; bisection when the fit is degenerate.
double cubic_step(double a, double fa, double da, double b, double fb, double db) {
    double lo = std::min(a, b), hi = std::max(a, b);
    double mid = 0.5 * (lo + hi);
    if (!std::isfinite(fa) || !std::isfinite(fb) || !std::isfinite(da) || !std::isfinite(db))
        return mid;
    double d1 = da + db - 3.0 * (fa - fb) / (a - b);
    double disc = d1 * d1 - da * db;
    if (disc < 0.0) return mid;
    double d2 = std::sqrt(disc) * (b > a ? 1.0 : -1.0);
    double denom = db - da + 2.0 * d2;
    if (denom == 0.0) return mid;
    double t = b - (b - a) * (db + d2 - d1) / denom;
    if (!std::isfinite(t)) return mid;
    double margin = 0.1 * (hi - lo);
    return std::min(std::max(t, lo + margin), hi - margin);
}

struct SearchOut {
    bool ok = false;
    double alpha = 0.0;
    double f = 0.0;
};

// Strong Wolfe zoom between a sufficient-decrease end (alo) and the other
// bracket end. glo tracks the gradient at alo so an exhausted search can
// still return the best sufficient-decrease point.
SearchOut zoom(const Objective& obj, std::span<const double> x, std::span<const double> d,
               double f0, double dphi0, const LbfgsOptions& opts, double alo, Eval elo,
               std::vector<double> glo, double ahi, Eval ehi, std::vector<double>& xt,
               std::vector<double>& g) {
    SearchOut out;
    for (std::size_t it = 0; it < opts.max_line_iter; ++it) {
        if (std::abs(ahi - alo) <= 1e-16 * std::max(1.0, std::abs(alo))) break;
        double at = cubic_step(alo, elo.phi, elo.dphi, ahi, ehi.phi, ehi.dphi);
        Eval et = eval_phi(obj, x, d, at, xt, g);
        if (!std::isfinite(et.phi) || !std::isfinite(et.dphi) ||
            et.phi > f0 + opts.c1 * at * dphi0 || et.phi >= elo.phi) {
            ahi = at;
            ehi = et;
            continue;
        }
        if (std::abs(et.dphi) <= -opts.c2 * dphi0) {
            out.ok = true;
            out.alpha = at;
            out.f = et.phi;
            return out;  // g holds the gradient at at
        }
        if (et.dphi * (ahi - alo) >= 0.0) {
            ahi = alo;
            ehi = elo;
        }
        alo = at;
        elo = et;
        glo = g;
    }
    // Curvature never satisfied; fall back to the best Armijo point.
    if (alo > 0.0 && elo.phi < f0) {
        out.ok = true;
        out.alpha = alo;
        out.f = elo.phi;
        g = glo;
    }
    return out;
}

// Bracketing phase of the strong Wolfe search. On success g holds the
// gradient at the accepted step.
SearchOut wolfe_search(const Objective& obj, std::span<const double> x,
                       std::span<const double> d, double f0, std::span<const double> g0,
                       double alpha_init, const LbfgsOptions& opts, std::vector<double>& xt,
                       std::vector<double>& g) {
    SearchOut out;
    double dphi0 = dot(g0, d);
    if (!(dphi0 < 0.0)) return out;  // not a descent direction

    double aprev = 0.0, a = alpha_init;
    Eval eprev{f0, dphi0};
    std::vector<double> gprev(g0.begin(), g0.end());
    const double amax = 1e20;

    for (std::size_t it = 0; it < opts.max_line_iter; ++it) {
        Eval e = eval_phi(obj, x, d, a, xt, g);
        if (!std::isfinite(e.phi) || !std::isfinite(e.dphi) ||
            e.phi > f0 + opts.c1 * a * dphi0 || (it > 0 && e.phi >= eprev.phi))
            return zoom(obj, x, d, f0, dphi0, opts, aprev, eprev, std::move(gprev), a, e, xt, g);
        if (std::abs(e.dphi) <= -opts.c2 * dphi0) {
            out.ok = true;
            out.alpha = a;
            out.f = e.phi;
            return out;
        }
        if (e.dphi >= 0.0)
            return zoom(obj, x, d, f0, dphi0, opts, a, e, g, aprev, eprev, xt, g);
        aprev = a;
        eprev = e;
        gprev = g;
        a = std::min(2.0 * a, amax);
        if (a >= amax) break;
    }
    return out;
}

}  // namespace

LbfgsResult lbfgs_optimize(const Objective& obj, std::vector<double> x0,
                           const LbfgsOptions& opts, const IterCallback& on_iterate) {
    if (x0.empty()) throw std::invalid_argument("lbfgs: empty start point");
    if (opts.memory == 0) throw std::invalid_argument("lbfgs: memory must be positive");
    if (!(opts.c1 > 0.0 && opts.c1 < opts.c2 && opts.c2 < 1.0))
        throw std::invalid_argument("lbfgs: need 0 < c1 < c2 < 1");
    if (opts.max_line_iter == 0) throw std::invalid_argument("lbfgs: max_line_iter must be positive");

    const std::size_t n = x0.size();
    LbfgsResult res;
    res.x = std::move(x0);
    std::vector<double> g(n), xt(n), gnew(n);
    res.f = obj(res.x, g);
    if (!std::isfinite(res.f)) throw std::runtime_error("lbfgs: objective non-finite at start");
    res.trace.push_back(res.f);

    std::vector<std::vector<double>> S, Y;
    std::vector<double> rho;
    std::vector<double> d(n), q(n), alpha_buf;

    std::size_t k = 0;
    while (true) {
        if (nrm2(g) <= opts.grad_tol) {
            res.status = LbfgsStatus::GRAD_CONVERGED;
            break;
        }
        if (k >= opts.max_iter) {
            res.status = LbfgsStatus::MAX_ITER;
            break;
        }

        // two-loop recursion: d = -H g
        q.assign(g.begin(), g.end());
        const std::size_t m = S.size();
        alpha_buf.assign(m, 0.0);
        for (std::size_t i = m; i-- > 0;) {
            alpha_buf[i] = rho[i] * dot(S[i], q);
            for (std::size_t j = 0; j < n; ++j) q[j] -= alpha_buf[i] * Y[i][j];
        }
        if (m > 0) {
            double gamma = dot(S[m - 1], Y[m - 1]) / dot(Y[m - 1], Y[m - 1]);
            for (double& v : q) v *= gamma;
        }
        for (std::size_t i = 0; i < m; ++i) {
            double beta = rho[i] * dot(Y[i], q);
            for (std::size_t j = 0; j < n; ++j) q[j] += (alpha_buf[i] - beta) * S[i][j];
        }
        for (std::size_t j = 0; j < n; ++j) d[j] = -q[j];

        double alpha_init = m > 0 ? 1.0 : std::min(1.0, 1.0 / nrm2(g));
        SearchOut ls = wolfe_search(obj, res.x, d, res.f, g, alpha_init, opts, xt, gnew);
        if (!ls.ok) {
            // drop the memory and retry once along -g
            S.clear();
            Y.clear();
            rho.clear();
            for (std::size_t j = 0; j < n; ++j) d[j] = -g[j];
            ls = wolfe_search(obj, res.x, d, res.f, g, std::min(1.0, 1.0 / nrm2(g)), opts,
                              xt, gnew);
            if (!ls.ok) {
                res.status = LbfgsStatus::LINE_SEARCH_FAILED;
                break;
            }
        }

        std::vector<double> s(n), y(n);
        for (std::size_t j = 0; j < n; ++j) {
            s[j] = ls.alpha * d[j];
            y[j] = gnew[j] - g[j];
            res.x[j] += s[j];
        }
        double sy = dot(s, y);
        if (sy > 0.0) {
            if (S.size() == opts.memory) {
                S.erase(S.begin());
                Y.erase(Y.begin());
                rho.erase(rho.begin());
            }
            S.push_back(std::move(s));
            Y.push_back(std::move(y));
            rho.push_back(1.0 / sy);
        }
        res.f = ls.f;
        g = gnew;
        ++k;
        res.trace.push_back(res.f);
        if (on_iterate) on_iterate(k, res.x, res.f);
    }
    res.iterations = k;
    return res;
}

}  // namespace tanhseed
