#include "tanhseed/pinn.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "tanhseed/adam.hpp"
#include "tanhseed/lbfgs.hpp"

namespace tanhseed {

namespace {

constexpr std::uint64_t kStreamInit = 1;
constexpr std::uint64_t kStreamColloc = 2;

void check_pinn_arch(const NetworkArch& arch) {
    if (arch.input_dim() != 2 || arch.output_dim() != 1)
        throw std::invalid_argument("pinn: architecture must map (x, t) to a scalar");
}

void check_coeff(double c) {
    if (!(c > 0.0)) throw std::invalid_argument("pinn: coefficient must be positive");
}

}  // namespace

PdeProblem PdeProblem::burgers(double nu) {
    check_coeff(nu);
    return {PdeKind::BURGERS, nu, AcReaction::MINUS_LINEAR};
}

PdeProblem PdeProblem::allen_cahn(double d, AcReaction reaction) {
    check_coeff(d);
    return {PdeKind::ALLEN_CAHN, d, reaction};
}

double PdeProblem::initial_value(double x) const {
    if (kind == PdeKind::BURGERS) return -std::sin(std::numbers::pi * x);
    return x * x * std::cos(std::numbers::pi * x);
}

double PdeProblem::boundary_value() const {
    return kind == PdeKind::BURGERS ? 0.0 : -1.0;
}

double burgers_residual(double u, double u_t, double u_x, double u_xx, double nu) {
    check_coeff(nu);
    return u_t + u * u_x - nu * u_xx;
}

double allen_cahn_residual(double u, double u_t, double u_xx, double d, AcReaction reaction) {
    check_coeff(d);
    double lin = reaction == AcReaction::MINUS_LINEAR ? -u : u;
    return u_t - d * u_xx + (u * u * u + lin) / d;
}

Value burgers_residual(Tape& tape, Value u, Value u_t, Value u_x, Value u_xx, double nu) {
    check_coeff(nu);
    Value adv = tape.mul(u, u_x);
    Value visc = tape.mul(tape.scalar(nu), u_xx);
    return tape.sub(tape.add(u_t, adv), visc);
}

Value allen_cahn_residual(Tape& tape, Value u, Value u_t, Value u_xx, double d,
                          AcReaction reaction) {
    check_coeff(d);
    Value cubic = tape.mul(tape.square(u), u);
    Value react = reaction == AcReaction::MINUS_LINEAR ? tape.sub(cubic, u)
                                                       : tape.add(cubic, u);
    Value diff = tape.mul(tape.scalar(d), u_xx);
    return tape.add(tape.sub(u_t, diff), tape.div(react, tape.scalar(d)));
}

CollocationSet sample_collocation(std::size_t n_interior, std::size_t n_initial,
                                  std::size_t n_boundary, Rng& rng) {
    CollocationSet cs;
    if (n_interior > 0) {
        cs.interior = Mat(2, n_interior);
        for (std::size_t j = 0; j < n_interior; ++j) {
            cs.interior(0, j) = rng.uniform(-1.0, 1.0);
            cs.interior(1, j) = rng.uniform(0.0, 1.0);
        }
    }
    if (n_initial > 0) {
        cs.initial = Mat(2, n_initial);
        for (std::size_t j = 0; j < n_initial; ++j) {
            cs.initial(0, j) = rng.uniform(-1.0, 1.0);
            cs.initial(1, j) = 0.0;
        }
    }
    if (n_boundary > 0) {
        cs.boundary = Mat(2, n_boundary);
        for (std::size_t j = 0; j < n_boundary; ++j) {
            cs.boundary(0, j) = (j % 2 == 0) ? -1.0 : 1.0;
            cs.boundary(1, j) = rng.uniform(0.0, 1.0);
        }
    }
    return cs;
}

PinnTerms pinn_loss(Tape& tape, const TapedNet& net, const PdeProblem& problem,
                    const CollocationSet& colloc) {
    if (net.arch == nullptr) throw std::invalid_argument("pinn_loss: uninitialized net");
    check_pinn_arch(*net.arch);

    PinnTerms terms;

    if (!colloc.interior.empty()) {
        JetXT jet = jet_forward_xt(tape, net, colloc.interior);
        Value res = problem.kind == PdeKind::BURGERS
                        ? burgers_residual(tape, jet.v, jet.dt1, jet.dx1, jet.dx2,
                                           problem.coeff)
                        : allen_cahn_residual(tape, jet.v, jet.dt1, jet.dx2, problem.coeff,
                                              problem.reaction);
        terms.residual = tape.mean(tape.square(res));
    } else {
        terms.residual = tape.scalar(0.0);
    }

    if (!colloc.initial.empty()) {
        Value input = tape.leaf(colloc.initial);
        Value pred = forward_taped(tape, net, input);
        Mat target(1, colloc.initial.cols());
        for (std::size_t j = 0; j < colloc.initial.cols(); ++j)
            target(0, j) = problem.initial_value(colloc.initial(0, j));
        terms.ic = tape.mean(tape.square(tape.sub(pred, tape.leaf(std::move(target)))));
    } else {
        terms.ic = tape.scalar(0.0);
    }

    if (!colloc.boundary.empty()) {
        Value input = tape.leaf(colloc.boundary);
        Value pred = forward_taped(tape, net, input);
        Value target = tape.scalar(problem.boundary_value());
        terms.bc = tape.mean(tape.square(tape.sub(pred, target)));
    } else {
        terms.bc = tape.scalar(0.0);
    }

    terms.total = tape.add(tape.add(terms.residual, terms.ic), terms.bc);
    return terms;
}

PinnResult train_pinn(const NetworkArch& arch, const InitScheme& scheme,
                      const PdeProblem& problem, const PinnConfig& config) {
    check_pinn_arch(arch);

    Rng init_rng(mix_seed(config.seed, kStreamInit));
    Weights weights = init_network(arch, scheme, init_rng);
    Rng colloc_rng(mix_seed(config.seed, kStreamColloc));
    CollocationSet colloc = sample_collocation(config.n_interior, config.n_initial,
                                               config.n_boundary, colloc_rng);

    std::vector<double> params = pack_params(weights);

    // Shared full-batch evaluation; keeps the decomposition of the most
    // recent call so trace rows can be written without re-evaluating.
    struct TermVals {
        double total = 0.0, residual = 0.0, ic = 0.0, bc = 0.0;
    };
    TermVals last;
    auto eval_loss = [&](std::span<const double> p, std::span<double> grad_out,
                         bool want_grad) -> double {
        Weights w = unpack_params(arch, p);
        Tape tape;
        TapedNet net = make_taped(tape, arch, w);
        PinnTerms terms = pinn_loss(tape, net, problem, colloc);
        last.total = tape.scalar_val(terms.total);
        last.residual = tape.scalar_val(terms.residual);
        last.ic = tape.scalar_val(terms.ic);
        last.bc = tape.scalar_val(terms.bc);
        if (want_grad) {
            auto param_vals = taped_params(net);
            auto grads = tape.gradients(terms.total, param_vals);
            std::size_t pos = 0;
            for (const Mat& g : grads)
                for (std::size_t i = 0; i < g.size(); ++i) grad_out[pos++] = g.data()[i];
        }
        return last.total;
    };

    PinnResult result;
    std::vector<double> grad(params.size());

    AdamState state(params.size());
    AdamConfig adam_cfg;
    adam_cfg.lr = config.adam_lr;
    adam_cfg.beta1 = 0.9;
    adam_cfg.beta2 = 0.999;

    for (std::size_t it = 1; it <= config.adam_iters; ++it) {
        double loss = eval_loss(params, grad, true);
        if (!std::isfinite(loss))
            throw std::runtime_error("train_pinn: non-finite loss in adam phase at iter " +
                                     std::to_string(it));
        adam_step(state, params, grad, adam_cfg);
        // row reports the loss the step was taken from
        result.trace.push_back({it, "adam", loss, last.residual, last.ic, last.bc});
    }

    if (config.lbfgs_iters > 0) {
        LbfgsOptions opts;
        opts.max_iter = config.lbfgs_iters;
        opts.memory = 10;
        std::size_t base = config.adam_iters;
        auto objective = [&](std::span<const double> p, std::span<double> g) {
            return eval_loss(p, g, true);
        };
        auto on_iterate = [&](std::size_t k, std::span<const double> xacc, double f) {
            // the line search's last evaluation is normally the accepted
            // point, so `last` already decomposes this f; a search that
            // fell back to an earlier trial leaves `last` stale, so
            // refresh it then
            if (f != last.total) eval_loss(xacc, grad, false);
            result.trace.push_back({base + k, "lbfgs", f, last.residual, last.ic, last.bc});
        };
        LbfgsResult lb = lbfgs_optimize(objective, params, opts, on_iterate);
        params = std::move(lb.x);
    } else if (config.adam_iters > 0) {
        // refresh decomposition at the final parameters
        eval_loss(params, grad, false);
    }

    if (config.adam_iters == 0 && config.lbfgs_iters == 0) eval_loss(params, grad, false);

    result.weights = unpack_params(arch, params);
    result.final_loss = last.total;
    return result;
}

Mat evaluate_solution(const NetworkArch& arch, const Weights& weights,
                      std::span<const double> xs, std::span<const double> ts) {
    check_pinn_arch(arch);
    if (xs.empty() || ts.empty())
        throw std::invalid_argument("evaluate_solution: empty grid");
    Mat points(2, xs.size() * ts.size());
    std::size_t col = 0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = 0; j < ts.size(); ++j, ++col) {
            points(0, col) = xs[i];
            points(1, col) = ts[j];
        }
    Mat flat = forward(arch, weights, points);
    Mat grid(xs.size(), ts.size());
    col = 0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = 0; j < ts.size(); ++j, ++col) grid(i, j) = flat(0, col);
    return grid;
}

}  // namespace tanhseed
