#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tanhseed {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// First/second moment accumulators; t counts completed steps and drives
// the bias correction.
struct AdamState {
    std::vector<double> m, v;
    std::size_t t = 0;

    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

// One bias-corrected Adam update in place. With zero moments the first
// step moves each coordinate by about lr in the direction of -grad.
inline void adam_step(AdamState& state, std::span<double> params,
                      std::span<const double> grads, const AdamConfig& cfg) {
    if (params.size() != state.m.size() || grads.size() != state.m.size())
        throw std::invalid_argument("adam_step: size mismatch");
    if (!(cfg.lr > 0.0) || !(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) ||
        !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0) || !(cfg.eps > 0.0))
        throw std::invalid_argument("adam_step: bad config");

    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        if (!std::isfinite(g))
            throw std::runtime_error("adam_step: non-finite gradient at index " +
                                     std::to_string(i));
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

}  // namespace tanhseed
