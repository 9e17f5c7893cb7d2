#pragma once

#include <cstddef>

#include "tanhseed/mat.hpp"
#include "tanhseed/network.hpp"
#include "tanhseed/tape.hpp"

namespace tanhseed {

// Truncated Taylor jet to second order along one input coordinate,
// batched over columns: v holds values, d1 and d2 the first and second
// directional derivatives. All three live on the tape, so reverse mode
// through them yields parameter gradients of derivative-valued losses.
struct Jet2 {
    Value v, d1, d2;
};

// Propagates the jet (x, e_wiggle, 0) through the network for every column
// of points (input_dim x batch). Affine layers map all three components
// linearly; tanh applies
//   u  = tanh(v)
//   d1' = (1 - u^2) d1
//   d2' = (1 - u^2) d2 - 2 u (1 - u^2) d1^2.
Jet2 jet_forward(Tape& tape, const TapedNet& net, const Mat& points, std::size_t wiggle_dim);

// Single tanh jet step, exposed for composing custom heads.
Jet2 jet_tanh(Tape& tape, const Jet2& in);

// Jets along input coordinates 0 and 1 in one pass, for residuals that
// need (u, u_x, u_xx, u_t): the value chain and the tanh factors are
// computed once and shared by both directions, and the coordinate-1
// channel stops at first order. Values match two jet_forward passes bit
// for bit; only the cost differs.
struct JetXT {
    Value v, dx1, dx2, dt1;
};
JetXT jet_forward_xt(Tape& tape, const TapedNet& net, const Mat& points);

struct JetCheckResult {
    double d1_err = 0.0;
    double d2_err = 0.0;
};

// Compares jet derivatives against central finite differences of the plain
// forward pass. Errors are entrywise, relative above magnitude 1 and
// absolute below, maxed over the whole batch.
JetCheckResult jet_check(const NetworkArch& arch, const Weights& weights, const Mat& points,
                         std::size_t wiggle_dim, double h = 1e-4);

}  // namespace tanhseed
