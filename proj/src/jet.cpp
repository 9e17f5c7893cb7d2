#include "tanhseed/jet.hpp"

#include <cmath>
#include <stdexcept>

namespace tanhseed {

Jet2 jet_tanh(Tape& tape, const Jet2& in) {
    Value u = tape.tanh(in.v);
    Value sech2 = tape.sub(tape.scalar(1.0), tape.square(u));
    Jet2 out;
    out.v = u;
    out.d1 = tape.mul(sech2, in.d1);
    Value curv = tape.mul(u, tape.mul(sech2, tape.square(in.d1)));
    out.d2 = tape.sub(tape.mul(sech2, in.d2), tape.mul(tape.scalar(2.0), curv));
    return out;
}

Jet2 jet_forward(Tape& tape, const TapedNet& net, const Mat& points, std::size_t wiggle_dim) {
    if (net.arch == nullptr) throw std::invalid_argument("jet_forward: uninitialized net");
    if (points.rows() != net.arch->input_dim())
        throw std::invalid_argument("jet_forward: points rows must equal input dim");
    if (wiggle_dim >= points.rows())
        throw std::invalid_argument("jet_forward: wiggle_dim out of range");

    Mat seed(points.rows(), points.cols());
    for (std::size_t j = 0; j < points.cols(); ++j) seed(wiggle_dim, j) = 1.0;

    Jet2 jet;
    jet.v = tape.leaf(points);
    jet.d1 = tape.leaf(std::move(seed));
    jet.d2 = tape.leaf(Mat(points.rows(), points.cols()));

    const std::size_t layers = net.w.size();
    for (std::size_t l = 0; l < layers; ++l) {
        Jet2 lin;
        lin.v = tape.add_bias(tape.matmul(net.w[l], jet.v), net.b[l]);
        lin.d1 = tape.matmul(net.w[l], jet.d1);
        lin.d2 = tape.matmul(net.w[l], jet.d2);
        jet = (l + 1 < layers) ? jet_tanh(tape, lin) : lin;
    }
    return jet;
}

JetXT jet_forward_xt(Tape& tape, const TapedNet& net, const Mat& points) {
    if (net.arch == nullptr) throw std::invalid_argument("jet_forward_xt: uninitialized net");
    if (points.rows() != net.arch->input_dim())
        throw std::invalid_argument("jet_forward_xt: points rows must equal input dim");
    if (points.rows() < 2)
        throw std::invalid_argument("jet_forward_xt: needs at least two input coordinates");

    Mat seed_x(points.rows(), points.cols());
    for (std::size_t j = 0; j < points.cols(); ++j) seed_x(0, j) = 1.0;
    Mat seed_t(points.rows(), points.cols());
    for (std::size_t j = 0; j < points.cols(); ++j) seed_t(1, j) = 1.0;

    JetXT jet;
    jet.v = tape.leaf(points);
    jet.dx1 = tape.leaf(std::move(seed_x));
    jet.dx2 = tape.leaf(Mat(points.rows(), points.cols()));
    jet.dt1 = tape.leaf(std::move(seed_t));

    const Value one = tape.scalar(1.0);
    const Value two = tape.scalar(2.0);
    const std::size_t layers = net.w.size();
    for (std::size_t l = 0; l < layers; ++l) {
        JetXT lin;
        lin.v = tape.add_bias(tape.matmul(net.w[l], jet.v), net.b[l]);
        lin.dx1 = tape.matmul(net.w[l], jet.dx1);
        lin.dx2 = tape.matmul(net.w[l], jet.dx2);
        lin.dt1 = tape.matmul(net.w[l], jet.dt1);
        if (l + 1 < layers) {
            Value u = tape.tanh(lin.v);
            Value sech2 = tape.sub(one, tape.square(u));
            jet.v = u;
            jet.dx1 = tape.mul(sech2, lin.dx1);
            Value curv = tape.mul(u, tape.mul(sech2, tape.square(lin.dx1)));
            jet.dx2 = tape.sub(tape.mul(sech2, lin.dx2), tape.mul(two, curv));
            jet.dt1 = tape.mul(sech2, lin.dt1);
        } else {
            jet = lin;
        }
    }
    return jet;
}

JetCheckResult jet_check(const NetworkArch& arch, const Weights& weights, const Mat& points,
                         std::size_t wiggle_dim, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("jet_check: h must be positive");

    Tape tape;
    TapedNet net = make_taped(tape, arch, weights);
    Jet2 jet = jet_forward(tape, net, points, wiggle_dim);
    const Mat& d1 = tape.val(jet.d1);
    const Mat& d2 = tape.val(jet.d2);

    Mat plus = points, minus = points;
    for (std::size_t j = 0; j < points.cols(); ++j) {
        plus(wiggle_dim, j) += h;
        minus(wiggle_dim, j) -= h;
    }
    Mat f0 = forward(arch, weights, points);
    Mat fp = forward(arch, weights, plus);
    Mat fm = forward(arch, weights, minus);

    JetCheckResult res;
    for (std::size_t i = 0; i < f0.size(); ++i) {
        double fd1 = (fp.data()[i] - fm.data()[i]) / (2.0 * h);
        double fd2 = (fp.data()[i] - 2.0 * f0.data()[i] + fm.data()[i]) / (h * h);
        double e1 = std::abs(d1.data()[i] - fd1) /
                    std::max(1.0, std::abs(d1.data()[i]) + std::abs(fd1));
        double e2 = std::abs(d2.data()[i] - fd2) /
                    std::max(1.0, std::abs(d2.data()[i]) + std::abs(fd2));
        res.d1_err = std::max(res.d1_err, e1);
        res.d2_err = std::max(res.d2_err, e2);
    }
    return res;
}

}  // namespace tanhseed
