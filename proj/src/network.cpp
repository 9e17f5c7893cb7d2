#include "tanhseed/network.hpp"

#include <cmath>
#include <stdexcept>

namespace tanhseed {

NetworkArch::NetworkArch(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    if (dims_.size() < 2)
        throw std::invalid_argument("NetworkArch: need at least input and output dims");
    for (std::size_t d : dims_)
        if (d == 0) throw std::invalid_argument("NetworkArch: zero-width layer");
}

Weights init_network(const NetworkArch& arch, const InitScheme& scheme, Rng& rng) {
    Weights wt;
    const auto& dims = arch.dims();
    wt.w.reserve(arch.layers());
    wt.b.reserve(arch.layers());
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        wt.w.push_back(init_weights(scheme, dims[l + 1], dims[l], rng));
        wt.b.emplace_back(dims[l + 1], 1);
    }
    return wt;
}

namespace {

void check_input(const NetworkArch& arch, const Weights& weights, const Mat& input) {
    if (weights.w.size() != arch.layers() || weights.b.size() != arch.layers())
        throw std::invalid_argument("forward: weights do not match architecture");
    if (input.rows() != arch.input_dim())
        throw std::invalid_argument("forward: input rows must equal input dim");
    if (input.cols() == 0) throw std::invalid_argument("forward: empty batch");
}

// z = w*x + b, tanh applied unless head layer.
Mat layer_apply(const Mat& w, const Mat& b, const Mat& x, bool head) {
    Mat z(w.rows(), x.cols());
    matmul_acc(w, x, z);
    for (std::size_t i = 0; i < z.rows(); ++i) {
        double bi = b(i, 0);
        double* zi = z.row(i);
        for (std::size_t j = 0; j < z.cols(); ++j) {
            zi[j] += bi;
            if (!head) zi[j] = std::tanh(zi[j]);
        }
    }
    return z;
}

}  // namespace

Mat forward(const NetworkArch& arch, const Weights& weights, const Mat& input) {
    check_input(arch, weights, input);
    Mat x = input;
    for (std::size_t l = 0; l < arch.layers(); ++l)
        x = layer_apply(weights.w[l], weights.b[l], x, l + 1 == arch.layers());
    return x;
}

std::vector<Mat> forward_activations(const NetworkArch& arch, const Weights& weights,
                                     const Mat& input) {
    check_input(arch, weights, input);
    std::vector<Mat> acts;
    acts.reserve(arch.layers());
    const Mat* x = &input;
    for (std::size_t l = 0; l < arch.layers(); ++l) {
        acts.push_back(layer_apply(weights.w[l], weights.b[l], *x, l + 1 == arch.layers()));
        x = &acts.back();
    }
    return acts;
}

std::size_t param_count(const NetworkArch& arch) {
    std::size_t n = 0;
    const auto& dims = arch.dims();
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) n += dims[l + 1] * (dims[l] + 1);
    return n;
}

std::vector<double> pack_params(const Weights& weights) {
    std::vector<double> flat;
    for (std::size_t l = 0; l < weights.w.size(); ++l) {
        const Mat& w = weights.w[l];
        flat.insert(flat.end(), w.data(), w.data() + w.size());
        const Mat& b = weights.b[l];
        flat.insert(flat.end(), b.data(), b.data() + b.size());
    }
    return flat;
}

Weights unpack_params(const NetworkArch& arch, std::span<const double> flat) {
    if (flat.size() != param_count(arch))
        throw std::invalid_argument("unpack_params: flat size mismatch");
    Weights wt;
    const auto& dims = arch.dims();
    std::size_t pos = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Mat w(dims[l + 1], dims[l]);
        for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = flat[pos++];
        Mat b(dims[l + 1], 1);
        for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] = flat[pos++];
        wt.w.push_back(std::move(w));
        wt.b.push_back(std::move(b));
    }
    return wt;
}

TapedNet make_taped(Tape& tape, const NetworkArch& arch, const Weights& weights) {
    if (weights.w.size() != arch.layers())
        throw std::invalid_argument("make_taped: weights do not match architecture");
    TapedNet net;
    net.arch = &arch;
    for (std::size_t l = 0; l < arch.layers(); ++l) {
        net.w.push_back(tape.leaf(weights.w[l]));
        net.b.push_back(tape.leaf(weights.b[l]));
    }
    return net;
}

Value forward_taped(Tape& tape, const TapedNet& net, Value input) {
    Value x = input;
    for (std::size_t l = 0; l < net.w.size(); ++l) {
        x = tape.add_bias(tape.matmul(net.w[l], x), net.b[l]);
        if (l + 1 < net.w.size()) x = tape.tanh(x);
    }
    return x;
}

std::vector<Value> taped_params(const TapedNet& net) {
    std::vector<Value> ps;
    for (std::size_t l = 0; l < net.w.size(); ++l) {
        ps.push_back(net.w[l]);
        ps.push_back(net.b[l]);
    }
    return ps;
}

}  // namespace tanhseed
