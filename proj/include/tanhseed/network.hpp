#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tanhseed/init.hpp"
#include "tanhseed/mat.hpp"
#include "tanhseed/rng.hpp"
#include "tanhseed/tape.hpp"

namespace tanhseed {

// Fully connected tanh network: dims = {input, hidden..., output}. Hidden
// layers apply tanh; the last layer is affine (logits or a raw field
// value). Batches are stored one sample per column.
class NetworkArch {
public:
    explicit NetworkArch(std::vector<std::size_t> dims);

    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t layers() const { return dims_.size() - 1; }  // weight matrices
    std::size_t input_dim() const { return dims_.front(); }
    std::size_t output_dim() const { return dims_.back(); }

private:
    std::vector<std::size_t> dims_;
};

struct Weights {
    std::vector<Mat> w;  // w[l] is dims[l+1] x dims[l]
    std::vector<Mat> b;  // b[l] is dims[l+1] x 1, zero at init
};

Weights init_network(const NetworkArch& arch, const InitScheme& scheme, Rng& rng);

// Affine + tanh through hidden layers, affine head. Returns the head
// output (output_dim x batch).
Mat forward(const NetworkArch& arch, const Weights& weights, const Mat& input);

// Same pass, returning the post-activation of every layer; entry l is the
// tanh output of hidden layer l, the last entry is the affine head output.
std::vector<Mat> forward_activations(const NetworkArch& arch, const Weights& weights,
                                     const Mat& input);

// Flat parameter vector in layer order, W row-major then bias per layer.
// Optimizers work on this packing; unpack reverses it.
std::size_t param_count(const NetworkArch& arch);
std::vector<double> pack_params(const Weights& weights);
Weights unpack_params(const NetworkArch& arch, std::span<const double> flat);

// The same network registered on a tape, for differentiable passes.
struct TapedNet {
    const NetworkArch* arch = nullptr;
    std::vector<Value> w, b;
};

TapedNet make_taped(Tape& tape, const NetworkArch& arch, const Weights& weights);
Value forward_taped(Tape& tape, const TapedNet& net, Value input);

// Leaves of the taped net in pack_params order (w0, b0, w1, b1, ...).
std::vector<Value> taped_params(const TapedNet& net);

}  // namespace tanhseed
