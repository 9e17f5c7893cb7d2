#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tanhseed/init.hpp"
#include "tanhseed/mat.hpp"
#include "tanhseed/network.hpp"

namespace tanhseed {

// Activation statistics of the composed map x -> tanh(W x) applied layer
// by layer (no biases, tanh after every weight, the pure-iteration
// setting rather than the linear-head classifier convention).

struct LayerStat {
    double min = 0.0;
    double max = 0.0;
    double sat_frac = 0.0;  // fraction of activations with |x| > threshold

    double spread() const { return max - min; }
};

// One LayerStat per weight application, aggregated over the whole batch.
struct SpreadTrace {
    std::vector<LayerStat> layers;
};

struct PropagateOptions {
    double sat_threshold = 0.9;
    unsigned threads = 1;  // batch is chunked; the merge is exact, so the
                           // result is identical for any thread count
};

// Weight matrices are streamed: layer l is drawn from a fresh rng seeded
// by mix_seed(seed, l), so depth-10^4 runs never hold more than one layer
// and every batch chunk can regenerate the same stream independently.
SpreadTrace propagate_stats(const NetworkArch& arch, const InitScheme& scheme,
                            const Mat& inputs, std::uint64_t seed,
                            const PropagateOptions& opts = {});

// Same statistics for caller-supplied weights (layer index -> matrix);
// hand-built single-unit maps use this to cross-check against the scalar
// fixed-point analysis.
using WeightFn = std::function<Mat(std::size_t)>;
SpreadTrace propagate_stats_fn(const NetworkArch& arch, const WeightFn& weights,
                               const Mat& inputs, const PropagateOptions& opts = {});

// propagate_stats per alpha with the same seed and inputs, so traces
// differ only through the noise scale.
std::vector<SpreadTrace> alpha_sweep(const NetworkArch& arch, std::span<const double> alphas,
                                     const Mat& inputs, std::uint64_t seed,
                                     const PropagateOptions& opts = {});

}  // namespace tanhseed
