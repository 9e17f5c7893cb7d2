#include "tanhseed/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace tanhseed {

namespace {

struct ChunkStats {
    std::vector<double> mn, mx;
    std::vector<std::size_t> sat;
};

// Runs columns [c0, c1) of inputs through the full stack, recording per
// layer the min, max and saturation count over this chunk.
ChunkStats run_chunk(const NetworkArch& arch, const WeightFn& weights, const Mat& inputs,
                     std::size_t c0, std::size_t c1, double sat_threshold) {
    const std::size_t depth = arch.layers();
    ChunkStats st;
    st.mn.assign(depth, std::numeric_limits<double>::infinity());
    st.mx.assign(depth, -std::numeric_limits<double>::infinity());
    st.sat.assign(depth, 0);

    Mat x(inputs.rows(), c1 - c0);
    for (std::size_t i = 0; i < inputs.rows(); ++i)
        for (std::size_t j = c0; j < c1; ++j) x(i, j - c0) = inputs(i, j);

    for (std::size_t l = 0; l < depth; ++l) {
        Mat w = weights(l);
        if (w.rows() != arch.dims()[l + 1] || w.cols() != arch.dims()[l])
            throw std::invalid_argument("propagate: weight shape does not match architecture");
        Mat z(w.rows(), x.cols());
        matmul_acc(w, x, z);
        for (std::size_t i = 0; i < z.size(); ++i) {
            double v = std::tanh(z.data()[i]);
            z.data()[i] = v;
            st.mn[l] = std::min(st.mn[l], v);
            st.mx[l] = std::max(st.mx[l], v);
            if (std::abs(v) > sat_threshold) ++st.sat[l];
        }
        x = std::move(z);
    }
    return st;
}

}  // namespace

SpreadTrace propagate_stats_fn(const NetworkArch& arch, const WeightFn& weights,
                               const Mat& inputs, const PropagateOptions& opts) {
    if (inputs.rows() != arch.input_dim())
        throw std::invalid_argument("propagate: input rows must equal input dim");
    if (inputs.cols() == 0) throw std::invalid_argument("propagate: empty batch");
    if (opts.threads == 0) throw std::invalid_argument("propagate: threads must be positive");

    const std::size_t depth = arch.layers();
    const std::size_t batch = inputs.cols();
    const unsigned nthreads = static_cast<unsigned>(
        std::min<std::size_t>(opts.threads, batch));

    std::vector<ChunkStats> parts(nthreads);
    if (nthreads == 1) {
        parts[0] = run_chunk(arch, weights, inputs, 0, batch, opts.sat_threshold);
    } else {
        std::vector<std::thread> pool;
        std::size_t per = (batch + nthreads - 1) / nthreads;
        for (unsigned t = 0; t < nthreads; ++t) {
            std::size_t c0 = t * per, c1 = std::min(batch, c0 + per);
            pool.emplace_back([&, t, c0, c1] {
                parts[t] = run_chunk(arch, weights, inputs, c0, c1, opts.sat_threshold);
            });
        }
        for (auto& th : pool) th.join();
    }

    SpreadTrace trace;
    trace.layers.resize(depth);
    for (std::size_t l = 0; l < depth; ++l) {
        double mn = parts[0].mn[l], mx = parts[0].mx[l];
        std::size_t sat = parts[0].sat[l];
        for (unsigned t = 1; t < nthreads; ++t) {
            mn = std::min(mn, parts[t].mn[l]);
            mx = std::max(mx, parts[t].mx[l]);
            sat += parts[t].sat[l];
        }
        trace.layers[l].min = mn;
        trace.layers[l].max = mx;
        trace.layers[l].sat_frac =
            static_cast<double>(sat) / static_cast<double>(arch.dims()[l + 1] * batch);
    }
    return trace;
}

SpreadTrace propagate_stats(const NetworkArch& arch, const InitScheme& scheme,
                            const Mat& inputs, std::uint64_t seed,
                            const PropagateOptions& opts) {
    const auto& dims = arch.dims();
    WeightFn stream = [&scheme, &dims, seed](std::size_t l) {
        Rng rng(mix_seed(seed, l));
        return init_weights(scheme, dims[l + 1], dims[l], rng);
    };
    return propagate_stats_fn(arch, stream, inputs, opts);
}

std::vector<SpreadTrace> alpha_sweep(const NetworkArch& arch, std::span<const double> alphas,
                                     const Mat& inputs, std::uint64_t seed,
                                     const PropagateOptions& opts) {
    std::vector<SpreadTrace> traces;
    traces.reserve(alphas.size());
    for (double alpha : alphas)
        traces.push_back(propagate_stats(arch, InitScheme::mod_diag(alpha), inputs, seed, opts));
    return traces;
}

}  // namespace tanhseed
