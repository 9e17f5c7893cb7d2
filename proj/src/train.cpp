#include "tanhseed/train.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tanhseed/adam.hpp"
#include "tanhseed/rng.hpp"
#include "tanhseed/tape.hpp"

namespace tanhseed {

namespace {

// rng stream ids within one training run
constexpr std::uint64_t kStreamSplit = 1;
constexpr std::uint64_t kStreamInit = 2;
constexpr std::uint64_t kStreamBatches = 3;

constexpr std::size_t kEvalChunk = 1024;

}  // namespace

double softmax_ce_value(const Mat& logits, std::span<const int> labels) {
    if (labels.size() != logits.cols())
        throw std::invalid_argument("softmax_ce_value: one label per column required");
    double total = 0.0;
    for (std::size_t j = 0; j < logits.cols(); ++j) {
        double mx = logits(0, j);
        for (std::size_t i = 1; i < logits.rows(); ++i) mx = std::max(mx, logits(i, j));
        double se = 0.0;
        for (std::size_t i = 0; i < logits.rows(); ++i) se += std::exp(logits(i, j) - mx);
        total += mx + std::log(se) - logits(static_cast<std::size_t>(labels[j]), j);
    }
    return total / static_cast<double>(logits.cols());
}

double accuracy(const Mat& logits, std::span<const int> labels) {
    if (labels.size() != logits.cols())
        throw std::invalid_argument("accuracy: one label per column required");
    std::size_t hits = 0;
    for (std::size_t j = 0; j < logits.cols(); ++j) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < logits.rows(); ++i)
            if (logits(i, j) > logits(best, j)) best = i;
        if (best == static_cast<std::size_t>(labels[j])) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(logits.cols());
}

EvalMetrics evaluate(const NetworkArch& arch, const Weights& weights, const Dataset& ds) {
    if (ds.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
    EvalMetrics m;
    std::vector<std::size_t> idx(ds.size());
    std::vector<int> labels;
    Mat cols;
    for (std::size_t start = 0; start < ds.size(); start += kEvalChunk) {
        std::size_t end = std::min(ds.size(), start + kEvalChunk);
        idx.resize(end - start);
        for (std::size_t i = start; i < end; ++i) idx[i - start] = i;
        gather_batch(ds, idx, cols, labels);
        Mat logits = forward(arch, weights, cols);
        double w = static_cast<double>(end - start) / static_cast<double>(ds.size());
        m.loss += w * softmax_ce_value(logits, labels);
        m.acc += w * accuracy(logits, labels);
    }
    return m;
}

TrainResult train_classifier(const NetworkArch& arch, const InitScheme& scheme,
                             const Dataset& data, const TrainConfig& config) {
    if (config.optimizer != Optimizer::ADAM)
        throw std::invalid_argument("train_classifier: only the ADAM optimizer is supported");
    if (arch.input_dim() != data.dim())
        throw std::invalid_argument("train_classifier: input dim does not match data");
    if (arch.output_dim() != static_cast<std::size_t>(data.num_classes))
        throw std::invalid_argument("train_classifier: output dim does not match classes");
    if (config.batch_size == 0)
        throw std::invalid_argument("train_classifier: batch_size must be positive");

    auto [train_set, val_set] =
        split_stratified(data, config.val_fraction, mix_seed(config.seed, kStreamSplit));

    Rng init_rng(mix_seed(config.seed, kStreamInit));
    Weights weights = init_network(arch, scheme, init_rng);

    TrainResult result;
    if (config.epochs == 0) {
        result.weights = std::move(weights);
        return result;
    }

    std::vector<double> params = pack_params(weights);
    AdamState state(params.size());
    AdamConfig adam_cfg;
    adam_cfg.lr = config.lr;

    Mat batch_cols;
    std::vector<int> batch_labels;
    std::uint64_t batch_seed = mix_seed(config.seed, kStreamBatches);

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        auto batches = epoch_batches(train_set.size(), config.batch_size, batch_seed, epoch);
        double loss_sum = 0.0;
        for (std::size_t b = 0; b < batches.size(); ++b) {
            gather_batch(train_set, batches[b], batch_cols, batch_labels);
            Weights w = unpack_params(arch, params);

            Tape tape;
            TapedNet net = make_taped(tape, arch, w);
            Value input = tape.leaf(batch_cols);
            Value loss = tape.softmax_ce(forward_taped(tape, net, input), batch_labels);
            double loss_val = tape.scalar_val(loss);
            if (!std::isfinite(loss_val))
                throw std::runtime_error("train_classifier: non-finite loss at epoch " +
                                         std::to_string(epoch) + " batch " + std::to_string(b));
            loss_sum += loss_val * static_cast<double>(batches[b].size());

            auto param_vals = taped_params(net);
            auto grads = tape.gradients(loss, param_vals);
            std::vector<double> flat_grad;
            flat_grad.reserve(params.size());
            for (const Mat& g : grads)
                flat_grad.insert(flat_grad.end(), g.data(), g.data() + g.size());
            adam_step(state, params, flat_grad, adam_cfg);
        }

        weights = unpack_params(arch, params);
        EvalMetrics val = evaluate(arch, weights, val_set);
        EpochMetrics em;
        em.epoch = epoch;
        em.train_loss = loss_sum / static_cast<double>(train_set.size());
        em.val_loss = val.loss;
        em.val_acc = val.acc;
        result.epochs.push_back(em);
        if (result.best_epoch == 0 || val.acc > result.best_val_acc) {
            result.best_val_acc = val.acc;
            result.best_epoch = epoch;
        }
    }
    result.weights = std::move(weights);
    return result;
}

}  // namespace tanhseed
