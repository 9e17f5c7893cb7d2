#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tanhseed/data.hpp"
#include "tanhseed/network.hpp"

namespace tanhseed {

enum class Optimizer { ADAM, LBFGS, ADAM_THEN_LBFGS };

struct TrainConfig {
    std::size_t epochs = 5;
    std::size_t batch_size = 64;
    double lr = 1e-4;
    double val_fraction = 0.15;
    std::uint64_t seed = 0;
    Optimizer optimizer = Optimizer::ADAM;
};

struct EpochMetrics {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_acc = 0.0;
};

struct TrainResult {
    std::vector<EpochMetrics> epochs;
    Weights weights;
    double best_val_acc = 0.0;
    std::size_t best_epoch = 0;  // first epoch attaining best_val_acc; 0 if untrained
};

// Mean softmax cross-entropy of logits (classes x batch) against labels.
double softmax_ce_value(const Mat& logits, std::span<const int> labels);

// Fraction of columns whose argmax row equals the label; ties resolve to
// the lowest row index.
double accuracy(const Mat& logits, std::span<const int> labels);

struct EvalMetrics {
    double loss = 0.0;
    double acc = 0.0;
};

EvalMetrics evaluate(const NetworkArch& arch, const Weights& weights, const Dataset& ds);

// Minibatch cross-entropy training. The dataset is stratified-split inside
// (val_fraction held out), weights drawn from the scheme, batches
// reshuffled per epoch; everything derives from config.seed, so equal
// seeds give bit-equal results. Per-epoch train loss is the sample-
// weighted mean of batch losses seen during that epoch; validation runs
// after each epoch. A non-finite batch loss aborts with the epoch and
// batch in the message. Only the ADAM optimizer is accepted here; the
// two-phase modes belong to the PDE trainer.
TrainResult train_classifier(const NetworkArch& arch, const InitScheme& scheme,
                             const Dataset& data, const TrainConfig& config);

}  // namespace tanhseed
