#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tanhseed/mat.hpp"

namespace tanhseed {

// In-memory classification dataset: one sample per row of features,
// labels in [0, num_classes). Loaders normalize raw bytes to
// v/255 - 0.5 unless told otherwise.
struct Dataset {
    Mat features;  // n_samples x dim
    std::vector<int> labels;
    int num_classes = 0;

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return features.cols(); }
};

// IDX image/label file pair (big-endian magics 0x803 / 0x801).
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 bool normalize = true);

// Writes raw bytes back out in IDX layout; with load_idx this round-trips
// pixel-exactly.
void write_idx(const std::string& images_path, const std::string& labels_path,
               std::span<const std::uint8_t> pixels, std::size_t count, std::size_t rows,
               std::size_t cols, std::span<const std::uint8_t> labels);

// Binary batches of 3073-byte records (1 label byte + 32x32x3 pixels).
Dataset load_cifar10(const std::vector<std::string>& batch_paths, bool normalize = true);

// Stratified split into (train, val). Per-class validation counts follow
// largest-remainder apportionment of val_fraction, clamped to keep at
// least one sample per class on each side; classes with fewer than two
// samples cannot be split and raise.
std::pair<Dataset, Dataset> split_stratified(const Dataset& ds, double val_fraction,
                                             std::uint64_t seed);

// Class-proportional subset of size k (largest remainder again), each
// class contributing a seeded random draw of its members.
Dataset subset_stratified(const Dataset& ds, std::size_t k, std::uint64_t seed);

// Shuffled index batches for one epoch. The permutation is drawn from
// mix_seed(seed, epoch), so a (seed, epoch) pair pins the batch order and
// restarts replay identically. The final short batch is kept.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size,
                                                    std::uint64_t seed, std::size_t epoch);

// Copies the picked samples into network layout: one column per sample.
void gather_batch(const Dataset& ds, std::span<const std::size_t> idx, Mat& features_out,
                  std::vector<int>& labels_out);

// Procedural 28x28 digit-like corpus: ten fixed blob prototypes, one per
// class, each sample a shifted noisy quantized copy. Self-contained
// stand-in with the same shape, range and label layout as the IDX corpus
// loaders produce.
Dataset make_synthetic_images(std::size_t n, std::uint64_t seed);

}  // namespace tanhseed
