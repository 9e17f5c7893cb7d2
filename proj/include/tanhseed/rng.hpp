#pragma once

#include <cstdint>
#include <random>

namespace tanhseed {

// Deterministic RNG used everywhere a seed appears in the public API.
// mt19937_64 plus the std distributions is reproducible across runs on the
// same platform, which is all the reproducibility contract asks for.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double normal(double mean = 0.0, double stddev = 1.0) {
        return std::normal_distribution<double>(mean, stddev)(gen_);
    }
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(gen_);
    }
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {  // inclusive range
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(gen_);
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

// Stable combination of a base seed with a stream index (epoch number,
// thread chunk, ...) so derived streams are independent of each other.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace tanhseed
