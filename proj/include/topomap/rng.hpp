#pragma once

#include <cstdint>
#include <random>

namespace topomap {

/**
 * @brief Seedable generator with a fully specified output stream.
 *
 * Wraps std::mt19937_64. Uniform draws take the top 53 bits of one engine
 * output; normal draws use the cosine branch of Box-Muller on two uniform
 * draws. Neither depends on the standard library's distribution classes, so
 * the stream is identical across toolchains.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform();
    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Normal with the given mean and standard deviation.
    double normal(double mean = 0.0, double stddev = 1.0);
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0);

}  // namespace topomap
