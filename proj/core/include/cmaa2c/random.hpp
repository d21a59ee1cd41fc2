#pragma once

#include <cstdint>
#include <random>

namespace cmaa2c {

using Rng = std::mt19937_64;

/// Uniform draw in [0, 1) built from the top 53 bits, independent of the
/// standard library's distribution implementation.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double low, double high) {
    return low + (high - low) * uniform01(rng);
}

/// Standard normal via Box-Muller on uniform01 (one value per call).
double standard_normal(Rng& rng);

/// Derives an independent stream seed from a base seed and a salt (splitmix64).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace cmaa2c
