#ifndef MGP_RANDOM_HPP
#define MGP_RANDOM_HPP

#include <cstdint>
#include <random>

namespace mgp {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; derives well-separated child seeds from (seed, stream).
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream = 0)
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline double uniform01(Rng& rng)
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double gaussian(Rng& rng, double sigma)
{
    return std::normal_distribution<double>(0.0, 1.0)(rng) * sigma;
}

}  // namespace mgp

#endif  // MGP_RANDOM_HPP
