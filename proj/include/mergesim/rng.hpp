#pragma once

#include <cstdint>
#include <random>

namespace mergesim {

/// Uniform double in [0, 1) from the top 53 bits; identical across
/// standard library implementations.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// SplitMix64 finaliser, used to derive independent per-(seed, step,
/// vehicle) streams without shared state.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace mergesim
