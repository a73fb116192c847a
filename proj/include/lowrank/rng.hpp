#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace lowrank {

// All randomness flows through explicitly seeded mt19937_64 handles. The
// distributions below are hand-rolled on top of the raw 64-bit stream so
// results are bit-identical across standard library implementations
// (std::uniform_int_distribution et al. are not portable).
using Rng = std::mt19937_64;

/// SplitMix64 finalizer; good avalanche, used for seed derivation only.
inline uint64_t mix64(uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Derives a child seed from an ordered list of parts (base seed, grid
/// index, trial index, ...). Order-sensitive by construction.
inline uint64_t mix_seed(std::initializer_list<uint64_t> parts) {
    uint64_t h = 0x243F6A8885A308D3ull;
    for (uint64_t p : parts) h = mix64(h ^ p);
    return h;
}

inline Rng make_rng(uint64_t seed) { return Rng(seed); }

/// Uniform integer in [0, bound) by rejection; bound must be positive.
inline uint64_t uniform_below(Rng& rng, uint64_t bound) {
    const uint64_t limit = bound * (UINT64_MAX / bound);
    uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_real01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (cosine branch).
inline double normal_sample(Rng& rng) {
    const double u1 = 1.0 - uniform_real01(rng); // (0, 1]
    const double u2 = uniform_real01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

} // namespace lowrank
