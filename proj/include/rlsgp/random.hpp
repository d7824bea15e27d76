#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace rlsgp {

// All randomness in the project flows through one generator type so that a
// (seed, call-order) pair fully determines a run.
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Unbiased integer in [0, bound). Hand-rolled (rejection sampling) instead of
// std::uniform_int_distribution so that draw sequences are identical across
// standard library implementations.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t reject_above = max - (max % bound + 1) % bound;
    for (;;) {
        const std::uint64_t v = rng();
        if (v <= reject_above) return v % bound;
    }
}

inline double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Per-run seed for (master seed, cell index, run index). Runs are independent
// regardless of which worker executes them.
inline std::uint64_t derive_run_seed(std::uint64_t master, std::uint64_t cell,
                                     std::uint64_t run) {
    return splitmix64(splitmix64(master ^ splitmix64(cell + 1)) + run);
}

}  // namespace rlsgp
