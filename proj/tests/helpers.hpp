#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rlsgp/random.hpp"
#include "rlsgp/tree.hpp"

namespace rlsgp::testing {

// Random strict-binary tree with exactly `leaves` leaves over x_1..x_n.
inline SyntaxTree random_tree(Rng& rng, std::uint32_t n, std::uint32_t leaves) {
    if (leaves == 1) {
        return SyntaxTree::leaf(
            VarId{static_cast<std::uint32_t>(1 + uniform_below(rng, n))});
    }
    const std::uint32_t left =
        static_cast<std::uint32_t>(1 + uniform_below(rng, leaves - 1));
    const FunctionKind fn =
        uniform_below(rng, 2) == 0 ? FunctionKind::And : FunctionKind::Or;
    return SyntaxTree::branch(fn, random_tree(rng, n, left),
                              random_tree(rng, n, leaves - left));
}

inline double chi_square_uniform(std::span<const std::uint64_t> counts) {
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    const double expected =
        static_cast<double>(total) / static_cast<double>(counts.size());
    double stat = 0;
    for (auto c : counts) {
        const double d = static_cast<double>(c) - expected;
        stat += d * d / expected;
    }
    return stat;
}

// Upper critical values of the chi-square distribution at significance 1e-3.
inline constexpr double kChi2Crit1e3Df1 = 10.828;
inline constexpr double kChi2Crit1e3Df2 = 13.816;
inline constexpr double kChi2Crit1e3Df3 = 16.266;

}  // namespace rlsgp::testing
