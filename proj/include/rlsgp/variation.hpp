#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rlsgp/random.hpp"
#include "rlsgp/tree.hpp"

namespace rlsgp {

enum class DeletionVariant : std::uint8_t {
    LeafOnly,  // deletion picks among leaves only (the classic operator)
    Subtree,   // deletion picks among all nodes, removing whole subtrees
};

enum class MutationOp : std::uint8_t { Ins, Del, Sub };

struct MutationOutcome {
    SyntaxTree offspring;
    MutationOp op = MutationOp::Ins;
    std::optional<FunctionKind> inserted_function;  // set for INS on nonempty parent
    std::optional<VarId> inserted_variable;         // the drawn l where it lands in the tree
    std::uint32_t leaves_removed = 0;               // DEL only
};

// The uniform draws of one mutation, split out so the operator core is
// deterministic: the sampling wrapper and the exhaustive enumerator both go
// through apply_hvl_prime.
struct HvlDraws {
    MutationOp op = MutationOp::Ins;
    VarId var;                        // l, uniform over x_1..x_n
    FunctionKind fn = FunctionKind::And;  // f, uniform over {AND, OR}
    std::uint64_t node_index = 0;     // INS: preorder node; DEL: node/leaf; SUB: leaf
    bool new_leaf_left = false;       // INS child order
};

MutationOutcome apply_hvl_prime(const SyntaxTree& parent, DeletionVariant variant,
                                const HvlDraws& draws);

// One HVL-Prime mutation. op, l and f are always drawn, in that order, before
// branching; an empty parent becomes the single leaf l no matter which op was
// drawn. INS replaces a uniform node x by f(x, l) with uniform child order;
// DEL replaces the chosen node's parent with its sibling (empty tree when the
// root is chosen); SUB replaces a uniform leaf by l, possibly identically.
MutationOutcome hvl_prime(const SyntaxTree& parent, DeletionVariant variant,
                          std::uint32_t n, Rng& rng);

struct NeighborOutcome {
    MutationOutcome mutation;
    double probability = 0;
    bool within_size_limit = true;  // leaf count <= limit (always true if unbounded)
};

inline constexpr std::uint64_t kDefaultNeighborhoodCap = 1'000'000;

// Every distinct (op, node, variable, function, order) outcome with its exact
// probability; draws that do not affect the result (l and f for DEL, f for
// SUB) are marginalized out. Probabilities sum to 1.
std::vector<NeighborOutcome> enumerate_neighbors(
    const SyntaxTree& parent, DeletionVariant variant, std::uint32_t n,
    std::optional<std::uint32_t> limit = std::nullopt,
    std::uint64_t outcome_cap = kDefaultNeighborhoodCap);

}  // namespace rlsgp
