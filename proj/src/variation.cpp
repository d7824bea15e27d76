#include "rlsgp/variation.hpp"

#include <stdexcept>

namespace rlsgp {

MutationOutcome apply_hvl_prime(const SyntaxTree& parent, DeletionVariant variant,
                                const HvlDraws& draws) {
    if (draws.var.index == 0)
        throw std::invalid_argument("drawn variable must be >= 1");

    MutationOutcome out;
    out.op = draws.op;

    if (parent.empty()) {
        // "Set l to be the root" regardless of the drawn op.
        out.offspring = SyntaxTree::leaf(draws.var);
        out.inserted_variable = draws.var;
        return out;
    }

    switch (draws.op) {
        case MutationOp::Ins: {
            const NodeRef at = NodeRef::nth_node(
                parent, static_cast<std::uint32_t>(draws.node_index));
            out.offspring = insert_function(parent, at, draws.fn, draws.var,
                                            draws.new_leaf_left);
            out.inserted_function = draws.fn;
            out.inserted_variable = draws.var;
            break;
        }
        case MutationOp::Del: {
            const NodeRef at =
                variant == DeletionVariant::LeafOnly
                    ? NodeRef::nth_leaf(parent,
                                        static_cast<std::uint32_t>(draws.node_index))
                    : NodeRef::nth_node(parent,
                                        static_cast<std::uint32_t>(draws.node_index));
            out.offspring = delete_subtree(parent, at);
            out.leaves_removed = parent.leaf_count() - out.offspring.leaf_count();
            break;
        }
        case MutationOp::Sub: {
            const NodeRef at = NodeRef::nth_leaf(
                parent, static_cast<std::uint32_t>(draws.node_index));
            out.offspring = replace_subtree(parent, at, SyntaxTree::leaf(draws.var));
            out.inserted_variable = draws.var;
            break;
        }
    }
    return out;
}

MutationOutcome hvl_prime(const SyntaxTree& parent, DeletionVariant variant,
                          std::uint32_t n, Rng& rng) {
    if (n == 0) throw std::invalid_argument("n must be >= 1");

    HvlDraws draws;
    draws.op = static_cast<MutationOp>(uniform_below(rng, 3));
    draws.var = VarId{static_cast<std::uint32_t>(1 + uniform_below(rng, n))};
    draws.fn = uniform_below(rng, 2) == 0 ? FunctionKind::And : FunctionKind::Or;

    if (!parent.empty()) {
        switch (draws.op) {
            case MutationOp::Ins:
                draws.node_index = uniform_below(rng, parent.node_count());
                draws.new_leaf_left = uniform_below(rng, 2) == 0;
                break;
            case MutationOp::Del:
                draws.node_index = uniform_below(
                    rng, variant == DeletionVariant::LeafOnly ? parent.leaf_count()
                                                              : parent.node_count());
                break;
            case MutationOp::Sub:
                draws.node_index = uniform_below(rng, parent.leaf_count());
                break;
        }
    }
    return apply_hvl_prime(parent, variant, draws);
}

std::vector<NeighborOutcome> enumerate_neighbors(const SyntaxTree& parent,
                                                 DeletionVariant variant,
                                                 std::uint32_t n,
                                                 std::optional<std::uint32_t> limit,
                                                 std::uint64_t outcome_cap) {
    if (parent.empty())
        throw std::invalid_argument("neighborhood of the empty tree is not enumerable");
    if (n == 0) throw std::invalid_argument("n must be >= 1");

    const std::uint64_t nodes = parent.node_count();
    const std::uint64_t leaves = parent.leaf_count();
    const std::uint64_t del_choices =
        variant == DeletionVariant::LeafOnly ? leaves : nodes;
    const std::uint64_t total =
        nodes * n * 2 * 2 + del_choices + leaves * n;
    if (total > outcome_cap)
        throw std::runtime_error("neighborhood too large (" + std::to_string(total) +
                                 " outcomes > cap " + std::to_string(outcome_cap) + ")");

    std::vector<NeighborOutcome> result;
    result.reserve(static_cast<std::size_t>(total));

    auto push = [&](const HvlDraws& draws, double probability) {
        NeighborOutcome neighbor;
        neighbor.mutation = apply_hvl_prime(parent, variant, draws);
        neighbor.probability = probability;
        neighbor.within_size_limit =
            !limit || neighbor.mutation.offspring.leaf_count() <= *limit;
        result.push_back(std::move(neighbor));
    };

    // INS: node, variable, function and order all matter.
    const double p_ins = 1.0 / 3 / static_cast<double>(nodes) / n / 2 / 2;
    for (std::uint64_t k = 0; k < nodes; ++k) {
        for (std::uint32_t v = 1; v <= n; ++v) {
            for (FunctionKind fn : {FunctionKind::And, FunctionKind::Or}) {
                for (bool left : {false, true}) {
                    push({MutationOp::Ins, VarId{v}, fn, k, left}, p_ins);
                }
            }
        }
    }
    // DEL: the drawn l and f never affect the offspring; marginalized.
    const double p_del = 1.0 / 3 / static_cast<double>(del_choices);
    for (std::uint64_t k = 0; k < del_choices; ++k) {
        push({MutationOp::Del, VarId{1}, FunctionKind::And, k, false}, p_del);
    }
    // SUB: leaf and variable matter, f marginalized.
    const double p_sub = 1.0 / 3 / static_cast<double>(leaves) / n;
    for (std::uint64_t k = 0; k < leaves; ++k) {
        for (std::uint32_t v = 1; v <= n; ++v) {
            push({MutationOp::Sub, VarId{v}, FunctionKind::And, k, false}, p_sub);
        }
    }
    return result;
}

}  // namespace rlsgp
