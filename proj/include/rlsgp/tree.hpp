#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rlsgp/random.hpp"

namespace rlsgp {

enum class FunctionKind : std::uint8_t { And, Or };

// 1-based variable index; index 0 is reserved as "not a leaf".
struct VarId {
    std::uint32_t index = 0;
    friend constexpr auto operator<=>(VarId, VarId) = default;
};

class NodeRef;

// Immutable strict-binary syntax tree over {AND, OR} internal nodes and
// variable leaves. The empty tree (no root) is a legal value. Copies share
// structure; every edit below returns a fresh tree and reuses untouched
// subtrees, so parent and offspring stay alive side by side.
class SyntaxTree {
public:
    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    struct Node {
        FunctionKind fn = FunctionKind::And;
        VarId var;  // index > 0 iff this node is a leaf
        NodePtr left, right;
        std::uint32_t leaves = 0;  // leaf count of this subtree
        std::uint64_t hash = 0;    // structural hash, filled on construction

        bool is_leaf() const { return var.index != 0; }
        std::uint32_t nodes() const { return 2 * leaves - 1; }
    };

    SyntaxTree() = default;

    static SyntaxTree leaf(VarId v);
    static SyntaxTree branch(FunctionKind fn, const SyntaxTree& left,
                             const SyntaxTree& right);

    bool empty() const { return root_ == nullptr; }
    std::uint32_t leaf_count() const { return root_ ? root_->leaves : 0; }
    std::uint32_t node_count() const { return root_ ? root_->nodes() : 0; }
    std::uint64_t structural_hash() const { return root_ ? root_->hash : 0; }
    const NodePtr& root() const { return root_; }

    friend bool operator==(const SyntaxTree& a, const SyntaxTree& b);
    friend bool operator!=(const SyntaxTree& a, const SyntaxTree& b) {
        return !(a == b);
    }

private:
    explicit SyntaxTree(NodePtr root) : root_(std::move(root)) {}
    friend SyntaxTree replace_subtree(const SyntaxTree&, const NodeRef&,
                                      const SyntaxTree&);
    friend SyntaxTree insert_function(const SyntaxTree&, const NodeRef&,
                                      FunctionKind, VarId, bool);
    friend SyntaxTree delete_subtree(const SyntaxTree&, const NodeRef&);
    NodePtr root_;
};

enum class ChildSide : std::uint8_t { Left, Right };

// Root-to-node path. Only meaningful for the tree it was created from; any
// tree change invalidates it. Invalid refs are rejected by resolve(), never
// remapped.
class NodeRef {
public:
    NodeRef() = default;
    explicit NodeRef(std::vector<ChildSide> steps) : steps_(std::move(steps)) {}

    // Path to the k-th node in preorder, k in [0, node_count).
    static NodeRef nth_node(const SyntaxTree& tree, std::uint32_t index);
    // Path to the k-th leaf from the left, k in [0, leaf_count).
    static NodeRef nth_leaf(const SyntaxTree& tree, std::uint32_t index);

    const SyntaxTree::Node* resolve(const SyntaxTree& tree) const;

    const std::vector<ChildSide>& steps() const { return steps_; }
    bool is_root() const { return steps_.empty(); }

private:
    std::vector<ChildSide> steps_;
};

std::vector<VarId> distinct_variables(const SyntaxTree& tree);  // sorted
std::uint32_t or_count(const SyntaxTree& tree);

// Each of the 2*leaf_count-1 nodes (resp. each leaf) with equal probability.
// Throws std::invalid_argument on the empty tree.
NodeRef uniform_random_node(const SyntaxTree& tree, Rng& rng);
NodeRef uniform_random_leaf(const SyntaxTree& tree, Rng& rng);

// Persistent edits. All throw std::invalid_argument if `at` does not resolve.
SyntaxTree replace_subtree(const SyntaxTree& tree, const NodeRef& at,
                           const SyntaxTree& replacement);
// Replace node x at `at` with fn(x, leaf) or fn(leaf, x).
SyntaxTree insert_function(const SyntaxTree& tree, const NodeRef& at,
                           FunctionKind fn, VarId new_leaf, bool new_leaf_left);
// Replace x's parent with x's sibling; deleting the root yields the empty tree.
SyntaxTree delete_subtree(const SyntaxTree& tree, const NodeRef& at);

// S-expression form: "(and A B)", "(or A B)", "x<k>", "()" for the empty tree.
std::string serialize(const SyntaxTree& tree);

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t position);
    std::size_t position;
};

SyntaxTree parse(std::string_view text);

// Variables renamed to 1, 2, ... in order of first occurrence (preorder).
// Two trees have equal canonical forms iff one is a variable relabeling of
// the other; AND_n is symmetric in its variables, so CTT error is invariant.
SyntaxTree canonical_relabeling(const SyntaxTree& tree);

}  // namespace rlsgp
