#include "rlsgp/tree.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>

namespace rlsgp {

namespace {

std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return splitmix64(a ^ splitmix64(b + 0x517cc1b727220a95ULL) ^
                      splitmix64(c + 0x2545f4914f6cdd1dULL));
}

SyntaxTree::NodePtr make_leaf_node(VarId v) {
    auto node = std::make_shared<SyntaxTree::Node>();
    node->var = v;
    node->leaves = 1;
    node->hash = splitmix64(0x9e3779b97f4a7c15ULL ^ v.index);
    return node;
}

SyntaxTree::NodePtr make_branch_node(FunctionKind fn, SyntaxTree::NodePtr l,
                                     SyntaxTree::NodePtr r) {
    auto node = std::make_shared<SyntaxTree::Node>();
    node->fn = fn;
    node->leaves = l->leaves + r->leaves;
    node->hash = hash_combine(fn == FunctionKind::And ? 0xA5ULL : 0x5AULL,
                              l->hash, r->hash);
    node->left = std::move(l);
    node->right = std::move(r);
    return node;
}

bool nodes_equal(const SyntaxTree::Node* a, const SyntaxTree::Node* b) {
    if (a == b) return true;
    if (a->hash != b->hash || a->leaves != b->leaves) return false;
    if (a->is_leaf() != b->is_leaf()) return false;
    if (a->is_leaf()) return a->var == b->var;
    if (a->fn != b->fn) return false;
    return nodes_equal(a->left.get(), b->left.get()) &&
           nodes_equal(a->right.get(), b->right.get());
}

// Rebuilds the spine above `steps[depth..]`, sharing everything off-path.
SyntaxTree::NodePtr replace_rec(const SyntaxTree::NodePtr& node,
                                const std::vector<ChildSide>& steps,
                                std::size_t depth,
                                const SyntaxTree::NodePtr& replacement) {
    if (depth == steps.size()) return replacement;
    if (node->is_leaf())
        throw std::invalid_argument("node reference does not resolve");
    if (steps[depth] == ChildSide::Left) {
        return make_branch_node(
            node->fn, replace_rec(node->left, steps, depth + 1, replacement),
            node->right);
    }
    return make_branch_node(
        node->fn, node->left,
        replace_rec(node->right, steps, depth + 1, replacement));
}

}  // namespace

SyntaxTree SyntaxTree::leaf(VarId v) {
    if (v.index == 0) throw std::invalid_argument("variable index must be >= 1");
    return SyntaxTree(make_leaf_node(v));
}

SyntaxTree SyntaxTree::branch(FunctionKind fn, const SyntaxTree& left,
                              const SyntaxTree& right) {
    if (left.empty() || right.empty())
        throw std::invalid_argument("internal nodes need two nonempty children");
    return SyntaxTree(make_branch_node(fn, left.root_, right.root_));
}

bool operator==(const SyntaxTree& a, const SyntaxTree& b) {
    if (a.root_ == b.root_) return true;
    if (a.empty() || b.empty()) return false;
    return nodes_equal(a.root_.get(), b.root_.get());
}

NodeRef NodeRef::nth_node(const SyntaxTree& tree, std::uint32_t index) {
    if (index >= tree.node_count())
        throw std::invalid_argument("node index out of range");
    std::vector<ChildSide> steps;
    const SyntaxTree::Node* node = tree.root().get();
    std::uint32_t k = index;  // preorder rank within the current subtree
    while (k != 0) {
        const std::uint32_t left_nodes = node->left->nodes();
        if (k - 1 < left_nodes) {
            steps.push_back(ChildSide::Left);
            node = node->left.get();
            k -= 1;
        } else {
            steps.push_back(ChildSide::Right);
            node = node->right.get();
            k -= 1 + left_nodes;
        }
    }
    return NodeRef(std::move(steps));
}

NodeRef NodeRef::nth_leaf(const SyntaxTree& tree, std::uint32_t index) {
    if (index >= tree.leaf_count())
        throw std::invalid_argument("leaf index out of range");
    std::vector<ChildSide> steps;
    const SyntaxTree::Node* node = tree.root().get();
    std::uint32_t k = index;
    while (!node->is_leaf()) {
        if (k < node->left->leaves) {
            steps.push_back(ChildSide::Left);
            node = node->left.get();
        } else {
            k -= node->left->leaves;
            steps.push_back(ChildSide::Right);
            node = node->right.get();
        }
    }
    return NodeRef(std::move(steps));
}

const SyntaxTree::Node* NodeRef::resolve(const SyntaxTree& tree) const {
    const SyntaxTree::Node* node = tree.root().get();
    if (!node) throw std::invalid_argument("node reference into empty tree");
    for (ChildSide side : steps_) {
        if (node->is_leaf())
            throw std::invalid_argument("node reference does not resolve");
        node = side == ChildSide::Left ? node->left.get() : node->right.get();
    }
    return node;
}

std::vector<VarId> distinct_variables(const SyntaxTree& tree) {
    std::vector<VarId> vars;
    auto walk = [&](auto&& self, const SyntaxTree::Node* node) -> void {
        if (!node) return;
        if (node->is_leaf()) {
            vars.push_back(node->var);
            return;
        }
        self(self, node->left.get());
        self(self, node->right.get());
    };
    walk(walk, tree.root().get());
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    return vars;
}

std::uint32_t or_count(const SyntaxTree& tree) {
    std::uint32_t count = 0;
    auto walk = [&](auto&& self, const SyntaxTree::Node* node) -> void {
        if (!node || node->is_leaf()) return;
        if (node->fn == FunctionKind::Or) ++count;
        self(self, node->left.get());
        self(self, node->right.get());
    };
    walk(walk, tree.root().get());
    return count;
}

NodeRef uniform_random_node(const SyntaxTree& tree, Rng& rng) {
    if (tree.empty()) throw std::invalid_argument("no nodes in empty tree");
    return NodeRef::nth_node(
        tree, static_cast<std::uint32_t>(uniform_below(rng, tree.node_count())));
}

NodeRef uniform_random_leaf(const SyntaxTree& tree, Rng& rng) {
    if (tree.empty()) throw std::invalid_argument("no nodes in empty tree");
    return NodeRef::nth_leaf(
        tree, static_cast<std::uint32_t>(uniform_below(rng, tree.leaf_count())));
}

namespace {

// Shared-pointer view of the node a reference resolves to.
SyntaxTree::NodePtr resolve_ptr(const SyntaxTree& tree, const NodeRef& at) {
    SyntaxTree::NodePtr node = tree.root();
    if (!node) throw std::invalid_argument("node reference into empty tree");
    for (ChildSide side : at.steps()) {
        if (node->is_leaf())
            throw std::invalid_argument("node reference does not resolve");
        node = side == ChildSide::Left ? node->left : node->right;
    }
    return node;
}

}  // namespace

SyntaxTree replace_subtree(const SyntaxTree& tree, const NodeRef& at,
                           const SyntaxTree& replacement) {
    resolve_ptr(tree, at);  // validates the path
    if (replacement.empty())
        throw std::invalid_argument("replacement must be nonempty");
    return SyntaxTree(replace_rec(tree.root_, at.steps(), 0, replacement.root_));
}

SyntaxTree insert_function(const SyntaxTree& tree, const NodeRef& at,
                           FunctionKind fn, VarId new_leaf, bool new_leaf_left) {
    SyntaxTree::NodePtr displaced = resolve_ptr(tree, at);
    SyntaxTree::NodePtr leaf = make_leaf_node(new_leaf);
    SyntaxTree::NodePtr joined =
        new_leaf_left ? make_branch_node(fn, std::move(leaf), std::move(displaced))
                      : make_branch_node(fn, std::move(displaced), std::move(leaf));
    return SyntaxTree(replace_rec(tree.root_, at.steps(), 0, joined));
}

SyntaxTree delete_subtree(const SyntaxTree& tree, const NodeRef& at) {
    resolve_ptr(tree, at);
    if (at.is_root()) return SyntaxTree();
    std::vector<ChildSide> parent_steps(at.steps().begin(), at.steps().end() - 1);
    const NodeRef parent_ref(parent_steps);
    SyntaxTree::NodePtr parent = resolve_ptr(tree, parent_ref);
    SyntaxTree::NodePtr sibling =
        at.steps().back() == ChildSide::Left ? parent->right : parent->left;
    return SyntaxTree(replace_rec(tree.root_, parent_steps, 0, sibling));
}

std::string serialize(const SyntaxTree& tree) {
    if (tree.empty()) return "()";
    std::string out;
    auto walk = [&](auto&& self, const SyntaxTree::Node* node) -> void {
        if (node->is_leaf()) {
            out += 'x';
            out += std::to_string(node->var.index);
            return;
        }
        out += node->fn == FunctionKind::And ? "(and " : "(or ";
        self(self, node->left.get());
        out += ' ';
        self(self, node->right.get());
        out += ')';
    };
    walk(walk, tree.root().get());
    return out;
}

ParseError::ParseError(const std::string& what, std::size_t pos)
    : std::runtime_error(what + " at position " + std::to_string(pos)),
      position(pos) {}

namespace {

struct Parser {
    std::string_view text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    [[noreturn]] void fail(const std::string& what) { throw ParseError(what, pos); }

    bool consume(char c) {
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    std::string_view word() {
        const std::size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])))) {
            ++pos;
        }
        return text.substr(start, pos - start);
    }

    SyntaxTree expr() {
        skip_ws();
        if (pos >= text.size()) fail("unexpected end of input");
        if (consume('(')) {
            skip_ws();
            if (consume(')')) return SyntaxTree();  // "()" = empty tree
            const std::size_t op_pos = pos;
            const std::string_view op = word();
            FunctionKind fn;
            if (op == "and") {
                fn = FunctionKind::And;
            } else if (op == "or") {
                fn = FunctionKind::Or;
            } else {
                pos = op_pos;
                fail("expected 'and' or 'or'");
            }
            skip_ws();
            const std::size_t left_pos = pos;
            SyntaxTree left = expr();
            if (left.empty()) throw ParseError("empty tree not allowed as a child", left_pos);
            skip_ws();
            const std::size_t right_pos = pos;
            SyntaxTree right = expr();
            if (right.empty()) throw ParseError("empty tree not allowed as a child", right_pos);
            skip_ws();
            if (!consume(')')) fail("expected ')'");
            return SyntaxTree::branch(fn, left, right);
        }
        const std::size_t start = pos;
        const std::string_view w = word();
        if (w.size() < 2 || w[0] != 'x') {
            pos = start;
            fail("expected variable like x3");
        }
        std::uint64_t index = 0;
        for (std::size_t i = 1; i < w.size(); ++i) {
            if (!std::isdigit(static_cast<unsigned char>(w[i]))) {
                pos = start;
                fail("expected variable like x3");
            }
            index = index * 10 + static_cast<std::uint64_t>(w[i] - '0');
            if (index > 1'000'000) {
                pos = start;
                fail("variable index too large");
            }
        }
        if (index == 0) {
            pos = start;
            fail("variable index must be >= 1");
        }
        return SyntaxTree::leaf(VarId{static_cast<std::uint32_t>(index)});
    }
};

}  // namespace

SyntaxTree parse(std::string_view text) {
    Parser p{text};
    SyntaxTree tree = p.expr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing input");
    return tree;
}

SyntaxTree canonical_relabeling(const SyntaxTree& tree) {
    if (tree.empty()) return tree;
    std::unordered_map<std::uint32_t, std::uint32_t> remap;
    auto walk = [&](auto&& self, const SyntaxTree::Node* node) -> SyntaxTree {
        if (node->is_leaf()) {
            auto [it, inserted] = remap.try_emplace(
                node->var.index, static_cast<std::uint32_t>(remap.size() + 1));
            (void)inserted;
            return SyntaxTree::leaf(VarId{it->second});
        }
        SyntaxTree left = self(self, node->left.get());
        SyntaxTree right = self(self, node->right.get());
        return SyntaxTree::branch(node->fn, left, right);
    };
    return walk(walk, tree.root().get());
}

}  // namespace rlsgp
