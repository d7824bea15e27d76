#include "rlsgp/fitness.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace rlsgp {

namespace {

// Pattern of variable j over 64 consecutive truth-table rows: bit r of the
// word holds x_j of row (base + r). For j <= 6 the pattern is the same in
// every word; for j > 6 it is constant within a word.
constexpr std::uint64_t kLowVarPattern[6] = {
    0xAAAAAAAAAAAAAAAAULL, 0xCCCCCCCCCCCCCCCCULL, 0xF0F0F0F0F0F0F0F0ULL,
    0xFF00FF00FF00FF00ULL, 0xFFFF0000FFFF0000ULL, 0xFFFFFFFF00000000ULL};

std::uint64_t ctt_leaf_word(std::uint32_t var_index, std::uint64_t word_index) {
    if (var_index <= 6) return kLowVarPattern[var_index - 1];
    return ((word_index >> (var_index - 7)) & 1) ? ~std::uint64_t{0}
                                                 : std::uint64_t{0};
}

void check_ctt_n(std::uint32_t n) {
    if (n == 0) throw std::invalid_argument("n must be >= 1");
    if (n > kMaxCttVars)
        throw std::invalid_argument(
            "complete truth table limited to n <= " +
            std::to_string(kMaxCttVars) + "; use sampled fitness");
}

}  // namespace

InputRow InputRow::from_index(std::uint32_t n, std::uint64_t row_index) {
    if (n == 0 || n > 63) throw std::invalid_argument("row index form needs 1 <= n <= 63");
    if (row_index >> n) throw std::invalid_argument("row index out of range");
    InputRow row;
    row.n = n;
    row.words.assign((n + 63) / 64, 0);
    row.words[0] = row_index;
    return row;
}

bool eval_on_row(const SyntaxTree& tree, const InputRow& row) {
    if (tree.empty())
        throw std::invalid_argument("empty tree has no defined output");
    auto walk = [&](auto&& self, const SyntaxTree::Node* node) -> bool {
        if (node->is_leaf()) {
            if (node->var.index > row.n)
                throw std::invalid_argument("leaf index exceeds problem size");
            return row.bit(node->var);
        }
        const bool l = self(self, node->left.get());
        // No short-circuit: keeps evaluation total over malformed leaves.
        const bool r = self(self, node->right.get());
        return node->fn == FunctionKind::And ? (l && r) : (l || r);
    };
    return walk(walk, tree.root().get());
}

CttEvaluator::CttEvaluator(std::uint32_t n) : n_(n) {
    check_ctt_n(n);
    words_ = n >= 6 ? (std::size_t{1} << (n - 6)) : 1;
    last_word_mask_ = n >= 6 ? ~std::uint64_t{0}
                             : ((std::uint64_t{1} << (std::uint64_t{1} << n)) - 1);
}

std::uint64_t* CttEvaluator::buffer(std::size_t slot) {
    while (slots_.size() <= slot) slots_.emplace_back(words_);
    return slots_[slot].data();
}

void CttEvaluator::eval_into(const SyntaxTree::Node* node, std::size_t slot) {
    std::uint64_t* out = buffer(slot);
    if (node->is_leaf()) {
        const std::uint32_t v = node->var.index;
        if (v > n_) throw std::invalid_argument("leaf index exceeds problem size");
        if (v <= 6) {
            const std::uint64_t pat = kLowVarPattern[v - 1];
            for (std::size_t w = 0; w < words_; ++w) out[w] = pat;
        } else {
            for (std::size_t w = 0; w < words_; ++w) out[w] = ctt_leaf_word(v, w);
        }
        return;
    }
    eval_into(node->left.get(), slot);
    eval_into(node->right.get(), slot + 1);
    out = buffer(slot);  // children may have grown the pool
    const std::uint64_t* rhs = buffer(slot + 1);
    if (node->fn == FunctionKind::And) {
        for (std::size_t w = 0; w < words_; ++w) out[w] &= rhs[w];
    } else {
        for (std::size_t w = 0; w < words_; ++w) out[w] |= rhs[w];
    }
}

std::uint64_t CttEvaluator::error(const SyntaxTree& tree) {
    if (tree.empty()) return rows();
    eval_into(tree.root().get(), 0);
    const std::uint64_t* vals = buffer(0);
    // Target AND_n is true only on the all-ones row, the top bit of the last
    // word (row 2^n - 1).
    std::uint64_t err = 0;
    for (std::size_t w = 0; w + 1 < words_; ++w) err += std::popcount(vals[w]);
    const std::uint64_t target_bit =
        n_ >= 6 ? (std::uint64_t{1} << 63)
                : (std::uint64_t{1} << ((std::uint64_t{1} << n_) - 1));
    err += std::popcount((vals[words_ - 1] ^ target_bit) & last_word_mask_);
    return err;
}

ErrorCount ctt_error(const SyntaxTree& tree, std::uint32_t n) {
    CttEvaluator eval(n);
    return {eval.error(tree), FitnessMode::CompleteTruthTable};
}

std::uint64_t conjunction_ctt_error(std::uint32_t a, std::uint32_t n) {
    if (a == 0 || a > n)
        throw std::invalid_argument("need 1 <= a <= n distinct variables");
    if (n - a >= 64) throw std::invalid_argument("2^(n-a) overflows");
    return (std::uint64_t{1} << (n - a)) - 1;
}

InputRow Sample::row(std::uint32_t r) const {
    InputRow out;
    out.n = n;
    out.words.assign((n + 63) / 64, 0);
    for (std::uint32_t j = 1; j <= n; ++j) {
        const std::uint64_t bit =
            (patterns[std::size_t{j - 1} * words_per_var + (r >> 6)] >> (r & 63)) & 1;
        out.words[(j - 1) >> 6] |= bit << ((j - 1) & 63);
    }
    return out;
}

void Sample::regenerate(Rng& rng) {
    // Column-major fill: every (row, variable) bit is an independent fair
    // coin, which is the same joint distribution as drawing rows one by one.
    for (auto& word : patterns) word = rng();
    const std::uint64_t tail_mask =
        (size & 63) ? ((std::uint64_t{1} << (size & 63)) - 1) : ~std::uint64_t{0};
    for (std::uint32_t j = 0; j < n; ++j)
        patterns[std::size_t{j + 1} * words_per_var - 1] &= tail_mask;
    for (std::uint32_t w = 0; w < words_per_var; ++w) {
        std::uint64_t t = ~std::uint64_t{0};
        for (std::uint32_t j = 0; j < n; ++j)
            t &= patterns[std::size_t{j} * words_per_var + w];
        target[w] = t;
    }
}

Sample sample_rows(std::uint32_t n, std::uint32_t s, Rng& rng) {
    if (n == 0) throw std::invalid_argument("n must be >= 1");
    if (s == 0) throw std::invalid_argument("sample size must be >= 1");
    Sample sample;
    sample.n = n;
    sample.size = s;
    sample.words_per_var = (s + 63) / 64;
    sample.patterns.assign(std::size_t{n} * sample.words_per_var, 0);
    sample.target.assign(sample.words_per_var, 0);
    sample.regenerate(rng);
    return sample;
}

namespace {

void sample_eval_into(const SyntaxTree::Node* node, const Sample& sample,
                      std::vector<std::vector<std::uint64_t>>& slots,
                      std::size_t slot) {
    const std::size_t words = sample.words_per_var;
    while (slots.size() <= slot + 1) slots.emplace_back(words);
    if (node->is_leaf()) {
        if (node->var.index > sample.n)
            throw std::invalid_argument("leaf index exceeds problem size");
        const auto pat = sample.pattern(node->var);
        std::copy(pat.begin(), pat.end(), slots[slot].begin());
        return;
    }
    sample_eval_into(node->left.get(), sample, slots, slot);
    sample_eval_into(node->right.get(), sample, slots, slot + 1);
    std::uint64_t* out = slots[slot].data();
    const std::uint64_t* rhs = slots[slot + 1].data();
    if (node->fn == FunctionKind::And) {
        for (std::size_t w = 0; w < words; ++w) out[w] &= rhs[w];
    } else {
        for (std::size_t w = 0; w < words; ++w) out[w] |= rhs[w];
    }
}

}  // namespace

ErrorCount sampled_error(const SyntaxTree& tree, const Sample& sample) {
    if (tree.empty()) return {sample.size, FitnessMode::SampledFresh};
    thread_local std::vector<std::vector<std::uint64_t>> slots;
    for (auto& s : slots)
        if (s.size() != sample.words_per_var) s.assign(sample.words_per_var, 0);
    sample_eval_into(tree.root().get(), sample, slots, 0);
    std::uint64_t err = 0;
    const std::uint64_t tail_mask = (sample.size & 63)
                                        ? ((std::uint64_t{1} << (sample.size & 63)) - 1)
                                        : ~std::uint64_t{0};
    for (std::uint32_t w = 0; w < sample.words_per_var; ++w) {
        std::uint64_t diff = slots[0][w] ^ sample.target[w];
        if (w + 1 == sample.words_per_var) diff &= tail_mask;
        err += std::popcount(diff);
    }
    return {err, FitnessMode::SampledFresh};
}

double GeneralisationError::value() const {
    if (is_estimate) return estimate_value;
    return std::ldexp(static_cast<double>(on_set), -static_cast<int>(distinct)) -
           std::ldexp(1.0, -static_cast<int>(n));
}

std::uint64_t GeneralisationError::errors_on_complete_table() const {
    if (is_estimate)
        throw std::logic_error("no exact table count for an estimate");
    if (n - distinct >= 64 || (distinct < 64 && on_set > (std::uint64_t{1} << distinct)))
        throw std::overflow_error("table error count does not fit 64 bits");
    return (on_set << (n - distinct)) - 1;
}

namespace {

// Private restricted-expression form used by the on-set counter: the input
// tree with some variables fixed, constants propagated away.
struct RExpr {
    enum Kind : std::uint8_t { False, True, Leaf, And, Or } kind;
    std::uint32_t var = 0;
    std::shared_ptr<const RExpr> left, right;
};
using RPtr = std::shared_ptr<const RExpr>;

RPtr rexpr_const(bool b) {
    static const RPtr f = std::make_shared<RExpr>(RExpr{RExpr::False, 0, {}, {}});
    static const RPtr t = std::make_shared<RExpr>(RExpr{RExpr::True, 0, {}, {}});
    return b ? t : f;
}

RPtr rexpr_from(const SyntaxTree::Node* node) {
    if (node->is_leaf())
        return std::make_shared<RExpr>(RExpr{RExpr::Leaf, node->var.index, {}, {}});
    auto l = rexpr_from(node->left.get());
    auto r = rexpr_from(node->right.get());
    return std::make_shared<RExpr>(
        RExpr{node->fn == FunctionKind::And ? RExpr::And : RExpr::Or, 0,
              std::move(l), std::move(r)});
}

RPtr restrict_var(const RPtr& e, std::uint32_t var, bool value) {
    switch (e->kind) {
        case RExpr::False:
        case RExpr::True:
            return e;
        case RExpr::Leaf:
            return e->var == var ? rexpr_const(value) : e;
        case RExpr::And: {
            RPtr l = restrict_var(e->left, var, value);
            if (l->kind == RExpr::False) return l;
            RPtr r = restrict_var(e->right, var, value);
            if (r->kind == RExpr::False) return r;
            if (l->kind == RExpr::True) return r;
            if (r->kind == RExpr::True) return l;
            if (l == e->left && r == e->right) return e;
            return std::make_shared<RExpr>(RExpr{RExpr::And, 0, l, r});
        }
        case RExpr::Or: {
            RPtr l = restrict_var(e->left, var, value);
            if (l->kind == RExpr::True) return l;
            RPtr r = restrict_var(e->right, var, value);
            if (r->kind == RExpr::True) return r;
            if (l->kind == RExpr::False) return r;
            if (r->kind == RExpr::False) return l;
            if (l == e->left && r == e->right) return e;
            return std::make_shared<RExpr>(RExpr{RExpr::Or, 0, l, r});
        }
    }
    return e;
}

void collect_vars(const RPtr& e, std::vector<std::uint32_t>& out) {
    if (e->kind == RExpr::Leaf) {
        out.push_back(e->var);
    } else if (e->kind == RExpr::And || e->kind == RExpr::Or) {
        collect_vars(e->left, out);
        collect_vars(e->right, out);
    }
}

std::string rexpr_key(const RPtr& e) {
    switch (e->kind) {
        case RExpr::False: return "0";
        case RExpr::True: return "1";
        case RExpr::Leaf: return std::to_string(e->var);
        case RExpr::And: return "(&" + rexpr_key(e->left) + "," + rexpr_key(e->right) + ")";
        case RExpr::Or: return "(|" + rexpr_key(e->left) + "," + rexpr_key(e->right) + ")";
    }
    return "";
}

// Satisfying-assignment count of e over exactly its own variable set.
std::uint64_t on_set_over_own_vars(const RPtr& e,
                                   std::unordered_map<std::string, std::uint64_t>& memo) {
    if (e->kind == RExpr::False) return 0;
    if (e->kind == RExpr::True) return 1;  // empty variable set
    if (e->kind == RExpr::Leaf) return 1;  // x over {x}
    const std::string key = rexpr_key(e);
    if (auto it = memo.find(key); it != memo.end()) return it->second;

    std::vector<std::uint32_t> vars;
    collect_vars(e, vars);
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    const std::uint32_t d = static_cast<std::uint32_t>(vars.size());
    const std::uint32_t pivot = vars.front();

    std::uint64_t total = 0;
    for (bool value : {false, true}) {
        RPtr restricted = restrict_var(e, pivot, value);
        std::vector<std::uint32_t> sub_vars;
        collect_vars(restricted, sub_vars);
        std::sort(sub_vars.begin(), sub_vars.end());
        sub_vars.erase(std::unique(sub_vars.begin(), sub_vars.end()),
                       sub_vars.end());
        const std::uint32_t sub_d = static_cast<std::uint32_t>(sub_vars.size());
        // Variables dropped by simplification are free multipliers.
        const std::uint32_t free_vars = d - 1 - sub_d;
        total += on_set_over_own_vars(restricted, memo) << free_vars;
    }
    memo.emplace(key, total);
    return total;
}

}  // namespace

GeneralisationError exact_generalisation_error(const SyntaxTree& tree,
                                               std::uint32_t n,
                                               std::uint32_t distinct_cap) {
    if (tree.empty())
        throw std::invalid_argument("empty tree has no generalisation error");
    const auto vars = distinct_variables(tree);
    if (!vars.empty() && vars.back().index > n)
        throw std::invalid_argument("leaf index exceeds problem size");
    if (vars.size() > distinct_cap)
        throw std::invalid_argument("too many distinct variables; use Monte Carlo estimate");
    std::unordered_map<std::string, std::uint64_t> memo;
    const RPtr expr = rexpr_from(tree.root().get());
    GeneralisationError result;
    result.on_set = on_set_over_own_vars(expr, memo);
    result.distinct = static_cast<std::uint32_t>(vars.size());
    result.n = n;
    return result;
}

GeneralisationError estimate_generalisation_error(const SyntaxTree& tree,
                                                  std::uint32_t n,
                                                  std::uint32_t samples,
                                                  Rng& rng) {
    if (tree.empty())
        throw std::invalid_argument("empty tree has no generalisation error");
    if (samples == 0) throw std::invalid_argument("need at least one sample");
    std::uint64_t disagreements = 0;
    InputRow row;
    row.n = n;
    row.words.assign((n + 63) / 64, 0);
    const std::uint32_t tail_bits = n & 63;
    const std::uint64_t tail_mask =
        tail_bits ? (std::uint64_t{1} << tail_bits) - 1 : ~std::uint64_t{0};
    for (std::uint32_t i = 0; i < samples; ++i) {
        bool all_ones = true;
        for (std::size_t w = 0; w < row.words.size(); ++w) {
            const std::uint64_t mask =
                w + 1 == row.words.size() ? tail_mask : ~std::uint64_t{0};
            row.words[w] = rng() & mask;
            all_ones = all_ones && row.words[w] == mask;
        }
        if (eval_on_row(tree, row) != all_ones) ++disagreements;
    }
    GeneralisationError result;
    result.is_estimate = true;
    result.n = n;
    result.distinct = static_cast<std::uint32_t>(distinct_variables(tree).size());
    result.estimate_value =
        static_cast<double>(disagreements) / static_cast<double>(samples);
    return result;
}

GeneralisationError generalisation_error_auto(const SyntaxTree& tree,
                                              std::uint32_t n) {
    const auto vars = distinct_variables(tree);
    if (vars.size() <= kDefaultDistinctCap)
        return exact_generalisation_error(tree, n);
    Rng rng(0x67656e657272ULL);  // fixed seed: the estimate is reproducible
    return estimate_generalisation_error(tree, n, 1'000'000, rng);
}

}  // namespace rlsgp
