#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rlsgp/random.hpp"
#include "rlsgp/tree.hpp"

namespace rlsgp {

enum class FitnessMode : std::uint8_t { CompleteTruthTable, SampledFresh };

struct ErrorCount {
    std::uint64_t count = 0;
    FitnessMode mode = FitnessMode::CompleteTruthTable;
};

// Exhaustive evaluation is bounded by packing 2^n truth-table rows into
// machine words.
inline constexpr std::uint32_t kMaxCttVars = 25;

// One assignment to x_1..x_n; variable x_j reads bit (j-1).
struct InputRow {
    std::uint32_t n = 0;
    std::vector<std::uint64_t> words;

    bool bit(VarId v) const {
        return (words[(v.index - 1) >> 6] >> ((v.index - 1) & 63)) & 1;
    }
    static InputRow from_index(std::uint32_t n, std::uint64_t row_index);
};

// Recursive AND/OR evaluation. Throws on the empty tree and on leaf indices
// beyond row.n.
bool eval_on_row(const SyntaxTree& tree, const InputRow& row);

// Counts rows of the complete truth table on which `tree` differs from the
// n-variable conjunction. The whole table is evaluated in 64-row blocks:
// variables 1..6 are fixed word patterns, higher variables are constant
// within a word. Reusable across calls; scratch buffers grow with tree depth.
class CttEvaluator {
public:
    explicit CttEvaluator(std::uint32_t n);

    // Empty tree -> 2^n (maximally wrong sentinel, so the first insertion of
    // the search loop is always accepted).
    std::uint64_t error(const SyntaxTree& tree);

    std::uint64_t rows() const { return std::uint64_t{1} << n_; }
    std::uint32_t n() const { return n_; }

private:
    void eval_into(const SyntaxTree::Node* node, std::size_t slot);
    std::uint64_t* buffer(std::size_t slot);

    std::uint32_t n_;
    std::size_t words_;
    std::uint64_t last_word_mask_;
    std::vector<std::vector<std::uint64_t>> slots_;
};

ErrorCount ctt_error(const SyntaxTree& tree, std::uint32_t n);

// 2^{n-a} - 1: truth-table errors of a conjunction of `a` distinct variables.
std::uint64_t conjunction_ctt_error(std::uint32_t a, std::uint32_t n);

// s assignments drawn i.i.d. uniform (with replacement); stored column-wise,
// one bit-packed pattern per variable, plus the target column (AND of all n).
struct Sample {
    std::uint32_t n = 0;
    std::uint32_t size = 0;  // s
    std::uint32_t words_per_var = 0;
    std::vector<std::uint64_t> patterns;  // n * words_per_var
    std::vector<std::uint64_t> target;

    std::span<const std::uint64_t> pattern(VarId v) const {
        return {patterns.data() + std::size_t{v.index - 1} * words_per_var,
                words_per_var};
    }
    InputRow row(std::uint32_t r) const;

    // Fresh i.i.d. rows in place (per-iteration resampling without churn).
    void regenerate(Rng& rng);
};

Sample sample_rows(std::uint32_t n, std::uint32_t s, Rng& rng);

// Disagreements with the target on the sample; empty tree -> s.
ErrorCount sampled_error(const SyntaxTree& tree, const Sample& sample);

// Probability that the tree disagrees with the n-variable conjunction on a
// uniform random assignment. For a nonempty monotone AND/OR tree this equals
// on_set/2^d - 2^{-n}, where on_set counts satisfying assignments over the
// d distinct variables (the tree and the target are both true on all-ones).
struct GeneralisationError {
    std::uint64_t on_set = 0;     // meaningful when !is_estimate
    std::uint32_t distinct = 0;   // d
    std::uint32_t n = 0;
    bool is_estimate = false;
    double estimate_value = 0.0;  // meaningful when is_estimate

    double value() const;
    // on_set * 2^{n-d} - 1, the exact complete-truth-table error count.
    // Requires !is_estimate and n - distinct <= 63.
    std::uint64_t errors_on_complete_table() const;
};

inline constexpr std::uint32_t kDefaultDistinctCap = 30;

// Exact on-set count by memoized Shannon expansion over the distinct
// variables. Throws "use Monte Carlo estimate" when more than `distinct_cap`
// distinct variables appear, and on the empty tree.
GeneralisationError exact_generalisation_error(
    const SyntaxTree& tree, std::uint32_t n,
    std::uint32_t distinct_cap = kDefaultDistinctCap);

GeneralisationError estimate_generalisation_error(const SyntaxTree& tree,
                                                  std::uint32_t n,
                                                  std::uint32_t samples,
                                                  Rng& rng);

// Exact when the distinct-variable count allows it, otherwise a Monte Carlo
// estimate with 10^6 fixed-seed samples, flagged as approximate.
GeneralisationError generalisation_error_auto(const SyntaxTree& tree,
                                              std::uint32_t n);

}  // namespace rlsgp
