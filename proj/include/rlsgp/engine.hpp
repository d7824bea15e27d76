#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rlsgp/fitness.hpp"
#include "rlsgp/random.hpp"
#include "rlsgp/tree.hpp"
#include "rlsgp/variation.hpp"

namespace rlsgp {

struct RunConfig {
    std::uint32_t n = 0;
    std::optional<std::uint32_t> limit;  // leaf-count cap ℓ; nullopt = unbounded
    DeletionVariant deletion = DeletionVariant::Subtree;
    FitnessMode mode = FitnessMode::CompleteTruthTable;
    std::uint32_t sample_size = 0;       // s, sampled mode only
    std::uint64_t accept_threshold = 0;  // A, sampled mode only
    std::uint64_t max_iterations = 0;    // 0 -> default (1e7 CTT, 1e5 sampled)
    bool stuck_check = true;             // CTT mode only
    std::uint32_t stagnation_window = 1000;  // W
    std::uint64_t seed = 0;
    bool record_drift = false;
};

void validate(const RunConfig& config);  // throws std::invalid_argument
std::uint64_t effective_max_iterations(const RunConfig& config);

enum class Termination : std::uint8_t {
    ExactOptimum,
    ThresholdMet,
    StuckDetected,
    BudgetExhausted,
};

const char* to_string(Termination t);

struct DriftSample {
    std::uint64_t parent_error = 0;
    std::uint64_t survivor_error = 0;  // after selection
    bool parent_full = false;          // leaf_count(parent) == ℓ
};

struct RunResult {
    std::uint64_t iterations = 0;
    Termination termination = Termination::BudgetExhausted;
    SyntaxTree final_tree;
    std::uint32_t final_leaf_count = 0;
    std::uint32_t final_distinct_vars = 0;
    std::uint32_t final_or_count = 0;
    std::uint64_t or_insertions_accepted = 0;
    std::optional<GeneralisationError> final_generalisation_error;
    std::vector<DriftSample> drift_trace;  // filled when record_drift
};

// The elitist loop: start from the empty tree; each iteration mutate with
// HVL-Prime, reject offspring over the size limit, otherwise accept iff its
// error does not exceed the parent's under the active fitness mode. In
// sampled mode parent and offspring are measured on the same fresh sample and
// the threshold test applies to the survivor's error on that sample.
class RlsGpRun {
public:
    explicit RlsGpRun(const RunConfig& config);

    struct StepInfo {
        MutationOp op = MutationOp::Ins;
        bool size_rejected = false;
        bool accepted = false;
        std::uint64_t parent_error = 0;
        std::uint64_t offspring_error = 0;  // only meaningful when !size_rejected
        std::uint64_t survivor_error = 0;
        bool parent_full = false;
        bool terminated = false;
    };

    StepInfo step();  // throws std::logic_error once finished

    bool finished() const { return termination_.has_value(); }
    Termination termination() const;
    const SyntaxTree& tree() const { return tree_; }
    std::uint64_t iterations() const { return iterations_; }
    std::uint64_t current_error() const;  // CTT mode cache
    std::uint64_t or_insertions_accepted() const { return or_insertions_accepted_; }
    const RunConfig& config() const { return config_; }

    RunResult result() const;  // requires finished()

private:
    void maybe_detect_stuck();

    RunConfig config_;
    std::uint64_t max_iterations_;
    Rng rng_;
    SyntaxTree tree_;
    std::uint64_t iterations_ = 0;
    std::optional<Termination> termination_;
    std::optional<CttEvaluator> ctt_;
    std::uint64_t current_error_ = 0;
    Sample sample_;
    std::uint64_t or_insertions_accepted_ = 0;
    std::uint64_t last_improvement_ = 0;
    std::uint64_t stuck_check_gap_ = 0;
    std::vector<DriftSample> drift_trace_;
};

RunResult run(const RunConfig& config);

enum class AbsorbingStatus : std::uint8_t { Absorbing, Escapable, Inconclusive };

struct AbsorbingCheckLimits {
    std::size_t max_states = 256;          // canonical states explored
    std::uint64_t max_outcomes = 1'000'000;  // enumerated outcomes in total
};

// Decides whether the search can ever improve from `tree` under the
// acceptance rule: explores the closure of states reachable through accepted
// error-neutral mutations and looks for any strictly improving accepted
// mutation. Absorbing means provably trapped below the optimum. Soundness
// shortcuts (both proved by the monotone structure of AND/OR trees, which are
// true on the all-ones assignment):
//   - a state with error 0 is the optimum, never "stuck";
//   - any non-full state with error > 0 has an improving root-AND insertion,
//     so reaching one means the closure escapes;
//   - states are deduplicated up to variable relabeling (the target is
//     symmetric in all variables), which keeps closures finite and small.
AbsorbingStatus classify_absorbing(const SyntaxTree& tree, DeletionVariant variant,
                                   std::uint32_t n, std::optional<std::uint32_t> limit,
                                   const AbsorbingCheckLimits& limits = {});

// classify_absorbing with Inconclusive turned into an exception.
bool is_absorbing(const SyntaxTree& tree, DeletionVariant variant, std::uint32_t n,
                  std::optional<std::uint32_t> limit);

// The local-optimum witness for leaf-only deletion: an OR-chain of limit/2
// copies of (x1 AND x2). Requires limit even, limit >= 4, n >= 3; the result
// has exactly `limit` leaves and is absorbing under LeafOnly at that limit.
SyntaxTree construct_theorem1_tree(std::uint32_t n, std::uint32_t limit);

}  // namespace rlsgp
