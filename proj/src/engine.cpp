#include "rlsgp/engine.hpp"

#include <deque>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace rlsgp {

void validate(const RunConfig& config) {
    if (config.n == 0) throw std::invalid_argument("n must be >= 1");
    if (config.limit && *config.limit == 0)
        throw std::invalid_argument("tree size limit must be >= 1");
    if (config.mode == FitnessMode::CompleteTruthTable) {
        if (config.n > kMaxCttVars)
            throw std::invalid_argument("complete-truth-table mode needs n <= 25");
    } else {
        if (config.sample_size == 0)
            throw std::invalid_argument("sampled mode needs sample size >= 1");
    }
    if (config.stagnation_window == 0)
        throw std::invalid_argument("stagnation window must be >= 1");
}

std::uint64_t effective_max_iterations(const RunConfig& config) {
    if (config.max_iterations != 0) return config.max_iterations;
    return config.mode == FitnessMode::CompleteTruthTable ? 10'000'000ULL
                                                          : 100'000ULL;
}

const char* to_string(Termination t) {
    switch (t) {
        case Termination::ExactOptimum: return "exact_optimum";
        case Termination::ThresholdMet: return "threshold_met";
        case Termination::StuckDetected: return "stuck_detected";
        case Termination::BudgetExhausted: return "budget_exhausted";
    }
    return "?";
}

RlsGpRun::RlsGpRun(const RunConfig& config)
    : config_(config),
      max_iterations_(effective_max_iterations(config)),
      rng_(config.seed) {
    validate(config_);
    if (config_.mode == FitnessMode::CompleteTruthTable) {
        ctt_.emplace(config_.n);
        current_error_ = ctt_->rows();  // empty tree: maximally wrong
    }
    stuck_check_gap_ = config_.stagnation_window;
}

std::uint64_t RlsGpRun::current_error() const {
    if (config_.mode != FitnessMode::CompleteTruthTable)
        throw std::logic_error("no cached error outside CTT mode");
    return current_error_;
}

Termination RlsGpRun::termination() const {
    if (!termination_) throw std::logic_error("run not finished");
    return *termination_;
}

RlsGpRun::StepInfo RlsGpRun::step() {
    if (termination_) throw std::logic_error("run already finished");
    ++iterations_;

    StepInfo info;
    info.parent_full = config_.limit && tree_.leaf_count() == *config_.limit;

    std::uint64_t parent_error;
    if (config_.mode == FitnessMode::SampledFresh) {
        if (sample_.size == 0) {
            sample_ = sample_rows(config_.n, config_.sample_size, rng_);
        } else {
            sample_.regenerate(rng_);
        }
        parent_error = sampled_error(tree_, sample_).count;
    } else {
        parent_error = current_error_;
    }
    info.parent_error = parent_error;

    MutationOutcome mutation = hvl_prime(tree_, config_.deletion, config_.n, rng_);
    info.op = mutation.op;

    const bool size_ok =
        !config_.limit || mutation.offspring.leaf_count() <= *config_.limit;
    info.size_rejected = !size_ok;

    std::uint64_t offspring_error = 0;
    if (size_ok) {
        offspring_error = config_.mode == FitnessMode::SampledFresh
                              ? sampled_error(mutation.offspring, sample_).count
                              : ctt_->error(mutation.offspring);
        info.offspring_error = offspring_error;
        info.accepted = offspring_error <= parent_error;
    }

    const std::uint64_t survivor_error =
        info.accepted ? offspring_error : parent_error;
    info.survivor_error = survivor_error;

    if (info.accepted) {
        if (mutation.op == MutationOp::Ins &&
            mutation.inserted_function == FunctionKind::Or) {
            ++or_insertions_accepted_;
        }
        if (survivor_error < parent_error) {
            last_improvement_ = iterations_;
            stuck_check_gap_ = config_.stagnation_window;
        }
        tree_ = std::move(mutation.offspring);
        if (config_.mode == FitnessMode::CompleteTruthTable)
            current_error_ = offspring_error;
    }

    if (config_.record_drift)
        drift_trace_.push_back({parent_error, survivor_error, info.parent_full});

    if (config_.mode == FitnessMode::CompleteTruthTable) {
        if (current_error_ == 0) termination_ = Termination::ExactOptimum;
    } else {
        if (survivor_error <= config_.accept_threshold)
            termination_ = Termination::ThresholdMet;
    }

    if (!termination_) maybe_detect_stuck();

    if (!termination_ && iterations_ >= max_iterations_)
        termination_ = Termination::BudgetExhausted;

    info.terminated = termination_.has_value();
    return info;
}

void RlsGpRun::maybe_detect_stuck() {
    if (config_.mode != FitnessMode::CompleteTruthTable || !config_.stuck_check ||
        !config_.limit) {
        return;
    }
    if (tree_.leaf_count() != *config_.limit || current_error_ == 0) return;
    if (iterations_ - last_improvement_ < stuck_check_gap_) return;

    const AbsorbingStatus status =
        classify_absorbing(tree_, config_.deletion, config_.n, config_.limit);
    if (status == AbsorbingStatus::Absorbing) {
        termination_ = Termination::StuckDetected;
    } else {
        // Escapable or inconclusive: keep running, re-check later at double
        // the stagnation gap so detection stays amortized.
        if (stuck_check_gap_ <= max_iterations_) stuck_check_gap_ *= 2;
    }
}

RunResult RlsGpRun::result() const {
    if (!termination_) throw std::logic_error("run not finished");
    RunResult r;
    r.iterations = iterations_;
    r.termination = *termination_;
    r.final_tree = tree_;
    r.final_leaf_count = tree_.leaf_count();
    r.final_distinct_vars =
        static_cast<std::uint32_t>(distinct_variables(tree_).size());
    r.final_or_count = or_count(tree_);
    r.or_insertions_accepted = or_insertions_accepted_;
    if (!tree_.empty())
        r.final_generalisation_error = generalisation_error_auto(tree_, config_.n);
    r.drift_trace = drift_trace_;
    return r;
}

RunResult run(const RunConfig& config) {
    RlsGpRun runner(config);
    while (!runner.finished()) runner.step();
    return runner.result();
}

AbsorbingStatus classify_absorbing(const SyntaxTree& tree, DeletionVariant variant,
                                   std::uint32_t n, std::optional<std::uint32_t> limit,
                                   const AbsorbingCheckLimits& limits) {
    if (tree.empty()) return AbsorbingStatus::Escapable;
    if (!limit) return AbsorbingStatus::Escapable;
    CttEvaluator eval(n);
    const std::uint64_t base_error = eval.error(tree);
    if (base_error == 0) return AbsorbingStatus::Escapable;
    if (tree.leaf_count() < *limit) return AbsorbingStatus::Escapable;
    if (tree.leaf_count() > *limit)
        throw std::invalid_argument("tree already exceeds the size limit");

    std::unordered_set<std::string> visited;
    std::deque<SyntaxTree> frontier;
    const SyntaxTree start = canonical_relabeling(tree);
    visited.insert(serialize(start));
    frontier.push_back(start);

    std::uint64_t outcomes_seen = 0;
    while (!frontier.empty()) {
        const SyntaxTree state = std::move(frontier.front());
        frontier.pop_front();

        std::vector<NeighborOutcome> neighbors;
        try {
            neighbors = enumerate_neighbors(state, variant, n, limit);
        } catch (const std::runtime_error&) {
            return AbsorbingStatus::Inconclusive;
        }
        outcomes_seen += neighbors.size();
        if (outcomes_seen > limits.max_outcomes) return AbsorbingStatus::Inconclusive;

        for (const NeighborOutcome& nb : neighbors) {
            if (!nb.within_size_limit) continue;
            const SyntaxTree& offspring = nb.mutation.offspring;
            const std::uint64_t err =
                offspring.empty() ? eval.rows() : eval.error(offspring);
            if (err > base_error) continue;  // rejected by elitism
            if (err < base_error) return AbsorbingStatus::Escapable;
            // Accepted and error-neutral. A shrink leads to a non-full state
            // with positive error, which always admits an improving root-AND
            // insertion of a falsifiable variable.
            if (offspring.leaf_count() < *limit) return AbsorbingStatus::Escapable;
            SyntaxTree canon = canonical_relabeling(offspring);
            std::string key = serialize(canon);
            if (visited.insert(std::move(key)).second) {
                if (visited.size() > limits.max_states)
                    return AbsorbingStatus::Inconclusive;
                frontier.push_back(std::move(canon));
            }
        }
    }
    return AbsorbingStatus::Absorbing;
}

bool is_absorbing(const SyntaxTree& tree, DeletionVariant variant, std::uint32_t n,
                  std::optional<std::uint32_t> limit) {
    const AbsorbingStatus status = classify_absorbing(tree, variant, n, limit);
    if (status == AbsorbingStatus::Inconclusive)
        throw std::runtime_error("neighborhood too large");
    return status == AbsorbingStatus::Absorbing;
}

SyntaxTree construct_theorem1_tree(std::uint32_t n, std::uint32_t limit) {
    if (limit < 4 || limit % 2 != 0)
        throw std::invalid_argument("limit must be even and >= 4");
    if (n < 3) throw std::invalid_argument("n must be >= 3");
    const SyntaxTree pair = SyntaxTree::branch(
        FunctionKind::And, SyntaxTree::leaf(VarId{1}), SyntaxTree::leaf(VarId{2}));
    SyntaxTree chain = pair;
    for (std::uint32_t i = 1; i < limit / 2; ++i)
        chain = SyntaxTree::branch(FunctionKind::Or, pair, chain);
    return chain;
}

}  // namespace rlsgp
