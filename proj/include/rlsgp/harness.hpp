#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rlsgp/engine.hpp"

namespace rlsgp {

// One point of a parameter sweep; expands to a RunConfig per run.
struct ExperimentCell {
    std::uint32_t n = 0;
    std::optional<std::uint32_t> limit;
    DeletionVariant deletion = DeletionVariant::Subtree;
    FitnessMode mode = FitnessMode::CompleteTruthTable;
    std::uint32_t sample_size = 0;
    std::uint64_t threshold = 0;
    std::uint64_t max_iterations = 0;  // 0 -> engine default
    bool record_drift = false;

    std::string label() const;  // filename-safe, e.g. "n16_l16" or "n50_linf_s8192_A16"
    RunConfig to_config(std::uint64_t seed) const;
};

// How summary TSVs are keyed: one row per cell, or one file per threshold A
// with the training-set size as the sweep value.
enum class SweepStyle : std::uint8_t { CellLabel, SampleSizeByThreshold };

struct ExperimentSpec {
    std::string preset;  // empty for an explicit single cell
    std::vector<ExperimentCell> cells;
    SweepStyle style = SweepStyle::CellLabel;
    std::uint32_t runs = 500;
    std::uint64_t master_seed = 1;
    std::uint32_t workers = 0;  // 0 -> hardware concurrency
    std::string out_dir = "results";
};

// Raised by parse_cli when --help is requested; carries the help text.
struct HelpRequested {
    std::string text;
};

// CLI -> spec. Unknown flags, conflicting flags or invalid values throw
// std::invalid_argument with a usage message.
ExperimentSpec parse_cli(const std::vector<std::string>& args);

struct RawRecord {
    std::uint32_t run_id = 0;
    std::uint64_t seed = 0;
    std::uint64_t iterations = 0;
    Termination termination = Termination::BudgetExhausted;
    std::uint32_t final_leaves = 0;
    std::uint32_t final_distinct_vars = 0;
    std::uint32_t final_or_count = 0;
    std::uint64_t or_insertions_accepted = 0;
    bool gen_error_defined = false;
    double gen_error = 0;
    bool gen_error_is_estimate = false;
};

struct MetricSummary {
    double mean = 0;
    double stddev = 0;  // sample standard deviation; 0 for a single record
    double median = 0;
    std::uint64_t count = 0;
};

struct SummaryRow {
    std::uint64_t runs = 0;
    std::uint64_t stuck = 0;             // StuckDetected
    std::uint64_t budget_exhausted = 0;  // reported separately from stuck
    double stuck_proportion = 0;         // B = stuck / runs
    // Over successful runs only (stuck and budget-exhausted excluded);
    // absent when every run failed.
    std::optional<MetricSummary> runtime, size, or_final, or_accepted;
};

SummaryRow summarize_cell(std::span<const RawRecord> records);

struct ExperimentResults {
    std::vector<std::vector<RawRecord>> records;            // [cell][run]
    std::vector<SummaryRow> summaries;                      // per cell
    std::vector<std::vector<std::vector<DriftSample>>> traces;  // per drift cell
};

// Executes every (cell, run) job on a fixed-size worker pool, with the
// per-run seed derived from (master seed, cell index, run index), then writes
// raw.csv, the per-metric summary TSVs and a drift report per drift-recording
// cell into spec.out_dir. Output is identical for any worker count.
ExperimentResults run_experiment(const ExperimentSpec& spec);

// Runs fn(0..jobs-1) on `workers` threads; order of execution is undefined,
// so fn must only touch its own slot.
void parallel_for(std::uint64_t jobs, std::uint32_t workers,
                  const std::function<void(std::uint64_t)>& fn);

// Formatting used by every emitted file (and by the tests that recompute
// summaries from raw.csv).
std::string format_value(double v);      // %.6g
std::string format_gen_error(double v);  // %.12g
std::string raw_csv_header();
std::string raw_csv_line(const ExperimentCell& cell, const RawRecord& record);

}  // namespace rlsgp
