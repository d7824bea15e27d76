#include "rlsgp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>

#include "rlsgp/drift.hpp"

namespace rlsgp {

namespace {

std::string limit_string(const std::optional<std::uint32_t>& limit) {
    return limit ? std::to_string(*limit) : "inf";
}

bool successful(Termination t) {
    return t == Termination::ExactOptimum || t == Termination::ThresholdMet;
}

MetricSummary summarize_metric(std::vector<double> values) {
    MetricSummary m;
    m.count = values.size();
    double sum = 0;
    for (double v : values) sum += v;
    m.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0;
        for (double v : values) ss += (v - m.mean) * (v - m.mean);
        m.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    m.median = values.size() % 2 ? values[mid]
                                 : (values[mid - 1] + values[mid]) / 2.0;
    return m;
}

}  // namespace

std::string ExperimentCell::label() const {
    std::string out = "n" + std::to_string(n) + "_l" + limit_string(limit);
    if (mode == FitnessMode::SampledFresh) {
        out += "_s" + std::to_string(sample_size) + "_A" + std::to_string(threshold);
    }
    return out;
}

RunConfig ExperimentCell::to_config(std::uint64_t seed) const {
    RunConfig config;
    config.n = n;
    config.limit = limit;
    config.deletion = deletion;
    config.mode = mode;
    config.sample_size = sample_size;
    config.accept_threshold = threshold;
    config.max_iterations = max_iterations;
    config.seed = seed;
    config.record_drift = record_drift;
    return config;
}

ExperimentSpec parse_cli(const std::vector<std::string>& args) {
    CLI::App app{"RLS-GP experiment runner"};
    app.name("rlsgp");

    ExperimentSpec spec;
    std::string preset;
    std::uint32_t n = 0;
    std::string limit = "inf";
    std::string deletion = "subtree";
    std::string mode = "ctt";
    std::uint32_t sample_size = 0;
    std::uint64_t threshold = 0;
    std::uint64_t max_iters = 0;
    bool record_drift = false;

    auto* preset_opt =
        app.add_option("--preset", preset, "One of table1, table2, fig2, fig3, drift-report")
            ->check(CLI::IsMember({"table1", "table2", "fig2", "fig3", "drift-report"}));
    auto* n_opt = app.add_option("--n", n, "Problem size (number of variables)");
    auto* limit_opt = app.add_option("--limit", limit, "Tree size limit (integer or 'inf')");
    auto* deletion_opt = app.add_option("--deletion", deletion, "Deletion variant")
                             ->check(CLI::IsMember({"leaf", "subtree"}));
    auto* mode_opt = app.add_option("--mode", mode, "Fitness mode")
                         ->check(CLI::IsMember({"ctt", "sampled"}));
    auto* s_opt = app.add_option("--sample-size", sample_size, "Training-set size s");
    auto* a_opt = app.add_option("--threshold", threshold, "Sampled-error acceptance threshold A");
    auto* drift_opt = app.add_flag("--record-drift", record_drift, "Record per-iteration drift");
    app.add_option("--runs", spec.runs, "Runs per cell")->check(CLI::PositiveNumber);
    app.add_option("--seed", spec.master_seed, "Master seed");
    app.add_option("--max-iters", max_iters, "Iteration budget per run");
    app.add_option("--workers", spec.workers, "Worker threads (0 = hardware)");
    app.add_option("--out", spec.out_dir, "Output directory");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested{app.help()};
    } catch (const CLI::ParseError& e) {
        throw std::invalid_argument(std::string("usage error: ") + e.what());
    }

    auto parse_limit = [&]() -> std::optional<std::uint32_t> {
        if (limit == "inf") return std::nullopt;
        std::uint64_t value = 0;
        for (char c : limit) {
            if (c < '0' || c > '9')
                throw std::invalid_argument("usage error: --limit takes an integer or 'inf'");
            value = value * 10 + static_cast<std::uint64_t>(c - '0');
            if (value > 1'000'000)
                throw std::invalid_argument("usage error: --limit too large");
        }
        if (limit.empty() || value == 0)
            throw std::invalid_argument("usage error: --limit must be >= 1 or 'inf'");
        return static_cast<std::uint32_t>(value);
    };

    if (*preset_opt) {
        for (const CLI::Option* opt :
             {n_opt, limit_opt, deletion_opt, mode_opt, s_opt, a_opt, drift_opt}) {
            if (opt->count() > 0)
                throw std::invalid_argument("usage error: " + opt->get_name() +
                                            " conflicts with --preset");
        }
        spec.preset = preset;
        if (preset == "table1" || preset == "table2") {
            const DeletionVariant variant = preset == "table1"
                                                ? DeletionVariant::LeafOnly
                                                : DeletionVariant::Subtree;
            for (std::uint32_t size : {4u, 8u, 12u, 16u}) {
                const std::optional<std::uint32_t> limits[] = {
                    size, size + 1, 2 * size, std::nullopt};
                for (const auto& l : limits) {
                    ExperimentCell cell;
                    cell.n = size;
                    cell.limit = l;
                    cell.deletion = variant;
                    cell.mode = FitnessMode::CompleteTruthTable;
                    cell.max_iterations = max_iters;
                    spec.cells.push_back(cell);
                }
            }
        } else if (preset == "fig2" || preset == "fig3") {
            spec.style = SweepStyle::SampleSizeByThreshold;
            for (std::uint64_t a : {0ull, 8ull, 16ull, 32ull}) {
                for (std::uint32_t s = 16; s <= 65536; s *= 2) {
                    ExperimentCell cell;
                    cell.n = 50;
                    cell.deletion = DeletionVariant::Subtree;
                    cell.mode = FitnessMode::SampledFresh;
                    cell.sample_size = s;
                    cell.threshold = a;
                    cell.max_iterations = max_iters;
                    spec.cells.push_back(cell);
                }
            }
        } else {  // drift-report
            ExperimentCell cell;
            cell.n = 12;
            cell.limit = 24;
            cell.deletion = DeletionVariant::Subtree;
            cell.mode = FitnessMode::CompleteTruthTable;
            cell.record_drift = true;
            cell.max_iterations = max_iters;
            spec.cells.push_back(cell);
        }
        return spec;
    }

    if (n_opt->count() == 0)
        throw std::invalid_argument("usage error: --n is required without --preset");

    ExperimentCell cell;
    cell.n = n;
    cell.limit = parse_limit();
    cell.deletion =
        deletion == "leaf" ? DeletionVariant::LeafOnly : DeletionVariant::Subtree;
    cell.mode = mode == "sampled" ? FitnessMode::SampledFresh
                                  : FitnessMode::CompleteTruthTable;
    cell.sample_size = sample_size;
    cell.threshold = threshold;
    cell.max_iterations = max_iters;
    cell.record_drift = record_drift;
    if (cell.mode == FitnessMode::SampledFresh && cell.sample_size == 0)
        throw std::invalid_argument("usage error: sampled mode needs --sample-size");
    if (cell.mode == FitnessMode::CompleteTruthTable && s_opt->count() > 0)
        throw std::invalid_argument("usage error: --sample-size needs --mode sampled");
    spec.cells.push_back(cell);
    return spec;
}

SummaryRow summarize_cell(std::span<const RawRecord> records) {
    if (records.empty()) throw std::invalid_argument("no records for cell");
    SummaryRow row;
    row.runs = records.size();
    std::vector<double> runtime, size, or_final, or_accepted;
    for (const RawRecord& r : records) {
        if (r.termination == Termination::StuckDetected) ++row.stuck;
        if (r.termination == Termination::BudgetExhausted) ++row.budget_exhausted;
        if (!successful(r.termination)) continue;
        runtime.push_back(static_cast<double>(r.iterations));
        size.push_back(static_cast<double>(r.final_leaves));
        or_final.push_back(static_cast<double>(r.final_or_count));
        or_accepted.push_back(static_cast<double>(r.or_insertions_accepted));
    }
    row.stuck_proportion =
        static_cast<double>(row.stuck) / static_cast<double>(row.runs);
    if (!runtime.empty()) {
        row.runtime = summarize_metric(std::move(runtime));
        row.size = summarize_metric(std::move(size));
        row.or_final = summarize_metric(std::move(or_final));
        row.or_accepted = summarize_metric(std::move(or_accepted));
    }
    return row;
}

void parallel_for(std::uint64_t jobs, std::uint32_t workers,
                  const std::function<void(std::uint64_t)>& fn) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<std::uint32_t>(
        std::min<std::uint64_t>(workers, std::max<std::uint64_t>(jobs, 1)));

    std::atomic<std::uint64_t> next{0};
    std::mutex error_mutex;
    std::string first_error;

    auto body = [&]() {
        for (;;) {
            const std::uint64_t i = next.fetch_add(1);
            if (i >= jobs) return;
            try {
                fn(i);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (first_error.empty()) first_error = e.what();
            }
        }
    };

    std::vector<std::thread> pool;
    for (std::uint32_t w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
    if (!first_error.empty())
        throw std::runtime_error("run failed: " + first_error);
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string format_gen_error(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string raw_csv_header() {
    return "run_id,seed,n,limit,deletion,mode,s,A,iterations,termination,"
           "final_leaves,final_distinct_vars,final_or_count,"
           "or_insertions_accepted,gen_error,gen_error_is_estimate";
}

std::string raw_csv_line(const ExperimentCell& cell, const RawRecord& r) {
    std::string line;
    line += std::to_string(r.run_id);
    line += ',';
    line += std::to_string(r.seed);
    line += ',';
    line += std::to_string(cell.n);
    line += ',';
    line += limit_string(cell.limit);
    line += ',';
    line += cell.deletion == DeletionVariant::LeafOnly ? "leaf" : "subtree";
    line += ',';
    line += cell.mode == FitnessMode::SampledFresh ? "sampled" : "ctt";
    line += ',';
    line += std::to_string(cell.sample_size);
    line += ',';
    line += std::to_string(cell.threshold);
    line += ',';
    line += std::to_string(r.iterations);
    line += ',';
    line += to_string(r.termination);
    line += ',';
    line += std::to_string(r.final_leaves);
    line += ',';
    line += std::to_string(r.final_distinct_vars);
    line += ',';
    line += std::to_string(r.final_or_count);
    line += ',';
    line += std::to_string(r.or_insertions_accepted);
    line += ',';
    line += r.gen_error_defined ? format_gen_error(r.gen_error) : "nan";
    line += ',';
    line += r.gen_error_is_estimate ? '1' : '0';
    return line;
}

namespace {

void write_summary_files(const ExperimentSpec& spec,
                         const ExperimentResults& results,
                         const std::filesystem::path& dir) {
    struct Metric {
        const char* name;
        const std::optional<MetricSummary> SummaryRow::* field;
    };
    const Metric metrics[] = {{"runtime", &SummaryRow::runtime},
                              {"size", &SummaryRow::size},
                              {"or_final", &SummaryRow::or_final},
                              {"or_accepted", &SummaryRow::or_accepted}};

    auto write_rows = [&](std::ofstream& out, const Metric& metric,
                          const std::vector<std::size_t>& cell_indices,
                          const std::function<std::string(std::size_t)>& sweep) {
        out << "sweep_value\tmean\tstd\tmedian\tcount\tstuck_proportion\n";
        for (std::size_t idx : cell_indices) {
            const SummaryRow& row = results.summaries[idx];
            const auto& m = row.*(metric.field);
            out << sweep(idx) << '\t';
            if (m) {
                out << format_value(m->mean) << '\t' << format_value(m->stddev)
                    << '\t' << format_value(m->median) << '\t' << m->count;
            } else {
                out << "nan\tnan\tnan\t0";
            }
            out << '\t' << format_value(row.stuck_proportion) << '\n';
        }
    };

    if (spec.style == SweepStyle::SampleSizeByThreshold) {
        std::vector<std::uint64_t> thresholds;
        for (const auto& cell : spec.cells) {
            if (std::find(thresholds.begin(), thresholds.end(), cell.threshold) ==
                thresholds.end())
                thresholds.push_back(cell.threshold);
        }
        for (std::uint64_t a : thresholds) {
            std::vector<std::size_t> indices;
            for (std::size_t i = 0; i < spec.cells.size(); ++i)
                if (spec.cells[i].threshold == a) indices.push_back(i);
            for (const Metric& metric : metrics) {
                std::ofstream out(dir / (std::string(metric.name) + "_A" +
                                         std::to_string(a) + ".tsv"));
                write_rows(out, metric, indices, [&](std::size_t idx) {
                    return std::to_string(spec.cells[idx].sample_size);
                });
            }
        }
        return;
    }

    std::vector<std::size_t> all(spec.cells.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    for (const Metric& metric : metrics) {
        std::ofstream out(dir / ("summary_" + std::string(metric.name) + ".tsv"));
        write_rows(out, metric, all,
                   [&](std::size_t idx) { return spec.cells[idx].label(); });
    }
}

}  // namespace

ExperimentResults run_experiment(const ExperimentSpec& spec) {
    if (spec.cells.empty()) throw std::invalid_argument("no cells to run");
    if (spec.runs == 0) throw std::invalid_argument("runs must be >= 1");
    for (const auto& cell : spec.cells) validate(cell.to_config(0));

    const std::filesystem::path dir(spec.out_dir);
    std::filesystem::create_directories(dir);
    std::ofstream raw(dir / "raw.csv");
    if (!raw) throw std::runtime_error("cannot write to " + spec.out_dir);

    ExperimentResults results;
    results.records.assign(spec.cells.size(), {});
    results.traces.assign(spec.cells.size(), {});
    for (std::size_t c = 0; c < spec.cells.size(); ++c) {
        results.records[c].resize(spec.runs);
        if (spec.cells[c].record_drift) results.traces[c].resize(spec.runs);
    }

    parallel_for(
        static_cast<std::uint64_t>(spec.cells.size()) * spec.runs, spec.workers,
        [&](std::uint64_t job) {
            const std::size_t cell_idx = job / spec.runs;
            const std::uint32_t run_idx = static_cast<std::uint32_t>(job % spec.runs);
            const ExperimentCell& cell = spec.cells[cell_idx];
            const std::uint64_t seed =
                derive_run_seed(spec.master_seed, cell_idx, run_idx);
            RunResult rr = run(cell.to_config(seed));

            RawRecord rec;
            rec.run_id = run_idx;
            rec.seed = seed;
            rec.iterations = rr.iterations;
            rec.termination = rr.termination;
            rec.final_leaves = rr.final_leaf_count;
            rec.final_distinct_vars = rr.final_distinct_vars;
            rec.final_or_count = rr.final_or_count;
            rec.or_insertions_accepted = rr.or_insertions_accepted;
            if (rr.final_generalisation_error) {
                rec.gen_error_defined = true;
                rec.gen_error = rr.final_generalisation_error->value();
                rec.gen_error_is_estimate = rr.final_generalisation_error->is_estimate;
            }
            results.records[cell_idx][run_idx] = rec;
            if (cell.record_drift)
                results.traces[cell_idx][run_idx] = std::move(rr.drift_trace);
        });

    raw << raw_csv_header() << '\n';
    for (std::size_t c = 0; c < spec.cells.size(); ++c)
        for (const RawRecord& rec : results.records[c])
            raw << raw_csv_line(spec.cells[c], rec) << '\n';
    raw.close();

    results.summaries.reserve(spec.cells.size());
    for (const auto& cell_records : results.records)
        results.summaries.push_back(summarize_cell(cell_records));

    write_summary_files(spec, results, dir);

    for (std::size_t c = 0; c < spec.cells.size(); ++c) {
        const ExperimentCell& cell = spec.cells[c];
        if (!cell.record_drift || cell.mode != FitnessMode::CompleteTruthTable)
            continue;
        const auto edges = geometric_bin_edges(
            cell.n, std::ldexp(1.0, static_cast<int>(cell.n)));
        const BinnedDrift drift = binned_drift_from_traces(results.traces[c], edges);
        std::ofstream out(dir / ("drift_" + cell.label() + ".tsv"));
        write_drift_report(out, drift, cell.n, cell.limit.value_or(cell.n));
    }
    return results;
}

}  // namespace rlsgp
