#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rlsgp/engine.hpp"
#include "rlsgp/random.hpp"

namespace rlsgp {

// Parameters of the super-multiplicative drift condition
//   E[X_t - X_{t+1} | X_t = x] >= (log_gamma(x) + 1) * delta * x
// on the state space {0} U [1, inf).
struct SmdParams {
    double gamma = 2.0;  // > 1
    double delta = 0.1;  // > 0
    double x0 = 0.0;     // 0 or >= 1
};

// 3/delta + 2*(2 + log2 log_gamma max{gamma, X0}) * ln(gamma) / delta;
// 0 when X0 = 0.
double smd_time_bound(const SmdParams& params);

// Multiplicative-drift bound (1 + ln X0) / delta; 0 when X0 = 0.
double md_time_bound(double delta, double x0);

// State space clamp: values below 1 collapse to 0.
inline double clamp_state(double y) { return y < 1.0 ? 0.0 : y; }

// One-step transition rule X_t -> X_{t+1} plus the (gamma, delta) it is
// built for.
struct SyntheticProcess {
    std::string name;
    SmdParams params;  // x0 filled per experiment
    std::function<double(double, Rng&)> step;
};

// Deterministic step with exactly the conditional drift the condition asks
// for (where a one-step decrease of that size is feasible at all).
SyntheticProcess make_exact_condition_process(double gamma, double delta);
// Randomized: jump to x/gamma with the probability that makes the expected
// decrease twice the required drift (capped at 1).
SyntheticProcess make_double_drift_process(double gamma, double delta);
// Deterministic regime above gamma^4, randomized below.
SyntheticProcess make_mixed_regime_process(double gamma, double delta);

std::vector<SyntheticProcess> bundled_processes(double gamma, double delta);

struct HittingTimeEstimate {
    double mean = 0;
    double ci_halfwidth = 0;  // 1.96 * sd / sqrt(trials)
    std::uint64_t max_steps = 0;
};

inline constexpr std::uint64_t kHittingTimeStepCap = 10'000'000;

// Empirical mean of min{t : X_t = 0}; throws if a trial exceeds the cap.
HittingTimeEstimate simulate_hitting_time(
    const std::function<double(double, Rng&)>& step, double x0,
    std::uint32_t trials, Rng& rng, std::uint64_t step_cap = kHittingTimeStepCap);

// Sampled estimate of the one-step decrease at state x.
struct DriftEstimateAt {
    double mean = 0;
    double sd = 0;
};
DriftEstimateAt estimate_drift_at(const std::function<double(double, Rng&)>& step,
                                  double x, std::uint32_t samples, Rng& rng);

// (1/(36*limit*n)) * (log_n(x) + 1) * x — the proven per-iteration fitness
// drift of the subtree-deletion search on non-full trees.
double gp_drift_lower_bound(double x, std::uint32_t n, std::uint32_t limit);

// Geometric bin edges at n^{k/2}, covering [1, at least max_value].
std::vector<double> geometric_bin_edges(std::uint32_t n, double max_value);

struct DriftBin {
    double lo = 0, hi = 0;
    double mid = 0;  // geometric mean of the edges
    std::uint64_t count = 0;
    double mean_decrease = 0;   // NaN when count == 0 (no data, not zero)
    double ci_halfwidth = 0;    // one-sided 95% (z = 1.6449), NaN under 100 samples
};

struct BinnedDrift {
    std::vector<DriftBin> bins;
    bool restricted_to_nonfull = true;
};

inline constexpr std::uint64_t kMinBinCountForCi = 100;

// Per-bin mean one-step fitness decrease over the recorded transitions,
// conditioned on the parent fitness falling in the bin. With
// restrict_to_nonfull only transitions whose parent was not a full tree
// contribute.
BinnedDrift binned_drift_from_traces(
    std::span<const std::vector<DriftSample>> traces,
    std::span<const double> bin_edges, bool restrict_to_nonfull = true);

// TSV report: bin_mid, count, mean_drift, ci_halfwidth, lower_bound.
void write_drift_report(std::ostream& out, const BinnedDrift& drift,
                        std::uint32_t n, std::uint32_t limit);

}  // namespace rlsgp
