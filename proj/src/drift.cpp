#include "rlsgp/drift.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace rlsgp {

namespace {

void check_smd_params(const SmdParams& p) {
    if (!(p.gamma > 1.0)) throw std::invalid_argument("gamma must be > 1");
    if (!(p.delta > 0.0)) throw std::invalid_argument("delta must be > 0");
    if (!(p.x0 == 0.0 || p.x0 >= 1.0))
        throw std::invalid_argument("X0 must be 0 or >= 1");
}

double log_base(double base, double x) { return std::log(x) / std::log(base); }

}  // namespace

double smd_time_bound(const SmdParams& params) {
    check_smd_params(params);
    if (params.x0 == 0.0) return 0.0;
    const double top = std::max(params.gamma, params.x0);
    const double inner = std::log2(log_base(params.gamma, top));
    return 3.0 / params.delta +
           2.0 * (2.0 + inner) * std::log(params.gamma) / params.delta;
}

double md_time_bound(double delta, double x0) {
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
    if (!(x0 == 0.0 || x0 >= 1.0))
        throw std::invalid_argument("X0 must be 0 or >= 1");
    if (x0 == 0.0) return 0.0;
    return (1.0 + std::log(x0)) / delta;
}

SyntheticProcess make_exact_condition_process(double gamma, double delta) {
    SyntheticProcess p;
    p.name = "exact_condition";
    p.params = {gamma, delta, 0.0};
    p.step = [gamma, delta](double x, Rng&) {
        if (x <= 0.0) return 0.0;
        const double required = (log_base(gamma, x) + 1.0) * delta;
        return clamp_state(x * (1.0 - required));
    };
    return p;
}

SyntheticProcess make_double_drift_process(double gamma, double delta) {
    SyntheticProcess p;
    p.name = "double_drift";
    p.params = {gamma, delta, 0.0};
    p.step = [gamma, delta](double x, Rng& rng) {
        if (x <= 0.0) return 0.0;
        // Jump to x/gamma with probability q: expected decrease
        // q * x * (1 - 1/gamma) = 2 * (log_gamma(x) + 1) * delta * x.
        const double q = std::min(
            1.0, 2.0 * (log_base(gamma, x) + 1.0) * delta * gamma / (gamma - 1.0));
        if (uniform_unit(rng) < q) return clamp_state(x / gamma);
        return x;
    };
    return p;
}

SyntheticProcess make_mixed_regime_process(double gamma, double delta) {
    SyntheticProcess p;
    p.name = "mixed_regime";
    p.params = {gamma, delta, 0.0};
    const auto det = make_exact_condition_process(gamma, delta).step;
    const auto rnd = make_double_drift_process(gamma, delta).step;
    const double switch_at = std::pow(gamma, 4.0);
    p.step = [det, rnd, switch_at](double x, Rng& rng) {
        return x >= switch_at ? det(x, rng) : rnd(x, rng);
    };
    return p;
}

std::vector<SyntheticProcess> bundled_processes(double gamma, double delta) {
    return {make_exact_condition_process(gamma, delta),
            make_double_drift_process(gamma, delta),
            make_mixed_regime_process(gamma, delta)};
}

HittingTimeEstimate simulate_hitting_time(
    const std::function<double(double, Rng&)>& step, double x0,
    std::uint32_t trials, Rng& rng, std::uint64_t step_cap) {
    if (trials == 0) throw std::invalid_argument("need at least one trial");
    if (!(x0 == 0.0 || x0 >= 1.0))
        throw std::invalid_argument("X0 must be 0 or >= 1");
    double sum = 0, sum_sq = 0;
    std::uint64_t max_steps = 0;
    for (std::uint32_t t = 0; t < trials; ++t) {
        double x = x0;
        std::uint64_t steps = 0;
        while (x != 0.0) {
            if (steps >= step_cap)
                throw std::runtime_error("process did not hit 0 within the step cap");
            x = step(x, rng);
            ++steps;
        }
        sum += static_cast<double>(steps);
        sum_sq += static_cast<double>(steps) * static_cast<double>(steps);
        max_steps = std::max(max_steps, steps);
    }
    HittingTimeEstimate est;
    est.mean = sum / trials;
    est.max_steps = max_steps;
    if (trials > 1) {
        const double var =
            std::max(0.0, (sum_sq - sum * sum / trials) / (trials - 1));
        est.ci_halfwidth = 1.96 * std::sqrt(var / trials);
    }
    return est;
}

DriftEstimateAt estimate_drift_at(const std::function<double(double, Rng&)>& step,
                                  double x, std::uint32_t samples, Rng& rng) {
    if (samples == 0) throw std::invalid_argument("need at least one sample");
    double sum = 0, sum_sq = 0;
    for (std::uint32_t i = 0; i < samples; ++i) {
        const double d = x - step(x, rng);
        sum += d;
        sum_sq += d * d;
    }
    DriftEstimateAt est;
    est.mean = sum / samples;
    est.sd = samples > 1
                 ? std::sqrt(std::max(0.0, (sum_sq - sum * sum / samples) /
                                               (samples - 1)))
                 : 0.0;
    return est;
}

double gp_drift_lower_bound(double x, std::uint32_t n, std::uint32_t limit) {
    if (!(x >= 1.0)) throw std::invalid_argument("x must be >= 1");
    if (n < 2) throw std::invalid_argument("n must be >= 2");
    if (limit < n) throw std::invalid_argument("limit must be >= n");
    return (log_base(n, x) + 1.0) * x /
           (36.0 * static_cast<double>(limit) * static_cast<double>(n));
}

std::vector<double> geometric_bin_edges(std::uint32_t n, double max_value) {
    if (n < 2) throw std::invalid_argument("n must be >= 2");
    if (!(max_value >= 1.0)) throw std::invalid_argument("max_value must be >= 1");
    std::vector<double> edges{1.0};
    const double root = std::sqrt(static_cast<double>(n));
    while (edges.back() <= max_value) edges.push_back(edges.back() * root);
    return edges;
}

BinnedDrift binned_drift_from_traces(
    std::span<const std::vector<DriftSample>> traces,
    std::span<const double> bin_edges, bool restrict_to_nonfull) {
    if (bin_edges.size() < 2)
        throw std::invalid_argument("need at least two bin edges");
    const double nan = std::numeric_limits<double>::quiet_NaN();

    BinnedDrift out;
    out.restricted_to_nonfull = restrict_to_nonfull;
    const std::size_t bins = bin_edges.size() - 1;
    out.bins.resize(bins);
    std::vector<double> sum(bins, 0.0), sum_sq(bins, 0.0);

    for (std::size_t b = 0; b < bins; ++b) {
        out.bins[b].lo = bin_edges[b];
        out.bins[b].hi = bin_edges[b + 1];
        out.bins[b].mid = std::sqrt(bin_edges[b] * bin_edges[b + 1]);
    }

    for (const auto& trace : traces) {
        for (const DriftSample& s : trace) {
            if (restrict_to_nonfull && s.parent_full) continue;
            const double x = static_cast<double>(s.parent_error);
            if (x < bin_edges.front() || x >= bin_edges.back()) continue;
            // Geometric edges: estimate by log, then nudge for rounding.
            // Arbitrary sorted edges still end up right via the nudge loops.
            const double guess =
                bin_edges[1] > 1.0 ? std::log(x) / std::log(bin_edges[1]) : 0.0;
            std::size_t b = guess > 0.0 ? std::min(static_cast<std::size_t>(guess),
                                                   bins - 1)
                                        : 0;
            while (b + 1 < bins && x >= bin_edges[b + 1]) ++b;
            while (b > 0 && x < bin_edges[b]) --b;
            const double dec = static_cast<double>(s.parent_error) -
                               static_cast<double>(s.survivor_error);
            out.bins[b].count += 1;
            sum[b] += dec;
            sum_sq[b] += dec * dec;
        }
    }

    for (std::size_t b = 0; b < bins; ++b) {
        DriftBin& bin = out.bins[b];
        if (bin.count == 0) {
            bin.mean_decrease = nan;
            bin.ci_halfwidth = nan;
            continue;
        }
        const double cnt = static_cast<double>(bin.count);
        bin.mean_decrease = sum[b] / cnt;
        if (bin.count >= kMinBinCountForCi) {
            const double var =
                std::max(0.0, (sum_sq[b] - sum[b] * sum[b] / cnt) / (cnt - 1.0));
            bin.ci_halfwidth = 1.6449 * std::sqrt(var / cnt);
        } else {
            bin.ci_halfwidth = nan;
        }
    }
    return out;
}

void write_drift_report(std::ostream& out, const BinnedDrift& drift,
                        std::uint32_t n, std::uint32_t limit) {
    out << "bin_mid\tcount\tmean_drift\tci_halfwidth\tlower_bound\n";
    char line[256];
    for (const DriftBin& bin : drift.bins) {
        const double bound = gp_drift_lower_bound(bin.mid, n, limit);
        std::snprintf(line, sizeof(line), "%.6g\t%llu\t%.6g\t%.6g\t%.6g\n",
                      bin.mid, static_cast<unsigned long long>(bin.count),
                      bin.mean_decrease, bin.ci_halfwidth, bound);
        out << line;
    }
}

}  // namespace rlsgp
