#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "rlsgp/drift.hpp"

using namespace rlsgp;

TEST_SUITE_BEGIN("drift");

TEST_CASE("super-multiplicative bound closed form") {
    CHECK(smd_time_bound({2.0, 0.1, 0.0}) == 0.0);
    // X0 = gamma: log_gamma = 1, log2(1) = 0, so 3/d + 4 ln(gamma)/d.
    CHECK(smd_time_bound({2.0, 0.1, 2.0}) ==
          doctest::Approx(30.0 + 4.0 * std::log(2.0) / 0.1).epsilon(1e-12));
    CHECK(smd_time_bound({2.0, 0.1, 65536.0}) ==
          doctest::Approx(113.1776616671934).epsilon(1e-9));
    CHECK_THROWS_AS(smd_time_bound({1.0, 0.1, 4.0}), std::invalid_argument);
    CHECK_THROWS_AS(smd_time_bound({2.0, 0.0, 4.0}), std::invalid_argument);
    CHECK_THROWS_AS(smd_time_bound({2.0, 0.1, 0.5}), std::invalid_argument);
}

TEST_CASE("multiplicative bound closed form") {
    CHECK(md_time_bound(0.1, 1.0) == doctest::Approx(10.0));
    CHECK(md_time_bound(0.1, 65536.0) == doctest::Approx(120.9035489).epsilon(1e-9));
    CHECK(md_time_bound(0.2, 0.0) == 0.0);
    CHECK_THROWS_AS(md_time_bound(0.0, 1.0), std::invalid_argument);

    // At X0 = 2^64 the doubly-logarithmic bound wins by a wide margin.
    const double x0 = std::ldexp(1.0, 64);
    const double smd = smd_time_bound({2.0, 0.1, x0});
    const double md = md_time_bound(0.1, x0);
    CHECK(smd == doctest::Approx(140.9035489).epsilon(1e-6));
    CHECK(md == doctest::Approx(453.6141956).epsilon(1e-6));
    CHECK(smd < md);
}

TEST_CASE("bound is monotone in X0 and antitone in delta") {
    double previous = 0.0;
    for (double x0 : {1.0, 2.0, 8.0, 100.0, 1e4, 1e8, 1e12}) {
        const double b = smd_time_bound({2.0, 0.05, x0});
        CHECK(b >= previous);
        previous = b;
    }
    previous = 1e300;
    for (double delta : {0.001, 0.01, 0.1, 0.5, 1.0}) {
        const double b = smd_time_bound({2.0, delta, 1e6});
        CHECK(b < previous);
        previous = b;
    }
}

TEST_CASE("hitting time simulation") {
    Rng rng(307);
    CHECK(simulate_hitting_time([](double x, Rng&) { return x; }, 0.0, 10, rng)
              .mean == 0.0);

    // Geometric halving from 2^k hits zero in exactly k+1 steps.
    const auto halving = [](double x, Rng&) { return clamp_state(x / 2); };
    for (std::uint32_t k : {0u, 1u, 4u, 10u}) {
        const auto est =
            simulate_hitting_time(halving, std::ldexp(1.0, static_cast<int>(k)),
                                  20, rng);
        CHECK(est.mean == doctest::Approx(static_cast<double>(k + 1)));
        CHECK(est.ci_halfwidth == 0.0);
    }

    // The spec example: deterministic exact-condition process.
    const auto exact = make_exact_condition_process(2.0, 0.01);
    const auto est = simulate_hitting_time(exact.step, 1e6, 5, rng);
    CHECK(est.mean <= smd_time_bound({2.0, 0.01, 1e6}));

    CHECK_THROWS_AS(
        simulate_hitting_time([](double x, Rng&) { return x; }, 4.0, 1, rng, 100),
        std::runtime_error);
}

TEST_CASE("bundled processes satisfy their drift condition where feasible") {
    Rng rng(311);
    const double gamma = 2.0, delta = 0.01;
    const auto processes = bundled_processes(gamma, delta);
    REQUIRE(processes.size() == 3);
    for (const auto& process : processes) {
        for (double x : {2.0, 64.0, 4096.0}) {
            const double required =
                (std::log(x) / std::log(gamma) + 1.0) * delta * x;
            // Feasibility: a decrease of the required size must fit below x.
            REQUIRE(required <= x);
            const auto est = estimate_drift_at(process.step, x, 40000, rng);
            const double slack = 4.0 * est.sd / std::sqrt(40000.0);
            CHECK(est.mean >= required - slack - 1e-9);
        }
    }
    // The double-drift process aims at twice the required decrease.
    const auto dd = make_double_drift_process(gamma, delta);
    const double x = 64.0;
    const double required = (std::log2(x) + 1.0) * delta * x;
    const auto est = estimate_drift_at(dd.step, x, 200000, rng);
    CHECK(est.mean ==
          doctest::Approx(2.0 * required).epsilon(0.05));
}

TEST_CASE("empirical hitting times stay under the bound") {
    Rng rng(313);
    for (const double gamma : {2.0, 10.0}) {
        for (const auto& process : bundled_processes(gamma, 0.1)) {
            for (double x0 : {gamma, std::pow(gamma, 4.0)}) {
                const auto est = simulate_hitting_time(process.step, x0, 200, rng);
                CHECK(est.mean <= smd_time_bound({gamma, 0.1, x0}));
            }
        }
    }
}

TEST_CASE("gp drift lower bound formula") {
    CHECK(gp_drift_lower_bound(1.0, 12, 24) ==
          doctest::Approx(1.0 / (36.0 * 24 * 12)).epsilon(1e-12));
    CHECK(gp_drift_lower_bound(12.0, 12, 24) ==
          doctest::Approx(1.0 / (18.0 * 24)).epsilon(1e-12));
    CHECK(gp_drift_lower_bound(2048.0, 12, 24) ==
          doctest::Approx(0.8036).epsilon(1e-3));
    CHECK_THROWS_AS(gp_drift_lower_bound(0.5, 12, 24), std::invalid_argument);
    CHECK_THROWS_AS(gp_drift_lower_bound(4.0, 1, 24), std::invalid_argument);
    CHECK_THROWS_AS(gp_drift_lower_bound(4.0, 12, 11), std::invalid_argument);
}

TEST_CASE("geometric bins cover the range at powers of sqrt(n)") {
    const auto edges = geometric_bin_edges(12, 4096.0);
    REQUIRE(edges.size() >= 2);
    CHECK(edges.front() == 1.0);
    CHECK(edges.back() > 4096.0);
    for (std::size_t i = 1; i < edges.size(); ++i)
        CHECK(edges[i] == doctest::Approx(edges[i - 1] * std::sqrt(12.0)));
}

TEST_CASE("binned drift bookkeeping") {
    const std::vector<double> edges{1.0, 4.0, 16.0, 64.0};
    std::vector<std::vector<DriftSample>> traces(1);

    SUBCASE("single transition") {
        traces[0] = {{7, 3, false}};
        const auto drift = binned_drift_from_traces(traces, edges);
        CHECK(drift.bins[1].count == 1);
        CHECK(drift.bins[1].mean_decrease == doctest::Approx(4.0));
        CHECK(std::isnan(drift.bins[0].mean_decrease));  // no data, not zero
        CHECK(drift.bins[0].count == 0);
        CHECK(std::isnan(drift.bins[1].ci_halfwidth));  // below the 100 minimum
    }

    SUBCASE("full-tree transitions are excluded when restricted") {
        traces[0] = {{7, 3, true}, {7, 5, false}};
        const auto restricted = binned_drift_from_traces(traces, edges, true);
        CHECK(restricted.bins[1].count == 1);
        CHECK(restricted.bins[1].mean_decrease == doctest::Approx(2.0));
        const auto all = binned_drift_from_traces(traces, edges, false);
        CHECK(all.bins[1].count == 2);
        CHECK(all.bins[1].mean_decrease == doctest::Approx(3.0));
    }

    SUBCASE("absorbed traces contribute nothing") {
        traces[0] = {{0, 0, false}, {0, 0, false}};
        const auto drift = binned_drift_from_traces(traces, edges);
        for (const auto& bin : drift.bins) CHECK(bin.count == 0);
    }

    SUBCASE("irregular edges still bin correctly") {
        const std::vector<double> odd{1.0, 1.5, 100.0, 101.0, 5000.0};
        traces[0] = {{1, 0, false}, {70, 3, false}, {100, 4, false}, {4096, 0, false}};
        const auto drift = binned_drift_from_traces(traces, odd);
        CHECK(drift.bins[0].count == 1);
        CHECK(drift.bins[1].count == 1);
        CHECK(drift.bins[2].count == 1);
        CHECK(drift.bins[3].count == 1);
        CHECK(drift.bins[3].mean_decrease == doctest::Approx(4096.0));
    }

    SUBCASE("stationary fitness gives zero mean drift") {
        traces[0].assign(200, DriftSample{2, 2, false});
        const auto drift = binned_drift_from_traces(traces, edges);
        CHECK(drift.bins[0].count == 200);
        CHECK(drift.bins[0].mean_decrease == doctest::Approx(0.0));
        CHECK(drift.bins[0].ci_halfwidth == doctest::Approx(0.0));
    }
}

TEST_CASE("drift report format") {
    std::vector<std::vector<DriftSample>> traces(1);
    traces[0] = {{7, 3, false}};
    const auto edges = geometric_bin_edges(12, 4096.0);
    const auto drift = binned_drift_from_traces(traces, edges);
    std::ostringstream out;
    write_drift_report(out, drift, 12, 24);
    const std::string text = out.str();
    CHECK(text.find("bin_mid\tcount\tmean_drift\tci_halfwidth\tlower_bound\n") == 0);
    CHECK(text.find('\t') != std::string::npos);
}

TEST_SUITE_END();
