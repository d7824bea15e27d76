#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "helpers.hpp"
#include "rlsgp/fitness.hpp"

using namespace rlsgp;

namespace {

SyntaxTree conjunction(std::uint32_t n) {
    SyntaxTree t = SyntaxTree::leaf(VarId{1});
    for (std::uint32_t i = 2; i <= n; ++i)
        t = SyntaxTree::branch(FunctionKind::And, t, SyntaxTree::leaf(VarId{i}));
    return t;
}

// Independent oracle: row-by-row evaluation of the full table.
std::uint64_t naive_ctt_error(const SyntaxTree& tree, std::uint32_t n) {
    const std::uint64_t rows = std::uint64_t{1} << n;
    if (tree.empty()) return rows;
    std::uint64_t err = 0;
    for (std::uint64_t r = 0; r < rows; ++r) {
        const bool target = r == rows - 1;  // all-ones row
        if (eval_on_row(tree, InputRow::from_index(n, r)) != target) ++err;
    }
    return err;
}

// Random AND-only tree over exactly the given distinct variables (each at
// least once, duplicates allowed).
SyntaxTree random_conjunction(Rng& rng, std::uint32_t distinct,
                              std::uint32_t leaves) {
    REQUIRE(leaves >= distinct);
    std::vector<std::uint32_t> vars;
    for (std::uint32_t i = 1; i <= distinct; ++i) vars.push_back(i);
    while (vars.size() < leaves)
        vars.push_back(static_cast<std::uint32_t>(1 + uniform_below(rng, distinct)));
    for (std::size_t i = vars.size(); i > 1; --i)
        std::swap(vars[i - 1], vars[uniform_below(rng, i)]);
    SyntaxTree t = SyntaxTree::leaf(VarId{vars[0]});
    for (std::size_t i = 1; i < vars.size(); ++i)
        t = SyntaxTree::branch(FunctionKind::And, t, SyntaxTree::leaf(VarId{vars[i]}));
    return t;
}

}  // namespace

TEST_SUITE_BEGIN("fitness");

TEST_CASE("eval on a single row") {
    const SyntaxTree x1 = SyntaxTree::leaf(VarId{1});
    CHECK(eval_on_row(x1, InputRow::from_index(1, 1)) == true);
    CHECK(eval_on_row(x1, InputRow::from_index(1, 0)) == false);

    const SyntaxTree and4 = conjunction(4);
    CHECK(eval_on_row(and4, InputRow::from_index(4, 15)) == true);
    CHECK(eval_on_row(and4, InputRow::from_index(4, 14)) == false);

    const SyntaxTree or12 = parse("(or x1 x2)");
    CHECK(eval_on_row(or12, InputRow::from_index(2, 2)) == true);  // x1=0, x2=1

    CHECK_THROWS_AS(eval_on_row(SyntaxTree(), InputRow::from_index(2, 0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(eval_on_row(parse("x5"), InputRow::from_index(2, 0)),
                    std::invalid_argument);
}

TEST_CASE("ctt error examples") {
    CHECK(ctt_error(conjunction(10), 10).count == 0);
    CHECK(ctt_error(parse("x1"), 4).count == 7);  // 2^{4-1} - 1
    CHECK(ctt_error(parse("(or x1 x2)"), 2).count == 2);
    CHECK(ctt_error(SyntaxTree(), 5).count == 32);  // empty-tree sentinel
    CHECK(ctt_error(SyntaxTree(), 8).count == 256);
    CHECK_THROWS_AS(ctt_error(parse("x1"), 26), std::invalid_argument);
}

TEST_CASE("bit-parallel equals naive row enumeration") {
    Rng rng(101);
    for (int i = 0; i < 10000; ++i) {
        const auto n = static_cast<std::uint32_t>(1 + uniform_below(rng, 12));
        const auto leaves = static_cast<std::uint32_t>(1 + uniform_below(rng, 20));
        const SyntaxTree t = testing::random_tree(rng, n, leaves);
        CHECK(ctt_error(t, n).count == naive_ctt_error(t, n));
    }
}

TEST_CASE("ctt error across word-size boundaries") {
    // n < 6 uses a partial word, n = 6 exactly one, n > 6 several.
    Rng rng(103);
    for (std::uint32_t n : {1u, 2u, 5u, 6u, 7u, 8u}) {
        for (int i = 0; i < 200; ++i) {
            const auto leaves = static_cast<std::uint32_t>(1 + uniform_below(rng, 12));
            const SyntaxTree t = testing::random_tree(rng, n, leaves);
            CHECK(ctt_error(t, n).count == naive_ctt_error(t, n));
        }
    }
}

TEST_CASE("conjunction closed form") {
    CHECK(conjunction_ctt_error(6, 6) == 0);
    CHECK(conjunction_ctt_error(1, 4) == 7);
    CHECK(conjunction_ctt_error(3, 8) == 31);
    CHECK_THROWS_AS(conjunction_ctt_error(9, 8), std::invalid_argument);
    CHECK_THROWS_AS(conjunction_ctt_error(0, 8), std::invalid_argument);

    Rng rng(107);
    for (int i = 0; i < 50; ++i) {
        const SyntaxTree t = random_conjunction(
            rng, 3, static_cast<std::uint32_t>(3 + uniform_below(rng, 5)));
        CHECK(ctt_error(t, 8).count == 31);
    }
}

TEST_CASE("sample_rows preconditions and uniformity") {
    Rng rng(109);
    CHECK_THROWS_AS(sample_rows(4, 0, rng), std::invalid_argument);

    // n=1, s=1: the single bit is a fair coin.
    std::uint64_t ones = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) ones += sample_rows(1, 1, rng).patterns[0] & 1;
    const double sigma = std::sqrt(0.25 * draws);
    CHECK(std::abs(static_cast<double>(ones) - draws / 2.0) < 3 * sigma);

    // n=50: about half the bits of each row are ones.
    const Sample s = sample_rows(50, 1000, rng);
    std::uint64_t total = 0;
    for (std::uint32_t r = 0; r < s.size; ++r) {
        const InputRow row = s.row(r);
        for (std::uint32_t j = 1; j <= 50; ++j) total += row.bit(VarId{j});
    }
    const double mean_ones = static_cast<double>(total) / 1000.0;
    CHECK(std::abs(mean_ones - 25.0) < 3 * std::sqrt(50 * 0.25 / 1000.0));
}

TEST_CASE("sampled error basics") {
    Rng rng(113);
    const Sample s = sample_rows(10, 100, rng);
    CHECK(sampled_error(conjunction(10), s).count == 0);  // exact target
    CHECK(sampled_error(SyntaxTree(), s).count == 100);   // sentinel

    // A conjunction of 5 of 50 variables has generalisation error
    // (2^45 - 1)/2^50, so the expected sampled error at s=2^13 is ~256.
    const SyntaxTree conj5 = conjunction(5);
    double sum = 0;
    const int reps = 200;
    Sample fresh = sample_rows(50, 8192, rng);
    for (int i = 0; i < reps; ++i) {
        fresh.regenerate(rng);
        sum += static_cast<double>(sampled_error(conj5, fresh).count);
    }
    const double mean = sum / reps;
    const double expected = 8192.0 * (std::ldexp(1.0, 45) - 1) / std::ldexp(1.0, 50);
    CHECK(std::abs(mean - expected) < 6.0);  // sd of the mean is ~1.1
}

TEST_CASE("exact generalisation error") {
    const auto conj_err = exact_generalisation_error(conjunction(3), 7);
    CHECK(conj_err.on_set == 1);
    CHECK(conj_err.distinct == 3);
    CHECK(conj_err.errors_on_complete_table() == conjunction_ctt_error(3, 7));
    CHECK(conj_err.value() == doctest::Approx(15.0 / 128.0));

    const auto dup = exact_generalisation_error(parse("(or x1 x1)"), 4);
    CHECK(dup.on_set == 1);
    CHECK(dup.distinct == 1);
    CHECK(dup.value() == doctest::Approx(7.0 / 16.0));
    CHECK(dup.errors_on_complete_table() == ctt_error(parse("(or x1 x1)"), 4).count);

    CHECK(exact_generalisation_error(conjunction(8), 8).value() == 0.0);
    CHECK_THROWS_AS(exact_generalisation_error(SyntaxTree(), 4),
                    std::invalid_argument);
    CHECK_THROWS_AS(exact_generalisation_error(conjunction(8), 8, 5),
                    std::invalid_argument);  // cap exceeded -> use the estimate
}

TEST_CASE("generalisation error equals ctt error over 2^n") {
    Rng rng(127);
    for (int i = 0; i < 10000; ++i) {
        const auto n = static_cast<std::uint32_t>(1 + uniform_below(rng, 12));
        const auto leaves = static_cast<std::uint32_t>(1 + uniform_below(rng, 16));
        const SyntaxTree t = testing::random_tree(rng, n, leaves);
        const auto gen = exact_generalisation_error(t, n);
        CHECK(gen.errors_on_complete_table() == ctt_error(t, n).count);
    }
}

TEST_CASE("estimate path for wide trees") {
    // 31 distinct variables exceeds the default exact cap.
    SyntaxTree wide = SyntaxTree::leaf(VarId{1});
    for (std::uint32_t i = 2; i <= 31; ++i)
        wide = SyntaxTree::branch(FunctionKind::And, wide, SyntaxTree::leaf(VarId{i}));
    CHECK_THROWS_AS(exact_generalisation_error(wide, 40), std::invalid_argument);
    const auto est = generalisation_error_auto(wide, 40);
    CHECK(est.is_estimate);
    CHECK(est.value() >= 0.0);
    CHECK(est.value() < 1e-3);  // true error is (2^9-1)/2^40
    CHECK_FALSE(generalisation_error_auto(conjunction(4), 8).is_estimate);
}

TEST_CASE("sampled-error concentration") {
    // |Fs - X| <= max{c lg n, Fs} with c = 4 fails on less than 1% of fresh
    // samples; desk-size version of the acceptance-criterion check.
    Rng rng(131);
    const std::uint32_t n = 16;
    const double lg_n = std::log2(static_cast<double>(n));
    const auto s = static_cast<std::uint32_t>(n * n * lg_n * lg_n);  // n^2 lg^2 n
    for (std::uint32_t a : {4u, 8u}) {
        const SyntaxTree tree = conjunction(a);
        const double f =
            (std::ldexp(1.0, static_cast<int>(n - a)) - 1) / std::ldexp(1.0, n);
        const double bound = std::max(4.0 * lg_n, f * s);
        int violations = 0;
        const int reps = 1000;
        Sample sample = sample_rows(n, s, rng);
        for (int i = 0; i < reps; ++i) {
            sample.regenerate(rng);
            const double x = static_cast<double>(sampled_error(tree, sample).count);
            if (std::abs(f * s - x) > bound) ++violations;
        }
        CHECK(static_cast<double>(violations) / reps < 0.01);
    }
}

TEST_CASE("sampled error is monotone under on-set growth") {
    Rng rng(137);
    const std::uint32_t n = 6;
    auto on_set_bits = [&](const SyntaxTree& t) {
        std::uint64_t bits = 0;
        for (std::uint64_t r = 0; r < (1u << n); ++r)
            if (eval_on_row(t, InputRow::from_index(n, r))) bits |= 1ULL << r;
        return bits;
    };
    int pairs_checked = 0;
    while (pairs_checked < 30) {
        const SyntaxTree a = testing::random_tree(
            rng, n, static_cast<std::uint32_t>(1 + uniform_below(rng, 8)));
        const SyntaxTree b = testing::random_tree(
            rng, n, static_cast<std::uint32_t>(1 + uniform_below(rng, 8)));
        const std::uint64_t on_a = on_set_bits(a), on_b = on_set_bits(b);
        if ((on_a | on_b) != on_b || on_a == on_b) continue;  // need on(a) strictly inside on(b)
        ++pairs_checked;
        Sample s = sample_rows(n, 512, rng);
        for (int i = 0; i < 20; ++i) {
            s.regenerate(rng);
            CHECK(sampled_error(b, s).count >= sampled_error(a, s).count);
        }
    }
}

TEST_SUITE_END();
