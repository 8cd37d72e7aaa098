#include <gtest/gtest.h>

#include <algorithm>

#include "support.hpp"

namespace dcomp {
namespace {

QuantizedTensor make_q(std::size_t rows, std::size_t cols, std::vector<std::int8_t> values) {
    QuantizedTensor q;
    q.name = "t";
    q.rows = rows;
    q.cols = cols;
    q.qvalues = std::move(values);
    q.w_scale = 0.01;
    q.scale_vec = ScaleVector::identity(cols);
    return q;
}

std::size_t zeros_set(const QuantizedTensor& before, const QuantizedTensor& after) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < before.qvalues.size(); ++i) n += after.qvalues[i] == 0 ? 1 : 0;
    return n;
}

TEST(PruneScores, Examples) {
    const auto q = make_q(1, 2, {10, -10});
    EXPECT_EQ(prune_scores(q, {"t", {1.0, 2.0}}), (ScoreMatrix{10.0, 20.0}));
    const auto z = make_q(1, 2, {0, 5});
    EXPECT_EQ(prune_scores(z, {"t", {1e9, 0.0}}), (ScoreMatrix{0.0, 0.0}));
    EXPECT_THROW(prune_scores(q, {"t", {1.0}}), Error);
}

TEST(PruneScores, OrderMatchesFullSort) {
    Rng rng(3);
    for (int iter = 0; iter < 100; ++iter) {
        const auto q = testing::random_quantized(rng, 1 + rng.below(12), 1 + rng.below(12));
        const auto s = testing::random_stats(rng, q.cols);
        const auto scores = prune_scores(q, s);
        std::vector<std::size_t> by_lib(q.qvalues.size()), by_oracle(q.qvalues.size());
        std::iota(by_lib.begin(), by_lib.end(), 0);
        by_oracle = by_lib;
        std::stable_sort(by_lib.begin(), by_lib.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
        std::stable_sort(by_oracle.begin(), by_oracle.end(), [&](auto a, auto b) {
            return s.channel_max[a % q.cols] * std::abs(q.qvalues[a]) < s.channel_max[b % q.cols] * std::abs(q.qvalues[b]);
        });
        EXPECT_EQ(by_lib, by_oracle);
    }
}

TEST(Prune, SparsityEndpoints) {
    Rng rng(1);
    const auto q = testing::random_quantized(rng, 8, 8);
    const auto s = testing::random_stats(rng, 8);
    EXPECT_EQ(prune(q, s, {0.0, PruneScope::per_tensor}), q);
    const auto all = prune(q, s, {1.0, PruneScope::per_tensor});
    EXPECT_TRUE(std::all_of(all.qvalues.begin(), all.qvalues.end(), [](auto v) { return v == 0; }));
    EXPECT_EQ(all.w_scale, q.w_scale);
    EXPECT_EQ(all.scale_vec, q.scale_vec);
    EXPECT_THROW(prune(q, s, {1.5, PruneScope::per_tensor}), Error);
}

TEST(Prune, FourByFourQuarter) {
    // All scores distinct and nonzero; the lowest four are at indices 3, 6, 9, 12.
    const auto q = make_q(4, 4, {50, 60, 70, 1, 80, 90, 2, 100, 110, 3, 120, 125, 4, 126, 127, 55});
    const ActivationStats s{"t", {1, 1, 1, 1}};
    const auto out = prune(q, s, {0.25, PruneScope::per_tensor});
    std::vector<std::int8_t> expect = q.qvalues;
    for (auto i : {3, 6, 9, 12}) expect[i] = 0;
    EXPECT_EQ(out.qvalues, expect);
}

TEST(Prune, TiesGoToLowerIndex) {
    const auto q = make_q(2, 2, {3, 3, 3, 3});
    const auto out = prune(q, {"t", {1, 1}}, {0.5, PruneScope::per_tensor});
    EXPECT_EQ(out.qvalues, (std::vector<std::int8_t>{0, 0, 3, 3}));
    const auto rows = prune(q, {"t", {1, 1}}, {0.5, PruneScope::per_row});
    EXPECT_EQ(rows.qvalues, (std::vector<std::int8_t>{0, 3, 0, 3}));
}

TEST(Prune, MatchesExhaustiveOracle) {
    Rng rng(77);
    for (int iter = 0; iter < 300; ++iter) {
        const auto q = testing::random_quantized(rng, 1 + rng.below(16), 1 + rng.below(16));
        const auto s = testing::random_stats(rng, q.cols);
        const double sparsity = rng.below(4) == 0 ? static_cast<double>(rng.below(11)) / 10.0 : rng.uniform();
        for (auto scope : {PruneScope::per_tensor, PruneScope::per_row}) {
            const auto out = prune(q, s, {sparsity, scope});
            EXPECT_EQ(out.qvalues, testing::prune_oracle(q, s, sparsity, scope));
        }
    }
}

TEST(Prune, CountIdempotenceAndNesting) {
    Rng rng(5);
    for (int iter = 0; iter < 100; ++iter) {
        const auto q = testing::random_quantized(rng, 1 + rng.below(40), 1 + rng.below(40));
        const auto s = testing::random_stats(rng, q.cols);
        double p1 = rng.uniform(), p2 = rng.uniform();
        if (p1 > p2) std::swap(p1, p2);
        for (auto scope : {PruneScope::per_tensor, PruneScope::per_row}) {
            const auto a = prune(q, s, {p1, scope});
            const auto b = prune(q, s, {p2, scope});
            const std::size_t k = scope == PruneScope::per_tensor ? prune_count(p1, q.qvalues.size())
                                                                  : q.rows * prune_count(p1, q.cols);
            EXPECT_GE(zeros_set(q, a), k);
            EXPECT_EQ(prune(a, s, {p1, scope}), a);
            std::size_t changed = 0;
            for (std::size_t i = 0; i < q.qvalues.size(); ++i) {
                if (a.qvalues[i] == 0) {
                    EXPECT_EQ(b.qvalues[i], 0) << "zero set not nested at " << i;
                }
                if (a.qvalues[i] != q.qvalues[i]) {
                    EXPECT_EQ(a.qvalues[i], 0);
                    ++changed;
                }
            }
            EXPECT_LE(changed, k);
        }
    }
}

TEST(Prune, NeverGrowsTheCodedSize) {
    Rng rng(21);
    for (int iter = 0; iter < 20; ++iter) {
        const auto q = testing::random_quantized(rng, 64 + rng.below(64), 64 + rng.below(64));
        const auto s = testing::random_stats(rng, q.cols);
        const auto pruned = prune(q, s, {0.1 + 0.5 * rng.uniform(), PruneScope::per_tensor});
        const auto raw = detail::serialize_values({q});
        const auto raw_pruned = detail::serialize_values({pruned});
        EXPECT_LE(ans_compress(raw_pruned).stream.size(), ans_compress(raw).stream.size());
    }
}

}  // namespace
}  // namespace dcomp
