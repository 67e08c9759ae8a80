#include <gtest/gtest.h>

#include <map>
#include <random>

#include "impent/impent.hpp"

using namespace impent;

namespace {

// Plug-in block entropy with string keys, computed independently.
double oracle_block_entropy(const std::vector<int>& s, std::size_t L) {
    if (L == 0) return 0.0;
    std::map<std::string, double> c;
    for (std::size_t i = 0; i + L <= s.size(); ++i) {
        std::string k;
        for (std::size_t j = 0; j < L; ++j) k += static_cast<char>('a' + s[i + j]);
        c[k] += 1.0;
    }
    const double total = static_cast<double>(s.size() - L + 1);
    double h = 0.0;
    for (const auto& [k, n] : c) h -= n / total * std::log(n / total);
    return h;
}

} // namespace

TEST(BlockEntropy, MatchesStringOracle) {
    std::mt19937_64 rng(1);
    for (std::size_t alphabet : {2u, 3u, 5u}) {
        std::vector<std::uint32_t> s(3000);
        std::vector<int> t(3000);
        for (std::size_t i = 0; i < s.size(); ++i) t[i] = static_cast<int>(s[i] = static_cast<std::uint32_t>(rng() % alphabet));
        for (std::size_t L : {1u, 2u, 4u, 7u}) {
            std::size_t distinct = 0, min_count = 0;
            EXPECT_NEAR(block_entropy(s, alphabet, L, distinct, min_count), oracle_block_entropy(t, L), 1e-12);
        }
    }
}

TEST(BlockEntropy, ConstantSequenceIsZero) {
    const std::vector<std::uint32_t> s(100, 1);
    std::size_t distinct = 0, min_count = 0;
    EXPECT_EQ(block_entropy(s, 2, 5, distinct, min_count), 0.0);
    EXPECT_EQ(distinct, 1u);
    EXPECT_EQ(min_count, 96u);
}

TEST(MetricEntropy, IdentityIsZero) {
    const ContinuousFlow phi(SemiflowSpec::identity(MetricSpace::circle()));
    const auto e = empirical_metric_entropy(phi, {0.3}, 10000, Partition::uniform_arcs(0, 4), 8);
    EXPECT_EQ(e.conditional, 0.0);
    EXPECT_EQ(e.distinct_blocks, 1u);
    EXPECT_FALSE(e.undersampled);
}

TEST(MetricEntropy, RotationMatchesDirectCoding) {
    const double speed = (std::sqrt(5.0) - 1.0) / 2.0;
    const ContinuousFlow phi(SemiflowSpec::rotation({speed}));
    const std::size_t N = 20000, L = 6;
    const auto e = empirical_metric_entropy(phi, {0.1}, N, Partition::uniform_arcs(0, 4), L);
    std::vector<int> s(N);
    for (std::size_t n = 0; n < N; ++n) {
        const double x = std::fmod(0.1 + speed * static_cast<double>(n), 1.0);
        s[n] = std::min(3, static_cast<int>(x * 4.0));
    }
    EXPECT_NEAR(e.H_L, oracle_block_entropy(s, L), 1e-9);
    EXPECT_NEAR(e.conditional, oracle_block_entropy(s, L) - oracle_block_entropy(s, L - 1), 1e-9);
    // Block complexity of a rotation coded by 4 arcs grows linearly, so the
    // conditional entropy decreases with L.
    const auto longer = empirical_metric_entropy(phi, {0.1}, N, Partition::uniform_arcs(0, 4), 12);
    EXPECT_LT(longer.conditional, e.conditional);
}

TEST(MetricEntropy, SuspensionNearLogTwo) {
    const ContinuousFlow phi(SemiflowSpec::suspension_shift2());
    std::mt19937_64 rng(7);
    const Point x0 = phi.space().random_point(rng, 100000 + 64);
    const auto e = empirical_metric_entropy(phi, x0, 100000, Partition::leading_symbol(), 8);
    EXPECT_NEAR(e.conditional, std::log(2.0), 0.1 * std::log(2.0));
    EXPECT_LE(e.conditional, std::log(2.0) + 1e-12);
}

TEST(MetricEntropy, BurnInDropsTransient) {
    const ContinuousFlow phi(SemiflowSpec::rotation({0.5}));
    const auto a = empirical_metric_entropy(phi, {0.1}, 1000, Partition::uniform_arcs(0, 4), 3, 0);
    const auto b = empirical_metric_entropy(phi, {0.1}, 1000, Partition::uniform_arcs(0, 4), 3, 7);
    // Period-2 orbit: the blocks are the same either way.
    EXPECT_EQ(a.distinct_blocks, 2u);
    EXPECT_EQ(b.distinct_blocks, 2u);
}

TEST(MetricEntropy, RejectsBadParameters) {
    const ContinuousFlow phi(SemiflowSpec::rotation({0.3}));
    EXPECT_THROW(empirical_metric_entropy(phi, {0.1}, 100, Partition::uniform_arcs(0, 4), 0), invalid_input);
    EXPECT_THROW(empirical_metric_entropy(phi, {0.1}, 10, Partition::uniform_arcs(0, 4), 8), invalid_input);
    EXPECT_THROW(Partition::uniform_arcs(0, 0), invalid_input);
}
