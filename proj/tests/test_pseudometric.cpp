#include <gtest/gtest.h>

#include <random>

#include "impent/impent.hpp"

using namespace impent;

namespace {

DynMetricParams fine(double delta, std::size_t m) { return {delta, m, Variant::fine_d1}; }
DynMetricParams coarse(double delta, std::size_t m) { return {delta, m, Variant::coarse_d}; }

// Direct definitions, without caches or early exits.
double oracle_d1(const Semiflow& phi, const Point& x, const Point& y, double delta, std::size_t m) {
    double best = std::numeric_limits<double>::infinity();
    const double h = delta / static_cast<double>(m);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
            best = std::min(best, phi.space().distance(phi.evaluate(x, a * h), phi.evaluate(y, b * h)));
    return best;
}

double oracle_d(const Semiflow& phi, const Point& x, const Point& y, double delta, std::size_t m) {
    double best = std::numeric_limits<double>::infinity();
    const double h = delta / static_cast<double>(m);
    for (std::size_t a = 0; a < m; ++a) best = std::min(best, phi.space().distance(phi.evaluate(x, a * h), phi.evaluate(y, a * h)));
    return best;
}

} // namespace

TEST(PseudoMetric, EqualPointsGiveZero) {
    const ContinuousFlow phi(SemiflowSpec::rotation({1.0}));
    EXPECT_EQ(pseudo_d1(phi, {0.3}, {0.3}, fine(0.2, 16)), 0.0);
    EXPECT_EQ(pseudo_d(phi, {0.3}, {0.3}, coarse(0.2, 16)), 0.0);
}

TEST(PseudoMetric, IdentityFlowReducesToMetric) {
    const ContinuousFlow phi(SemiflowSpec::identity(MetricSpace::circle()));
    EXPECT_DOUBLE_EQ(pseudo_d1(phi, {0.1}, {0.4}, fine(0.3, 8)), 0.3);
    EXPECT_DOUBLE_EQ(pseudo_d(phi, {0.1}, {0.4}, coarse(0.3, 8)), 0.3);
}

TEST(PseudoMetric, FineWindowAbsorbsShift) {
    // 0.3 flows to itself shifted; one orbit reaches the other within δ = 0.5.
    const ContinuousFlow phi(SemiflowSpec::rotation({1.0}));
    EXPECT_LE(pseudo_d1(phi, {0.0}, {0.3}, fine(0.5, 512)), 1.0 / 512.0 + 1e-12);
}

TEST(PseudoMetric, CoarseOnIsometryIsMetric) {
    const ContinuousFlow phi(SemiflowSpec::rotation({1.0}));
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const Point x{u(rng)}, y{u(rng)};
        EXPECT_NEAR(pseudo_d(phi, x, y, coarse(0.3, 16)), phi.space().distance(x, y), 1e-14);
    }
}

TEST(PseudoMetric, WrongVariantThrows) {
    const ContinuousFlow phi(SemiflowSpec::rotation({1.0}));
    EXPECT_THROW(pseudo_d1(phi, {0.0}, {0.1}, coarse(0.1, 4)), invalid_input);
    EXPECT_THROW(pseudo_d(phi, {0.0}, {0.1}, fine(0.0, 4)), invalid_input);
}

TEST(DynSupDist, RotationIsConstantInT) {
    const ContinuousFlow phi(SemiflowSpec::rotation({1.0}));
    DynMetricParams raw;
    raw.variant = Variant::raw;
    for (double T : {1.0, 10.0, 50.0}) EXPECT_NEAR(dyn_sup_dist(phi, {0.1}, {0.35}, T, 0.05, raw), 0.25, 1e-12);
}

TEST(DynSupDist, TestStepMustMatchWindowGrid) {
    const ContinuousFlow phi(SemiflowSpec::rotation({1.0}));
    EXPECT_THROW(dyn_sup_dist(phi, {0.1}, {0.2}, 2.0, 0.0301, fine(0.1, 10)), invalid_input);
    EXPECT_NO_THROW(dyn_sup_dist(phi, {0.1}, {0.2}, 2.0, 0.03, fine(0.1, 10)));
}

TEST(DynSupDist, SuspensionSeparatesAtFirstWordDifference) {
    const ContinuousFlow phi(SemiflowSpec::suspension_shift2());
    const std::uint8_t a[] = {0, 0, 0, 1}, b[] = {0, 0, 0, 0};
    const Point x = Point::symbolic(Word::from_symbols(a), 0.0), y = Point::symbolic(Word::from_symbols(b), 0.0);
    DynMetricParams raw;
    raw.variant = Variant::raw;
    // Each roof crossing halves the common prefix; after three the first symbols differ.
    EXPECT_DOUBLE_EQ(dyn_sup_dist(phi, x, y, 0.9, 0.1, raw), 0.125);
    EXPECT_DOUBLE_EQ(dyn_sup_dist(phi, x, y, 2.9, 0.1, raw), 0.5);
    EXPECT_DOUBLE_EQ(dyn_sup_dist(phi, x, y, 3.0, 0.1, raw), 1.0);
}

TEST(Properties, AgreesWithDirectDefinition) {
    std::mt19937_64 rng(9);
    const std::vector<SemiflowSpec> specs = {SemiflowSpec::rotation({0.618034}), SemiflowSpec::suspension_shift2(),
                                             SemiflowSpec::ode(VectorField::circle_nonuniform, {1.0, 0.5})};
    for (const auto& spec : specs) {
        const ContinuousFlow phi(spec);
        for (int k = 0; k < 50; ++k) {
            const Point x = spec.space.random_point(rng, 24), y = spec.space.random_point(rng, 24);
            EXPECT_NEAR(pseudo_d1(phi, x, y, fine(0.2, 8)), oracle_d1(phi, x, y, 0.2, 8), 1e-12) << spec.label;
            EXPECT_NEAR(pseudo_d(phi, x, y, coarse(0.2, 8)), oracle_d(phi, x, y, 0.2, 8), 1e-12) << spec.label;
        }
    }
}

TEST(Properties, AxiomsAndOrdering) {
    std::mt19937_64 rng(10);
    const std::vector<SemiflowSpec> specs = {SemiflowSpec::rotation({1.0}), SemiflowSpec::identity(MetricSpace::torus(2)),
                                             SemiflowSpec::suspension_shift2()};
    for (const auto& spec : specs) {
        const ContinuousFlow phi(spec);
        for (int k = 0; k < 1000; ++k) {
            const Point x = spec.space.random_point(rng, 24), y = spec.space.random_point(rng, 24);
            const double d1 = pseudo_d1(phi, x, y, fine(0.2, 8)), d = pseudo_d(phi, x, y, coarse(0.2, 8));
            EXPECT_GE(d1, 0.0);
            EXPECT_EQ(pseudo_d1(phi, x, x, fine(0.2, 8)), 0.0);
            EXPECT_EQ(d1, pseudo_d1(phi, y, x, fine(0.2, 8)));
            EXPECT_EQ(d, pseudo_d(phi, y, x, coarse(0.2, 8)));
            EXPECT_LE(d1, d);
            EXPECT_LE(d, spec.space.distance(x, y));
        }
    }
}

TEST(Properties, NestedWindowsExactOnRotation) {
    std::mt19937_64 rng(15);
    const ContinuousFlow phi(SemiflowSpec::rotation({0.618034}));
    for (int k = 0; k < 200; ++k) {
        const Point x = phi.space().random_point(rng), y = phi.space().random_point(rng);
        EXPECT_GE(pseudo_d1(phi, x, y, fine(0.1, 8)), pseudo_d1(phi, x, y, fine(0.2, 16)));
        EXPECT_GE(pseudo_d1(phi, x, y, fine(0.25, 8)), pseudo_d1(phi, x, y, fine(0.25, 16)));
        EXPECT_GE(pseudo_d(phi, x, y, coarse(0.25, 8)), pseudo_d(phi, x, y, coarse(0.25, 16)));
    }
}

TEST(Properties, NestedWindowsAndRefinement) {
    std::mt19937_64 rng(12);
    const ContinuousFlow phi(SemiflowSpec::ode(VectorField::circle_nonuniform, {1.0, 0.5}));
    for (int k = 0; k < 100; ++k) {
        const Point x = phi.space().random_point(rng), y = phi.space().random_point(rng);
        // Shared grid times are reached by different integration paths, so
        // the subset relation holds up to integrator rounding.
        const double slack = 1e-9;
        // δ' < δ on a shared step grid: the smaller window is a subset.
        EXPECT_GE(pseudo_d1(phi, x, y, fine(0.1, 8)) + slack, pseudo_d1(phi, x, y, fine(0.2, 16)));
        // m doubling keeps the old grid as a subset.
        EXPECT_GE(pseudo_d1(phi, x, y, fine(0.2, 8)) + slack, pseudo_d1(phi, x, y, fine(0.2, 16)));
        EXPECT_GE(pseudo_d(phi, x, y, coarse(0.2, 8)) + slack, pseudo_d(phi, x, y, coarse(0.2, 16)));
    }
}

TEST(Properties, CachedSupMatchesUncached) {
    std::mt19937_64 rng(14);
    const ContinuousFlow phi(SemiflowSpec::suspension_shift2());
    const auto p = fine(0.2, 8);
    const TestGrid g = TestGrid::make(3.0, 0.05, p);
    for (int k = 0; k < 50; ++k) {
        const Point x = phi.space().random_point(rng, 32), y = phi.space().random_point(rng, 32);
        double direct = 0.0;
        for (std::size_t j = 0; j < g.time_points; ++j) {
            const double t = static_cast<double>(j) * g.test_step();
            direct = std::max(direct, oracle_d1(phi, phi.evaluate(x, t), phi.evaluate(y, t), 0.2, 8));
        }
        EXPECT_NEAR(dyn_sup_dist(phi, x, y, 3.0, 0.05, p), direct, 1e-12);
    }
}

TEST(Levels, CodesMatchSupDistances) {
    const ContinuousFlow phi(SemiflowSpec::rotation({1.0}));
    const auto sample = sample_space(phi.space(), 0.05, 1).points;
    const auto p = coarse(0.1, 4);
    const TestGrid g = TestGrid::make(2.0, 0.025, p);
    const auto segs = build_segments(phi, sample, g, 2);
    const std::vector<double> eps = {0.3, 0.1, 0.05};
    const std::size_t marks[] = {g.time_points};
    const LevelMatrix lm = build_levels(phi.space(), segs, g, Variant::coarse_d, marks, eps, 2);
    for (std::size_t i = 0; i < sample.size(); ++i)
        for (std::size_t j = 0; j < sample.size(); ++j) {
            const double d = dyn_sup_dist(phi, sample[i], sample[j], 2.0, 0.025, p);
            for (std::size_t e = 0; e < eps.size(); ++e) EXPECT_EQ(lm.shadows(i, j, 0, e), d < eps[e]) << i << " " << j;
        }
}
