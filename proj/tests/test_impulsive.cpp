#include <gtest/gtest.h>

#include <random>

#include "impent/impent.hpp"

using namespace impent;

namespace {

ImpulsiveSystem rotation_system(double reset = 0.0) {
    return {SemiflowSpec::rotation({1.0}), ImpulseRegion::point_set({Point{0.5}}), ImpulseMap::constant(Point{reset}), {}, "ir"};
}

ImpulsiveSystem identity_system() {
    return {SemiflowSpec::identity(MetricSpace::circle()), ImpulseRegion::point_set({Point{0.5}}), ImpulseMap::constant(Point{0.0}),
            {}, "id"};
}

ImpulsiveSystem suspension_system() {
    return {SemiflowSpec::suspension_shift2(), ImpulseRegion::make_box({{0.5, 0.5}}, 0), ImpulseMap::shift_reset(0.0), {}, "is"};
}

// Dense scan oracle: first t > 0 on a fine grid where the flowed point comes
// within the grid spacing of 0.5 (unit speed).
double dense_first_hit(double x, double horizon) {
    const double h = 1e-5;
    for (double t = h; t <= horizon; t += h)
        if (arc_distance(canonical_angle(x + t), 0.5) <= h) return t;
    return -1.0;
}

} // namespace

TEST(FirstImpulse, RotationCrossing) {
    const auto sys = rotation_system();
    const auto tau = first_impulse_time(sys, {0.2}, 2.0);
    ASSERT_TRUE(tau);
    EXPECT_NEAR(*tau, 0.3, 1e-8);
    EXPECT_NEAR(*tau, dense_first_hit(0.2, 2.0), 2e-5);
}

TEST(FirstImpulse, StartingOnDMustReturn) {
    const auto tau = first_impulse_time(rotation_system(), {0.5}, 2.0);
    ASSERT_TRUE(tau);
    EXPECT_NEAR(*tau, 1.0, 1e-8);
}

TEST(FirstImpulse, IdentityNeverHits) { EXPECT_FALSE(first_impulse_time(identity_system(), {0.2}, 10.0)); }

TEST(FirstImpulse, DenseScanAgreesOnRandomStarts) {
    const auto sys = rotation_system();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        const double x = u(rng);
        const auto tau = first_impulse_time(sys, {x}, 2.0);
        ASSERT_TRUE(tau);
        EXPECT_NEAR(*tau, dense_first_hit(x, 2.0), 2e-5) << x;
    }
}

TEST(FirstImpulse, HorizonMustBePositive) { EXPECT_THROW(first_impulse_time(rotation_system(), {0.2}, 0.0), invalid_input); }

TEST(Itinerary, PeriodicCycle) {
    const auto it = impulse_itinerary(rotation_system(), {0.2}, 1.9);
    ASSERT_EQ(it.times.size(), 4u);
    const double expect[4] = {0.3, 0.8, 1.3, 1.8};
    for (int i = 0; i < 4; ++i) {
        EXPECT_NEAR(it.times[i], expect[i], 1e-8);
        EXPECT_EQ(it.points[i][0], 0.5);
    }
    EXPECT_FALSE(it.truncated);
}

TEST(Itinerary, EmptyCases) {
    EXPECT_TRUE(impulse_itinerary(identity_system(), {0.2}, 5.0).times.empty());
    EXPECT_TRUE(impulse_itinerary(rotation_system(), {0.2}, 0.25).times.empty());
}

TEST(Itinerary, TruncationIsFlaggedNotThrown) {
    auto sys = rotation_system();
    sys.events.max_impulses = 3;
    const auto it = impulse_itinerary(sys, {0.2}, 10.0);
    EXPECT_TRUE(it.truncated);
    EXPECT_EQ(it.times.size(), 3u);
    EXPECT_THROW(impulsive_evaluate(sys, {0.2}, 5.0), horizon_exhausted);
}

TEST(Itinerary, Invariants) {
    const auto sys = suspension_system();
    std::mt19937_64 rng(8);
    for (int k = 0; k < 20; ++k) {
        const Point x = sys.space().random_point(rng, 64);
        const auto it = impulse_itinerary(sys, x, 20.0);
        for (std::size_t n = 0; n < it.points.size(); ++n) {
            EXPECT_LE(sys.region.distance_to(sys.space(), it.points[n]), sys.region.eps_D);
            // The reset image I(D) sits at height 0, half a roof below D.
            if (n > 0) EXPECT_GE(it.times[n] - it.times[n - 1], 0.5 - 1e-8);
        }
    }
}

TEST(Evaluate, RotationExamples) {
    const auto sys = rotation_system();
    EXPECT_NEAR(impulsive_evaluate(sys, {0.2}, 0.4)[0], 0.1, 1e-8);
    EXPECT_EQ(impulsive_evaluate(sys, {0.2}, 0.0)[0], 0.2);
    // Left-closed windows: at τ₁ the state is already I(x¹).
    const double tau = *first_impulse_time(sys, {0.2}, 2.0);
    EXPECT_EQ(impulsive_evaluate(sys, {0.2}, tau)[0], 0.0);
    EXPECT_NEAR(impulsive_evaluate(sys, {0.2}, 0.3)[0], 0.0, 1e-8);
}

TEST(Evaluate, SuspensionResetShiftsWord) {
    const auto sys = suspension_system();
    const std::uint8_t bits[] = {0, 1, 1, 0};
    const Point x = Point::symbolic(Word::from_symbols(bits), 0.2);
    // Symbol 0 at height 0.2 reaches D at 0.5 after 0.3, then restarts at (σw, 0).
    const Point y = impulsive_evaluate(sys, x, 0.4);
    EXPECT_EQ(y.word, x.word.shifted(1));
    EXPECT_NEAR(y[0], 0.1, 1e-8);
}

TEST(Properties, ImpulsiveSemigroup) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (const auto& sys : {rotation_system(), suspension_system()}) {
        for (int k = 0; k < 200; ++k) {
            const Point x = sys.space().random_point(rng, 64);
            const double s = u(rng), t = u(rng);
            const Point a = impulsive_evaluate(sys, impulsive_evaluate(sys, x, s), t);
            const Point b = impulsive_evaluate(sys, x, s + t);
            // Close to an impulse the two sides may sit on opposite sides of the jump.
            const auto it = impulse_itinerary(sys, x, s + t + 1.0);
            bool near_jump = false;
            for (double tn : it.times) near_jump = near_jump || std::fabs(tn - (s + t)) < 1e-6 || std::fabs(tn - s) < 1e-6;
            if (!near_jump) EXPECT_LE(sys.space().distance(a, b), 1e-7) << sys.label << " s=" << s << " t=" << t;
        }
    }
}

TEST(Properties, TauPositive) {
    std::mt19937_64 rng(19);
    for (const auto& sys : {rotation_system(), suspension_system()})
        for (int k = 0; k < 100; ++k) {
            const Point x = sys.space().random_point(rng, 32);
            if (auto tau = first_impulse_time(sys, x, 3.0)) EXPECT_GT(*tau, sys.events.tol_event);
        }
}

TEST(Properties, ItineraryEvaluationConsistency) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto sys = rotation_system();
    for (int k = 0; k < 100; ++k) {
        const Point x{u(rng)};
        const auto it = impulse_itinerary(sys, x, 5.0);
        ASSERT_GE(it.times.size(), 2u);
        const std::size_t n = static_cast<std::size_t>(u(rng) * static_cast<double>(it.times.size() - 1));
        const double t = it.times[n] + u(rng) * (it.times[n + 1] - it.times[n]) * 0.999;
        const Point expect = flow_evaluate(sys.flow, sys.jump.apply(sys.space(), it.points[n]), t - it.times[n]);
        EXPECT_EQ(impulsive_evaluate(sys, x, t)[0], expect[0]);
    }
}

TEST(Regularity, RotationPasses) {
    const auto rep = regularity_report(rotation_system(), 64, 0.1, 1);
    EXPECT_TRUE(rep.regular());
    for (const auto& c : rep.checks) EXPECT_NE(c.status, CheckStatus::fail) << c.name;
    EXPECT_EQ(rep.find("impulse_image_disjoint")->status, CheckStatus::pass);
    EXPECT_EQ(rep.find("d_disjoint_from_flowed_d")->status, CheckStatus::pass);
}

TEST(Regularity, ImageInsideDFails) {
    const auto rep = regularity_report(rotation_system(0.5), 64, 0.1, 1);
    EXPECT_FALSE(rep.regular());
    EXPECT_EQ(rep.find("impulse_image_disjoint")->status, CheckStatus::fail);
}

TEST(Regularity, IdentityFlowFailsTubeConditions) {
    const auto rep = regularity_report(identity_system(), 64, 0.1, 1);
    EXPECT_FALSE(rep.regular());
    EXPECT_EQ(rep.find("tube_exit")->status, CheckStatus::fail);
    EXPECT_EQ(rep.find("tube_open")->status, CheckStatus::fail);
}

TEST(Occupancy, RotationAgainstDenseScan) {
    const auto sys = rotation_system();
    const double occ = region_neighborhood_occupancy(sys, {0.2}, 100.0, 0.05, 0.001);
    EXPECT_LE(occ, 0.11);
    // Oracle: on the cycle [0, 0.5) the band |x - 0.5| < η is [0.5-η, 0.5).
    std::size_t inside = 0, total = 0;
    for (std::size_t k = 0; k <= 100000; ++k, ++total) {
        const double t = static_cast<double>(k) * 0.001;
        const double pos = t < 0.3 ? 0.2 + t : std::fmod(t - 0.3, 0.5);
        if (arc_distance(pos, 0.5) < 0.05) ++inside;
    }
    // Grid points that land on the band edge may round either way: one sample per cycle.
    EXPECT_NEAR(occ, static_cast<double>(inside) / static_cast<double>(total), 0.001 / 0.5);
    EXPECT_NEAR(occ, 0.1, 0.001 / 0.5);
}

TEST(Occupancy, LargeEtaAndFarOrbit) {
    EXPECT_EQ(region_neighborhood_occupancy(rotation_system(), {0.2}, 10.0, 0.6, 0.01), 1.0);
    EXPECT_EQ(region_neighborhood_occupancy(identity_system(), {0.1}, 10.0, 0.05, 0.01), 0.0);
}

TEST(Occupancy, MonotoneAlongEtaLadder) {
    for (const auto& sys : {rotation_system(), suspension_system()}) {
        std::mt19937_64 rng(31);
        for (int k = 0; k < 3; ++k) {
            const Point x = sys.space().random_point(rng, 256);
            double prev = 1.0;
            for (double eta : {0.2, 0.1, 0.05, 0.025}) {
                const double o = region_neighborhood_occupancy(sys, x, 100.0, eta, 0.001);
                EXPECT_LE(o, prev);
                prev = o;
            }
            EXPECT_LT(prev, 0.1);
        }
    }
}

TEST(Validation, RejectsBadSystems) {
    auto sys = rotation_system();
    sys.events.tol_event = 1.0;
    EXPECT_THROW(sys.validate(), invalid_input);
    EXPECT_THROW(ImpulseMap::shift_reset(0.0).validate(MetricSpace::circle()), invalid_input);
}
