#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "impulsive.hpp"

namespace impent {

enum class CheckStatus { pass, heuristic_pass, vacuous_pass, fail };

inline const char* to_string(CheckStatus s) {
    switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::heuristic_pass: return "heuristic-pass";
    case CheckStatus::vacuous_pass: return "vacuous-pass";
    case CheckStatus::fail: return "fail";
    }
    return "?";
}

struct RegularityCheck {
    std::string name;
    CheckStatus status = CheckStatus::pass;
    std::string detail;
    double value = 0.0;
};

/// Sampled evidence for the regularity conditions; never a proof.
struct RegularityReport {
    double xi = 0.0;
    std::size_t samples = 0;
    double lipschitz_estimate = 0.0;
    double speed_estimate = 0.0;
    double geometric_tolerance = 0.0;
    std::vector<RegularityCheck> checks;

    bool regular() const {
        for (const auto& c : checks)
            if (c.status == CheckStatus::fail) return false;
        return true;
    }

    const RegularityCheck* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
};

namespace detail {

// Points of D used as evidence: all of a finite D, seeded samples of a box.
inline std::vector<Point> sample_region(const ImpulsiveSystem& sys, std::size_t samples, std::uint64_t seed) {
    const auto& r = sys.region;
    if (r.kind == ImpulseRegion::Kind::points) return r.points;
    std::mt19937_64 rng(seed);
    std::vector<Point> out;
    for (std::size_t k = 0; k < samples; ++k) {
        Point p = sys.space().random_point(rng, 24);
        for (std::size_t i = 0; i < r.box.size(); ++i) {
            auto [lo, hi] = r.box[i];
            p.coords[i] = lo == hi ? lo : lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        }
        if (r.leading_symbol >= 0 && p.word.symbol(0) != r.leading_symbol) {
            std::vector<std::uint8_t> sym(24);
            for (std::size_t i = 0; i < sym.size(); ++i) sym[i] = static_cast<std::uint8_t>(p.word.symbol(i));
            sym[0] = static_cast<std::uint8_t>(r.leading_symbol);
            p.word = Word::from_symbols(sym);
        }
        out.push_back(p);
    }
    return out;
}

inline double min_distance(const MetricSpace& space, const Point& x, const std::vector<Point>& set) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& p : set) d = std::min(d, space.distance_unchecked(x, p));
    return d;
}

} // namespace detail

/*
 * Sampled regularity diagnostics at a fixed ξ.
 *
 * Exact statements about a finite D are reported as pass/fail; statements
 * about tubes D_ξ = ∪_{x∈D} {ϕ_t(x) : 0 < t < ξ} rely on sampled tube points
 * and report heuristic-pass when no counterexample is found. Two sampled
 * points closer than the geometric tolerance (a quarter of the tube sample
 * spacing times the estimated speed) count as coincident.
 */
inline RegularityReport regularity_report(const ImpulsiveSystem& sys, std::size_t samples, double xi, std::uint64_t seed) {
    if (!(xi > 0.0)) throw invalid_input("regularity_report: xi must be > 0");
    if (samples == 0) throw invalid_input("regularity_report: samples must be > 0");
    const auto& space = sys.space();
    const auto& flow = sys.flow;
    RegularityReport rep;
    rep.xi = xi;
    rep.samples = samples;
    const bool finite_d = sys.region.kind == ImpulseRegion::Kind::points;
    const CheckStatus ok = finite_d ? CheckStatus::pass : CheckStatus::heuristic_pass;

    const auto dpts = detail::sample_region(sys, samples, seed);
    std::vector<Point> images;
    for (const auto& p : dpts) images.push_back(sys.jump.apply(space, p));

    const double du = xi / static_cast<double>(samples + 1);
    double speed = 0.0;
    for (const auto& p : dpts) speed = std::max(speed, space.distance_unchecked(p, flow_evaluate(flow, p, du)) / du);
    rep.speed_estimate = speed;
    const double tol = 0.25 * speed * du;
    rep.geometric_tolerance = tol;

    // Tube samples ϕ_u(p), u in (0, ξ), and ϕ_ξ(D).
    std::vector<Point> tube, flowed_d;
    for (const auto& p : dpts) {
        for (std::size_t k = 1; k <= samples; ++k) tube.push_back(flow_evaluate(flow, p, du * static_cast<double>(k)));
        flowed_d.push_back(flow_evaluate(flow, p, xi));
    }

    {
        RegularityCheck c{"impulse_image_disjoint", ok, "I(D) ∩ D = ∅ on D samples", 0.0};
        for (const auto& q : images)
            if (sys.region.contains(space, q)) {
                c.status = CheckStatus::fail;
                c.detail = "an impulse image lies in D";
            }
        rep.checks.push_back(c);
    }
    {
        RegularityCheck c{"lipschitz", CheckStatus::heuristic_pass, "max d(I(x),I(y))/d(x,y) over D sample pairs", 0.0};
        double L = 0.0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < dpts.size(); ++i)
            for (std::size_t j = i + 1; j < dpts.size(); ++j) {
                const double dxy = space.distance_unchecked(dpts[i], dpts[j]);
                if (dxy <= 0.0) continue;
                L = std::max(L, space.distance_unchecked(images[i], images[j]) / dxy);
                ++pairs;
            }
        if (pairs == 0) {
            c.status = CheckStatus::vacuous_pass;
            c.detail = "fewer than two distinct D samples; Lipschitz bound vacuous";
        }
        if (!std::isfinite(L)) c.status = CheckStatus::fail;
        c.value = L;
        rep.lipschitz_estimate = L;
        rep.checks.push_back(c);
    }
    {
        RegularityCheck c{"tau1_positive", CheckStatus::heuristic_pass, "τ₁ > tol_event on D samples, their images and random points", 0.0};
        std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
        std::vector<Point> probes = dpts;
        probes.insert(probes.end(), images.begin(), images.end());
        for (std::size_t k = 0; k < samples; ++k) probes.push_back(space.random_point(rng, 24));
        double min_tau = std::numeric_limits<double>::infinity();
        for (const auto& x : probes)
            if (auto tau = first_impulse_time(sys, x, std::max(2.0, 4.0 * xi))) min_tau = std::min(min_tau, *tau);
        c.value = min_tau;
        if (min_tau <= sys.events.tol_event) c.status = CheckStatus::fail;
        rep.checks.push_back(c);
    }
    {
        RegularityCheck c{"tube_open", CheckStatus::heuristic_pass, "condition 1: the flow moves D points off D within (0, ξ)", 0.0};
        for (const auto& z : tube)
            if (detail::min_distance(space, z, dpts) <= tol || sys.region.contains(space, z)) {
                c.status = CheckStatus::fail;
                c.detail = "a tube sample stays on D (D_ξ degenerate)";
                break;
            }
        rep.checks.push_back(c);
    }
    {
        RegularityCheck c{"tube_exit", CheckStatus::heuristic_pass, "condition 2: ϕ_ξ(D_ξ) ⊂ X_ξ \\ ϕ_ξ(D) on tube samples", 0.0};
        double closest = std::numeric_limits<double>::infinity();
        for (const auto& p : dpts)
            for (std::size_t k = 1; k <= samples; ++k) {
                const Point img = flow_evaluate(flow, p, xi + du * static_cast<double>(k));
                const double d = std::min({detail::min_distance(space, img, tube), detail::min_distance(space, img, dpts),
                                           detail::min_distance(space, img, flowed_d)});
                closest = std::min(closest, d);
                if (d <= tol || sys.region.contains(space, img)) c.status = CheckStatus::fail;
            }
        c.value = closest;
        if (c.status == CheckStatus::fail) c.detail = "ϕ_ξ of a tube sample returns to D ∪ D_ξ ∪ ϕ_ξ(D)";
        rep.checks.push_back(c);
    }
    {
        RegularityCheck c{"no_quick_return", CheckStatus::heuristic_pass, "condition 3: ϕ_t(I(D)) ∉ I(D) for t in (0, ξ]", 0.0};
        double closest = std::numeric_limits<double>::infinity();
        for (const auto& q : images)
            for (std::size_t k = 1; k <= samples + 1; ++k) {
                const Point z = flow_evaluate(flow, q, du * static_cast<double>(k));
                const double d = detail::min_distance(space, z, images);
                closest = std::min(closest, d);
                if (d <= tol) c.status = CheckStatus::fail;
            }
        c.value = closest;
        rep.checks.push_back(c);
    }
    {
        RegularityCheck c{"d_disjoint_from_flowed_d", ok, "D ∩ ϕ_ξ(D) = ∅", 0.0};
        for (const auto& q : flowed_d)
            if (sys.region.contains(space, q) || detail::min_distance(space, q, dpts) <= tol) c.status = CheckStatus::fail;
        rep.checks.push_back(c);
    }
    {
        RegularityCheck c{"event_step_resolves_region", CheckStatus::heuristic_pass,
                          "coarse detection step times speed stays below the thinnest box width", 0.0};
        const double w = sys.region.thinnest_width();
        c.value = speed * sys.events.dt_event;
        if (std::isfinite(w) && c.value >= w) {
            c.status = CheckStatus::fail;
            c.detail = "dt_event may step over the region; crossings can be missed";
        }
        rep.checks.push_back(c);
    }
    return rep;
}

/// Fraction of sampled times t = k·step in [0, horizon] with γ_x(t) within
/// η of D.
inline double region_neighborhood_occupancy(const ImpulsiveSystem& sys, const Point& x, double horizon, double eta, double step) {
    if (!(horizon > 0.0) || !(eta > 0.0) || !(step > 0.0))
        throw invalid_input("region_neighborhood_occupancy: horizon, eta and step must be > 0");
    const ImpulsiveSemiflow phi(sys);
    const auto count = static_cast<std::size_t>(std::floor(horizon / step + 1e-9)) + 1;
    const auto states = phi.orbit(x, step, count);
    std::size_t inside = 0;
    for (const auto& s : states)
        if (sys.region.distance_to(sys.space(), s) < eta) ++inside;
    return static_cast<double>(inside) / static_cast<double>(states.size());
}

} // namespace impent
