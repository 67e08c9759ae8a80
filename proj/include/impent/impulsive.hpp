#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "semiflow.hpp"

namespace impent {

/*
 * Closed impulse set D.
 *
 * points: finite set in a one-dimensional space, membership within eps_D.
 * box:    closed interval per coordinate; a zero-width interval is a slice
 *         (membership within eps_D on that coordinate). Symbolic spaces may
 *         additionally require the leading symbol of the word.
 */
struct ImpulseRegion {
    enum class Kind { points, box };

    Kind kind = Kind::points;
    std::vector<Point> points;
    std::vector<std::pair<double, double>> box;
    int leading_symbol = -1;
    double eps_D = 1e-9;

    static ImpulseRegion point_set(std::vector<Point> pts, double eps = 1e-9) {
        ImpulseRegion r;
        r.kind = Kind::points;
        r.points = std::move(pts);
        r.eps_D = eps;
        return r;
    }

    static ImpulseRegion make_box(std::vector<std::pair<double, double>> b, int symbol = -1, double eps = 1e-9) {
        ImpulseRegion r;
        r.kind = Kind::box;
        r.box = std::move(b);
        r.leading_symbol = symbol;
        r.eps_D = eps;
        return r;
    }

    void validate(const MetricSpace& space) const {
        if (kind == Kind::points) {
            if (points.empty()) throw invalid_input("impulse region: empty point set");
            if (space.dim() != 1 || space.symbolic())
                throw invalid_input("impulse region: point sets need a one-dimensional non-symbolic space");
            for (const auto& p : points) space.check(p);
        } else {
            if (box.size() != space.dim()) throw invalid_input("impulse region: box needs one interval per coordinate");
            for (auto [lo, hi] : box)
                if (!(lo <= hi) || lo < 0.0 || hi > 1.0) throw invalid_input("impulse region: box intervals must satisfy 0 <= lo <= hi <= 1");
            if (leading_symbol > 1) throw invalid_input("impulse region: leading symbol must be 0 or 1");
            if (leading_symbol >= 0 && !space.symbolic()) throw invalid_input("impulse region: symbol constraint needs a symbolic space");
        }
    }

    bool contains(const MetricSpace& space, const Point& x) const {
        if (kind == Kind::points) {
            for (const auto& p : points)
                if (space.distance_unchecked(p, x) <= eps_D) return true;
            return false;
        }
        for (std::size_t i = 0; i < box.size(); ++i) {
            const auto [lo, hi] = box[i];
            const double c = x.coords[i];
            if (lo == hi) {
                const double off = periodic(space, i) ? wrap_offset(c - lo) : c - lo;
                if (std::fabs(off) > eps_D) return false;
            } else if (c < lo || c > hi) {
                return false;
            }
        }
        return leading_symbol < 0 || x.word.symbol(0) == leading_symbol;
    }

    double distance_to(const MetricSpace& space, const Point& x) const {
        if (kind == Kind::points) {
            double d = std::numeric_limits<double>::infinity();
            for (const auto& p : points) d = std::min(d, space.distance_unchecked(p, x));
            return d;
        }
        double d = 0.0;
        for (std::size_t i = 0; i < box.size(); ++i) {
            const auto [lo, hi] = box[i];
            const double c = x.coords[i];
            double di = 0.0;
            if (c < lo || c > hi) {
                di = periodic(space, i) ? std::min(arc_distance(c, lo), arc_distance(c, hi))
                                        : std::min(std::fabs(c - lo), std::fabs(c - hi));
            }
            d = std::max(d, di);
        }
        if (leading_symbol >= 0 && x.word.symbol(0) != leading_symbol) d = std::max(d, 1.0);
        return d;
    }

    /// Nearest point of D (box: clamp; points: nearest member, first on ties).
    Point project(const MetricSpace& space, const Point& x) const {
        if (kind == Kind::points) {
            std::size_t best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < points.size(); ++k) {
                const double d = space.distance_unchecked(points[k], x);
                if (d < bd) {
                    bd = d;
                    best = k;
                }
            }
            Point out = x;
            out.coords = points[best].coords;
            return out;
        }
        Point out = x;
        for (std::size_t i = 0; i < box.size(); ++i) {
            const auto [lo, hi] = box[i];
            if (lo == hi) out.coords[i] = lo;
            else if (out.coords[i] < lo || out.coords[i] > hi) {
                const bool to_lo = periodic(space, i) ? arc_distance(out.coords[i], lo) <= arc_distance(out.coords[i], hi)
                                                      : std::fabs(out.coords[i] - lo) <= std::fabs(out.coords[i] - hi);
                out.coords[i] = to_lo ? lo : hi;
            }
        }
        return out;
    }

    /// Slice-crossing gates (coordinate, level); empty for thick boxes.
    std::vector<std::pair<std::size_t, double>> gates() const {
        std::vector<std::pair<std::size_t, double>> g;
        if (kind == Kind::points) {
            for (const auto& p : points) g.emplace_back(0, p.coords[0]);
        } else {
            for (std::size_t i = 0; i < box.size(); ++i)
                if (box[i].first == box[i].second) g.emplace_back(i, box[i].first);
        }
        return g;
    }

    /// Smallest positive box width, or +inf (drives detection-step diagnostics).
    double thinnest_width() const {
        double w = std::numeric_limits<double>::infinity();
        if (kind == Kind::box)
            for (auto [lo, hi] : box)
                if (hi > lo) w = std::min(w, hi - lo);
        return w;
    }

    std::string describe() const {
        std::string s;
        if (kind == Kind::points) {
            s = "points{";
            for (std::size_t k = 0; k < points.size(); ++k) s += (k ? "," : "") + std::to_string(points[k].coords[0]);
            return s + "}";
        }
        s = "box{";
        for (std::size_t i = 0; i < box.size(); ++i)
            s += (i ? "x" : "") + ("[" + std::to_string(box[i].first) + "," + std::to_string(box[i].second) + "]");
        if (leading_symbol >= 0) s += ",w0=" + std::to_string(leading_symbol);
        return s + "}";
    }

    // Height of a suspension point behaves like an angle for crossing tests:
    // the roof jump is a discontinuity, not a crossing.
    static bool periodic(const MetricSpace& space, std::size_t i) {
        return space.symbolic() || space.axes()[i] == Axis::periodic;
    }
};

/// Jump map I : D -> X.
struct ImpulseMap {
    enum class Kind { constant, translate, shift_reset };

    Kind kind = Kind::constant;
    Point target;                // constant
    std::vector<double> offset;  // translate
    double reset_height = 0.0;   // shift_reset: (w, h) -> (σw, reset_height)
    double lipschitz_estimate = 0.0;

    static ImpulseMap constant(Point p) {
        ImpulseMap m;
        m.kind = Kind::constant;
        m.target = std::move(p);
        return m;
    }
    static ImpulseMap translate(std::vector<double> v) {
        ImpulseMap m;
        m.kind = Kind::translate;
        m.offset = std::move(v);
        return m;
    }
    static ImpulseMap shift_reset(double height) {
        ImpulseMap m;
        m.kind = Kind::shift_reset;
        m.reset_height = height;
        return m;
    }

    void validate(const MetricSpace& space) const {
        switch (kind) {
        case Kind::constant:
            space.check(target);
            if (!space.contains(target)) throw invalid_input("impulse map: constant target outside the space");
            break;
        case Kind::translate:
            if (offset.size() != space.dim() || space.symbolic()) throw invalid_input("impulse map: translate needs one offset per coordinate");
            break;
        case Kind::shift_reset:
            if (!space.symbolic()) throw invalid_input("impulse map: shift_reset needs a symbolic space");
            if (!(reset_height >= 0.0 && reset_height < 1.0)) throw invalid_input("impulse map: reset height must be in [0,1)");
            break;
        }
    }

    Point apply(const MetricSpace& space, const Point& x) const {
        switch (kind) {
        case Kind::constant: return target;
        case Kind::translate: {
            Point out = x;
            for (std::size_t i = 0; i < offset.size(); ++i) out.coords[i] += offset[i];
            return space.canonical(out);
        }
        case Kind::shift_reset: return Point::symbolic(x.word.shifted(1), reset_height);
        }
        return x;
    }

    std::string describe() const {
        switch (kind) {
        case Kind::constant: return "constant";
        case Kind::translate: return "translate";
        case Kind::shift_reset: return "shift_reset(" + std::to_string(reset_height) + ")";
        }
        return "?";
    }
};

struct EventParams {
    double dt_event = 1e-3;
    double tol_event = 1e-9;
    std::size_t max_impulses = 1'000'000;
};

/// (X, ϕ, D, I) plus event-detection parameters.
struct ImpulsiveSystem {
    SemiflowSpec flow;
    ImpulseRegion region;
    ImpulseMap jump;
    EventParams events;
    std::string label = "impulsive";

    const MetricSpace& space() const { return flow.space; }

    void validate() const {
        region.validate(flow.space);
        jump.validate(flow.space);
        if (!(events.dt_event > 0.0) || !(events.tol_event > 0.0) || events.tol_event >= events.dt_event)
            throw invalid_input("event detection: need 0 < tol_event < dt_event");
        if (events.max_impulses == 0) throw invalid_input("event detection: max_impulses must be >= 1");
    }
};

struct ImpulseItinerary {
    std::vector<double> times;  // τ_n(x), strictly increasing
    std::vector<Point> points;  // x^n, projected onto D
    bool truncated = false;
};

namespace detail {

inline double gate_offset(const ImpulsiveSystem& sys, const Point& x, std::size_t coord, double level) {
    const double d = x.coords[coord] - level;
    return ImpulseRegion::periodic(sys.space(), coord) ? wrap_offset(d) : d;
}

inline bool sign_change(double ga, double gb, bool periodic) {
    const bool change = (ga < 0.0 && gb >= 0.0) || (ga > 0.0 && gb <= 0.0);
    return change && (!periodic || std::fabs(gb - ga) < 0.5);
}

// Non-slice box constraints at a slice crossing.
inline bool admissible_at_gate(const ImpulsiveSystem& sys, const Point& x) {
    const auto& r = sys.region;
    if (r.kind == ImpulseRegion::Kind::points) return true;
    for (std::size_t i = 0; i < r.box.size(); ++i) {
        const auto [lo, hi] = r.box[i];
        if (lo != hi && (x.coords[i] < lo || x.coords[i] > hi)) return false;
    }
    return r.leading_symbol < 0 || x.word.symbol(0) == r.leading_symbol;
}

// Earliest entry into D within (0, step] from state a, if any.
inline std::optional<double> entry_in_step(const ImpulsiveSystem& sys, const Point& a, const Point& b, double step) {
    const double tol = sys.events.tol_event;
    std::optional<double> best;
    const auto gates = sys.region.gates();
    for (auto [coord, level] : gates) {
        const bool per = ImpulseRegion::periodic(sys.space(), coord);
        const double ga = gate_offset(sys, a, coord, level);
        const double gb = gate_offset(sys, b, coord, level);
        if (!sign_change(ga, gb, per)) continue;
        double lo = 0.0, hi = step;
        const bool neg = ga < 0.0;
        while (hi - lo > tol) {
            const double mid = 0.5 * (lo + hi);
            const double gm = gate_offset(sys, flow_evaluate(sys.flow, a, mid), coord, level);
            if (gm != 0.0 && (gm < 0.0) == neg) lo = mid;
            else hi = mid;
        }
        const double root = 0.5 * (lo + hi);
        if (best && root >= *best) continue;
        if (admissible_at_gate(sys, flow_evaluate(sys.flow, a, root))) best = root;
    }
    if (gates.empty() && !sys.region.contains(sys.space(), a) && sys.region.contains(sys.space(), b)) {
        double lo = 0.0, hi = step;
        while (hi - lo > tol) {
            const double mid = 0.5 * (lo + hi);
            if (sys.region.contains(sys.space(), flow_evaluate(sys.flow, a, mid))) hi = mid;
            else lo = mid;
        }
        best = 0.5 * (lo + hi);
    }
    return best;
}

} // namespace detail

/*
 * τ₁(x) = inf{t > 0 : ϕ_t(x) ∈ D}, searched on (0, horizon].
 *
 * Coarse scan at dt_event, then bisection to tol_event; the bisection
 * midpoint is returned. Starting on D is legal: the orbit has to leave and
 * come back. Crossings thinner than one coarse step can be missed.
 */
inline std::optional<double> first_impulse_time(const ImpulsiveSystem& sys, const Point& x, double horizon) {
    if (!(horizon > 0.0)) throw invalid_input("first_impulse_time: horizon must be > 0");
    const double dt = sys.events.dt_event;
    const double limit = horizon + sys.events.tol_event;
    Point a = x;
    for (std::uint64_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * dt;
        if (t >= limit) break;
        Point b = flow_evaluate(sys.flow, a, dt);
        if (auto s = detail::entry_in_step(sys, a, b, dt)) {
            const double tau = t + *s;
            if (tau <= limit) return tau;
            return std::nullopt;
        }
        a = std::move(b);
    }
    return std::nullopt;
}

/// Impulse times τ_n ≤ horizon and impulse points xⁿ via
/// τ_{n+1} = τ_n + τ₁(I(xⁿ)).
inline ImpulseItinerary impulse_itinerary(const ImpulsiveSystem& sys, const Point& x, double horizon) {
    if (!(horizon > 0.0)) throw invalid_input("impulse_itinerary: horizon must be > 0");
    ImpulseItinerary it;
    Point y = x;
    double elapsed = 0.0;
    for (;;) {
        const double remaining = horizon - elapsed;
        if (remaining <= 0.0) break;
        if (it.times.size() >= sys.events.max_impulses) {
            it.truncated = true;
            break;
        }
        const auto tau = first_impulse_time(sys, y, remaining);
        if (!tau) break;
        elapsed += *tau;
        Point hit = sys.region.project(sys.space(), flow_evaluate(sys.flow, y, *tau));
        it.times.push_back(elapsed);
        y = sys.jump.apply(sys.space(), hit);
        it.points.push_back(std::move(hit));
    }
    return it;
}

namespace detail {

// γ_x(t) given an itinerary that reaches at least t. Impulse times within
// tol_event of t count as reached (left-closed windows).
inline Point drift_at(const ImpulsiveSystem& sys, const Point& x, const ImpulseItinerary& it, double t) {
    const auto reached = static_cast<std::size_t>(
        std::upper_bound(it.times.begin(), it.times.end(), t + sys.events.tol_event) - it.times.begin());
    if (it.truncated && !it.times.empty() && t > it.times.back() + sys.events.tol_event)
        throw horizon_exhausted("impulsive trajectory truncated at " + std::to_string(it.times.size()) +
                                " impulses before t = " + std::to_string(t));
    if (reached == 0) return flow_evaluate(sys.flow, x, t);
    const double since = std::max(0.0, t - it.times[reached - 1]);
    return flow_evaluate(sys.flow, sys.jump.apply(sys.space(), it.points[reached - 1]), since);
}

} // namespace detail

/// γ_x(t): ϕ_t(x) before τ₁, ϕ_{t-τ_n}(I(xⁿ)) on [τ_n, τ_{n+1}).
inline Point impulsive_evaluate(const ImpulsiveSystem& sys, const Point& x, double t) {
    if (!(t >= 0.0)) throw invalid_input("impulsive_evaluate: t must be >= 0");
    sys.space().check(x);
    if (t == 0.0) return x;
    const auto it = impulse_itinerary(sys, x, t);
    return detail::drift_at(sys, x, it, t);
}

/// The impulsive semiflow φ of an impulsive system, as a Semiflow.
class ImpulsiveSemiflow final : public Semiflow {
public:
    explicit ImpulsiveSemiflow(ImpulsiveSystem sys) : sys_(std::move(sys)) { sys_.validate(); }

    const ImpulsiveSystem& system() const { return sys_; }
    const MetricSpace& space() const override { return sys_.space(); }
    Point evaluate(const Point& x, double t) const override { return impulsive_evaluate(sys_, x, t); }
    std::string label() const override { return sys_.label; }

    std::vector<Point> orbit(const Point& x, double step, std::size_t count) const override {
        std::vector<Point> out;
        out.reserve(count);
        if (count == 0) return out;
        const double horizon = static_cast<double>(count - 1) * step;
        ImpulseItinerary it;
        if (horizon > 0.0) it = impulse_itinerary(sys_, x, horizon);
        for (std::size_t k = 0; k < count; ++k) out.push_back(detail::drift_at(sys_, x, it, static_cast<double>(k) * step));
        return out;
    }

private:
    ImpulsiveSystem sys_;
};

} // namespace impent
