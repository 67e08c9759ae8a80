#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "metric_space.hpp"

namespace impent {

/// An evaluable semiflow t -> φ_t on a compact metric space. Implementations
/// are immutable and safe to share between threads.
class Semiflow {
public:
    virtual ~Semiflow() = default;

    virtual const MetricSpace& space() const = 0;
    virtual Point evaluate(const Point& x, double t) const = 0;
    virtual std::string label() const = 0;

    /// States φ_{k·step}(x) for k = 0..count-1.
    virtual std::vector<Point> orbit(const Point& x, double step, std::size_t count) const {
        std::vector<Point> out;
        out.reserve(count);
        for (std::size_t k = 0; k < count; ++k) out.push_back(evaluate(x, static_cast<double>(k) * step));
        return out;
    }
};

enum class FlowFamily { rotation, identity, suspension_shift2, ode };

enum class VectorField {
    circle_nonuniform, // x' = ω + a sin(2πx) on the circle
    torus_linear,      // x' = v on the torus
    interval_logistic, // x' = r x (1 - x) on [0,1]
};

inline const char* to_string(FlowFamily f) {
    switch (f) {
    case FlowFamily::rotation: return "rotation";
    case FlowFamily::identity: return "identity";
    case FlowFamily::suspension_shift2: return "suspension_shift2";
    case FlowFamily::ode: return "ode";
    }
    return "?";
}

inline const char* to_string(VectorField f) {
    switch (f) {
    case VectorField::circle_nonuniform: return "circle_nonuniform";
    case VectorField::torus_linear: return "torus_linear";
    case VectorField::interval_logistic: return "interval_logistic";
    }
    return "?";
}

struct SemiflowSpec {
    MetricSpace space = MetricSpace::circle();
    FlowFamily family = FlowFamily::identity;
    std::vector<double> velocity;      // rotation speeds, one per coordinate
    VectorField field = VectorField::torus_linear;
    std::vector<double> field_params;
    double step = 1e-3;                // fixed RK4 step
    double tol_flow = 1e-6;
    std::string label;

    static SemiflowSpec rotation(std::vector<double> speed) {
        if (speed.empty() || speed.size() > kMaxDim) throw invalid_input("rotation: need 1..4 speeds");
        MetricSpace s = speed.size() == 1 ? MetricSpace::circle() : MetricSpace::torus(speed.size());
        return SemiflowSpec{s, FlowFamily::rotation, std::move(speed), {}, {}, 1e-3, 1e-6, "rotation"};
    }
    static SemiflowSpec identity(MetricSpace space) {
        return SemiflowSpec{std::move(space), FlowFamily::identity, {}, {}, {}, 1e-3, 1e-6, "identity"};
    }
    static SemiflowSpec suspension_shift2() {
        return SemiflowSpec{MetricSpace::suspension_shift2(), FlowFamily::suspension_shift2, {}, {}, {}, 1e-3, 1e-6,
                            "suspension_shift2"};
    }
    static SemiflowSpec ode(VectorField f, std::vector<double> params, double step = 1e-3) {
        if (!(step > 0.0)) throw invalid_input("ode: integrator step must be > 0");
        MetricSpace s = MetricSpace::circle();
        switch (f) {
        case VectorField::circle_nonuniform:
            if (params.size() != 2) throw invalid_input("circle_nonuniform: params are [omega, a]");
            break;
        case VectorField::torus_linear:
            if (params.empty() || params.size() > kMaxDim) throw invalid_input("torus_linear: params are 1..4 speeds");
            s = params.size() == 1 ? MetricSpace::circle() : MetricSpace::torus(params.size());
            break;
        case VectorField::interval_logistic:
            if (params.size() != 1) throw invalid_input("interval_logistic: params are [r]");
            s = MetricSpace::interval();
            break;
        }
        return SemiflowSpec{s, FlowFamily::ode, {}, f, std::move(params), step, 1e-6, std::string("ode:") + to_string(f)};
    }
};

namespace detail {

using State = std::array<double, kMaxDim>;

inline State vector_field(const SemiflowSpec& spec, const State& x) {
    State dx{};
    const auto& p = spec.field_params;
    switch (spec.field) {
    case VectorField::circle_nonuniform:
        dx[0] = p[0] + p[1] * std::sin(2.0 * std::numbers::pi * x[0]);
        break;
    case VectorField::torus_linear:
        for (std::size_t i = 0; i < p.size(); ++i) dx[i] = p[i];
        break;
    case VectorField::interval_logistic:
        dx[0] = p[0] * x[0] * (1.0 - x[0]);
        break;
    }
    return dx;
}

inline State rk4_step(const SemiflowSpec& spec, const State& x, double h, std::size_t n) {
    auto axpy = [n](const State& a, double s, const State& b) {
        State r{};
        for (std::size_t i = 0; i < n; ++i) r[i] = a[i] + s * b[i];
        return r;
    };
    const State k1 = vector_field(spec, x);
    const State k2 = vector_field(spec, axpy(x, 0.5 * h, k1));
    const State k3 = vector_field(spec, axpy(x, 0.5 * h, k2));
    const State k4 = vector_field(spec, axpy(x, h, k3));
    State r = x;
    for (std::size_t i = 0; i < n; ++i) r[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return r;
}

inline Point integrate(const SemiflowSpec& spec, const Point& x, double t) {
    const std::size_t n = spec.space.dim();
    State s = x.coords;
    const double steps = std::floor(t / spec.step);
    const auto full = static_cast<std::uint64_t>(steps);
    for (std::uint64_t k = 0; k < full; ++k) {
        s = rk4_step(spec, s, spec.step, n);
        for (std::size_t i = 0; i < n; ++i)
            if (spec.space.axes()[i] == Axis::periodic) s[i] = canonical_angle(s[i]);
    }
    const double rest = t - steps * spec.step;
    if (rest > 0.0) s = rk4_step(spec, s, rest, n);
    Point out = x;
    out.coords = s;
    return spec.space.canonical(out);
}

// Heights this close below the roof count as having reached it.
inline constexpr double kRoofSnap = 1e-12;

inline Point suspend(const Point& x, double t) {
    const double total = x.coords[0] + t;
    double n = std::floor(total);
    double h = total - n;
    if (h > 1.0 - kRoofSnap) {
        n += 1.0;
        h = 0.0;
    }
    Point out = Point::symbolic(x.word.shifted(static_cast<std::uint64_t>(n)), h);
    return out;
}

} // namespace detail

/// φ_t(x) for a continuous semiflow spec.
inline Point flow_evaluate(const SemiflowSpec& spec, const Point& x, double t) {
    if (!(t >= 0.0)) throw invalid_input("flow_evaluate: t must be >= 0");
    spec.space.check(x);
    if (t == 0.0) return x;
    switch (spec.family) {
    case FlowFamily::identity: return x;
    case FlowFamily::rotation: {
        Point out = x;
        for (std::size_t i = 0; i < spec.velocity.size(); ++i)
            out.coords[i] = canonical_angle(x.coords[i] + spec.velocity[i] * t);
        return out;
    }
    case FlowFamily::suspension_shift2: return detail::suspend(x, t);
    case FlowFamily::ode: return detail::integrate(spec, x, t);
    }
    return x;
}

/// Semiflow view of a SemiflowSpec.
class ContinuousFlow final : public Semiflow {
public:
    explicit ContinuousFlow(SemiflowSpec spec) : spec_(std::move(spec)) {}

    const SemiflowSpec& spec() const { return spec_; }
    const MetricSpace& space() const override { return spec_.space; }
    Point evaluate(const Point& x, double t) const override { return flow_evaluate(spec_, x, t); }
    std::string label() const override { return spec_.label; }

    std::vector<Point> orbit(const Point& x, double step, std::size_t count) const override {
        if (spec_.family != FlowFamily::ode) return Semiflow::orbit(x, step, count);
        // Incremental stepping keeps the cost linear in the horizon.
        std::vector<Point> out;
        out.reserve(count);
        if (count == 0) return out;
        out.push_back(x);
        for (std::size_t k = 1; k < count; ++k) out.push_back(flow_evaluate(spec_, out.back(), step));
        return out;
    }

private:
    SemiflowSpec spec_;
};

} // namespace impent
