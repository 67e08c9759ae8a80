#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "parallel.hpp"
#include "semiflow.hpp"

namespace impent {

/// Which dynamical (pseudo)distance drives separation and shadowing.
///   fine_d1:  min over s₁, s₂ in the window of d(φ_{s₁}x, φ_{s₂}y)
///   coarse_d: min over a common shift s of d(φ_s x, φ_s y)
///   raw:      d itself (Bowen)
enum class Variant { fine_d1, coarse_d, raw };

inline const char* to_string(Variant v) {
    switch (v) {
    case Variant::fine_d1: return "fine_d1";
    case Variant::coarse_d: return "coarse_d";
    case Variant::raw: return "raw";
    }
    return "?";
}

/// Window [0, δ) discretized as {kδ/m : k = 0..m-1}; the grid never contains δ.
struct DynMetricParams {
    double delta = 0.1;
    std::size_t m = 64;
    Variant variant = Variant::fine_d1;

    double window_step() const { return delta / static_cast<double>(m); }

    void validate() const {
        if (variant == Variant::raw) return;
        if (!(delta > 0.0)) throw invalid_input("DynMetricParams: delta must be > 0");
        if (m == 0) throw invalid_input("DynMetricParams: m must be >= 1");
    }

    /// Default test-grid step: the largest multiple of δ/m not above δ/4.
    double default_test_step() const {
        return window_step() * static_cast<double>(std::max<std::size_t>(1, m / 4));
    }
};

/// States φ_{jΔ}(x) for j = 0..count-1, computed once and then read-only.
class OrbitSegment {
public:
    OrbitSegment() = default;
    OrbitSegment(const Semiflow& phi, const Point& x, double step, std::size_t count)
        : base_(x), step_(step), states_(phi.orbit(x, step, count)) {}

    const Point& base() const { return base_; }
    double step() const { return step_; }
    std::size_t size() const { return states_.size(); }
    const Point& operator[](std::size_t j) const { return states_[j]; }
    const Point* data() const { return states_.data(); }

private:
    Point base_;
    double step_ = 0.0;
    std::vector<Point> states_;
};

/*
 * Shared time discretization of the sup over t in [0, T].
 *
 * Orbits are cached at `cache_step`; test times are every `stride` cache
 * points; each test time reads a window of `window` consecutive states. The
 * test step must be an integer multiple of the window step so both grids
 * index the same cache.
 */
struct TestGrid {
    double cache_step = 0.0;
    std::size_t stride = 1;
    std::size_t window = 1;
    std::size_t time_points = 1; // test times j·stride for j < time_points

    std::size_t cache_count() const { return (time_points - 1) * stride + window; }
    double test_step() const { return cache_step * static_cast<double>(stride); }

    /// Test-time count for horizon T: #{j ≥ 0 : j·Δ_T ≤ T}.
    static std::size_t points_for(double T, double test_step) {
        return static_cast<std::size_t>(std::floor(T / test_step + 1e-9)) + 1;
    }

    static TestGrid make(double T, double test_step, const DynMetricParams& params) {
        if (!(T > 0.0)) throw invalid_input("TestGrid: T must be > 0");
        if (!(test_step > 0.0)) throw invalid_input("TestGrid: test step must be > 0");
        params.validate();
        TestGrid g;
        if (params.variant == Variant::raw) {
            g.cache_step = test_step;
            g.stride = 1;
            g.window = 1;
        } else {
            g.cache_step = params.window_step();
            const double q = test_step / g.cache_step;
            const double qr = std::round(q);
            if (qr < 1.0 || std::fabs(q - qr) > 1e-9 * std::max(1.0, q))
                throw invalid_input("test grid step " + std::to_string(test_step) + " is not a multiple of delta/m = " +
                                    std::to_string(g.cache_step));
            g.stride = static_cast<std::size_t>(qr);
            g.window = params.m;
        }
        g.time_points = points_for(T, test_step);
        return g;
    }
};

/// Remembers the last minimizing window offsets of a pair scan; consecutive
/// test times usually share them, which lets most windows exit after one
/// distance evaluation.
struct WindowHint {
    std::size_t a = 0;
    std::size_t b = 0;
};

/*
 * Window value at one test time: pseudo-distance between xs[0..m) and
 * ys[0..m). When the true value is ≤ bound the scan may stop early and return
 * any window element ≤ bound; otherwise the exact minimum is returned. Max
 * taken over windows is therefore exact.
 */
inline double window_value(const MetricSpace& sp, const Point* xs, const Point* ys, std::size_t m, Variant v,
                           double bound, WindowHint& hint) {
    switch (v) {
    case Variant::raw: return sp.distance_unchecked(xs[0], ys[0]);
    case Variant::coarse_d: {
        double d = sp.distance_unchecked(xs[hint.a], ys[hint.a]);
        if (d <= bound) return d;
        double best = d;
        std::size_t arg = hint.a;
        for (std::size_t k = 0; k < m; ++k) {
            d = sp.distance_unchecked(xs[k], ys[k]);
            if (d <= bound) {
                hint.a = k;
                return d;
            }
            if (d < best) {
                best = d;
                arg = k;
            }
        }
        hint.a = arg;
        return best;
    }
    case Variant::fine_d1: {
        double d = sp.distance_unchecked(xs[hint.a], ys[hint.b]);
        if (d <= bound) return d;
        double best = d;
        std::size_t aa = hint.a, bb = hint.b;
        for (std::size_t i = 0; i < m; ++i) {
            const Point& xi = xs[i];
            for (std::size_t j = 0; j < m; ++j) {
                d = sp.distance_unchecked(xi, ys[j]);
                if (d <= bound) {
                    hint = {i, j};
                    return d;
                }
                if (d < best) {
                    best = d;
                    aa = i;
                    bb = j;
                }
            }
        }
        hint = {aa, bb};
        return best;
    }
    }
    return 0.0;
}

/*
 * Running sup of the window value over test times. `marks` are increasing
 * test-time counts; out[i] receives the sup over the first marks[i] test
 * times. Once the running sup reaches stop_at, the remaining entries are set
 * to that value (a lower bound that is already ≥ stop_at).
 */
inline void prefix_sups(const MetricSpace& sp, const Point* xs, const Point* ys, const TestGrid& g, Variant v,
                        std::span<const std::size_t> marks, double stop_at, std::span<double> out) {
    double sup = -std::numeric_limits<double>::infinity();
    WindowHint hint;
    std::size_t next = 0;
    const std::size_t last = marks.empty() ? 0 : marks.back();
    for (std::size_t j = 0; j < last; ++j) {
        const std::size_t base = j * g.stride;
        const double w = window_value(sp, xs + base, ys + base, g.window, v, sup, hint);
        if (w > sup) sup = w;
        while (next < marks.size() && marks[next] == j + 1) out[next++] = sup;
        if (sup >= stop_at) {
            while (next < marks.size()) out[next++] = sup;
            return;
        }
    }
}

/// max over test times of the window value, on cached orbits.
inline double dyn_sup_dist(const MetricSpace& sp, const OrbitSegment& x, const OrbitSegment& y, const TestGrid& g,
                           Variant v) {
    if (x.size() < g.cache_count() || y.size() < g.cache_count())
        throw invalid_input("dyn_sup_dist: orbit cache shorter than the test grid");
    const std::size_t marks[1] = {g.time_points};
    double out[1] = {0.0};
    prefix_sups(sp, x.data(), y.data(), g, v, marks, std::numeric_limits<double>::infinity(), out);
    return out[0];
}

/// d_δ¹ on the m×m grid (an upper bound on the infimum, nonincreasing in m).
inline double pseudo_d1(const Semiflow& phi, const Point& x, const Point& y, const DynMetricParams& params) {
    if (params.variant != Variant::fine_d1) throw invalid_input("pseudo_d1: params.variant must be fine_d1");
    params.validate();
    const OrbitSegment sx(phi, x, params.window_step(), params.m), sy(phi, y, params.window_step(), params.m);
    WindowHint h;
    return window_value(phi.space(), sx.data(), sy.data(), params.m, Variant::fine_d1,
                        -std::numeric_limits<double>::infinity(), h);
}

/// d_δ on the m-point diagonal grid.
inline double pseudo_d(const Semiflow& phi, const Point& x, const Point& y, const DynMetricParams& params) {
    if (params.variant != Variant::coarse_d) throw invalid_input("pseudo_d: params.variant must be coarse_d");
    params.validate();
    const OrbitSegment sx(phi, x, params.window_step(), params.m), sy(phi, y, params.window_step(), params.m);
    WindowHint h;
    return window_value(phi.space(), sx.data(), sy.data(), params.m, Variant::coarse_d,
                        -std::numeric_limits<double>::infinity(), h);
}

/// max over t in {jΔ_T ≤ T} of the variant distance between φ_t x and φ_t y.
/// x, y are (T,ε)-separated iff the result is ≥ ε; y ε-shadows x iff < ε.
inline double dyn_sup_dist(const Semiflow& phi, const Point& x, const Point& y, double T, double test_step,
                           const DynMetricParams& params) {
    const TestGrid g = TestGrid::make(T, test_step, params);
    const OrbitSegment sx(phi, x, g.cache_step, g.cache_count()), sy(phi, y, g.cache_step, g.cache_count());
    return dyn_sup_dist(phi.space(), sx, sy, g, params.variant);
}

/// Orbit caches for a whole sample, built in parallel and then frozen.
inline std::vector<OrbitSegment> build_segments(const Semiflow& phi, std::span<const Point> sample, const TestGrid& g,
                                                std::size_t threads) {
    std::vector<OrbitSegment> segs(sample.size());
    parallel_for(sample.size(), threads,
                 [&](std::size_t i) { segs[i] = OrbitSegment(phi, sample[i], g.cache_step, g.cache_count()); });
    return segs;
}

/*
 * Threshold codes for every pair and every horizon of a T-ladder.
 *
 * For pair (i, j) and horizon index t, code = first index k in the
 * decreasing ε-ladder with ε_k ≤ dyn_sup_dist (ladder size if none). The
 * pair is separated at ε_k iff k ≥ code, and shadowing iff k < code.
 */
class LevelMatrix {
public:
    LevelMatrix() = default;
    LevelMatrix(std::size_t n, std::size_t horizons) : n_(n), horizons_(horizons), codes_(pairs(n) * horizons, 0) {}

    static std::size_t pairs(std::size_t n) { return n * (n - (n > 0 ? 1 : 0)) / 2; }

    std::size_t size() const { return n_; }
    std::size_t horizons() const { return horizons_; }

    std::size_t pair_index(std::size_t i, std::size_t j) const {
        if (i > j) std::swap(i, j);
        return i * (2 * n_ - i - 1) / 2 + (j - i - 1);
    }

    std::uint8_t code(std::size_t i, std::size_t j, std::size_t t) const { return codes_[pair_index(i, j) * horizons_ + t]; }
    std::uint8_t* row(std::size_t pair) { return codes_.data() + pair * horizons_; }

    bool shadows(std::size_t i, std::size_t j, std::size_t t, std::size_t eps_level) const {
        return i == j || code(i, j, t) > eps_level;
    }

private:
    std::size_t n_ = 0;
    std::size_t horizons_ = 0;
    std::vector<std::uint8_t> codes_;
};

inline std::uint8_t threshold_code(double d, std::span<const double> eps_desc) {
    std::size_t k = 0;
    while (k < eps_desc.size() && eps_desc[k] > d) ++k;
    return static_cast<std::uint8_t>(k);
}

inline LevelMatrix build_levels(const MetricSpace& sp, const std::vector<OrbitSegment>& segs, const TestGrid& g, Variant v,
                                std::span<const std::size_t> marks, std::span<const double> eps_desc, std::size_t threads) {
    if (eps_desc.empty() || eps_desc.size() > 250) throw invalid_input("build_levels: epsilon ladder size must be in [1, 250]");
    const std::size_t n = segs.size();
    LevelMatrix lm(n, marks.size());
    parallel_for(n, threads, [&](std::size_t i) {
        std::vector<double> sups(marks.size());
        for (std::size_t j = i + 1; j < n; ++j) {
            prefix_sups(sp, segs[i].data(), segs[j].data(), g, v, marks, eps_desc.front(), sups);
            std::uint8_t* r = lm.row(lm.pair_index(i, j));
            for (std::size_t t = 0; t < marks.size(); ++t) r[t] = threshold_code(sups[t], eps_desc);
        }
    });
    return lm;
}

} // namespace impent
