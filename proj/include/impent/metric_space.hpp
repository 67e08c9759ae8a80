#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "point.hpp"

namespace impent {

enum class SpaceKind { circle, torus, interval, suspension_shift2, product };

/// Per-coordinate factor of a product space: unit circle R/Z or [0,1].
enum class Axis { periodic, bounded };

inline const char* to_string(SpaceKind k) {
    switch (k) {
    case SpaceKind::circle: return "circle";
    case SpaceKind::torus: return "torus";
    case SpaceKind::interval: return "interval";
    case SpaceKind::suspension_shift2: return "suspension_shift2";
    case SpaceKind::product: return "product";
    }
    return "?";
}

// Wrapped difference in [-0.5, 0.5).
inline double wrap_offset(double d) {
    d -= std::floor(d + 0.5);
    return d;
}

inline double arc_distance(double a, double b) {
    double d = std::fabs(a - b);
    d -= std::floor(d);
    return std::min(d, 1.0 - d);
}

inline double canonical_angle(double x) {
    x -= std::floor(x);
    return x >= 1.0 ? 0.0 : x;
}

/*
 * Compact metric spaces used by the catalog.
 *
 * Circle: R/Z with arc length (circumference 1, diameter 1/2).
 * Torus / product: max over coordinates of the factor metrics.
 * Interval: [0,1] with |x - y|.
 * Suspension over the full 2-shift with roof 1: points (w, h), h in [0,1),
 * distance max(2^-k, |h - h'|) where k is the common prefix length of the
 * words. This product-style metric stands in for the Bowen-Walters metric.
 */
class MetricSpace {
public:
    static MetricSpace circle() { return MetricSpace(SpaceKind::circle, {Axis::periodic}); }
    static MetricSpace interval() { return MetricSpace(SpaceKind::interval, {Axis::bounded}); }
    static MetricSpace torus(std::size_t dim) {
        if (dim == 0 || dim > kMaxDim) throw invalid_input("torus: dimension must be in [1, 4]");
        return MetricSpace(SpaceKind::torus, std::vector<Axis>(dim, Axis::periodic));
    }
    static MetricSpace product(std::vector<Axis> axes) {
        if (axes.empty() || axes.size() > kMaxDim) throw invalid_input("product: dimension must be in [1, 4]");
        return MetricSpace(SpaceKind::product, std::move(axes));
    }
    static MetricSpace suspension_shift2() { return MetricSpace(SpaceKind::suspension_shift2, {Axis::bounded}); }

    SpaceKind kind() const { return kind_; }
    std::size_t dim() const { return axes_.size(); }
    const std::vector<Axis>& axes() const { return axes_; }
    bool symbolic() const { return kind_ == SpaceKind::suspension_shift2; }

    double diameter() const {
        if (symbolic()) return 1.0;
        double d = 0.0;
        for (Axis a : axes_) d = std::max(d, a == Axis::periodic ? 0.5 : 1.0);
        return d;
    }

    std::string name() const {
        std::string s = to_string(kind_);
        if (kind_ == SpaceKind::torus || kind_ == SpaceKind::product) s += std::to_string(dim());
        return s;
    }

    void check(const Point& x) const {
        if (x.dim != dim())
            throw invalid_input("point dimension " + std::to_string(x.dim) + " does not match space " + name());
    }

    double distance(const Point& x, const Point& y) const {
        check(x);
        check(y);
        return distance_unchecked(x, y);
    }

    double distance_unchecked(const Point& x, const Point& y) const {
        if (symbolic()) {
            const std::uint64_t k = first_difference(x.word, y.word);
            const double dw = k == Word::npos ? 0.0 : std::ldexp(1.0, -static_cast<int>(std::min<std::uint64_t>(k, 2000)));
            return std::max(dw, std::fabs(x.coords[0] - y.coords[0]));
        }
        double d = 0.0;
        for (std::size_t i = 0; i < axes_.size(); ++i) {
            const double di = axes_[i] == Axis::periodic ? arc_distance(x.coords[i], y.coords[i])
                                                         : std::fabs(x.coords[i] - y.coords[i]);
            d = std::max(d, di);
        }
        return d;
    }

    /// Canonical representative: periodic coordinates in [0,1), bounded ones clamped.
    Point canonical(Point x) const {
        for (std::size_t i = 0; i < axes_.size(); ++i) {
            if (axes_[i] == Axis::periodic) x.coords[i] = canonical_angle(x.coords[i]);
            else x.coords[i] = std::clamp(x.coords[i], 0.0, symbolic() ? std::nextafter(1.0, 0.0) : 1.0);
        }
        return x;
    }

    bool contains(const Point& x) const {
        if (x.dim != dim()) return false;
        for (std::size_t i = 0; i < axes_.size(); ++i) {
            const double c = x.coords[i];
            if (!(c >= 0.0)) return false;
            if ((axes_[i] == Axis::periodic || symbolic()) ? c >= 1.0 : c > 1.0) return false;
        }
        return true;
    }

    /// Uniformly random point; symbolic spaces get a random word of `word_length` symbols.
    template <class Rng>
    Point random_point(Rng& rng, std::size_t word_length = 64) const {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Point p;
        p.dim = static_cast<std::uint8_t>(dim());
        for (std::size_t i = 0; i < dim(); ++i) p.coords[i] = u(rng);
        if (symbolic()) {
            std::vector<std::uint8_t> sym(word_length);
            std::uniform_int_distribution<int> bit(0, 1);
            for (auto& s : sym) s = static_cast<std::uint8_t>(bit(rng));
            p.word = Word::from_symbols(sym);
        }
        return p;
    }

private:
    MetricSpace(SpaceKind k, std::vector<Axis> axes) : kind_(k), axes_(std::move(axes)) {}

    SpaceKind kind_;
    std::vector<Axis> axes_;
};

/// Finite stand-in for the space in net computations.
struct SampleSet {
    std::vector<Point> points;
    double resolution = 0.0;
    bool single_point_warning = false; // resolution exceeded the diameter
    bool grid = true;                  // density holds by construction
    std::string descriptor;
};

struct SampleOptions {
    // Suspension spaces: word length L and number of heights. 0 derives them
    // from the resolution.
    std::size_t word_length = 0;
    std::size_t height_levels = 0;
    std::size_t max_points = std::size_t{1} << 16;
};

namespace detail {

inline std::size_t cells_for(double resolution) {
    return static_cast<std::size_t>(std::ceil(1.0 / resolution - 1e-9));
}

// Radical inverse in base b (Halton coordinate).
inline double radical_inverse(std::uint64_t i, unsigned base) {
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

} // namespace detail

/*
 * Deterministic sample of the space.
 *
 * Grids where the grid size stays under max_points (every point of the space
 * is within `resolution` of the sample); otherwise a Halton sequence with a
 * seeded Cranley-Patterson shift, marked as not density-certified.
 */
inline SampleSet sample_space(const MetricSpace& space, double resolution, std::uint64_t seed,
                              const SampleOptions& opt = {}) {
    if (!(resolution > 0.0)) throw invalid_input("sample_space: resolution must be > 0");
    SampleSet out;
    out.resolution = resolution;
    if (resolution > space.diameter()) {
        Point p;
        p.dim = static_cast<std::uint8_t>(space.dim());
        out.points.push_back(p);
        out.single_point_warning = true;
        out.descriptor = space.name() + " single point (resolution > diameter)";
        return out;
    }

    if (space.symbolic()) {
        std::size_t L = opt.word_length ? opt.word_length
                                        : static_cast<std::size_t>(std::ceil(std::log2(1.0 / resolution) - 1e-9));
        L = std::max<std::size_t>(L, 1);
        if (L > 24) throw invalid_input("sample_space: suspension word length above 24");
        const std::size_t H = opt.height_levels ? opt.height_levels : detail::cells_for(resolution);
        const std::uint64_t words = std::uint64_t{1} << L;
        out.points.reserve(words * H);
        for (std::uint64_t w = 0; w < words; ++w)
            for (std::size_t k = 0; k < H; ++k)
                out.points.push_back(Point::symbolic(Word::from_u64(w, L), static_cast<double>(k) / static_cast<double>(H)));
        out.descriptor = "suspension_shift2 grid: 2^" + std::to_string(L) + " words x " + std::to_string(H) + " heights";
        return out;
    }

    std::vector<std::size_t> per_axis;
    std::size_t total = 1;
    bool overflow = false;
    for (Axis a : space.axes()) {
        std::size_t n = detail::cells_for(resolution);
        if (a == Axis::bounded) n += 1;
        per_axis.push_back(n);
        if (total > opt.max_points / n) overflow = true;
        else total *= n;
    }

    if (!overflow && total <= opt.max_points) {
        out.points.reserve(total);
        std::vector<std::size_t> idx(space.dim(), 0);
        for (std::size_t c = 0; c < total; ++c) {
            Point p;
            p.dim = static_cast<std::uint8_t>(space.dim());
            std::size_t r = c;
            for (std::size_t i = space.dim(); i-- > 0;) {
                const std::size_t k = r % per_axis[i];
                r /= per_axis[i];
                p.coords[i] = space.axes()[i] == Axis::periodic
                                  ? static_cast<double>(k) / static_cast<double>(per_axis[i])
                                  : static_cast<double>(k) / static_cast<double>(per_axis[i] - 1);
            }
            out.points.push_back(p);
        }
        out.descriptor = space.name() + " grid: " + std::to_string(total) + " points";
        return out;
    }

    static constexpr unsigned primes[kMaxDim] = {2, 3, 5, 7};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::array<double, kMaxDim> shift{};
    for (std::size_t i = 0; i < space.dim(); ++i) shift[i] = u(rng);
    out.grid = false;
    out.points.reserve(opt.max_points);
    for (std::size_t c = 0; c < opt.max_points; ++c) {
        Point p;
        p.dim = static_cast<std::uint8_t>(space.dim());
        for (std::size_t i = 0; i < space.dim(); ++i) {
            const double v = canonical_angle(detail::radical_inverse(c + 1, primes[i]) + shift[i]);
            p.coords[i] = v;
        }
        out.points.push_back(p);
    }
    out.descriptor = space.name() + " shifted Halton: " + std::to_string(opt.max_points) + " points (density not certified)";
    return out;
}

} // namespace impent
