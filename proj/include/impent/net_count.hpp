#pragma once

#include <bit>
#include <cstdint>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "pseudometric.hpp"

namespace impent {

enum class Mode { spanning, separated };

inline const char* to_string(Mode m) { return m == Mode::spanning ? "spanning" : "separated"; }

/// Symmetric "ε-shadows" relation on a finite sample, one bit row per point.
/// Reflexive: every point shadows itself.
class ShadowGraph {
public:
    ShadowGraph() = default;
    explicit ShadowGraph(std::size_t n) : n_(n), words_((n + 63) / 64), bits_(n * words_, 0) {
        for (std::size_t i = 0; i < n; ++i) set(i, i);
    }

    template <class Pred>
    static ShadowGraph from_predicate(std::size_t n, Pred&& shadows) {
        ShadowGraph g(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (shadows(i, j)) {
                    g.set(i, j);
                    g.set(j, i);
                }
        return g;
    }

    std::size_t size() const { return n_; }
    std::size_t words() const { return words_; }
    bool test(std::size_t i, std::size_t j) const { return (bits_[i * words_ + j / 64] >> (j % 64)) & 1U; }
    std::span<const std::uint64_t> row(std::size_t i) const { return {bits_.data() + i * words_, words_}; }

private:
    void set(std::size_t i, std::size_t j) { bits_[i * words_ + j / 64] |= std::uint64_t{1} << (j % 64); }

    std::size_t n_ = 0;
    std::size_t words_ = 0;
    std::vector<std::uint64_t> bits_;
};

/// Every sample point is shadowed by some witness member.
inline bool verify_spanning(const ShadowGraph& g, std::span<const std::size_t> witness) {
    std::vector<std::uint64_t> cov(g.words(), 0);
    for (std::size_t w : witness) {
        auto r = g.row(w);
        for (std::size_t k = 0; k < cov.size(); ++k) cov[k] |= r[k];
    }
    for (std::size_t i = 0; i < g.size(); ++i)
        if (!((cov[i / 64] >> (i % 64)) & 1U)) return false;
    return true;
}

/// No two distinct witness members shadow each other.
inline bool verify_separated(const ShadowGraph& g, std::span<const std::size_t> witness) {
    for (std::size_t a = 0; a < witness.size(); ++a)
        for (std::size_t b = a + 1; b < witness.size(); ++b)
            if (witness[a] == witness[b] || g.test(witness[a], witness[b])) return false;
    return true;
}

/*
 * Greedy set cover: repeatedly take the point shadowing the most uncovered
 * points, ties to the lowest index. Lazy evaluation: stale gains are upper
 * bounds, so a popped entry whose refreshed gain still beats the next key is
 * exactly the greedy choice.
 */
inline std::vector<std::size_t> greedy_cover(const ShadowGraph& g) {
    const std::size_t n = g.size();
    std::vector<std::uint64_t> uncovered(g.words(), 0);
    for (std::size_t i = 0; i < n; ++i) uncovered[i / 64] |= std::uint64_t{1} << (i % 64);
    auto gain = [&](std::size_t i) {
        std::size_t c = 0;
        auto r = g.row(i);
        for (std::size_t k = 0; k < uncovered.size(); ++k) c += static_cast<std::size_t>(std::popcount(r[k] & uncovered[k]));
        return c;
    };
    // (gain, -index): larger gain first, then lower index.
    using Key = std::pair<std::size_t, std::int64_t>;
    std::priority_queue<Key> heap;
    for (std::size_t i = 0; i < n; ++i) heap.emplace(gain(i), -static_cast<std::int64_t>(i));
    std::vector<std::size_t> chosen;
    std::size_t left = n;
    while (left > 0 && !heap.empty()) {
        auto [stale, negi] = heap.top();
        heap.pop();
        const auto i = static_cast<std::size_t>(-negi);
        const std::size_t fresh = gain(i);
        if (fresh == 0) continue;
        if (!heap.empty() && Key{fresh, negi} < heap.top()) {
            heap.emplace(fresh, negi);
            continue;
        }
        chosen.push_back(i);
        auto r = g.row(i);
        for (std::size_t k = 0; k < uncovered.size(); ++k) uncovered[k] &= ~r[k];
        left -= fresh;
    }
    return chosen;
}

/// Maximal separated subset: seeds first (they must already be separated),
/// then every index in order that is separated from everything admitted.
inline std::vector<std::size_t> greedy_packing(const ShadowGraph& g, std::span<const std::size_t> seed = {}) {
    std::vector<std::uint64_t> blocked(g.words(), 0);
    std::vector<std::size_t> admitted;
    admitted.reserve(seed.size());
    auto admit = [&](std::size_t i) {
        admitted.push_back(i);
        auto r = g.row(i);
        for (std::size_t k = 0; k < blocked.size(); ++k) blocked[k] |= r[k];
    };
    for (std::size_t s : seed) {
        if ((blocked[s / 64] >> (s % 64)) & 1U) throw invalid_input("greedy_packing: seed set is not separated");
        admit(s);
    }
    for (std::size_t i = 0; i < g.size(); ++i)
        if (!((blocked[i / 64] >> (i % 64)) & 1U)) admit(i);
    return admitted;
}

/// Exact minimum spanning subset size by subset enumeration (n ≤ 20).
inline std::size_t exact_min_cover(const ShadowGraph& g) {
    const std::size_t n = g.size();
    if (n > 20) throw invalid_input("exact_min_cover: sample larger than 20 points");
    if (n == 0) return 0;
    std::vector<std::uint32_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<std::uint32_t>(g.row(i)[0]);
    const std::uint32_t full = n == 32 ? ~0U : ((1U << n) - 1);
    std::size_t best = n;
    std::vector<std::uint32_t> cover(std::size_t{1} << n, 0);
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        const int low = std::countr_zero(mask);
        cover[mask] = cover[mask & (mask - 1)] | rows[static_cast<std::size_t>(low)];
        const auto size = static_cast<std::size_t>(std::popcount(mask));
        if (size < best && cover[mask] == full) best = size;
    }
    return best;
}

/// Exact maximum separated subset size (maximum independent set, n ≤ 20).
inline std::size_t exact_max_packing(const ShadowGraph& g) {
    const std::size_t n = g.size();
    if (n > 20) throw invalid_input("exact_max_packing: sample larger than 20 points");
    if (n == 0) return 0;
    std::vector<std::uint32_t> nb(n);
    for (std::size_t i = 0; i < n; ++i) nb[i] = static_cast<std::uint32_t>(g.row(i)[0]) & ~(1U << i);
    std::size_t best = 0;
    const std::uint32_t full = (1U << n) - 1;
    std::vector<std::uint8_t> indep(std::size_t{1} << n, 0);
    indep[0] = 1;
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        const int low = std::countr_zero(mask);
        const std::uint32_t rest = mask & (mask - 1);
        indep[mask] = indep[rest] && !(nb[static_cast<std::size_t>(low)] & rest);
        if (indep[mask]) best = std::max(best, static_cast<std::size_t>(std::popcount(mask)));
    }
    return best;
}

/// One spanning or separated count with its witness (indices into the sample).
struct NetCount {
    Variant variant = Variant::raw;
    Mode mode = Mode::spanning;
    double T = 0.0;
    double epsilon = 0.0;
    double delta = 0.0;
    std::size_t count = 0;
    std::vector<std::size_t> witness;
    std::string sample;
    bool witness_verified = false;
    bool witness_spans = false; // separated witnesses: also spanning (maximality)
    bool saturated = false;     // count equals the sample size
};

namespace detail {

inline ShadowGraph shadow_graph(const Semiflow& phi, std::span<const Point> sample, double T, double eps,
                                const DynMetricParams& params, double test_step) {
    if (sample.empty()) throw invalid_input("net count: empty sample");
    if (!(eps > 0.0)) throw invalid_input("net count: epsilon must be > 0");
    const TestGrid g = TestGrid::make(T, test_step, params);
    const auto segs = build_segments(phi, sample, g, 1);
    const std::size_t marks[1] = {g.time_points};
    return ShadowGraph::from_predicate(sample.size(), [&](std::size_t i, std::size_t j) {
        double sup[1];
        prefix_sups(phi.space(), segs[i].data(), segs[j].data(), g, params.variant, marks, eps, sup);
        return sup[0] < eps;
    });
}

inline double resolve_test_step(const DynMetricParams& p, double test_step) {
    if (test_step > 0.0) return test_step;
    return p.variant == Variant::raw ? 0.025 : p.default_test_step();
}

inline NetCount make_count(Variant v, Mode m, double T, double eps, double delta, std::vector<std::size_t> w,
                           std::size_t n) {
    NetCount c;
    c.variant = v;
    c.mode = m;
    c.T = T;
    c.epsilon = eps;
    c.delta = v == Variant::raw ? 0.0 : delta;
    c.count = w.size();
    c.witness = std::move(w);
    c.saturated = n > 1 && c.count == n;
    return c;
}

} // namespace detail

/*
 * Spanning count on a sample: the smaller of the greedy cover and the
 * greedy maximal separated set (which spans by maximality). An upper bound
 * on the minimum restricted to the sample. test_step ≤ 0 picks the default.
 */
inline NetCount spanning_count(std::span<const Point> sample, const Semiflow& phi, double T, double eps,
                               const DynMetricParams& params, double test_step = 0.0) {
    const double ts = detail::resolve_test_step(params, test_step);
    const ShadowGraph g = detail::shadow_graph(phi, sample, T, eps, params, ts);
    auto cover = greedy_cover(g);
    auto pack = greedy_packing(g);
    if (pack.size() < cover.size()) cover = std::move(pack);
    NetCount c = detail::make_count(params.variant, Mode::spanning, T, eps, params.delta, std::move(cover), sample.size());
    c.witness_verified = verify_spanning(g, c.witness);
    return c;
}

/// Greedy maximal separated set in index order; a lower bound on the
/// supremum over the whole space.
inline NetCount separated_count(std::span<const Point> sample, const Semiflow& phi, double T, double eps,
                                const DynMetricParams& params, double test_step = 0.0) {
    const double ts = detail::resolve_test_step(params, test_step);
    const ShadowGraph g = detail::shadow_graph(phi, sample, T, eps, params, ts);
    NetCount c = detail::make_count(params.variant, Mode::separated, T, eps, params.delta, greedy_packing(g), sample.size());
    c.witness_verified = verify_separated(g, c.witness);
    c.witness_spans = verify_spanning(g, c.witness);
    return c;
}

/// Bowen's classical counts (raw metric, no window).
inline std::pair<NetCount, NetCount> bowen_counts(std::span<const Point> sample, const Semiflow& phi, double T, double eps,
                                                  double test_step) {
    DynMetricParams p;
    p.variant = Variant::raw;
    return {spanning_count(sample, phi, T, eps, p, test_step), separated_count(sample, phi, T, eps, p, test_step)};
}

} // namespace impent
