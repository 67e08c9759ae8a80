#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "growth.hpp"
#include "net_count.hpp"

namespace impent {

struct EstimateConfig {
    std::vector<double> T = {4, 8, 16, 32, 48};
    std::vector<double> epsilon = {0.4, 0.2, 0.1, 0.05};
    std::vector<double> delta = {0.4, 0.2, 0.1};
    std::size_t m = 64;
    double test_step = 0.0; // 0: default per δ level (largest multiple of δ/m not above δ/4)
    double plateau_tol = 0.02;
    double residual_tol = 0.1;
    std::size_t threads = 1;

    void validate() const {
        auto strictly = [](const std::vector<double>& v, bool increasing, const char* name) {
            if (v.empty()) throw invalid_input(std::string(name) + " ladder is empty");
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (!(v[i] > 0.0)) throw invalid_input(std::string(name) + " ladder values must be > 0");
                if (i > 0 && (increasing ? !(v[i] > v[i - 1]) : !(v[i] < v[i - 1])))
                    throw invalid_input(std::string(name) + " ladder must be strictly " + (increasing ? "increasing" : "decreasing"));
            }
        };
        strictly(T, true, "T");
        strictly(epsilon, false, "epsilon");
        strictly(delta, false, "delta");
        if (T.size() < 3) throw invalid_input("T ladder needs at least 3 values");
        if (m == 0) throw invalid_input("m must be >= 1");
        if (epsilon.size() > 250) throw invalid_input("epsilon ladder too long");
    }

    double test_step_for(double d) const {
        if (test_step > 0.0) return test_step;
        DynMetricParams p{d, m, Variant::fine_d1};
        return p.default_test_step();
    }
};

struct RateEntry {
    Variant variant = Variant::raw;
    Mode mode = Mode::spanning;
    double epsilon = 0.0;
    double delta = 0.0;
    GrowthFit fit;
    double h = 0.0; // max(0, slope)
};

/// The six limits: (fine, coarse, raw) × (spanning, separated).
struct EntropyEstimates {
    double h_bar_r = 0.0, h_bar_s = 0.0; // fine_d1
    double h_hat_r = 0.0, h_hat_s = 0.0; // coarse_d
    double h_r = 0.0, h_s = 0.0;         // raw (Bowen)

    double get(Variant v, Mode m) const {
        switch (v) {
        case Variant::fine_d1: return m == Mode::spanning ? h_bar_r : h_bar_s;
        case Variant::coarse_d: return m == Mode::spanning ? h_hat_r : h_hat_s;
        case Variant::raw: return m == Mode::spanning ? h_r : h_s;
        }
        return 0.0;
    }
    void set(Variant v, Mode m, double x) {
        double* slot = nullptr;
        switch (v) {
        case Variant::fine_d1: slot = m == Mode::spanning ? &h_bar_r : &h_bar_s; break;
        case Variant::coarse_d: slot = m == Mode::spanning ? &h_hat_r : &h_hat_s; break;
        case Variant::raw: slot = m == Mode::spanning ? &h_r : &h_s; break;
        }
        *slot = x;
    }
};

/// A diagnostic raised while filling the table; `variant` is set when it
/// concerns one estimator family only.
struct TableFlag {
    std::string message;
    std::optional<Variant> variant;
};

inline const char* estimate_name(Variant v, Mode m) {
    switch (v) {
    case Variant::fine_d1: return m == Mode::spanning ? "h_bar_r" : "h_bar_s";
    case Variant::coarse_d: return m == Mode::spanning ? "h_hat_r" : "h_hat_s";
    case Variant::raw: return m == Mode::spanning ? "h_r" : "h_s";
    }
    return "?";
}

inline constexpr std::array<Variant, 3> kVariants = {Variant::fine_d1, Variant::coarse_d, Variant::raw};
inline constexpr std::array<Mode, 2> kModes = {Mode::spanning, Mode::separated};

/*
 * Counts over T × ε × δ for all variants, their growth rates and the
 * plateau-extrapolated entropies.
 *
 * Raw rows are recomputed at every δ level so that every variant in a level
 * shares one test grid; their δ column names the level, not a window.
 */
struct EntropyTable {
    EstimateConfig config;
    std::string sample_descriptor;
    std::size_t sample_size = 0;
    std::vector<NetCount> cells;
    std::vector<RateEntry> rates;
    EntropyEstimates estimates;
    std::vector<TableFlag> flags;
    std::vector<std::string> notes;

    std::size_t cell_index(std::size_t d, Variant v, Mode m, std::size_t t, std::size_t e) const {
        const std::size_t nT = config.T.size(), nE = config.epsilon.size();
        return (((d * 3 + static_cast<std::size_t>(v)) * 2 + static_cast<std::size_t>(m)) * nT + t) * nE + e;
    }
    const NetCount& cell(std::size_t d, Variant v, Mode m, std::size_t t, std::size_t e) const {
        return cells[cell_index(d, v, m, t, e)];
    }
    std::size_t rate_index(std::size_t d, Variant v, Mode m, std::size_t e) const {
        return ((d * 3 + static_cast<std::size_t>(v)) * 2 + static_cast<std::size_t>(m)) * config.epsilon.size() + e;
    }
    const RateEntry& rate(std::size_t d, Variant v, Mode m, std::size_t e) const { return rates[rate_index(d, v, m, e)]; }
};

namespace detail {

inline std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

// Plateau rule along one ladder: the last value, flagged when the last two
// differ by more than tol or when values move the wrong way (they should be
// nondecreasing as the parameter shrinks).
inline double plateau(const std::vector<double>& h, double tol, const std::string& what, Variant v,
                      std::vector<TableFlag>& flags) {
    const double last = h.back();
    if (h.size() >= 2 && std::fabs(last - h[h.size() - 2]) > tol)
        flags.push_back({what + ": plateau not reached (" + fmt(h[h.size() - 2]) + " -> " + fmt(last) + ")", v});
    for (std::size_t i = 1; i < h.size(); ++i)
        if (h[i] < h[i - 1] - tol) {
            flags.push_back({what + ": non-monotone (" + fmt(h[i - 1]) + " -> " + fmt(h[i]) + "), discretization artifact", v});
            break;
        }
    return last;
}

} // namespace detail

/*
 * Fills the table for one sample.
 *
 * Per δ level: freeze orbit caches, compute threshold codes for every pair
 * and variant, then derive all (T, ε) cells. Greedy witnesses are chained
 * so that the finite-scale orderings hold exactly:
 *   separated cells (T ascending, ε descending, fine → coarse → raw) start
 *   from the largest witness among the neighbours that are already
 *   separated for the current cell, then extend in index order;
 *   spanning cells (T descending, ε ascending, raw → coarse → fine) take the
 *   smallest among the greedy cover, the same cell's separated witness and
 *   the neighbours' spanning witnesses, all of which span the current cell.
 */
inline EntropyTable entropy_estimate(const Semiflow& phi, const SampleSet& sample, const EstimateConfig& cfg) {
    cfg.validate();
    if (sample.points.empty()) throw invalid_input("entropy_estimate: empty sample");
    const std::size_t n = sample.points.size();
    const std::size_t nT = cfg.T.size(), nE = cfg.epsilon.size(), nD = cfg.delta.size();

    EntropyTable tab;
    tab.config = cfg;
    tab.sample_descriptor = sample.descriptor;
    tab.sample_size = n;
    tab.cells.resize(nD * 3 * 2 * nT * nE);
    tab.rates.resize(nD * 3 * 2 * nE);

    std::array<std::size_t, 3> saturated{}, rough{}, unverified{};
    std::size_t clamped = 0;

    for (std::size_t d = 0; d < nD; ++d) {
        const double delta = cfg.delta[d];
        const double ts = cfg.test_step_for(delta);
        DynMetricParams params{delta, cfg.m, Variant::fine_d1};
        const TestGrid grid = TestGrid::make(cfg.T.back(), ts, params);
        std::vector<std::size_t> marks(nT);
        for (std::size_t t = 0; t < nT; ++t) marks[t] = TestGrid::points_for(cfg.T[t], ts);

        std::array<LevelMatrix, 3> levels;
        {
            const auto segs = build_segments(phi, sample.points, grid, cfg.threads);
            for (Variant v : kVariants)
                levels[static_cast<std::size_t>(v)] = build_levels(phi.space(), segs, grid, v, marks, cfg.epsilon, cfg.threads);
        }

        // graphs[v][t][e]
        auto gidx = [&](std::size_t v, std::size_t t, std::size_t e) { return (v * nT + t) * nE + e; };
        std::vector<ShadowGraph> graphs(3 * nT * nE);
        parallel_for(graphs.size(), cfg.threads, [&](std::size_t k) {
            const std::size_t e = k % nE, t = (k / nE) % nT, v = k / (nE * nT);
            const LevelMatrix& lm = levels[v];
            graphs[k] = ShadowGraph::from_predicate(n, [&](std::size_t i, std::size_t j) { return lm.code(i, j, t) > e; });
        });
        for (auto& lm : levels) lm = LevelMatrix();

        std::vector<std::vector<std::size_t>> sep(3 * nT * nE), span(3 * nT * nE);

        for (std::size_t t = 0; t < nT; ++t)
            for (std::size_t e = 0; e < nE; ++e)
                for (std::size_t v = 0; v < 3; ++v) {
                    const std::vector<std::size_t>* seed = nullptr;
                    auto consider = [&](const std::vector<std::size_t>& w) {
                        if (!seed || w.size() > seed->size()) seed = &w;
                    };
                    if (t > 0) consider(sep[gidx(v, t - 1, e)]);
                    if (e > 0) consider(sep[gidx(v, t, e - 1)]);
                    if (v > 0) consider(sep[gidx(v - 1, t, e)]);
                    const auto& g = graphs[gidx(v, t, e)];
                    sep[gidx(v, t, e)] = seed ? greedy_packing(g, *seed) : greedy_packing(g);
                }

        for (std::size_t tt = nT; tt-- > 0;)
            for (std::size_t ee = nE; ee-- > 0;)
                for (std::size_t vv = 3; vv-- > 0;) {
                    const auto& g = graphs[gidx(vv, tt, ee)];
                    std::vector<std::size_t> best = greedy_cover(g);
                    auto consider = [&](const std::vector<std::size_t>& w) {
                        if (w.size() < best.size()) best = w;
                    };
                    consider(sep[gidx(vv, tt, ee)]);
                    if (tt + 1 < nT) consider(span[gidx(vv, tt + 1, ee)]);
                    if (ee + 1 < nE) consider(span[gidx(vv, tt, ee + 1)]);
                    if (vv + 1 < 3) consider(span[gidx(vv + 1, tt, ee)]);
                    span[gidx(vv, tt, ee)] = std::move(best);
                }

        for (std::size_t v = 0; v < 3; ++v)
            for (std::size_t t = 0; t < nT; ++t)
                for (std::size_t e = 0; e < nE; ++e) {
                    const auto& g = graphs[gidx(v, t, e)];
                    const auto var = kVariants[v];
                    NetCount sc = detail::make_count(var, Mode::spanning, cfg.T[t], cfg.epsilon[e], delta, span[gidx(v, t, e)], n);
                    sc.delta = delta;
                    sc.sample = sample.descriptor;
                    sc.witness_verified = verify_spanning(g, sc.witness);
                    NetCount pc = detail::make_count(var, Mode::separated, cfg.T[t], cfg.epsilon[e], delta, sep[gidx(v, t, e)], n);
                    pc.delta = delta;
                    pc.sample = sample.descriptor;
                    pc.witness_verified = verify_separated(g, pc.witness);
                    pc.witness_spans = verify_spanning(g, pc.witness);
                    if (!sc.witness_verified) ++unverified[v];
                    if (!pc.witness_verified || !pc.witness_spans) ++unverified[v];
                    saturated[v] += sc.saturated + pc.saturated;
                    tab.cells[tab.cell_index(d, var, Mode::spanning, t, e)] = std::move(sc);
                    tab.cells[tab.cell_index(d, var, Mode::separated, t, e)] = std::move(pc);
                }

        for (Variant v : kVariants)
            for (Mode mo : kModes)
                for (std::size_t e = 0; e < nE; ++e) {
                    std::vector<std::pair<double, std::size_t>> pts;
                    for (std::size_t t = 0; t < nT; ++t) pts.emplace_back(cfg.T[t], tab.cell(d, v, mo, t, e).count);
                    RateEntry r;
                    r.variant = v;
                    r.mode = mo;
                    r.epsilon = cfg.epsilon[e];
                    r.delta = delta;
                    r.fit = growth_rate(pts);
                    r.h = std::max(0.0, r.fit.slope);
                    if (r.fit.slope < -1e-12) ++clamped;
                    if (r.fit.residual > cfg.residual_tol) ++rough[static_cast<std::size_t>(v)];
                    tab.rates[tab.rate_index(d, v, mo, e)] = r;
                }
    }

    for (Variant v : kVariants)
        for (Mode mo : kModes) {
            std::vector<double> per_delta;
            for (std::size_t d = 0; d < nD; ++d) {
                std::vector<double> h;
                for (std::size_t e = 0; e < nE; ++e) h.push_back(tab.rate(d, v, mo, e).h);
                per_delta.push_back(detail::plateau(h, cfg.plateau_tol,
                                                    std::string(estimate_name(v, mo)) + " over epsilon at delta=" + detail::fmt(cfg.delta[d]),
                                                    v, tab.flags));
            }
            double val = per_delta.back();
            if (v != Variant::raw) val = detail::plateau(per_delta, cfg.plateau_tol, std::string(estimate_name(v, mo)) + " over delta", v, tab.flags);
            tab.estimates.set(v, mo, val);
        }

    for (Variant v : kVariants) {
        const auto k = static_cast<std::size_t>(v);
        const std::string tag = std::string(" (") + to_string(v) + ")";
        if (saturated[k])
            tab.flags.push_back({"saturation" + tag + ": " + std::to_string(saturated[k]) + " cells have count equal to the sample size", v});
        if (unverified[k])
            tab.flags.push_back({"witness re-verification failed" + tag + " for " + std::to_string(unverified[k]) + " cells", v});
        if (rough[k])
            tab.flags.push_back({"non-linearity" + tag + ": " + std::to_string(rough[k]) + " growth fits with residual > " + detail::fmt(cfg.residual_tol), v});
    }
    if (clamped) tab.notes.push_back(std::to_string(clamped) + " negative growth slopes clamped to 0");
    tab.notes.push_back("spanning counts are greedy covers of the sample (upper bounds on the sample-restricted minimum)");
    tab.notes.push_back("separated counts are maximal separated subsets of the sample (lower bounds on the supremum over the space)");
    tab.notes.push_back("sup over t is sampled on the test grid (estimate <= true sup): separated counts biased down, spanning counts biased up");
    tab.notes.push_back("window infima are minima over finite grids (estimate >= true infimum)");
    if (!sample.grid) tab.notes.push_back("sample density is not certified (quasi-random sample)");
    return tab;
}

} // namespace impent
