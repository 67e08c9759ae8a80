#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "report.hpp"

namespace impent {

struct SuiteCheck {
    std::string name;
    bool pass = false;
    std::string detail;
    double value = 0.0;
};

struct RunResult {
    Suite suite = Suite::estimate;
    std::vector<SuiteCheck> checks;
    std::vector<std::string> flags; // raised flags that decide the exit code
    std::vector<std::string> info;  // recorded, not deciding
    bool skipped = false;
    std::string skip_reason;
    std::optional<EntropyTable> table;
    std::optional<RegularityReport> regularity;
    json extra = json::object(); // suite-specific payload
    std::vector<std::pair<std::string, double>> timings;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    /// 0: every check passes and no flag was raised; 1 otherwise.
    int exit_code() const { return (!skipped && all_pass() && flags.empty()) ? 0 : 1; }
};

inline std::unique_ptr<Semiflow> make_semiflow(const SystemDesc& d) {
    if (d.impulsive) return std::make_unique<ImpulsiveSemiflow>(*d.impulsive);
    return std::make_unique<ContinuousFlow>(d.flow);
}

inline SampleSet config_sample(const ExperimentConfig& c) {
    return sample_space(c.system.space(), c.resolution, c.seed, c.sample_options);
}

namespace detail {

class Stopwatch {
public:
    explicit Stopwatch(RunResult& r, std::string what) : r_(r), what_(std::move(what)), t0_(std::chrono::steady_clock::now()) {}
    ~Stopwatch() {
        r_.timings.emplace_back(what_, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count());
    }

private:
    RunResult& r_;
    std::string what_;
    std::chrono::steady_clock::time_point t0_;
};

inline void check(RunResult& r, std::string name, bool pass, std::string detail, double value = 0.0) {
    r.checks.push_back({std::move(name), pass, std::move(detail), value});
}

inline void run_table(RunResult& r, const ExperimentConfig& c, const Semiflow& phi, std::size_t threads) {
    Stopwatch sw(r, "entropy_estimate");
    const SampleSet s = config_sample(c);
    if (s.single_point_warning) r.flags.push_back("sample collapsed to a single point (resolution > diameter)");
    EstimateConfig e = c.estimate;
    e.threads = threads;
    r.table = entropy_estimate(phi, s, e);
}

// Flags of the table that concern the given variants.
inline void gate_flags(RunResult& r, std::initializer_list<Variant> vs) {
    for (const auto& f : r.table->flags) {
        bool relevant = !f.variant;
        for (Variant v : vs) relevant = relevant || f.variant == v;
        (relevant ? r.flags : r.info).push_back(f.message);
    }
}

inline double reference_tol(double abs_tol, double rel, double h_top) { return std::max(abs_tol, rel * h_top); }

// Shared-grid count invariants over every cell of the table.
inline void table_invariants(RunResult& r) {
    const EntropyTable& t = *r.table;
    const auto& cfg = t.config;
    std::size_t sp_le_sep = 0, sep_spans = 0, verified = 0, order = 0, mono_e = 0, mono_T = 0, cells = 0;
    for (std::size_t d = 0; d < cfg.delta.size(); ++d)
        for (std::size_t ti = 0; ti < cfg.T.size(); ++ti)
            for (std::size_t e = 0; e < cfg.epsilon.size(); ++e)
                for (Variant v : kVariants) {
                    const NetCount& sc = t.cell(d, v, Mode::spanning, ti, e);
                    const NetCount& pc = t.cell(d, v, Mode::separated, ti, e);
                    ++cells;
                    if (sc.count > pc.count) ++sp_le_sep;
                    if (!pc.witness_spans) ++sep_spans;
                    if (!sc.witness_verified || !pc.witness_verified) ++verified;
                    for (Mode m : kModes) {
                        const std::size_t here = t.cell(d, v, m, ti, e).count;
                        if (v != Variant::raw) {
                            const auto coarser = static_cast<Variant>(static_cast<int>(v) + 1);
                            if (here > t.cell(d, coarser, m, ti, e).count) ++order;
                        }
                        if (e > 0 && t.cell(d, v, m, ti, e - 1).count > here) ++mono_e;
                        if (ti > 0 && t.cell(d, v, m, ti - 1, e).count > here) ++mono_T;
                    }
                }
    const std::string of = " of " + std::to_string(cells) + " cells";
    check(r, "spanning_le_separated", sp_le_sep == 0, std::to_string(sp_le_sep) + " violations" + of, static_cast<double>(sp_le_sep));
    check(r, "separated_witness_spans", sep_spans == 0, std::to_string(sep_spans) + " violations" + of, static_cast<double>(sep_spans));
    check(r, "witnesses_reverified", verified == 0, std::to_string(verified) + " failures" + of, static_cast<double>(verified));
    check(r, "count_order_fine_coarse_raw", order == 0, std::to_string(order) + " violations (both modes)", static_cast<double>(order));
    check(r, "counts_nonincreasing_in_epsilon", mono_e == 0, std::to_string(mono_e) + " violations", static_cast<double>(mono_e));
    check(r, "counts_nondecreasing_in_T", mono_T == 0, std::to_string(mono_T) + " violations", static_cast<double>(mono_T));
}

// d1 <= d <= raw on random pairs, at every delta of the ladder.
inline void pointwise_order(RunResult& r, const ExperimentConfig& c, const Semiflow& phi) {
    Stopwatch sw(r, "pointwise_order");
    std::mt19937_64 rng(c.seed ^ 0x9e3779b97f4a7c15ULL);
    const MetricSpace& sp = phi.space();
    const std::size_t L = c.sample_options.word_length ? c.sample_options.word_length + 8 : 32;
    std::size_t bad = 0, asym = 0;
    for (std::size_t k = 0; k < c.metric_pairs; ++k) {
        const Point x = sp.random_point(rng, L), y = sp.random_point(rng, L);
        const double delta = c.estimate.delta[k % c.estimate.delta.size()];
        DynMetricParams fine{delta, c.estimate.m, Variant::fine_d1}, coarse{delta, c.estimate.m, Variant::coarse_d};
        const OrbitSegment sx(phi, x, fine.window_step(), fine.m), sy(phi, y, fine.window_step(), fine.m);
        WindowHint h1, h2, h3;
        const double lo = -std::numeric_limits<double>::infinity();
        const double d1 = window_value(sp, sx.data(), sy.data(), fine.m, Variant::fine_d1, lo, h1);
        const double d1r = window_value(sp, sy.data(), sx.data(), fine.m, Variant::fine_d1, lo, h3);
        const double dd = window_value(sp, sx.data(), sy.data(), coarse.m, Variant::coarse_d, lo, h2);
        const double d0 = sp.distance(x, y);
        if (!(d1 <= dd && dd <= d0)) ++bad;
        if (d1 != d1r) ++asym;
    }
    check(r, "pointwise_d1_le_d_le_metric", bad == 0,
          std::to_string(bad) + " violations on " + std::to_string(c.metric_pairs) + " random pairs", static_cast<double>(bad));
    check(r, "pseudometric_symmetry", asym == 0, std::to_string(asym) + " asymmetric pairs", static_cast<double>(asym));
}

inline Point generic_point(const ExperimentConfig& c, std::mt19937_64& rng, std::size_t horizon) {
    const MetricSpace& sp = c.system.space();
    // Each unit of time consumes at most 1/min_roof symbols; impulsive
    // suspensions have roof 1/2 on symbol 0.
    const std::size_t symbols = sp.symbolic() ? (c.system.is_impulsive() ? 2 : 1) * horizon + 64 : 0;
    return sp.random_point(rng, symbols);
}

inline void suite_estimate(RunResult& r, const ExperimentConfig& c, const Semiflow& phi, std::size_t threads) {
    run_table(r, c, phi, threads);
    gate_flags(r, {Variant::fine_d1, Variant::coarse_d, Variant::raw});
    std::size_t bad = 0;
    for (const auto& cell : r.table->cells)
        bad += !cell.witness_verified || (cell.mode == Mode::separated && !cell.witness_spans);
    check(r, "witnesses_reverified", bad == 0, std::to_string(bad) + " failures", static_cast<double>(bad));
}

inline void suite_A(RunResult& r, const ExperimentConfig& c, const Semiflow& phi, std::size_t threads) {
    if (c.system.is_impulsive()) {
        r.skipped = true;
        r.skip_reason = "verify-A compares against the classical entropy of a continuous semiflow; the system is impulsive";
        return;
    }
    run_table(r, c, phi, threads);
    gate_flags(r, {Variant::fine_d1, Variant::coarse_d, Variant::raw});
    const auto& e = r.table->estimates;
    const double tol = c.tolerances.tol_A;
    check(r, "h_bar_r_matches_h_r", std::fabs(e.h_bar_r - e.h_r) <= tol,
          "|h_bar_r - h_r| = " + fmt9(std::fabs(e.h_bar_r - e.h_r)) + " <= " + fmt9(tol), std::fabs(e.h_bar_r - e.h_r));
    check(r, "h_bar_s_matches_h_s", std::fabs(e.h_bar_s - e.h_s) <= tol,
          "|h_bar_s - h_s| = " + fmt9(std::fabs(e.h_bar_s - e.h_s)) + " <= " + fmt9(tol), std::fabs(e.h_bar_s - e.h_s));
    if (c.system.has_reference()) {
        const double rt = reference_tol(tol, c.tolerances.rel_reference, c.system.h_top);
        for (Variant v : kVariants)
            for (Mode m : kModes) {
                const double h = e.get(v, m);
                check(r, std::string(estimate_name(v, m)) + "_near_reference", std::fabs(h - c.system.h_top) <= rt,
                      fmt9(h) + " vs reference " + fmt9(c.system.h_top) + " (tolerance " + fmt9(rt) + ")", h);
            }
    }
}

inline void suite_B(RunResult& r, const ExperimentConfig& c, const Semiflow& phi, std::size_t threads) {
    run_table(r, c, phi, threads);
    for (const auto& f : r.table->flags) r.info.push_back(f.message);
    table_invariants(r);
    pointwise_order(r, c, phi);
}

inline void suite_C(RunResult& r, const ExperimentConfig& c, const Semiflow& phi, std::size_t threads) {
    if (c.system.is_impulsive()) {
        Stopwatch sw(r, "regularity_report");
        r.regularity = regularity_report(*c.system.impulsive, c.regularity.samples, c.regularity.xi, c.seed);
        if (!r.regularity->regular()) {
            std::string failed;
            for (const auto& ch : r.regularity->checks)
                if (ch.status == CheckStatus::fail) failed += (failed.empty() ? "" : ", ") + ch.name;
            r.skipped = true;
            r.skip_reason = "regularity hypothesis unmet (failed: " + failed + ")";
            return;
        }
    }
    run_table(r, c, phi, threads);
    gate_flags(r, {Variant::fine_d1, Variant::coarse_d});
    const auto& e = r.table->estimates;
    const std::pair<const char*, double> four[4] = {
        {"h_bar_r", e.h_bar_r}, {"h_bar_s", e.h_bar_s}, {"h_hat_r", e.h_hat_r}, {"h_hat_s", e.h_hat_s}};
    double gap = 0.0;
    for (const auto& a : four)
        for (const auto& b : four) gap = std::max(gap, std::fabs(a.second - b.second));
    check(r, "four_estimates_agree", gap <= c.tolerances.tol_C,
          "max pairwise gap " + fmt9(gap) + " <= " + fmt9(c.tolerances.tol_C), gap);
    if (c.system.has_reference()) {
        const double rt = reference_tol(c.tolerances.tol_C, c.tolerances.rel_reference, c.system.h_top);
        for (const auto& [n, h] : four)
            check(r, std::string(n) + "_near_reference", std::fabs(h - c.system.h_top) <= rt,
                  fmt9(h) + " vs reference " + fmt9(c.system.h_top) + " (tolerance " + fmt9(rt) + ")", h);
    }
    if (!c.system.is_impulsive()) {
        double off = 0.0;
        for (const auto& a : four) off = std::max({off, std::fabs(a.second - e.h_r), std::fabs(a.second - e.h_s)});
        check(r, "agree_with_bowen", off <= c.tolerances.tol_C, "max gap to h_r, h_s " + fmt9(off), off);
    }
}

inline void suite_D(RunResult& r, const ExperimentConfig& c, const Semiflow& phi, std::size_t threads) {
    double h_top = c.system.h_top;
    std::string source = "reference";
    if (!c.system.has_reference()) {
        run_table(r, c, phi, threads);
        for (const auto& f : r.table->flags) r.info.push_back(f.message);
        h_top = std::max(r.table->estimates.h_bar_r, r.table->estimates.h_bar_s);
        source = "estimated h_bar";
    }
    Stopwatch sw(r, "empirical_metric_entropy");
    const auto& m = c.measure;
    std::mt19937_64 rng(c.seed);
    std::vector<Point> x0;
    for (std::size_t k = 0; k < m.initial_conditions; ++k) x0.push_back(generic_point(c, rng, m.orbit_length + m.burn_in));
    std::vector<MetricEntropyEstimate> est(x0.size());
    parallel_for(x0.size(), threads, [&](std::size_t k) {
        est[k] = empirical_metric_entropy(phi, x0[k], m.orbit_length, c.system.partition, m.block_length, m.burn_in);
    });
    json rows = json::array();
    for (std::size_t k = 0; k < est.size(); ++k) {
        const auto& e = est[k];
        const std::string tag = "orbit " + std::to_string(k);
        check(r, "h_mu_le_h_top[" + std::to_string(k) + "]", e.conditional <= h_top + c.tolerances.tol_D,
              tag + ": " + fmt9(e.conditional) + " <= " + fmt9(h_top) + " + " + fmt9(c.tolerances.tol_D), e.conditional);
        if (m.lower_bound_fraction > 0.0)
            check(r, "h_mu_near_sup[" + std::to_string(k) + "]", e.conditional >= m.lower_bound_fraction * h_top,
                  tag + ": " + fmt9(e.conditional) + " >= " + fmt9(m.lower_bound_fraction) + " * " + fmt9(h_top), e.conditional);
        if (e.undersampled) r.flags.push_back(tag + ": undersampled blocks (some block seen fewer than 5 times)");
        rows.push_back({{"conditional", e.conditional},
                        {"per_symbol", e.per_symbol},
                        {"distinct_blocks", e.distinct_blocks},
                        {"min_block_count", e.min_block_count},
                        {"undersampled", e.undersampled}});
    }
    r.info.push_back("one-sided check only: the supremum over invariant measures is not searched");
    r.extra["measure"] = {{"h_top", h_top},
                          {"h_top_source", source},
                          {"partition", c.system.partition.describe()},
                          {"orbit_length", m.orbit_length},
                          {"block_length", m.block_length},
                          {"burn_in", m.burn_in},
                          {"estimates", rows}};
}

inline void suite_regularity(RunResult& r, const ExperimentConfig& c) {
    Stopwatch sw(r, "regularity_report");
    r.regularity = regularity_report(*c.system.impulsive, c.regularity.samples, c.regularity.xi, c.seed);
    for (const auto& ch : r.regularity->checks)
        check(r, ch.name, ch.status != CheckStatus::fail, std::string(to_string(ch.status)) + ": " + ch.detail, ch.value);
    r.info.push_back("regularity checks are sampled evidence, not proof");
}

inline void suite_occupancy(RunResult& r, const ExperimentConfig& c, std::size_t threads) {
    Stopwatch sw(r, "occupancy");
    const auto& o = c.occupancy;
    const auto& sys = *c.system.impulsive;
    std::vector<Point> x0 = o.x0;
    if (x0.empty()) {
        std::mt19937_64 rng(c.seed);
        for (std::size_t k = 0; k < o.initial_conditions; ++k)
            x0.push_back(generic_point(c, rng, static_cast<std::size_t>(std::ceil(o.horizon)) + 1));
    }
    std::vector<std::vector<double>> occ(x0.size(), std::vector<double>(o.eta.size()));
    parallel_for(x0.size() * o.eta.size(), threads, [&](std::size_t k) {
        const std::size_t i = k / o.eta.size(), j = k % o.eta.size();
        occ[i][j] = region_neighborhood_occupancy(sys, x0[i], o.horizon, o.eta[j], o.step);
    });
    json rows = json::array();
    for (std::size_t i = 0; i < x0.size(); ++i) {
        bool mono = true;
        for (std::size_t j = 1; j < o.eta.size(); ++j) mono = mono && occ[i][j] <= occ[i][j - 1];
        const std::string tag = "[" + std::to_string(i) + "]";
        check(r, "occupancy_decreases_with_eta" + tag, mono, "occupancy along the eta ladder", occ[i].back());
        check(r, "occupancy_shrinks" + tag, occ[i].back() < occ[i].front() || occ[i].front() == 0.0,
              fmt9(occ[i].front()) + " at eta=" + fmt9(o.eta.front()) + " -> " + fmt9(occ[i].back()) + " at eta=" + fmt9(o.eta.back()),
              occ[i].back());
        if (o.period > 0.0)
            for (std::size_t j = 0; j < o.eta.size(); ++j) {
                const double bound = 4.0 * o.eta[j] / o.period;
                check(r, "occupancy_bound" + tag + "[eta=" + fmt9(o.eta[j]) + "]", occ[i][j] <= bound,
                      fmt9(occ[i][j]) + " <= 4 eta / period = " + fmt9(bound), occ[i][j]);
            }
        rows.push_back({{"x0", x0[i].values().size() ? std::vector<double>(x0[i].values().begin(), x0[i].values().end()) : std::vector<double>{}},
                        {"occupancy", occ[i]}});
    }
    r.extra["occupancy"] = {{"eta", o.eta}, {"horizon", o.horizon}, {"step", o.step}, {"orbits", rows}};
}

} // namespace detail

/// Runs the configured suite. threads only affects speed, never the output.
inline RunResult run_suite(const ExperimentConfig& c, std::size_t threads) {
    RunResult r;
    r.suite = c.suite;
    const auto phi = make_semiflow(c.system);
    switch (c.suite) {
    case Suite::estimate: detail::suite_estimate(r, c, *phi, threads); break;
    case Suite::verify_A: detail::suite_A(r, c, *phi, threads); break;
    case Suite::verify_B: detail::suite_B(r, c, *phi, threads); break;
    case Suite::verify_C: detail::suite_C(r, c, *phi, threads); break;
    case Suite::measure_D: detail::suite_D(r, c, *phi, threads); break;
    case Suite::regularity: detail::suite_regularity(r, c); break;
    case Suite::occupancy: detail::suite_occupancy(r, c, threads); break;
    }
    return r;
}

inline json summary_json(const ExperimentConfig& c, const RunResult& r) {
    json checks = json::array();
    for (const auto& ch : r.checks)
        checks.push_back({{"name", ch.name}, {"status", ch.pass ? "pass" : "fail"}, {"detail", ch.detail}, {"value", ch.value}});
    json j = {{"schema_version", 1},
              {"name", c.name},
              {"suite", to_string(c.suite)},
              {"status", r.skipped ? "skipped" : (r.exit_code() == 0 ? "pass" : "flagged")},
              {"exit_code", r.exit_code()},
              {"config_hash", git_blob_hash(c.text)},
              {"config", c.echo},
              {"effective", {{"seed", c.seed}, {"resolution", c.effective_resolution()}}},
              {"system",
               {{"catalog", c.system.catalog},
                {"space", c.system.space().name()},
                {"impulsive", c.system.is_impulsive()},
                {"h_top_reference", c.system.has_reference() ? json(c.system.h_top) : json(nullptr)},
                {"metric_note", "catalog metrics are stand-ins chosen for this tool (max-type product metrics)"}}},
              {"checks", checks},
              {"flags", r.flags},
              {"notes", r.info}};
    if (r.skipped) j["skip_reason"] = r.skip_reason;
    if (r.table) j["table"] = table_json(*r.table);
    if (r.regularity) j["regularity"] = regularity_json(*r.regularity);
    for (auto it = r.extra.begin(); it != r.extra.end(); ++it) j[it.key()] = it.value();
    return j;
}

struct WrittenReport {
    std::filesystem::path csv, summary, timings;
};

/// Writes <name>.counts.csv and <name>.summary.json atomically; timings go
/// to <name>.timings.json so the first two stay byte-reproducible.
inline WrittenReport write_report(const ExperimentConfig& c, const RunResult& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    WrittenReport w{dir / (c.name + ".counts.csv"), dir / (c.name + ".summary.json"), dir / (c.name + ".timings.json")};
    write_atomic(w.csv, counts_csv(r.table ? &*r.table : nullptr));
    write_atomic(w.summary, summary_json(c, r).dump(2) + "\n");
    json t = json::object();
    for (const auto& [k, v] : r.timings) t[k] = v;
    write_atomic(w.timings, t.dump(2) + "\n");
    return w;
}

} // namespace impent
