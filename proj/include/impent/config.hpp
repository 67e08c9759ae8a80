#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "entropy_table.hpp"
#include "impulsive.hpp"
#include "metric_entropy.hpp"

namespace impent {

using json = nlohmann::json;

/// Config rejected at parse time. `field` is a dotted path, `line` is 1-based
/// (0 when unknown).
class config_error : public invalid_input {
public:
    config_error(std::string field, std::size_t line, const std::string& msg)
        : invalid_input(format(field, line, msg)), field_(std::move(field)), line_(line) {}

    const std::string& field() const { return field_; }
    std::size_t line() const { return line_; }

private:
    static std::string format(const std::string& field, std::size_t line, const std::string& msg) {
        std::string s = "config error";
        if (line) s += " at line " + std::to_string(line);
        if (!field.empty()) s += ", field '" + field + "'";
        return s + ": " + msg;
    }

    std::string field_;
    std::size_t line_;
};

enum class Suite { estimate, verify_A, verify_B, verify_C, measure_D, regularity, occupancy };

inline const char* to_string(Suite s) {
    switch (s) {
    case Suite::estimate: return "estimate";
    case Suite::verify_A: return "verify-A";
    case Suite::verify_B: return "verify-B";
    case Suite::verify_C: return "verify-C";
    case Suite::measure_D: return "measure-D";
    case Suite::regularity: return "regularity";
    case Suite::occupancy: return "occupancy";
    }
    return "?";
}

/// A built system: a continuous flow, or an impulsive triple over one.
struct SystemDesc {
    std::string catalog; // catalog name, "ode" or "impulsive"
    SemiflowSpec flow;
    std::optional<ImpulsiveSystem> impulsive;
    double h_top = std::numeric_limits<double>::quiet_NaN(); // reference value when known
    Partition partition = Partition::uniform_arcs(0, 4);

    bool is_impulsive() const { return impulsive.has_value(); }
    const MetricSpace& space() const { return flow.space; }
    bool has_reference() const { return !std::isnan(h_top); }
};

struct CatalogEntry {
    const char* name;
    const char* summary;
};

inline const std::vector<CatalogEntry>& catalog_entries() {
    static const std::vector<CatalogEntry> list = {
        {"rotation", "linear flow x + v t on the circle or torus (params: speed); zero entropy"},
        {"identity", "constant flow (params: space = circle | interval | torus, dim); zero entropy"},
        {"suspension_shift2", "roof-1 suspension of the full 2-shift; entropy log 2"},
        {"impulsive_rotation", "unit rotation with D = {0.5}, I = 0 (params: speed, impulse_point, reset); zero entropy"},
        {"impulsive_suspension", "suspension with D = {height 0.5, leading symbol 0}, I(w, h) = (shift w, 0); entropy 2 log golden ratio"},
    };
    return list;
}

struct MeasureParams {
    std::size_t orbit_length = 100000;
    std::size_t block_length = 8;
    std::size_t initial_conditions = 5;
    std::size_t burn_in = 0;
    double lower_bound_fraction = 0.0; // 0: no lower-bound check
};

struct RegularityParams {
    std::size_t samples = 64;
    double xi = 0.1;
};

struct OccupancyParams {
    std::vector<double> eta = {0.2, 0.1, 0.05, 0.025};
    double horizon = 100.0;
    double step = 1e-3;
    std::vector<Point> x0; // empty: random initial conditions
    std::size_t initial_conditions = 5;
    double period = 0.0;   // > 0 enables the 4η/period bound
};

struct Tolerances {
    double tol_A = 0.05;
    double rel_reference = 0.15;
    double tol_C = 0.05;
    double tol_D = 0.1;
};

struct ExperimentConfig {
    int schema_version = 1;
    std::string name;
    Suite suite = Suite::estimate;
    SystemDesc system;
    EstimateConfig estimate;
    double resolution = 0.0;
    std::uint64_t seed = 1;
    SampleOptions sample_options;
    Tolerances tolerances;
    MeasureParams measure;
    RegularityParams regularity;
    OccupancyParams occupancy;
    std::size_t metric_pairs = 10000;
    std::string output_dir = "out";
    json echo;        // the parsed document
    std::string text; // raw bytes, hashed into the report

    /// Resolution used for the density requirement: the cylinder radius 2^-L
    /// for suspension samples, the grid resolution otherwise.
    double effective_resolution() const {
        if (system.space().symbolic() && sample_options.word_length) return std::ldexp(1.0, -static_cast<int>(sample_options.word_length));
        return resolution;
    }
};

namespace detail {

// 1-based line of the first occurrence of a path's keys in order.
inline std::size_t locate(const std::string& text, const std::string& path) {
    std::size_t pos = 0;
    std::size_t found = std::string::npos;
    std::stringstream ss(path);
    std::string key;
    while (std::getline(ss, key, '.')) {
        const auto br = key.find('[');
        if (br != std::string::npos) key = key.substr(0, br);
        if (key.empty()) continue;
        const auto p = text.find("\"" + key + "\"", pos);
        if (p == std::string::npos) break;
        found = pos = p;
    }
    if (found == std::string::npos) return 0;
    return static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(found), '\n')) + 1;
}

class Reader {
public:
    Reader(const json& j, std::string path, const std::string& text) : j_(j), path_(std::move(path)), text_(text) {
        if (!j_.is_object()) fail("expected an object");
    }

    [[noreturn]] void fail(const std::string& msg, const std::string& key = "") const {
        const std::string p = key.empty() ? path_ : sub(key);
        throw config_error(p, locate(text_, p), msg);
    }

    std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key); }
    const json& raw(const std::string& key) const { return j_.at(key); }

    void allow(std::initializer_list<const char*> keys) const {
        std::set<std::string> ok(keys.begin(), keys.end());
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!ok.count(it.key())) fail("unknown field", it.key());
    }

    Reader object(const std::string& key) const { return Reader(j_.at(key), sub(key), text_); }

    double number(const std::string& key, double def) const {
        if (!has(key)) return def;
        const json& v = j_.at(key);
        if (!v.is_number()) fail("expected a number", key);
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail("must be finite", key);
        return x;
    }
    double positive(const std::string& key, double def) const {
        const double x = number(key, def);
        if (!(x > 0.0)) fail("must be > 0", key);
        return x;
    }
    std::size_t count(const std::string& key, std::size_t def, std::size_t lo = 1) const {
        if (!has(key)) return def;
        const json& v = j_.at(key);
        if (!v.is_number_integer() || v.get<std::int64_t>() < static_cast<std::int64_t>(lo))
            fail("expected an integer >= " + std::to_string(lo), key);
        return v.get<std::size_t>();
    }
    std::string string(const std::string& key, const std::string& def) const {
        if (!has(key)) return def;
        const json& v = j_.at(key);
        if (!v.is_string()) fail("expected a string", key);
        return v.get<std::string>();
    }
    std::vector<double> numbers(const std::string& key, std::vector<double> def) const {
        if (!has(key)) return def;
        const json& v = j_.at(key);
        if (v.is_number()) return {v.get<double>()};
        if (!v.is_array() || v.empty()) fail("expected a non-empty array of numbers", key);
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) fail("expected a non-empty array of numbers", key);
            out.push_back(e.get<double>());
        }
        return out;
    }
    std::vector<double> ladder(const std::string& key, std::vector<double> def, bool increasing) const {
        auto v = numbers(key, std::move(def));
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!(v[i] > 0.0) || !std::isfinite(v[i])) fail("ladder values must be finite and > 0", key);
            if (i > 0 && (increasing ? !(v[i] > v[i - 1]) : !(v[i] < v[i - 1])))
                fail(std::string("ladder must be strictly ") + (increasing ? "increasing" : "decreasing"), key);
        }
        return v;
    }

private:
    const json& j_;
    std::string path_;
    const std::string& text_;
};

inline MetricSpace parse_space(const Reader& r, const std::string& def) {
    const std::string s = r.string("space", def);
    if (s == "circle") return MetricSpace::circle();
    if (s == "interval") return MetricSpace::interval();
    if (s == "torus") {
        const std::size_t d = r.count("dim", 2);
        if (d > kMaxDim) r.fail("dimension above " + std::to_string(kMaxDim), "dim");
        return MetricSpace::torus(d);
    }
    r.fail("unknown space '" + s + "' (circle, interval, torus)", "space");
}

inline Point parse_point(const Reader& r, const json& v, const std::string& key, const MetricSpace& space) {
    if (!v.is_array() || v.size() != space.dim()) r.fail("expected a point with " + std::to_string(space.dim()) + " coordinates", key);
    std::vector<double> c;
    for (const auto& e : v) {
        if (!e.is_number()) r.fail("point coordinates must be numbers", key);
        c.push_back(e.get<double>());
    }
    Point p = Point::from_coords(c);
    if (!space.contains(p)) r.fail("point outside the space", key);
    return p;
}

inline SystemDesc continuous_system(const Reader& r) {
    SystemDesc d;
    if (r.has("ode")) {
        r.allow({"ode", "h_top", "partition"});
        const Reader o = r.object("ode");
        o.allow({"field", "params", "step", "tol_flow"});
        const std::string f = o.string("field", "");
        VectorField vf;
        if (f == "circle_nonuniform") vf = VectorField::circle_nonuniform;
        else if (f == "torus_linear") vf = VectorField::torus_linear;
        else if (f == "interval_logistic") vf = VectorField::interval_logistic;
        else o.fail("unknown vector field '" + f + "' (circle_nonuniform, torus_linear, interval_logistic)", "field");
        const auto params = o.numbers("params", {});
        try {
            d.flow = SemiflowSpec::ode(vf, params, o.positive("step", 1e-3));
        } catch (const config_error&) {
            throw;
        } catch (const invalid_input& e) {
            o.fail(e.what(), "params");
        }
        d.flow.tol_flow = o.positive("tol_flow", 1e-6);
        d.catalog = "ode";
        d.h_top = r.number("h_top", std::numeric_limits<double>::quiet_NaN());
        return d;
    }
    const std::string name = r.string("catalog", "");
    d.catalog = name;
    if (name == "rotation") {
        r.allow({"catalog", "speed"});
        const auto v = r.numbers("speed", {1.0});
        if (v.size() > kMaxDim) r.fail("at most " + std::to_string(kMaxDim) + " speeds", "speed");
        d.flow = SemiflowSpec::rotation(v);
        d.h_top = 0.0;
    } else if (name == "identity") {
        r.allow({"catalog", "space", "dim"});
        d.flow = SemiflowSpec::identity(parse_space(r, "circle"));
        d.h_top = 0.0;
    } else if (name == "suspension_shift2") {
        r.allow({"catalog"});
        d.flow = SemiflowSpec::suspension_shift2();
        d.h_top = std::log(2.0);
        d.partition = Partition::leading_symbol();
    } else {
        r.fail(name.empty() ? "missing catalog name" : "unknown catalog system '" + name + "'", "catalog");
    }
    return d;
}

inline SystemDesc parse_system(const Reader& r) {
    SystemDesc d;
    if (r.has("impulsive")) {
        r.allow({"impulsive", "h_top"});
        const Reader im = r.object("impulsive");
        im.allow({"flow", "region", "map"});
        if (!im.has("flow") || !im.has("region") || !im.has("map")) im.fail("needs flow, region and map");
        d = continuous_system(im.object("flow"));
        const MetricSpace& sp = d.flow.space;
        ImpulsiveSystem sys;
        sys.flow = d.flow;
        const Reader reg = im.object("region");
        reg.allow({"points", "box", "symbol", "eps_D"});
        const double eps = reg.positive("eps_D", 1e-9);
        if (reg.has("points")) {
            const json& pts = reg.raw("points");
            if (!pts.is_array() || pts.empty()) reg.fail("expected a non-empty array of points", "points");
            std::vector<Point> v;
            for (const auto& p : pts) v.push_back(parse_point(reg, p, "points", sp));
            sys.region = ImpulseRegion::point_set(std::move(v), eps);
        } else if (reg.has("box")) {
            const json& b = reg.raw("box");
            if (!b.is_array() || b.size() != sp.dim()) reg.fail("expected one [lo, hi] pair per coordinate", "box");
            std::vector<std::pair<double, double>> box;
            for (const auto& e : b) {
                if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
                    reg.fail("expected one [lo, hi] pair per coordinate", "box");
                box.emplace_back(e[0].get<double>(), e[1].get<double>());
            }
            sys.region = ImpulseRegion::make_box(std::move(box), static_cast<int>(reg.number("symbol", -1)), eps);
        } else {
            reg.fail("needs points or box");
        }
        const Reader mp = im.object("map");
        mp.allow({"constant", "translate", "shift_reset"});
        if (mp.has("constant")) sys.jump = ImpulseMap::constant(parse_point(mp, mp.raw("constant"), "constant", sp));
        else if (mp.has("translate")) sys.jump = ImpulseMap::translate(mp.numbers("translate", {}));
        else if (mp.has("shift_reset")) sys.jump = ImpulseMap::shift_reset(mp.number("shift_reset", 0.0));
        else mp.fail("needs constant, translate or shift_reset");
        sys.label = "impulsive";
        d.impulsive = sys;
        d.catalog = "impulsive";
        d.h_top = r.number("h_top", std::numeric_limits<double>::quiet_NaN());
        return d;
    }
    if (r.has("ode")) return continuous_system(r);
    const std::string name = r.string("catalog", "");
    if (name == "impulsive_rotation") {
        r.allow({"catalog", "speed", "impulse_point", "reset"});
        const double speed = r.positive("speed", 1.0);
        const double p = r.number("impulse_point", 0.5);
        const double q = r.number("reset", 0.0);
        if (!(p >= 0.0 && p < 1.0)) r.fail("must be in [0,1)", "impulse_point");
        if (!(q >= 0.0 && q < 1.0)) r.fail("must be in [0,1)", "reset");
        d.catalog = name;
        d.flow = SemiflowSpec::rotation({speed});
        d.impulsive = ImpulsiveSystem{d.flow, ImpulseRegion::point_set({Point{p}}), ImpulseMap::constant(Point{q}), {}, name};
        // Orbits settle on the cycle from the reset point to D.
        d.h_top = 0.0;
        return d;
    }
    if (name == "impulsive_suspension") {
        r.allow({"catalog"});
        d.catalog = name;
        d.flow = SemiflowSpec::suspension_shift2();
        d.impulsive = ImpulsiveSystem{d.flow, ImpulseRegion::make_box({{0.5, 0.5}}, 0), ImpulseMap::shift_reset(0.0), {}, name};
        // Roofs 1/2 (symbol 0) and 1 (symbol 1): growth rate solves x^{-1/2} + x^{-1} = 1.
        d.h_top = 2.0 * std::log((1.0 + std::sqrt(5.0)) / 2.0);
        d.partition = Partition::leading_symbol();
        return d;
    }
    return continuous_system(r);
}

} // namespace detail

inline Suite parse_suite(const std::string& s) {
    for (Suite x : {Suite::estimate, Suite::verify_A, Suite::verify_B, Suite::verify_C, Suite::measure_D, Suite::regularity,
                    Suite::occupancy})
        if (s == to_string(x)) return x;
    throw invalid_input("unknown suite '" + s + "'");
}

/// Parses and validates a config document.
inline ExperimentConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte ? e.byte - 1 : 0, text.size());
        const auto line = static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n')) + 1;
        throw config_error("", line, std::string("malformed JSON: ") + e.what());
    }
    ExperimentConfig c;
    c.text = text;
    c.echo = doc;
    const detail::Reader r(doc, "", text);
    r.allow({"schema_version", "name", "suite", "system", "ladders", "event", "sample", "tolerances", "measure", "regularity",
             "occupancy", "metric_pairs", "output"});

    if (!r.has("schema_version")) r.fail("missing field", "schema_version");
    c.schema_version = static_cast<int>(r.count("schema_version", 1));
    if (c.schema_version != 1) r.fail("unsupported schema version " + std::to_string(c.schema_version), "schema_version");

    c.name = r.string("name", "");
    if (c.name.empty()) r.fail("missing or empty", "name");
    for (char ch : c.name)
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.'))
            r.fail("may contain only letters, digits, '_', '-' and '.'", "name");

    try {
        c.suite = parse_suite(r.string("suite", "estimate"));
    } catch (const invalid_input& e) {
        r.fail(e.what(), "suite");
    }

    if (!r.has("system")) r.fail("missing field", "system");
    c.system = detail::parse_system(r.object("system"));

    EstimateConfig& e = c.estimate;
    if (r.has("ladders")) {
        const auto l = r.object("ladders");
        l.allow({"T", "epsilon", "delta", "m", "test_step"});
        e.T = l.ladder("T", e.T, true);
        if (e.T.size() < 3) l.fail("needs at least 3 values", "T");
        e.epsilon = l.ladder("epsilon", e.epsilon, false);
        if (e.epsilon.size() > 250) l.fail("at most 250 values", "epsilon");
        e.delta = l.ladder("delta", e.delta, false);
        e.m = l.count("m", e.m);
        if (l.has("test_step")) e.test_step = l.positive("test_step", 0.0);
        if (e.test_step > 0.0) {
            for (double d : e.delta) {
                DynMetricParams p{d, e.m, Variant::fine_d1};
                try {
                    TestGrid::make(e.T.front(), e.test_step, p);
                } catch (const invalid_input& err) {
                    l.fail(err.what(), "test_step");
                }
            }
        }
    }

    EventParams ev;
    if (r.has("event")) {
        const auto o = r.object("event");
        o.allow({"dt_event", "tol_event", "max_impulses"});
        ev.dt_event = o.positive("dt_event", ev.dt_event);
        ev.tol_event = o.positive("tol_event", ev.tol_event);
        ev.max_impulses = o.count("max_impulses", ev.max_impulses);
        if (ev.tol_event >= ev.dt_event) o.fail("must be smaller than dt_event", "tol_event");
    }
    if (c.system.impulsive) c.system.impulsive->events = ev;

    c.resolution = e.epsilon.back() / 2.0;
    if (r.has("sample")) {
        const auto o = r.object("sample");
        o.allow({"resolution", "seed", "word_length", "height_levels", "max_points"});
        c.resolution = o.positive("resolution", c.resolution);
        c.seed = o.count("seed", 1, 0);
        c.sample_options.word_length = o.count("word_length", 0);
        if (c.sample_options.word_length > 24) o.fail("at most 24", "word_length");
        c.sample_options.height_levels = o.count("height_levels", 0);
        c.sample_options.max_points = o.count("max_points", c.sample_options.max_points);
    }
    if (c.effective_resolution() > e.epsilon.back() / 2.0 + 1e-15)
        r.fail("sample resolution " + detail::fmt(c.effective_resolution()) + " exceeds min(epsilon)/2 = " + detail::fmt(e.epsilon.back() / 2.0),
               r.has("sample") ? "sample.resolution" : "ladders.epsilon");

    if (r.has("tolerances")) {
        const auto o = r.object("tolerances");
        o.allow({"plateau", "residual", "tol_A", "rel_reference", "tol_C", "tol_D"});
        e.plateau_tol = o.positive("plateau", e.plateau_tol);
        e.residual_tol = o.positive("residual", e.residual_tol);
        c.tolerances.tol_A = o.positive("tol_A", c.tolerances.tol_A);
        c.tolerances.rel_reference = o.positive("rel_reference", c.tolerances.rel_reference);
        c.tolerances.tol_C = o.positive("tol_C", c.tolerances.tol_C);
        c.tolerances.tol_D = o.positive("tol_D", c.tolerances.tol_D);
    }
    if (r.has("measure")) {
        const auto o = r.object("measure");
        o.allow({"orbit_length", "block_length", "initial_conditions", "burn_in", "lower_bound_fraction", "partition"});
        auto& m = c.measure;
        m.orbit_length = o.count("orbit_length", m.orbit_length);
        m.block_length = o.count("block_length", m.block_length);
        m.initial_conditions = o.count("initial_conditions", m.initial_conditions);
        m.burn_in = o.count("burn_in", 0, 0);
        m.lower_bound_fraction = o.number("lower_bound_fraction", 0.0);
        if (m.lower_bound_fraction < 0.0 || m.lower_bound_fraction > 1.0) o.fail("must be in [0,1]", "lower_bound_fraction");
        if (m.orbit_length < 2 * m.block_length) o.fail("must be at least twice block_length", "orbit_length");
        if (o.has("partition")) {
            const auto p = o.object("partition");
            p.allow({"kind", "coord", "cells"});
            const std::string kind = p.string("kind", "uniform_arcs");
            if (kind == "leading_symbol") {
                if (!c.system.space().symbolic()) p.fail("needs a symbolic space", "kind");
                c.system.partition = Partition::leading_symbol();
            } else if (kind == "uniform_arcs") {
                const std::size_t coord = p.count("coord", 0, 0);
                if (coord >= c.system.space().dim()) p.fail("coordinate out of range", "coord");
                c.system.partition = Partition::uniform_arcs(coord, p.count("cells", 4, 1));
            } else {
                p.fail("unknown partition kind '" + kind + "'", "kind");
            }
        }
        const double bits = std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(c.system.partition.cells, 2))));
        if (bits * static_cast<double>(m.block_length) > 64.0) o.fail("blocks do not fit in 64 bits", "block_length");
    }
    if (r.has("regularity")) {
        const auto o = r.object("regularity");
        o.allow({"samples", "xi"});
        c.regularity.samples = o.count("samples", c.regularity.samples);
        c.regularity.xi = o.positive("xi", c.regularity.xi);
    }
    if (r.has("occupancy")) {
        const auto o = r.object("occupancy");
        o.allow({"eta", "horizon", "step", "x0", "initial_conditions", "period"});
        auto& oc = c.occupancy;
        oc.eta = o.ladder("eta", oc.eta, false);
        oc.horizon = o.positive("horizon", oc.horizon);
        oc.step = o.positive("step", oc.step);
        oc.initial_conditions = o.count("initial_conditions", oc.initial_conditions);
        oc.period = o.number("period", 0.0);
        if (oc.period < 0.0) o.fail("must be >= 0", "period");
        if (o.has("x0")) {
            const json& v = o.raw("x0");
            if (!v.is_array() || v.empty()) o.fail("expected an array of points", "x0");
            if (c.system.space().symbolic()) o.fail("explicit points are not supported for symbolic spaces", "x0");
            for (const auto& p : v) oc.x0.push_back(detail::parse_point(o, p, "x0", c.system.space()));
        }
    }
    c.metric_pairs = r.count("metric_pairs", c.metric_pairs);
    if (r.has("output")) {
        const auto o = r.object("output");
        o.allow({"dir"});
        c.output_dir = o.string("dir", c.output_dir);
    }

    const bool needs_impulsive = c.suite == Suite::regularity || c.suite == Suite::occupancy;
    if (needs_impulsive && !c.system.is_impulsive())
        r.fail(std::string("suite ") + to_string(c.suite) + " needs an impulsive system", "suite");
    try {
        if (c.system.impulsive) c.system.impulsive->validate();
    } catch (const invalid_input& err) {
        r.fail(err.what(), "system");
    }
    return c;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("", 0, "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline ExperimentConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

} // namespace impent
