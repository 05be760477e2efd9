#pragma once

// JSON form of measures, triplets, subordinators and run settings.
// Readers are strict: unknown keys and wrong types raise ConfigError, missing
// keys take their defaults. Writers always emit every field, so
// write(read(doc)) is the canonical form of doc.
//
// Requires nlohmann/json (vendor/json.hpp).

#include "levy_pri/criteria.hpp"
#include "levy_pri/errors.hpp"
#include "levy_pri/ladder.hpp"
#include "levy_pri/measures.hpp"
#include "levy_pri/quadrature.hpp"
#include "levy_pri/simulate.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

namespace levy_pri::json_io {

using nlohmann::json;

/// Reads the keys of one object and remembers which were used, so the rest
/// can be reported as unknown.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j.is_object()) throw ConfigError(where_ + ": expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    const json* child(const std::string& key) {
        seen_.insert(key);
        return has(key) ? &j_.at(key) : nullptr;
    }

    double number(const std::string& key, double fallback) {
        const json* v = child(key);
        if (!v) return fallback;
        if (v->is_string()) {
            const auto& s = v->get_ref<const std::string&>();
            if (s == "inf") return kInf;
            if (s == "-inf") return -kInf;
        }
        if (!v->is_number()) throw ConfigError(path(key) + ": expected a number");
        return v->get<double>();
    }

    std::uint64_t integer(const std::string& key, std::uint64_t fallback) {
        const json* v = child(key);
        if (!v) return fallback;
        if (v->is_number_unsigned()) return v->get<std::uint64_t>();
        if (v->is_number_integer() && v->get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v->get<std::int64_t>());
        if (v->is_number_float()) {
            const double d = v->get<double>();
            if (d >= 0.0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
        }
        throw ConfigError(path(key) + ": expected a nonnegative integer");
    }

    bool boolean(const std::string& key, bool fallback) {
        const json* v = child(key);
        if (!v) return fallback;
        if (!v->is_boolean()) throw ConfigError(path(key) + ": expected true or false");
        return v->get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        const json* v = child(key);
        if (!v) return fallback;
        if (!v->is_string()) throw ConfigError(path(key) + ": expected a string");
        return v->get<std::string>();
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
        const json* v = child(key);
        if (!v) return fallback;
        if (!v->is_array()) throw ConfigError(path(key) + ": expected an array of numbers");
        std::vector<double> out;
        for (const auto& e : *v) {
            if (!e.is_number()) throw ConfigError(path(key) + ": expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::string path(const std::string& key) const { return where_ + "." + key; }

    /// Throws if the object has keys that were never asked for.
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(where_ + ": unknown key \"" + it.key() + "\"");
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

inline json number_or_inf(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline Side read_side(const std::string& s, const std::string& where) {
    if (s == "plus") return Side::plus;
    if (s == "minus") return Side::minus;
    throw ConfigError(where + ": side must be \"plus\" or \"minus\"");
}

// ---------------------------------------------------------------------------
// Measures

inline JumpLaw read_jump_law(const json& j, const std::string& where) {
    ObjectReader r(j, where);
    const std::string name = r.string("name", "point");
    JumpLaw law;
    if (name == "point") {
        law = PointLaw{r.number("at", 1.0)};
    } else if (name == "exponential") {
        law = ExponentialLaw{r.number("rate", 1.0), read_side(r.string("side", "plus"), r.path("side"))};
    } else if (name == "uniform") {
        law = UniformLaw{r.number("lo", 0.0), r.number("hi", 1.0)};
    } else if (name == "normal") {
        law = NormalLaw{r.number("mean", 0.0), r.number("sd", 1.0)};
    } else {
        throw ConfigError(r.path("name") + ": unknown jump law \"" + name + "\"");
    }
    r.finish();
    return law;
}

inline json write_jump_law(const JumpLaw& law) {
    return std::visit(
        [](const auto& l) -> json {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, PointLaw>) return {{"name", "point"}, {"at", l.at}};
            else if constexpr (std::is_same_v<L, ExponentialLaw>)
                return {{"name", "exponential"}, {"rate", l.rate}, {"side", to_string(l.side)}};
            else if constexpr (std::is_same_v<L, UniformLaw>) return {{"name", "uniform"}, {"lo", l.lo}, {"hi", l.hi}};
            else return {{"name", "normal"}, {"mean", l.mean}, {"sd", l.sd}};
        },
        law);
}

inline LevyMeasureSpec read_measure(const json& j, const std::string& where = "measure") {
    ObjectReader r(j, where);
    const std::string v = r.string("variant", "");
    auto build = [&](LevyMeasureSpec::Variant var) {
        r.finish();
        try {
            return LevyMeasureSpec(std::move(var));
        } catch (const ConfigError&) {
            throw;
        } catch (const std::invalid_argument& e) {
            throw ConfigError(where + ": " + e.what());
        }
    };
    if (v == "zero") return build(ZeroMeasure{});
    if (v == "power_law") {
        PowerLawTails p;
        p.alpha = r.number("alpha", p.alpha);
        p.beta = r.number("beta", p.beta);
        p.c_minus = r.number("c_minus", p.c_minus);
        p.c_plus = r.number("c_plus", p.c_plus);
        return build(p);
    }
    if (v == "finite_activity") {
        FiniteActivity f;
        f.total_mass = r.number("total_mass", 0.0);
        if (const json* law = r.child("jump_law")) f.jump_law = read_jump_law(*law, r.path("jump_law"));
        return build(f);
    }
    if (v == "tabulated") {
        TabulatedTails t;
        t.grid = r.numbers("grid", {});
        t.tail_plus = r.numbers("tail_plus", std::vector<double>(t.grid.size(), 0.0));
        t.tail_minus = r.numbers("tail_minus", std::vector<double>(t.grid.size(), 0.0));
        return build(t);
    }
    if (v == "one_sided_power") {
        OneSidedPower o;
        o.side = read_side(r.string("side", "plus"), r.path("side"));
        o.c = r.number("c", o.c);
        o.index = r.number("index", o.index);
        o.cutoff = r.number("cutoff", o.cutoff);
        o.cutoff_atom = r.boolean("cutoff_atom", o.cutoff_atom);
        return build(o);
    }
    if (v == "spectrally_positive" || v == "spectrally_negative") {
        const json* inner = r.child("inner");
        if (!inner) throw ConfigError(r.path("inner") + ": required");
        LevyMeasureSpec in = read_measure(*inner, r.path("inner"));
        r.finish();
        return v == "spectrally_positive" ? LevyMeasureSpec::spectrally_positive(std::move(in))
                                          : LevyMeasureSpec::spectrally_negative(std::move(in));
    }
    if (v == "sum") {
        SumMeasure s;
        const json* parts = r.child("parts");
        if (!parts || !parts->is_array()) throw ConfigError(r.path("parts") + ": expected an array of measures");
        for (std::size_t i = 0; i < parts->size(); ++i)
            s.parts.push_back(read_measure(parts->at(i), r.path("parts") + "[" + std::to_string(i) + "]"));
        return build(s);
    }
    throw ConfigError(r.path("variant") + ": unknown measure variant \"" + v + "\"");
}

inline json write_measure(const LevyMeasureSpec& m) {
    return std::visit(
        [](const auto& v) -> json {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, ZeroMeasure>) {
                return {{"variant", "zero"}};
            } else if constexpr (std::is_same_v<V, PowerLawTails>) {
                return {{"variant", "power_law"},
                        {"alpha", v.alpha},
                        {"beta", v.beta},
                        {"c_minus", v.c_minus},
                        {"c_plus", v.c_plus}};
            } else if constexpr (std::is_same_v<V, FiniteActivity>) {
                return {{"variant", "finite_activity"},
                        {"total_mass", v.total_mass},
                        {"jump_law", write_jump_law(v.jump_law)}};
            } else if constexpr (std::is_same_v<V, TabulatedTails>) {
                return {{"variant", "tabulated"},
                        {"grid", v.grid},
                        {"tail_plus", v.tail_plus},
                        {"tail_minus", v.tail_minus}};
            } else if constexpr (std::is_same_v<V, OneSidedPower>) {
                return {{"variant", "one_sided_power"}, {"side", to_string(v.side)},
                        {"c", v.c},                     {"index", v.index},
                        {"cutoff", number_or_inf(v.cutoff)}, {"cutoff_atom", v.cutoff_atom}};
            } else if constexpr (std::is_same_v<V, OneSided>) {
                return {{"variant", v.keep == Side::plus ? "spectrally_positive" : "spectrally_negative"},
                        {"inner", write_measure(*v.inner)}};
            } else {
                json parts = json::array();
                for (const auto& p : v.parts) parts.push_back(write_measure(p));
                return {{"variant", "sum"}, {"parts", parts}};
            }
        },
        m.variant());
}

inline LevyTriplet read_triplet(const json& j, const std::string& where = "triplet") {
    ObjectReader r(j, where);
    LevyTriplet t;
    t.gamma = r.number("gamma", 0.0);
    t.sigma = r.number("sigma", 0.0);
    if (const json* m = r.child("measure")) t.measure = read_measure(*m, r.path("measure"));
    r.finish();
    try {
        t.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
    return t;
}

inline json write_triplet(const LevyTriplet& t) {
    return {{"gamma", t.gamma}, {"sigma", t.sigma}, {"measure", write_measure(t.measure)}};
}

/// A subordinator's jumps are given as a measure whose negative side is empty.
struct SubordinatorDoc {
    double drift = 0.0;
    double kill_rate = 0.0;
    LevyMeasureSpec jumps;

    SubordinatorSpec spec() const { return {drift, jumps.plus(), kill_rate}; }
};

inline SubordinatorDoc read_subordinator(const json& j, const std::string& where = "subordinator") {
    ObjectReader r(j, where);
    SubordinatorDoc s;
    s.drift = r.number("drift", 0.0);
    s.kill_rate = r.number("kill_rate", 0.0);
    if (const json* m = r.child("jumps")) s.jumps = read_measure(*m, r.path("jumps"));
    r.finish();
    if (s.jumps.minus().activity() != Activity::zero) throw ConfigError(where + ".jumps: negative jumps not allowed");
    try {
        s.spec().validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
    return s;
}

inline json write_subordinator(const SubordinatorDoc& s) {
    return {{"drift", s.drift}, {"kill_rate", s.kill_rate}, {"jumps", write_measure(s.jumps)}};
}

// ---------------------------------------------------------------------------
// Settings

inline QuadConfig read_quad(const json* j) {
    QuadConfig q;
    if (!j) return q;
    ObjectReader r(*j, "quad");
    q.rel_tol = r.number("rel_tol", q.rel_tol);
    q.abs_tol = r.number("abs_tol", q.abs_tol);
    q.max_evals = r.integer("max_evals", q.max_evals);
    r.finish();
    if (!(q.rel_tol > 0.0) || !(q.abs_tol >= 0.0) || q.max_evals == 0) throw ConfigError("quad: tolerances must be positive");
    return q;
}

inline json write_quad(const QuadConfig& q) {
    return {{"rel_tol", q.rel_tol}, {"abs_tol", q.abs_tol}, {"max_evals", q.max_evals}};
}

inline BandProtocol read_protocol(const json* j) {
    BandProtocol p;
    if (!j) return p;
    ObjectReader r(*j, "protocol");
    p.max_bands = static_cast<int>(r.integer("max_bands", p.max_bands));
    p.fit_bands = static_cast<int>(r.integer("fit_bands", p.fit_bands));
    p.min_fit_bands = static_cast<int>(r.integer("min_fit_bands", p.min_fit_bands));
    p.divergence_exponent = r.number("divergence_exponent", p.divergence_exponent);
    p.max_fit_residual = r.number("max_fit_residual", p.max_fit_residual);
    r.finish();
    if (p.max_bands < 1 || p.max_bands > 1000 || p.fit_bands < 2 || p.min_fit_bands < 2)
        throw ConfigError("protocol: band counts out of range");
    return p;
}

inline json write_protocol(const BandProtocol& p) {
    return {{"max_bands", p.max_bands},
            {"fit_bands", p.fit_bands},
            {"min_fit_bands", p.min_fit_bands},
            {"divergence_exponent", p.divergence_exponent},
            {"max_fit_residual", p.max_fit_residual}};
}

/// Seed and threads are not part of the section; the caller sets them.
inline SimConfig read_sim(const json* j) {
    SimConfig s;
    if (!j) return s;
    ObjectReader r(*j, "sim");
    s.epsilon = r.number("epsilon", s.epsilon);
    s.dt = r.number("dt", s.dt);
    s.horizon = r.number("horizon", s.horizon);
    s.n_paths = r.integer("n_paths", s.n_paths);
    const std::string mode = r.string("small_jump_mode", to_string(s.small_jump_mode));
    if (mode == "drop_compensate") s.small_jump_mode = SmallJumpMode::drop_compensate;
    else if (mode == "gaussian_substitute") s.small_jump_mode = SmallJumpMode::gaussian_substitute;
    else throw ConfigError("sim.small_jump_mode: expected drop_compensate or gaussian_substitute");
    s.hit_tolerance = r.number("hit_tolerance", s.hit_tolerance);
    s.theta = r.number("theta", s.theta);
    s.max_events = r.number("max_events", s.max_events);
    s.max_level_steps = r.integer("max_level_steps", s.max_level_steps);
    s.gaussian_threshold = r.number("gaussian_threshold", s.gaussian_threshold);
    r.finish();
    try {
        s.validate();
    } catch (const BudgetError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("sim: ") + e.what());
    }
    return s;
}

inline json write_sim(const SimConfig& s) {
    return {{"epsilon", s.epsilon},
            {"dt", s.dt},
            {"horizon", s.horizon},
            {"n_paths", s.n_paths},
            {"small_jump_mode", to_string(s.small_jump_mode)},
            {"hit_tolerance", s.hit_tolerance},
            {"theta", s.theta},
            {"max_events", s.max_events},
            {"max_level_steps", s.max_level_steps},
            {"gaussian_threshold", s.gaussian_threshold}};
}

inline RenewalMethod read_renewal_method(const std::string& s) {
    if (s == "monte_carlo") return RenewalMethod::monte_carlo;
    if (s == "renewal_solve") return RenewalMethod::renewal_solve;
    if (s == "closed_form") return RenewalMethod::closed_form;
    throw ConfigError("renewal.method: expected monte_carlo, renewal_solve or closed_form");
}

inline RenewalConfig read_renewal(const json* j) {
    RenewalConfig c;
    if (!j) return c;
    ObjectReader r(*j, "renewal");
    c.method = read_renewal_method(r.string("method", to_string(c.method)));
    c.n_paths = r.integer("n_paths", c.n_paths);
    c.epsilon = r.number("epsilon", c.epsilon);
    c.cell = r.number("cell", c.cell);
    c.max_events_per_path = r.integer("max_events_per_path", c.max_events_per_path);
    r.finish();
    if (c.n_paths == 0) throw ConfigError("renewal.n_paths must be positive");
    return c;
}

inline json write_renewal(const RenewalConfig& c) {
    return {{"method", to_string(c.method)},
            {"n_paths", c.n_paths},
            {"epsilon", c.epsilon},
            {"cell", c.cell},
            {"max_events_per_path", c.max_events_per_path}};
}

// ---------------------------------------------------------------------------
// Results

inline json write_integral(const IntegralResult& r) {
    json j = {{"status", to_string(r.status)},
              {"value", number_or_inf(r.value)},
              {"abs_error_estimate", r.abs_error_estimate},
              {"local_exponent", r.local_exponent},
              {"band_masses", r.band_masses},
              {"note", r.note}};
    j["analytic_exponent"] = r.analytic_exponent ? json(*r.analytic_exponent) : json(nullptr);
    // NaN is not JSON; nlohmann writes null for it.
    return j;
}

inline json write_variation(const VariationClass& v) {
    json j = {{"kind", v.bounded() ? "bounded" : "unbounded"},
              {"plus_side", to_string(v.plus)},
              {"minus_side", to_string(v.minus)}};
    j["drift_b"] = v.bounded() ? json(v.drift_b) : json(nullptr);
    return j;
}

inline json write_integrability(const IntegrabilityReport& r) {
    return {{"total", to_string(r.total)},
            {"plus", to_string(r.plus)},
            {"minus", to_string(r.minus)},
            {"plus_mass", number_or_inf(r.plus_mass)},
            {"minus_mass", number_or_inf(r.minus_mass)},
            {"first_moment", to_string(r.first_moment)},
            {"second_moment", r.second_moment},
            {"second_moment_converged", r.second_moment_converged}};
}

inline json write_decision(const PriDecision& d) {
    json j = {{"answer", to_string(d.answer)}, {"branch", d.branch()}, {"note", d.note}};
    j["variation"] = d.variation ? write_variation(*d.variation) : json(nullptr);
    j["J"] = d.J ? write_integral(*d.J) : json(nullptr);
    j["L"] = d.L ? write_integral(*d.L) : json(nullptr);
    return j;
}

// ---------------------------------------------------------------------------
// Hashing

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Keys sorted (nlohmann objects are ordered maps), no whitespace, numbers in
/// shortest round-trip form.
inline std::string canonical_dump(const json& j) { return j.dump(); }

}  // namespace levy_pri::json_io
