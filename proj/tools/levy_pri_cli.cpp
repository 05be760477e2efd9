// levy-pri: command-line front end.
//
//   levy-pri <classify|criterion|phase-scan|simulate|ladder> [--config FILE]
//            [--set key=value]... [--seed N] [--cache DIR] [--out FILE]
//            [--format csv|json] [--threads N]
//
// Exit codes: 0 decided, 1 usage or config error, 2 indeterminate,
// 3 budget refusal.

#include "levy_pri/json_io.hpp"
#include "levy_pri/levy_pri.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using levy_pri::json_io::json;
namespace jio = levy_pri::json_io;
using namespace levy_pri;

namespace {

enum Exit { kDecided = 0, kConfig = 1, kIndeterminate = 2, kBudget = 3 };

struct Output {
    std::string schema;
    json payload;
    std::string csv;
    std::string summary;
    int exit_code = kDecided;
};

std::string fmt(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---------------------------------------------------------------------------
// Config handling

const std::vector<std::string> kSections = {"seed", "triplet", "quad", "protocol", "sim", "simulate", "phase_scan", "ladder"};

void apply_set(json& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got \"" + assignment + "\"");
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    json* node = &cfg;
    std::size_t start = 0;
    for (;;) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError("--set: empty path component in \"" + key + "\"");
        if (!node->is_object()) throw ConfigError("--set: \"" + key + "\" descends into a non-object");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

struct PhaseScanSettings {
    double alpha_min = 1.05, alpha_max = 1.95, beta_min = 0.05, beta_max = 1.95;
    std::size_t grid_steps = 30;
    double boundary_margin = 0.05;
    bool with_mc = false;
    double c_minus = 1.0, c_plus = 1.0;
    int mc_n = 6;
    double budget_seconds = 600.0;
};

struct SimulateSettings {
    std::vector<int> n_list{1, 2, 3, 4, 5, 6};
    std::vector<double> levels{0.125, 0.0625, 0.03125};
    std::size_t dump_paths = 0;
    std::string path_csv, jump_csv;
};

struct LadderSettings {
    jio::SubordinatorDoc subordinator;
    std::vector<double> grid;
    RenewalConfig renewal;
    std::optional<LevyMeasureSpec> measure;
    std::vector<double> overshoot_x, overshoot_y;
};

struct RunConfig {
    std::uint64_t seed = 1;
    LevyTriplet triplet{0.0, 0.0, LevyMeasureSpec(PowerLawTails{})};
    QuadConfig quad;
    BandProtocol protocol;
    SimConfig sim;
    SimulateSettings simulate;
    PhaseScanSettings scan;
    LadderSettings ladder;
};

std::vector<double> read_grid(const json& j, const std::string& where) {
    if (j.is_array()) {
        std::vector<double> g;
        for (const auto& e : j) {
            if (!e.is_number()) throw ConfigError(where + ": expected numbers");
            g.push_back(e.get<double>());
        }
        return g;
    }
    jio::ObjectReader r(j, where);
    const double from = r.number("from", 0.05), to = r.number("to", 1.0);
    const std::size_t points = r.integer("points", 20);
    const std::string spacing = r.string("spacing", "linear");
    r.finish();
    if (!(from > 0.0 && to > from) || points < 2) throw ConfigError(where + ": need 0 < from < to and points >= 2");
    std::vector<double> g;
    for (std::size_t i = 0; i < points; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(points - 1);
        if (spacing == "linear") g.push_back(from + f * (to - from));
        else if (spacing == "log") g.push_back(from * std::pow(to / from, f));
        else throw ConfigError(where + ".spacing: expected linear or log");
    }
    g.back() = to;
    return g;
}

RunConfig read_config(const json& cfg) {
    if (!cfg.is_object()) throw ConfigError("config: expected a JSON object");
    for (auto it = cfg.begin(); it != cfg.end(); ++it)
        if (std::find(kSections.begin(), kSections.end(), it.key()) == kSections.end())
            throw ConfigError("config: unknown key \"" + it.key() + "\"");
    RunConfig rc;
    auto sect = [&](const char* k) -> const json* { return cfg.contains(k) && !cfg.at(k).is_null() ? &cfg.at(k) : nullptr; };
    if (const json* s = sect("seed")) {
        if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<std::int64_t>() >= 0))
            throw ConfigError("seed: expected a nonnegative integer");
        rc.seed = s->get<std::uint64_t>();
    }
    if (const json* t = sect("triplet")) rc.triplet = jio::read_triplet(*t);
    rc.quad = jio::read_quad(sect("quad"));
    rc.protocol = jio::read_protocol(sect("protocol"));
    rc.sim = jio::read_sim(sect("sim"));
    rc.sim.seed = rc.seed;

    if (const json* s = sect("simulate")) {
        jio::ObjectReader r(*s, "simulate");
        std::vector<int> ns;
        for (double v : r.numbers("n_list", {1, 2, 3, 4, 5, 6})) {
            if (v < 1 || v > 30 || v != std::floor(v)) throw ConfigError("simulate.n_list: entries must be integers in [1, 30]");
            ns.push_back(static_cast<int>(v));
        }
        rc.simulate.n_list = ns;
        rc.simulate.levels = r.numbers("levels", rc.simulate.levels);
        rc.simulate.dump_paths = r.integer("dump_paths", 0);
        rc.simulate.path_csv = r.string("path_csv", "");
        rc.simulate.jump_csv = r.string("jump_csv", "");
        r.finish();
        for (double x : rc.simulate.levels)
            if (!(x > 0.0)) throw ConfigError("simulate.levels: levels must be positive");
    }
    if (const json* s = sect("phase_scan")) {
        jio::ObjectReader r(*s, "phase_scan");
        PhaseScanSettings& p = rc.scan;
        p.alpha_min = r.number("alpha_min", p.alpha_min);
        p.alpha_max = r.number("alpha_max", p.alpha_max);
        p.beta_min = r.number("beta_min", p.beta_min);
        p.beta_max = r.number("beta_max", p.beta_max);
        p.grid_steps = r.integer("grid_steps", p.grid_steps);
        p.boundary_margin = r.number("boundary_margin", p.boundary_margin);
        p.with_mc = r.boolean("with_mc", p.with_mc);
        p.c_minus = r.number("c_minus", p.c_minus);
        p.c_plus = r.number("c_plus", p.c_plus);
        p.mc_n = static_cast<int>(r.integer("mc_n", p.mc_n));
        p.budget_seconds = r.number("budget_seconds", p.budget_seconds);
        r.finish();
        if (!(p.alpha_min > 1.0 && p.alpha_max < 2.0 && p.alpha_min <= p.alpha_max))
            throw ConfigError("phase_scan: alpha range must lie in (1, 2)");
        if (!(p.beta_min >= 0.0 && p.beta_max < 2.0 && p.beta_min <= p.beta_max))
            throw ConfigError("phase_scan: beta range must lie in [0, 2)");
        if (p.grid_steps < 1 || p.grid_steps > 1000) throw ConfigError("phase_scan.grid_steps must lie in [1, 1000]");
        if (p.mc_n < 1 || p.mc_n > 30) throw ConfigError("phase_scan.mc_n must lie in [1, 30]");
    }
    if (const json* s = sect("ladder")) {
        jio::ObjectReader r(*s, "ladder");
        LadderSettings& l = rc.ladder;
        if (const json* sub = r.child("subordinator")) l.subordinator = jio::read_subordinator(*sub, "ladder.subordinator");
        if (const json* g = r.child("grid")) l.grid = read_grid(*g, "ladder.grid");
        l.renewal = jio::read_renewal(r.child("renewal"));
        if (const json* m = r.child("measure")) l.measure = jio::read_measure(*m, "ladder.measure");
        if (const json* o = r.child("overshoot")) {
            jio::ObjectReader ro(*o, "ladder.overshoot");
            l.overshoot_x = ro.numbers("x", {});
            l.overshoot_y = ro.numbers("y", {});
            ro.finish();
        }
        r.finish();
    }
    if (rc.ladder.grid.empty()) rc.ladder.grid = read_grid(json::object(), "ladder.grid");
    if (rc.ladder.subordinator.drift == 0.0 && rc.ladder.subordinator.jumps.plus().activity() == Activity::zero)
        rc.ladder.subordinator.drift = 1.0;
    rc.ladder.renewal.seed = rc.seed;
    return rc;
}

/// Only the sections a subcommand reads go into its canonical form.
json canonical_config(const std::string& cmd, const RunConfig& rc) {
    json c;
    c["seed"] = rc.seed;
    if (cmd == "classify" || cmd == "criterion" || cmd == "simulate") c["triplet"] = jio::write_triplet(rc.triplet);
    if (cmd == "criterion" || cmd == "phase-scan") {
        c["quad"] = jio::write_quad(rc.quad);
        c["protocol"] = jio::write_protocol(rc.protocol);
    }
    if (cmd == "simulate" || (cmd == "phase-scan" && rc.scan.with_mc)) c["sim"] = jio::write_sim(rc.sim);
    if (cmd == "simulate") {
        c["simulate"] = {{"n_list", rc.simulate.n_list},
                         {"levels", rc.simulate.levels},
                         {"dump_paths", rc.simulate.dump_paths},
                         {"path_csv", rc.simulate.path_csv},
                         {"jump_csv", rc.simulate.jump_csv}};
    }
    if (cmd == "phase-scan") {
        const auto& p = rc.scan;
        c["phase_scan"] = {{"alpha_min", p.alpha_min},   {"alpha_max", p.alpha_max},
                           {"beta_min", p.beta_min},     {"beta_max", p.beta_max},
                           {"grid_steps", p.grid_steps}, {"boundary_margin", p.boundary_margin},
                           {"with_mc", p.with_mc},       {"c_minus", p.c_minus},
                           {"c_plus", p.c_plus},         {"mc_n", p.mc_n},
                           {"budget_seconds", p.budget_seconds}};
    }
    if (cmd == "ladder") {
        const auto& l = rc.ladder;
        c["ladder"] = {{"subordinator", jio::write_subordinator(l.subordinator)},
                       {"grid", l.grid},
                       {"renewal", jio::write_renewal(l.renewal)},
                       {"measure", l.measure ? jio::write_measure(*l.measure) : json(nullptr)},
                       {"overshoot", {{"x", l.overshoot_x}, {"y", l.overshoot_y}}}};
        if (l.renewal.method != RenewalMethod::monte_carlo) c["ladder"]["renewal"].erase("n_paths");
    }
    return c;
}

// ---------------------------------------------------------------------------
// Subcommands

Output cmd_classify(const RunConfig& rc) {
    Output o;
    o.schema = "classify/1";
    const VariationClass v = classify_variation(rc.triplet);
    const IntegrabilityReport r = integrability_report(rc.triplet.measure);
    o.payload = {{"variation", jio::write_variation(v)}, {"integrability", jio::write_integrability(r)}};
    std::ostringstream csv;
    csv << "field,value\r\n"
        << "variation," << (v.bounded() ? "bounded" : "unbounded") << "\r\n"
        << "drift_b," << fmt(v.drift_b) << "\r\n"
        << "plus_side," << to_string(v.plus) << "\r\n"
        << "minus_side," << to_string(v.minus) << "\r\n"
        << "total_activity," << to_string(r.total) << "\r\n"
        << "plus_mass," << fmt(r.plus_mass) << "\r\n"
        << "minus_mass," << fmt(r.minus_mass) << "\r\n"
        << "first_moment," << to_string(r.first_moment) << "\r\n"
        << "second_moment," << fmt(r.second_moment) << "\r\n"
        << "second_moment_converged," << (r.second_moment_converged ? "true" : "false") << "\r\n";
    o.csv = csv.str();
    o.summary = std::string(v.bounded() ? "bounded variation" : "unbounded variation") + ", positive jumps " +
                to_string(v.plus) + ", negative jumps " + to_string(v.minus);
    return o;
}

std::string branch_summary(PriCase c) {
    switch (c) {
        case PriCase::continuous_sigma:
        case PriCase::finite_activity_sigma:
        case PriCase::unbounded_sigma: return "sigma > 0 gives a PRI";
        case PriCase::continuous_drift_up: return "no jumps, sigma = 0 and gamma > 0";
        case PriCase::continuous_drift_down: return "no jumps, sigma = 0 and gamma < 0: levels above 0 are never reached";
        case PriCase::continuous_degenerate: return "constant path";
        case PriCase::finite_activity_drift_up:
        case PriCase::spectrally_negative_drift_up: return "bounded variation with drift coefficient b > 0";
        case PriCase::finite_activity_drift_down:
        case PriCase::spectrally_negative_drift_down: return "bounded variation needs drift coefficient b > 0; here b <= 0";
        case PriCase::spectrally_negative_uv: return "finitely many positive jumps, unbounded variation";
        case PriCase::spectrally_positive: return "infinitely many positive jumps, finitely many negative, sigma = 0";
        case PriCase::bounded_plus_infinite: return "bounded variation with infinitely many positive jumps";
        case PriCase::uv_j_finite: return "sigma = 0, unbounded variation, J finite";
        case PriCase::uv_j_infinite: return "sigma = 0, unbounded variation, J infinite";
        case PriCase::uv_j_indeterminate: return "sigma = 0, unbounded variation, J could not be decided";
        case PriCase::classification_indeterminate: return "the measure could not be classified";
    }
    return "";
}

std::string integral_row(const char* name, const std::optional<IntegralResult>& r) {
    std::ostringstream s;
    s << name << ',';
    if (r) {
        s << to_string(r->status) << ',' << fmt(r->value) << ',' << fmt(r->abs_error_estimate) << ','
          << fmt(r->local_exponent) << ',' << (r->analytic_exponent ? fmt(*r->analytic_exponent) : "");
    } else {
        s << "not_consulted,,,,";
    }
    s << ",\r\n";
    return s.str();
}

Output cmd_criterion(const RunConfig& rc) {
    Output o;
    o.schema = "criterion/1";
    const PriDecision d = decide_pri(rc.triplet, rc.quad, rc.protocol);
    o.payload = jio::write_decision(d);
    o.csv = "item,status,value,abs_error_estimate,local_exponent,analytic_exponent,branch\r\n" +
            integral_row("J", d.J) + integral_row("L", d.L) + "decision," + to_string(d.answer) + ",,,,," +
            d.branch() + "\r\n";
    o.summary = std::string("decision: ") + to_string(d.answer) + " [" + d.branch() + "] " + branch_summary(d.case_fired);
    if (d.answer == PriAnswer::indeterminate) o.exit_code = kIndeterminate;
    return o;
}

std::uint64_t cell_seed(std::uint64_t seed, std::size_t cell) {
    return CounterStream::derive_key(seed, cell, StreamPurpose::jump_times);
}

Output cmd_phase_scan(const RunConfig& rc) {
    Output o;
    o.schema = "phase_scan/1";
    const auto& p = rc.scan;
    auto axis = [&](double lo, double hi, std::size_t i) {
        return p.grid_steps == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(p.grid_steps - 1);
    };

    if (p.with_mc) {
        // Upper bound on work: every path runs to the horizon.
        double seconds = 0.0;
        for (std::size_t i = 0; i < p.grid_steps; ++i)
            for (std::size_t j = 0; j < p.grid_steps; ++j) {
                const double a = axis(p.alpha_min, p.alpha_max, i), b = axis(p.beta_min, p.beta_max, j);
                if (std::abs(b - (2.0 * a - 2.0)) < p.boundary_margin) continue;
                const LevyMeasureSpec m(PowerLawTails{a, b, p.c_minus, p.c_plus});
                const double jumps = (m.plus().tail(rc.sim.epsilon) + m.minus().tail(rc.sim.epsilon)) * rc.sim.horizon;
                seconds += static_cast<double>(rc.sim.n_paths) * (rc.sim.horizon / rc.sim.dt + jumps) * 5e-8;
            }
        if (seconds > p.budget_seconds) {
            std::ostringstream msg;
            msg << "Monte Carlo columns would need up to " << fmt(seconds) << " s, over phase_scan.budget_seconds = "
                << fmt(p.budget_seconds) << "; lower sim.n_paths or sim.horizon, raise sim.dt, or raise the budget";
            throw BudgetError(msg.str());
        }
    }

    std::ostringstream csv;
    csv << "alpha,beta,region,analytic_pri,analytic_creep,J_status,decide_pri";
    if (p.with_mc) csv << ",mc_finite_fraction";
    csv << "\r\n";
    json rows = json::array();
    std::size_t cell = 0, disagreements = 0, indeterminate = 0;
    for (std::size_t i = 0; i < p.grid_steps; ++i)
        for (std::size_t j = 0; j < p.grid_steps; ++j, ++cell) {
            const double a = axis(p.alpha_min, p.alpha_max, i), b = axis(p.beta_min, p.beta_max, j);
            const CorollaryDecision cd = corollary_decision(a, b);
            const bool boundary = std::abs(b - (2.0 * a - 2.0)) < p.boundary_margin;
            std::string j_status = "boundary", decision = "boundary", mc;
            if (!boundary) {
                const LevyTriplet t{0.0, 0.0, LevyMeasureSpec(PowerLawTails{a, b, p.c_minus, p.c_plus})};
                const PriDecision d = decide_pri(t, rc.quad, rc.protocol);
                j_status = d.J ? to_string(d.J->status) : "not_consulted";
                decision = to_string(d.answer);
                if (d.answer == PriAnswer::indeterminate) ++indeterminate;
                else if ((d.answer == PriAnswer::exists) != cd.pri) ++disagreements;
                if (p.with_mc) {
                    SimConfig sc = rc.sim;
                    sc.seed = cell_seed(rc.seed, cell);
                    const PriEstimate e = estimate_pri_existence(t, sc, {p.mc_n});
                    mc = fmt(e.dyadic.front().finite_fraction);
                }
            }
            csv << fmt(a) << ',' << fmt(b) << ',' << (boundary ? "boundary" : "interior") << ','
                << (cd.pri ? "true" : "false") << ',' << (cd.creeps ? "true" : "false") << ',' << j_status << ','
                << decision;
            if (p.with_mc) csv << ',' << mc;
            csv << "\r\n";
            json row = {{"alpha", a},           {"beta", b},           {"boundary", boundary},
                        {"analytic_pri", cd.pri}, {"analytic_creep", cd.creeps}, {"J_status", j_status},
                        {"decide_pri", decision}};
            if (p.with_mc) row["mc_finite_fraction"] = mc.empty() ? json(nullptr) : json(std::stod(mc));
            rows.push_back(row);
        }
    o.csv = csv.str();
    o.payload = {{"cells", rows}, {"disagreements", disagreements}, {"indeterminate", indeterminate}};
    o.summary = std::to_string(cell) + " cells, " + std::to_string(disagreements) +
                " interior disagreements with beta < 2 alpha - 2, " + std::to_string(indeterminate) + " indeterminate";
    if (indeterminate > 0) o.exit_code = kIndeterminate;
    return o;
}

Output cmd_simulate(const RunConfig& rc, unsigned threads) {
    Output o;
    o.schema = "simulate/1";
    SimConfig sc = rc.sim;
    sc.threads = threads;
    const PriEstimate e = estimate_pri_existence(rc.triplet, sc, rc.simulate.n_list, rc.simulate.levels);

    std::ostringstream csv;
    csv << "row_type,level,n,estimate,std_error,p_hat,p_hat_se,hit_class,heuristic\r\n";
    json levels = json::array(), dyadic = json::array();
    bool inconclusive = e.trend == "inconclusive";
    for (const HitEstimate& h : e.levels) {
        csv << "level," << fmt(h.level) << ",," << fmt(h.one_minus_laplace) << ',' << fmt(h.one_minus_laplace_se) << ','
            << fmt(h.p_hat) << ',' << fmt(h.p_hat_se) << ',' << to_string(h.cls) << ','
            << (h.heuristic ? "true" : "false") << "\r\n";
        inconclusive |= h.inconclusive;
        json tol = json::array();
        for (const auto& t : h.by_tolerance)
            tol.push_back({{"eta", t.eta}, {"one_minus_laplace", t.one_minus_laplace}, {"p_hat", t.p_hat}});
        levels.push_back({{"level", h.level},
                          {"one_minus_laplace", h.one_minus_laplace},
                          {"one_minus_laplace_se", h.one_minus_laplace_se},
                          {"p_hat", h.p_hat},
                          {"p_hat_se", h.p_hat_se},
                          {"heuristic", h.heuristic},
                          {"inconclusive", h.inconclusive},
                          {"by_tolerance", tol},
                          {"tolerance_trend", h.tolerance_trend},
                          {"note", h.note}});
    }
    for (const DyadicRecord& r : e.dyadic) {
        csv << "dyadic,1," << r.n << ',' << fmt(r.finite_fraction) << ',' << fmt(r.finite_fraction_se) << ",,,"
            << to_string(e.cls) << ',' << (e.heuristic ? "true" : "false") << "\r\n";
        dyadic.push_back({{"n", r.n},
                          {"finite_fraction", r.finite_fraction},
                          {"finite_fraction_se", r.finite_fraction_se},
                          {"truncated", r.truncated}});
    }
    o.csv = csv.str();
    o.payload = {{"hit_class", to_string(e.cls)},
                 {"heuristic", e.heuristic},
                 {"levels", levels},
                 {"dyadic", dyadic},
                 {"monotonicity_violations", e.monotonicity_violations},
                 {"trend", e.trend},
                 {"gaussian_substitute_recommended", e.gaussian_recommended},
                 {"censoring", "horizon"}};

    if (rc.simulate.dump_paths > 0) {
        std::vector<PathSkeleton> paths;
        for (std::size_t i = 0; i < rc.simulate.dump_paths; ++i) paths.push_back(simulate_path(rc.triplet, sc, i));
        if (!rc.simulate.path_csv.empty()) {
            std::ofstream f(rc.simulate.path_csv, std::ios::binary);
            write_path_csv(f, paths);
        }
        if (!rc.simulate.jump_csv.empty()) {
            std::ofstream f(rc.simulate.jump_csv, std::ios::binary);
            write_jump_csv(f, paths);
        }
    }
    std::ostringstream sum;
    sum << "class " << to_string(e.cls) << (e.heuristic ? " (heuristic)" : "") << ", finite fraction of K^(n):";
    for (const auto& r : e.dyadic) sum << " n=" << r.n << ':' << fmt(r.finite_fraction);
    sum << ", trend " << e.trend << " (horizon-censored)";
    if (e.gaussian_recommended && sc.small_jump_mode == SmallJumpMode::drop_compensate)
        sum << "; dropped jumps carry most of the small-scale variance, consider sim.small_jump_mode=gaussian_substitute";
    o.summary = sum.str();
    if (inconclusive) o.exit_code = kIndeterminate;
    return o;
}

Output cmd_ladder(const RunConfig& rc, unsigned threads) {
    Output o;
    o.schema = "ladder/1";
    const LadderSettings& l = rc.ladder;
    const SubordinatorSpec s = l.subordinator.spec();
    RenewalConfig cfg = l.renewal;
    cfg.threads = threads;
    const RenewalFunction u = renewal_function(s, l.grid, cfg);

    std::ostringstream csv;
    write_csv(csv, u);
    o.csv = csv.str();

    json env = json::array();
    std::size_t outside = 0;
    for (std::size_t i = 0; i < u.grid.size(); ++i) {
        const double e = erickson_envelope(s, u.grid[i]);
        const bool ok = u.values[i] >= 0.25 * e && u.values[i] <= 4.0 * e;
        outside += !ok;
        env.push_back({{"x", u.grid[i]}, {"U", u.values[i]}, {"envelope", e}, {"ratio", u.values[i] / e}});
    }
    json renewal = {{"method", to_string(u.method)}, {"grid", u.grid}, {"values", u.values}, {"at_zero", u.at_zero}};
    if (!u.std_errors.empty()) renewal["std_errors"] = u.std_errors;
    o.payload = {{"renewal", renewal}, {"envelope", env}, {"envelope_sandwich_violations", outside}};
    std::ostringstream sum;
    sum << "renewal function on " << u.grid.size() << " points (" << to_string(u.method) << "), "
        << outside << " points outside [U/4, 4U] of the envelope";

    if (l.measure) {
        // Treat the subordinator as the downward ladder process of a process
        // with jump measure l.measure.
        const LevyMeasureSpec& m = *l.measure;
        auto mu_plus = [&](double x) { return vigon_upward_tail(m, u, x); };
        const IReport I = evaluate_I(mu_plus, u, IConfig{}, &m.plus());
        o.payload["I"] = jio::write_integral(I.stieltjes);
        o.payload["I_convolution_form"] = I.convolution ? jio::write_integral(*I.convolution) : json(nullptr);
        sum << "; I " << to_string(I.stieltjes.status);
        if (I.stieltjes.status == IntegralResult::Status::indeterminate) o.exit_code = kIndeterminate;
    }
    if (!l.overshoot_x.empty()) {
        SimConfig sc;
        sc.n_paths = cfg.n_paths;
        sc.seed = rc.seed;
        sc.epsilon = cfg.epsilon;
        sc.threads = threads;
        json rows = json::array();
        std::size_t violations = 0;
        for (double x : l.overshoot_x) {
            const OvershootSurvival os = overshoot_survival(s, sc, x, l.overshoot_y);
            const double ux = u(x);
            const double use = u.std_errors.empty() ? 0.0 : [&] {
                const auto it = std::lower_bound(u.grid.begin(), u.grid.end(), x);
                return it == u.grid.end() ? u.std_errors.back() : u.std_errors[static_cast<std::size_t>(it - u.grid.begin())];
            }();
            for (std::size_t j = 0; j < os.y.size(); ++j) {
                const double y = os.y[j];
                const double lo_c = s.tail(x + y), hi_c = s.tail(y);
                const double se_lo = std::hypot(os.survival_se[j], lo_c * use);
                const double se_hi = std::hypot(os.survival_se[j], hi_c * use);
                const bool ok = os.survival[j] >= lo_c * ux - 3.0 * se_lo && os.survival[j] <= hi_c * ux + 3.0 * se_hi;
                violations += !ok;
                rows.push_back({{"x", x},
                                {"y", y},
                                {"survival", os.survival[j]},
                                {"survival_se", os.survival_se[j]},
                                {"lower", lo_c * ux},
                                {"upper", hi_c * ux},
                                {"inside", ok}});
            }
        }
        o.payload["overshoot"] = rows;
        o.payload["overshoot_sandwich_violations"] = violations;
        sum << "; overshoot sandwich violations " << violations;
    }
    o.summary = sum.str();
    return o;
}

// ---------------------------------------------------------------------------

int emit(const Output& out, const std::string& format, const std::string& out_path, const json& record) {
    const std::string text = format == "csv" ? out.csv : record.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
        std::cout.flush();
    } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw ConfigError("cannot write --out file " + out_path);
        f << text;
    }
    return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Partial right inverses of Levy processes: integral criteria and Monte Carlo checks."};
    app.set_version_flag("--version", std::string(kVersion));
    std::string config_path, cache_dir, out_path, format = "auto";
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    bool with_mc = false;

    app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--set", sets, "Override a config value, key.path=value (repeatable)");
    app.add_option("--seed", seed, "Random seed (overrides the config)");
    app.add_option("--cache", cache_dir, "Result cache directory (default $LEVY_PRI_CACHE)");
    app.add_option("--out", out_path, "Write the result here instead of stdout");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"auto", "csv", "json"}));
    app.add_option("--threads", threads, "Worker threads for Monte Carlo")->check(CLI::Range(1u, 1024u));

    const std::vector<std::pair<std::string, std::string>> cmds = {
        {"classify", "Variation class and integrability of the jump measure"},
        {"criterion", "Integrals J and L and the PRI decision"},
        {"phase-scan", "PRI phase diagram over power-law exponents"},
        {"simulate", "Monte Carlo dyadic right inverse and hitting functionals"},
        {"ladder", "Renewal function, envelope, I and overshoot checks for a subordinator"}};
    for (const auto& [name, help] : cmds) {
        auto* sub = app.add_subcommand(name, help);
        sub->fallthrough();
        if (name == "phase-scan") sub->add_flag("--with-mc", with_mc, "Add a Monte Carlo finite-fraction column");
    }
    app.require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfig;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();

    try {
        json cfg = json::object();
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            try {
                cfg = json::parse(f);
            } catch (const json::parse_error& e) {
                throw ConfigError(std::string("config is not valid JSON: ") + e.what());
            }
        }
        for (const auto& s : sets) apply_set(cfg, s);
        if (seed) cfg["seed"] = *seed;
        if (with_mc) cfg["phase_scan"]["with_mc"] = true;
        const RunConfig rc = read_config(cfg);

        const json canonical = canonical_config(cmd, rc);
        const std::string hash = jio::hex64(jio::fnv1a64(cmd + "\n" + jio::canonical_dump(canonical)));
        if (format == "auto") format = (cmd == "classify" || cmd == "criterion") ? "json" : "csv";

        if (cache_dir.empty())
            if (const char* env = std::getenv("LEVY_PRI_CACHE")) cache_dir = env;
        const fs::path cache_file = cache_dir.empty() ? fs::path() : fs::path(cache_dir) / (hash + ".json");
        if (!cache_dir.empty() && fs::exists(cache_file)) {
            std::ifstream f(cache_file);
            const json rec = json::parse(f);
            Output o;
            o.csv = rec.at("csv").get<std::string>();
            o.exit_code = rec.at("exit_code").get<int>();
            json shown = rec;
            shown.erase("csv");
            shown.erase("exit_code");
            std::cerr << "cache hit " << hash << " (" << cache_file.string() << ")\n";
            return emit(o, format, out_path, shown);
        }

        Output o;
        if (cmd == "classify") o = cmd_classify(rc);
        else if (cmd == "criterion") o = cmd_criterion(rc);
        else if (cmd == "phase-scan") o = cmd_phase_scan(rc);
        else if (cmd == "simulate") o = cmd_simulate(rc, threads);
        else o = cmd_ladder(rc, threads);

        json record = {{"config_hash", hash},
                       {"timestamp", utc_now()},
                       {"version", kVersion},
                       {"subcommand", cmd},
                       {"payload_schema", o.schema},
                       {"config", canonical},
                       {"payload", o.payload}};
        if (!cache_dir.empty()) {
            fs::create_directories(cache_dir);
            json stored = record;
            stored["csv"] = o.csv;
            stored["exit_code"] = o.exit_code;
            std::ofstream f(cache_file, std::ios::binary);
            f << stored.dump(2) << "\n";
        }
        if (!o.summary.empty()) std::cerr << o.summary << "\n";
        return emit(o, format, out_path, record);
    } catch (const BudgetError& e) {
        std::cerr << "refused: " << e.what() << "\n";
        if (e.suggested_epsilon() > 0.0) std::cerr << "suggested sim.epsilon: " << fmt(e.suggested_epsilon()) << "\n";
        return kBudget;
    } catch (const IndeterminateError& e) {
        std::cerr << "indeterminate: " << e.what() << "\n";
        return kIndeterminate;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    }
}
