#pragma once

// Monte Carlo for Levy processes: compound-Poisson approximation with a
// small-jump cutoff, lazily generated path segments, first passage and
// level-hitting functionals, the coupled dyadic right-inverse construction
// and overshoots of subordinators.
//
// A path is a sequence of segments [t0, t1). Inside a segment the process is
// drift plus Brownian motion; a jump (possibly zero) happens at t1. Each
// segment carries the range [lo, hi] of its continuous part, drawn exactly
// from the Brownian bridge between its end values.

#include "levy_pri/errors.hpp"
#include "levy_pri/ladder.hpp"
#include "levy_pri/measures.hpp"
#include "levy_pri/parallel.hpp"
#include "levy_pri/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace levy_pri {

enum class SmallJumpMode { drop_compensate, gaussian_substitute };

inline const char* to_string(SmallJumpMode m) {
    return m == SmallJumpMode::drop_compensate ? "drop_compensate" : "gaussian_substitute";
}

struct SimConfig {
    double epsilon = 0.01;
    double dt = 1e-3;
    double horizon = 10.0;
    std::size_t n_paths = 1000;
    std::uint64_t seed = 1;
    SmallJumpMode small_jump_mode = SmallJumpMode::drop_compensate;
    double hit_tolerance = 1e-4;
    double theta = 1.0;
    unsigned threads = 1;
    /// Refuse when the expected number of jumps above epsilon per path exceeds this.
    double max_events = 1e6;
    /// Largest number of level steps a dyadic ladder may take.
    std::size_t max_level_steps = std::size_t{1} << 16;
    /// Gaussian substitution is recommended once the variance of the dropped
    /// jumps reaches epsilon^2 times this.
    double gaussian_threshold = 10.0;

    void validate() const {
        if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
        if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
        if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be positive");
        if (n_paths == 0) throw std::invalid_argument("n_paths must be positive");
        if (!(hit_tolerance > 0.0)) throw std::invalid_argument("hit_tolerance must be positive");
        if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
        if (!(gaussian_threshold > 0.0)) throw std::invalid_argument("gaussian_threshold must be positive");
        if (horizon / dt > 1e9) throw BudgetError("horizon / dt exceeds 1e9 skeleton steps");
    }
};

/// How exact-level hits are detected.
///   A: sigma > 0, bridge range of each segment plus proximity at event points;
///   B: sigma = 0 and no infinite upward activity, range of each segment
///      (levels are reached continuously, never by a jump);
///   C: sigma = 0 with infinite upward activity, proximity only (heuristic).
enum class HitClass { A, B, C };

inline const char* to_string(HitClass c) {
    switch (c) {
        case HitClass::A: return "A";
        case HitClass::B: return "B";
        case HitClass::C: return "C";
    }
    return "?";
}

inline HitClass hit_class(const LevyTriplet& t) {
    if (t.sigma > 0.0) return HitClass::A;
    return t.measure.plus().activity() == Activity::infinite ? HitClass::C : HitClass::B;
}

/// Smallest cutoff (on a log scale) whose jump intensity over the horizon stays
/// within max_events.
inline double suggest_epsilon(const LevyMeasureSpec& m, double horizon, double max_events) {
    auto load = [&](double e) { return (m.plus().tail(e) + m.minus().tail(e)) * horizon; };
    double lo = -40.0, hi = 0.0;  // log2 of epsilon
    if (load(std::ldexp(1.0, -40)) <= max_events) return std::ldexp(1.0, -40);
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        (load(std::exp2(mid)) <= max_events ? hi : lo) = mid;
    }
    return std::exp2(hi);
}

/// Everything a path needs that depends on (triplet, config) only. Refers to
/// the triplet's measure, which must outlive the model.
struct PathModel {
    HitClass cls = HitClass::B;
    double drift = 0.0;
    double sigma = 0.0;
    double rate_plus = 0.0;
    double rate_minus = 0.0;
    double small_jump_variance = 0.0;  // of the jumps below epsilon
    bool gaussian_recommended = false;
    JumpSampler plus;
    JumpSampler minus;

    PathModel(const LevyTriplet& t, const SimConfig& cfg) {
        t.validate();
        cfg.validate();
        cls = hit_class(t);
        const HalfMeasure& p = t.measure.plus();
        const HalfMeasure& m = t.measure.minus();
        if (p.activity() == Activity::indeterminate || m.activity() == Activity::indeterminate)
            throw IndeterminateError("jump activity is indeterminate; cannot simulate");
        const double e = cfg.epsilon;
        plus = JumpSampler(p, e);
        minus = JumpSampler(m, e);
        rate_plus = plus.rate();
        rate_minus = minus.rate();
        const double load = (rate_plus + rate_minus) * cfg.horizon;
        if (!std::isfinite(load) || load > cfg.max_events) {
            const double s = suggest_epsilon(t.measure, cfg.horizon, cfg.max_events);
            std::ostringstream msg;
            msg << "expected " << load << " jumps above epsilon per path exceeds the budget of " << cfg.max_events
                << "; try epsilon >= " << s;
            throw BudgetError(msg.str(), s);
        }
        drift = t.gamma - (p.moment(1, e, 1.0) - m.moment(1, e, 1.0));
        small_jump_variance = p.moment(2, 0.0, e) + m.moment(2, 0.0, e);
        gaussian_recommended = small_jump_variance >= e * e * cfg.gaussian_threshold;
        double var = t.sigma * t.sigma;
        if (cfg.small_jump_mode == SmallJumpMode::gaussian_substitute) var += small_jump_variance;
        sigma = std::sqrt(var);
    }
};

struct Segment {
    double t0 = 0.0, t1 = 0.0;
    double x0 = 0.0;    // value at t0 (after any jump at t0)
    double x1 = 0.0;    // left limit at t1
    double lo = 0.0, hi = 0.0;
    double jump = 0.0;  // jump at t1
};

/// One path, generated segment by segment on demand. Deterministic in
/// (seed, path index) regardless of how far or in which pattern it is read.
class LevyPath {
public:
    LevyPath(const PathModel& model, const SimConfig& cfg, std::uint64_t index)
        : m_(&model),
          cfg_(cfg),
          times_(cfg.seed, index, StreamPurpose::jump_times),
          sizes_(cfg.seed, index, StreamPurpose::jump_sizes),
          gauss_(cfg.seed, index, StreamPurpose::gaussian),
          bridge_(cfg.seed, index, StreamPurpose::bridge_extremes) {
        const double rate = m_->rate_plus + m_->rate_minus;
        next_jump_ = rate > 0.0 ? times_.exponential(rate) : kInf;
    }

    /// Segment i, or nullptr if the path ends at the horizon before it.
    const Segment* segment(std::size_t i) {
        while (segs_.size() <= i)
            if (!extend()) return nullptr;
        return &segs_[i];
    }

    const std::vector<Segment>& generated() const { return segs_; }

    void generate_all() {
        while (extend()) {
        }
    }

private:
    bool extend() {
        if (done_) return false;
        Segment s;
        s.t0 = t_;
        s.x0 = x_;
        const double grid_next = static_cast<double>(step_ + 1) * cfg_.dt;
        double t1 = std::min({grid_next, next_jump_, cfg_.horizon});
        const bool at_jump = next_jump_ <= t1;
        const bool at_grid = grid_next <= t1;
        s.t1 = t1;
        const double dt = t1 - s.t0;
        const double sd = m_->sigma * std::sqrt(dt);
        s.x1 = s.x0 + m_->drift * dt + (sd > 0.0 ? sd * gauss_.normal() : 0.0);
        if (sd > 0.0) {
            const double d = s.x1 - s.x0;
            const double up = std::sqrt(d * d - 2.0 * sd * sd * std::log(bridge_.uniform()));
            const double down = std::sqrt(d * d - 2.0 * sd * sd * std::log(bridge_.uniform()));
            s.hi = 0.5 * (s.x0 + s.x1 + up);
            s.lo = 0.5 * (s.x0 + s.x1 - down);
        } else {
            s.lo = std::min(s.x0, s.x1);
            s.hi = std::max(s.x0, s.x1);
        }
        if (at_jump && t1 < cfg_.horizon) {
            const double rate = m_->rate_plus + m_->rate_minus;
            const bool up = sizes_.uniform() * rate < m_->rate_plus;
            s.jump = up ? m_->plus(sizes_) : -m_->minus(sizes_);
            next_jump_ += times_.exponential(rate);
        }
        if (at_grid) ++step_;
        if (t1 >= cfg_.horizon) done_ = true;
        t_ = t1;
        x_ = s.x1 + s.jump;
        segs_.push_back(s);
        return true;
    }

    const PathModel* m_;
    SimConfig cfg_;
    CounterStream times_, sizes_, gauss_, bridge_;
    std::vector<Segment> segs_;
    double t_ = 0.0, x_ = 0.0, next_jump_ = kInf;
    std::uint64_t step_ = 0;
    bool done_ = false;
};

/// Time inside a segment assigned to a level its continuous part reaches.
/// Deterministic, so every level has one well-defined hit time per segment.
inline double crossing_time(const Segment& s, double level) {
    const double da = std::abs(level - s.x0), db = std::abs(level - s.x1);
    const double f = da + db > 0.0 ? da / (da + db) : 0.0;
    return s.t0 + (s.t1 - s.t0) * f;
}

/// First time >= `from` at which the path hits `level` under the given
/// detection class. Keeps a cursor, so successive calls with nondecreasing
/// `from` cost one pass over the path in total.
class HitSearcher {
public:
    HitSearcher(LevyPath& path, HitClass cls, double eta) : path_(&path), cls_(cls), eta_(eta) {}

    double first_hit(double level, double from) {
        // Start one segment back: a left limit at the end of the previous
        // segment can carry a hit at exactly `from`.
        for (std::size_t i = cursor_ > 0 ? cursor_ - 1 : 0;; ++i) {
            const Segment* s = path_->segment(i);
            if (!s) {
                cursor_ = i;
                return kInf;
            }
            if (s->t1 < from) continue;
            double best = kInf;
            const bool proximity = cls_ != HitClass::B;
            const bool range = cls_ != HitClass::C;
            if (proximity && s->t0 >= from && std::abs(s->x0 - level) <= eta_) best = s->t0;
            if (range && best == kInf && s->lo <= level && level <= s->hi) {
                const double tc = crossing_time(*s, level);
                if (tc >= from) best = tc;
            }
            if (proximity && best == kInf && std::abs(s->x1 - level) <= eta_) best = s->t1;
            if (best < kInf) {
                cursor_ = i;
                return best;
            }
        }
    }

private:
    LevyPath* path_;
    HitClass cls_;
    double eta_;
    std::size_t cursor_ = 0;
};

// ---------------------------------------------------------------------------
// Paths and first passage

struct PathSkeleton {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<std::pair<double, double>> jump_log;  // (time, size)
};

inline PathSkeleton simulate_path(const LevyTriplet& t, const SimConfig& cfg, std::uint64_t path_index) {
    const PathModel model(t, cfg);
    LevyPath path(model, cfg, path_index);
    path.generate_all();
    PathSkeleton sk;
    for (const Segment& s : path.generated()) {
        sk.times.push_back(s.t0);
        sk.values.push_back(s.x0);
        if (s.jump != 0.0) sk.jump_log.emplace_back(s.t1, s.jump);
    }
    const Segment& last = path.generated().back();
    sk.times.push_back(last.t1);
    sk.values.push_back(last.x1);
    return sk;
}

struct FirstPassage {
    double time = kInf;  // infinite: not above the level by the horizon
    double overshoot = std::numeric_limits<double>::quiet_NaN();

    bool finite() const { return std::isfinite(time); }
};

inline FirstPassage first_passage_above(LevyPath& path, double level) {
    for (std::size_t i = 0;; ++i) {
        const Segment* s = path.segment(i);
        if (!s) return {};
        if (s->hi >= level) return {s->x0 >= level ? s->t0 : crossing_time(*s, level), 0.0};
        const double after = s->x1 + s->jump;
        if (after > level) return {s->t1, after - level};
    }
}

inline FirstPassage first_passage_above(const LevyTriplet& t, const SimConfig& cfg, std::uint64_t path_index,
                                        double level) {
    if (!(level > 0.0)) throw std::domain_error("first_passage_above: level must be positive");
    const PathModel model(t, cfg);
    LevyPath path(model, cfg, path_index);
    return first_passage_above(path, level);
}

// ---------------------------------------------------------------------------
// Hitting functionals

struct ToleranceEstimate {
    double eta = 0.0;
    double one_minus_laplace = 0.0;
    double one_minus_laplace_se = 0.0;
    double p_hat = 0.0;
    double p_hat_se = 0.0;
};

struct HitEstimate {
    double level = 0.0;
    HitClass cls = HitClass::B;
    /// Estimates of 1 - E[exp(-theta T_x)] and P(T_x > horizon); the finest
    /// tolerance for class C.
    double one_minus_laplace = 0.0;
    double one_minus_laplace_se = 0.0;
    double p_hat = 0.0;
    double p_hat_se = 0.0;
    bool heuristic = false;
    bool inconclusive = false;
    /// Class C: one entry per tolerance eta, eta/2, eta/4.
    std::vector<ToleranceEstimate> by_tolerance;
    /// Class C: change in p_hat per halving of the tolerance.
    double tolerance_trend = 0.0;
    std::string note = "horizon-censored";
};

namespace detail {

struct MeanAcc {
    double sum = 0.0, sum_sq = 0.0;
    void add(double v) {
        sum += v;
        sum_sq += v * v;
    }
    void merge(const MeanAcc& o) {
        sum += o.sum;
        sum_sq += o.sum_sq;
    }
    double mean(double n) const { return sum / n; }
    double se(double n) const {
        const double m = sum / n;
        return std::sqrt(std::max(0.0, sum_sq / n - m * m) / std::max(1.0, n - 1.0));
    }
};

inline std::vector<double> tolerances(const HitClass cls, double eta) {
    if (cls == HitClass::C) return {eta, eta / 2.0, eta / 4.0};
    return {eta};
}

inline void check_tolerance(double eta, double level) {
    if (eta > level / 100.0) throw PreconditionError("hit tolerance must be at most level / 100");
}

}  // namespace detail

inline HitEstimate estimate_hit_functional(const LevyTriplet& t, const SimConfig& cfg, double level) {
    if (!(level > 0.0)) throw std::domain_error("estimate_hit_functional: level must be positive");
    const PathModel model(t, cfg);
    detail::check_tolerance(cfg.hit_tolerance, level);
    const std::vector<double> etas = detail::tolerances(model.cls, cfg.hit_tolerance);
    const std::size_t ne = etas.size();

    struct Partial {
        std::vector<detail::MeanAcc> laplace, censored;
    };
    auto block = [&](std::size_t begin, std::size_t end) {
        Partial p{std::vector<detail::MeanAcc>(ne), std::vector<detail::MeanAcc>(ne)};
        for (std::size_t i = begin; i < end; ++i) {
            LevyPath path(model, cfg, i);
            for (std::size_t e = 0; e < ne; ++e) {
                HitSearcher hs(path, model.cls, etas[e]);
                const double T = hs.first_hit(level, 0.0);
                p.laplace[e].add(std::isfinite(T) ? -std::expm1(-cfg.theta * T) : 1.0);
                p.censored[e].add(std::isfinite(T) ? 0.0 : 1.0);
            }
        }
        return p;
    };
    const auto parts = run_blocks(cfg.n_paths, 64, cfg.threads, block);
    std::vector<detail::MeanAcc> lap(ne), cen(ne);
    for (const auto& p : parts)
        for (std::size_t e = 0; e < ne; ++e) {
            lap[e].merge(p.laplace[e]);
            cen[e].merge(p.censored[e]);
        }

    const double n = static_cast<double>(cfg.n_paths);
    HitEstimate h;
    h.level = level;
    h.cls = model.cls;
    for (std::size_t e = 0; e < ne; ++e)
        h.by_tolerance.push_back({etas[e], lap[e].mean(n), lap[e].se(n), cen[e].mean(n), cen[e].se(n)});
    const ToleranceEstimate& fin = h.by_tolerance.back();
    h.one_minus_laplace = fin.one_minus_laplace;
    h.one_minus_laplace_se = fin.one_minus_laplace_se;
    h.p_hat = fin.p_hat;
    h.p_hat_se = fin.p_hat_se;
    if (model.cls == HitClass::C) {
        h.heuristic = true;
        h.tolerance_trend = (h.by_tolerance.back().p_hat - h.by_tolerance.front().p_hat) / 2.0;
        h.inconclusive = std::all_of(h.by_tolerance.begin(), h.by_tolerance.end(),
                                     [](const ToleranceEstimate& e) { return e.p_hat >= 1.0; });
        h.note = "horizon-censored; proximity hits, heuristic";
    }
    return h;
}

// ---------------------------------------------------------------------------
// Dyadic construction

struct DyadicLadder {
    double K = kInf;  // T_n^{2^n}; infinite if some level is not hit by the horizon
    std::vector<double> T;  // T_n^1, T_n^2, ... as far as computed
    bool truncated = false;
};

/// Sequential first hits of k / 2^n, k = 1..2^n, each after the previous one.
inline DyadicLadder dyadic_inverse(LevyPath& path, HitClass cls, double eta, int n, std::size_t max_steps) {
    if (n < 1 || n > 62) throw std::invalid_argument("dyadic level n must lie in [1, 62]");
    const std::size_t steps = std::size_t{1} << n;
    DyadicLadder d;
    HitSearcher hs(path, cls, eta);
    double s = 0.0;
    const double step = std::ldexp(1.0, -n);
    for (std::size_t k = 1; k <= steps; ++k) {
        if (k > max_steps) {
            d.truncated = true;
            d.K = std::numeric_limits<double>::quiet_NaN();
            return d;
        }
        s = hs.first_hit(static_cast<double>(k) * step, s);
        d.T.push_back(s);
        if (!std::isfinite(s)) return d;
    }
    d.K = s;
    return d;
}

inline DyadicLadder dyadic_inverse(const LevyTriplet& t, const SimConfig& cfg, std::uint64_t path_index, int n) {
    const PathModel model(t, cfg);
    LevyPath path(model, cfg, path_index);
    return dyadic_inverse(path, model.cls, cfg.hit_tolerance, n, cfg.max_level_steps);
}

struct DyadicRecord {
    int n = 0;
    double finite_fraction = 0.0;
    double finite_fraction_se = 0.0;
    std::size_t truncated = 0;
    std::vector<double> K;  // per path, in path order
};

struct PriEstimate {
    HitClass cls = HitClass::B;
    bool heuristic = false;
    std::vector<HitEstimate> levels;
    std::vector<DyadicRecord> dyadic;
    /// Paths on which K^(m) > K^(n) for some m < n. Zero by construction.
    std::size_t monotonicity_violations = 0;
    /// "stabilizing", "decaying" or "inconclusive".
    std::string trend = "inconclusive";
    bool gaussian_recommended = false;
};

inline PriEstimate estimate_pri_existence(const LevyTriplet& t, const SimConfig& cfg, std::vector<int> n_list,
                                          const std::vector<double>& levels = {}) {
    std::sort(n_list.begin(), n_list.end());
    n_list.erase(std::unique(n_list.begin(), n_list.end()), n_list.end());
    const PathModel model(t, cfg);
    const std::size_t nn = n_list.size();

    PriEstimate out;
    out.cls = model.cls;
    out.heuristic = model.cls == HitClass::C;
    out.gaussian_recommended = model.gaussian_recommended;
    for (double x : levels) out.levels.push_back(estimate_hit_functional(t, cfg, x));

    struct Partial {
        std::vector<std::vector<double>> K;  // [n index][path in block]
        std::vector<std::size_t> truncated;
        std::size_t violations = 0;
    };
    auto block = [&](std::size_t begin, std::size_t end) {
        Partial p{std::vector<std::vector<double>>(nn), std::vector<std::size_t>(nn, 0), 0};
        for (std::size_t i = begin; i < end; ++i) {
            LevyPath path(model, cfg, i);
            double prev = -kInf;
            for (std::size_t j = 0; j < nn; ++j) {
                const DyadicLadder d = dyadic_inverse(path, model.cls, cfg.hit_tolerance, n_list[j],
                                                      cfg.max_level_steps);
                p.K[j].push_back(d.K);
                p.truncated[j] += d.truncated;
                if (!d.truncated) {
                    if (d.K < prev) ++p.violations;
                    prev = d.K;
                }
            }
        }
        return p;
    };
    const auto parts = run_blocks(cfg.n_paths, 16, cfg.threads, block);

    const double np = static_cast<double>(cfg.n_paths);
    for (std::size_t j = 0; j < nn; ++j) {
        DyadicRecord r;
        r.n = n_list[j];
        for (const auto& p : parts) {
            r.K.insert(r.K.end(), p.K[j].begin(), p.K[j].end());
            r.truncated += p.truncated[j];
        }
        const double finite =
            static_cast<double>(std::count_if(r.K.begin(), r.K.end(), [](double k) { return std::isfinite(k); }));
        r.finite_fraction = finite / np;
        r.finite_fraction_se = std::sqrt(r.finite_fraction * (1.0 - r.finite_fraction) / np);
        out.dyadic.push_back(std::move(r));
    }
    for (const auto& p : parts) out.monotonicity_violations += p.violations;

    if (nn >= 2) {
        const DyadicRecord& a = out.dyadic[nn - 2];
        const DyadicRecord& b = out.dyadic[nn - 1];
        const double noise = 3.0 * std::max(std::sqrt(0.25 / np), b.finite_fraction_se);
        if (b.finite_fraction == 0.0)
            out.trend = "decaying";
        else if (a.finite_fraction - b.finite_fraction <= noise)
            out.trend = "stabilizing";
        else
            out.trend = "decaying";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Overshoots of subordinators

struct OvershootSurvival {
    double x = 0.0;
    std::vector<double> y;
    std::vector<double> survival;     // P(O(x) > y), killed paths count as no overshoot
    std::vector<double> survival_se;
    double passage_fraction = 0.0;    // paths that passed x before being killed
};

inline OvershootSurvival overshoot_survival(const SubordinatorSpec& s, const SimConfig& cfg, double x,
                                            const std::vector<double>& y_grid) {
    s.validate();
    if (!(x > 0.0)) throw std::domain_error("overshoot_survival: x must be positive");
    const Activity act = s.jumps.activity();
    if (act == Activity::indeterminate) throw IndeterminateError("jump activity of the subordinator is indeterminate");
    const double eps = act == Activity::infinite ? cfg.epsilon : 0.0;
    const double drift = s.drift + (eps > 0.0 ? s.jumps.moment(1, 0.0, eps) : 0.0);
    const JumpSampler jump(s.jumps, eps);
    const double rate = jump.rate();
    const double q = rate + s.kill_rate;
    if (q == 0.0 && drift == 0.0) throw PreconditionError("subordinator never moves");
    const std::size_t ny = y_grid.size();

    struct Partial {
        std::vector<double> count;
        double passed = 0.0;
    };
    auto block = [&](std::size_t begin, std::size_t end) {
        Partial p{std::vector<double>(ny, 0.0), 0.0};
        for (std::size_t i = begin; i < end; ++i) {
            CounterStream rng(cfg.seed, i, StreamPurpose::overshoot);
            double pos = 0.0, over = -1.0;
            for (;;) {
                const double tau = q > 0.0 ? rng.exponential(q) : kInf;
                if (drift > 0.0 && pos + drift * tau > x) {
                    over = 0.0;
                    break;
                }
                pos += drift * tau;
                if (rng.uniform() * q < s.kill_rate) break;
                pos += jump(rng);
                if (pos > x) {
                    over = pos - x;
                    break;
                }
            }
            if (over >= 0.0) p.passed += 1.0;
            for (std::size_t j = 0; j < ny; ++j) p.count[j] += over > y_grid[j];
        }
        return p;
    };
    const auto parts = run_blocks(cfg.n_paths, 1024, cfg.threads, block);
    OvershootSurvival r;
    r.x = x;
    r.y = y_grid;
    std::vector<double> count(ny, 0.0);
    double passed = 0.0;
    for (const auto& p : parts) {
        for (std::size_t j = 0; j < ny; ++j) count[j] += p.count[j];
        passed += p.passed;
    }
    const double n = static_cast<double>(cfg.n_paths);
    for (std::size_t j = 0; j < ny; ++j) {
        const double f = count[j] / n;
        r.survival.push_back(f);
        r.survival_se.push_back(std::sqrt(f * (1.0 - f) / n));
    }
    r.passage_fraction = passed / n;
    return r;
}

// ---------------------------------------------------------------------------
// Path dumps

inline void write_path_csv(std::ostream& os, const std::vector<PathSkeleton>& paths, std::size_t first_index = 0) {
    std::ostringstream line;
    line.precision(17);
    os << "path_index,t,X_t\r\n";
    for (std::size_t p = 0; p < paths.size(); ++p)
        for (std::size_t i = 0; i < paths[p].times.size(); ++i) {
            line.str("");
            line << first_index + p << ',' << paths[p].times[i] << ',' << paths[p].values[i];
            os << line.str() << "\r\n";
        }
}

inline void write_jump_csv(std::ostream& os, const std::vector<PathSkeleton>& paths, std::size_t first_index = 0) {
    std::ostringstream line;
    line.precision(17);
    os << "path_index,t,jump_size\r\n";
    for (std::size_t p = 0; p < paths.size(); ++p)
        for (const auto& [t, j] : paths[p].jump_log) {
            line.str("");
            line << first_index + p << ',' << t << ',' << j;
            os << line.str() << "\r\n";
        }
}

}  // namespace levy_pri
