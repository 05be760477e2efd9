#pragma once

// Levy triplets, one-sided jump measures and their tail functions.
//
// A measure is described by a small tree (LevyMeasureSpec) that is
// flattened at construction into two HalfMeasure objects, one per side of
// the origin. Every numerical routine works on a HalfMeasure, which is a sum
// of pieces with closed-form tails wherever possible:
//
//   PowerPiece      tail c * x^-p on (0, cutoff), optional atom at the cutoff
//   AtomPiece       point mass
//   TabulatedPiece  log-log interpolated tail on a grid
//   LawPiece        mass * P(side * J > x) for a named jump law J
//
// Tails are right-continuous: tail(x) = Pi((x, inf)) on the given side.

#include "levy_pri/errors.hpp"
#include "levy_pri/quadrature.hpp"
#include "levy_pri/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace levy_pri {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Side { plus, minus };

inline const char* to_string(Side s) { return s == Side::plus ? "plus" : "minus"; }

/// Total mass of one side near the origin.
enum class Activity { zero, finite, infinite, indeterminate };

/// Finiteness of an integral that may be decided analytically or numerically.
enum class Finiteness { finite, infinite, indeterminate };

inline const char* to_string(Activity a) {
    switch (a) {
        case Activity::zero: return "zero";
        case Activity::finite: return "finite";
        case Activity::infinite: return "infinite";
        case Activity::indeterminate: return "indeterminate";
    }
    return "?";
}

inline const char* to_string(Finiteness f) {
    switch (f) {
        case Finiteness::finite: return "finite";
        case Finiteness::infinite: return "infinite";
        case Finiteness::indeterminate: return "indeterminate";
    }
    return "?";
}

namespace detail {

/// Integral of s^q over [a, b]; a may be zero.
inline double power_integral(double q, double a, double b) {
    if (!(b > a)) return 0.0;
    const double e = q + 1.0;
    if (a <= 0.0) {
        if (e <= 0.0) return kInf;
        return std::pow(b, e) / e;
    }
    const double lr = std::log(b / a);
    if (e == 0.0) return lr;
    return std::pow(a, e) * std::expm1(e * lr) / e;
}

inline Activity combine(Activity a, Activity b) {
    if (a == Activity::infinite || b == Activity::infinite) return Activity::infinite;
    if (a == Activity::indeterminate || b == Activity::indeterminate) return Activity::indeterminate;
    if (a == Activity::finite || b == Activity::finite) return Activity::finite;
    return Activity::zero;
}

inline Finiteness combine(Finiteness a, Finiteness b) {
    if (a == Finiteness::infinite || b == Finiteness::infinite) return Finiteness::infinite;
    if (a == Finiteness::indeterminate || b == Finiteness::indeterminate) return Finiteness::indeterminate;
    return Finiteness::finite;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Jump laws for finite-activity components

struct PointLaw {
    double at = 1.0;
};
struct ExponentialLaw {
    double rate = 1.0;
    Side side = Side::plus;
};
struct UniformLaw {
    double lo = 0.0;
    double hi = 1.0;
};
struct NormalLaw {
    double mean = 0.0;
    double sd = 1.0;
};

using JumpLaw = std::variant<PointLaw, ExponentialLaw, UniformLaw, NormalLaw>;

inline const char* law_name(const JumpLaw& law) {
    constexpr const char* names[] = {"point", "exponential", "uniform", "normal"};
    return names[law.index()];
}

inline void validate(const JumpLaw& law) {
    std::visit(
        [](const auto& l) {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, PointLaw>) {
                if (!(l.at != 0.0) || !std::isfinite(l.at))
                    throw std::invalid_argument("point jump law needs a finite nonzero location");
            } else if constexpr (std::is_same_v<L, ExponentialLaw>) {
                if (!(l.rate > 0.0)) throw std::invalid_argument("exponential jump law needs rate > 0");
            } else if constexpr (std::is_same_v<L, UniformLaw>) {
                if (!(l.lo < l.hi)) throw std::invalid_argument("uniform jump law needs lo < hi");
            } else {
                if (!(l.sd > 0.0)) throw std::invalid_argument("normal jump law needs sd > 0");
            }
        },
        law);
}

namespace detail {

inline double sign_of(Side s) { return s == Side::plus ? 1.0 : -1.0; }

/// P(sign * J > x) for x >= 0.
inline double law_tail(const JumpLaw& law, Side side, double x) {
    const double sg = sign_of(side);
    return std::visit(
        [&](const auto& l) -> double {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, PointLaw>) {
                return sg * l.at > x ? 1.0 : 0.0;
            } else if constexpr (std::is_same_v<L, ExponentialLaw>) {
                return l.side == side ? std::exp(-l.rate * x) : 0.0;
            } else if constexpr (std::is_same_v<L, UniformLaw>) {
                const double w = l.hi - l.lo;
                if (side == Side::plus) return (l.hi - std::clamp(x, l.lo, l.hi)) / w;
                return (std::clamp(-x, l.lo, l.hi) - l.lo) / w;
            } else {
                const double z = (x - sg * l.mean) / (l.sd * std::sqrt(2.0));
                return 0.5 * std::erfc(z);
            }
        },
        law);
}

/// Density of |J| on the given side at x > 0 (point laws have none).
inline double law_density(const JumpLaw& law, Side side, double x) {
    const double sg = sign_of(side);
    return std::visit(
        [&](const auto& l) -> double {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, PointLaw>) {
                return 0.0;
            } else if constexpr (std::is_same_v<L, ExponentialLaw>) {
                return l.side == side ? l.rate * std::exp(-l.rate * x) : 0.0;
            } else if constexpr (std::is_same_v<L, UniformLaw>) {
                const double y = sg * x;
                return (y >= l.lo && y <= l.hi) ? 1.0 / (l.hi - l.lo) : 0.0;
            } else {
                const double z = (sg * x - l.mean) / l.sd;
                return std::exp(-0.5 * z * z) / (l.sd * std::sqrt(2.0 * 3.14159265358979323846));
            }
        },
        law);
}

inline double law_sample(const JumpLaw& law, CounterStream& rng) {
    return std::visit(
        [&](const auto& l) -> double {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, PointLaw>) {
                return l.at;
            } else if constexpr (std::is_same_v<L, ExponentialLaw>) {
                return sign_of(l.side) * rng.exponential(l.rate);
            } else if constexpr (std::is_same_v<L, UniformLaw>) {
                return l.lo + (l.hi - l.lo) * rng.uniform();
            } else {
                return l.mean + l.sd * rng.normal();
            }
        },
        law);
}

inline std::vector<double> law_breakpoints(const JumpLaw& law) {
    if (const auto* u = std::get_if<UniformLaw>(&law)) return {std::abs(u->lo), std::abs(u->hi)};
    return {};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// One-sided pieces

struct PowerPiece {
    double c = 0.0;
    double index = 0.0;
    double cutoff = 1.0;  // may be +inf
    bool cutoff_atom = true;

    double atom_mass() const {
        return (cutoff_atom && std::isfinite(cutoff)) ? c * std::pow(cutoff, -index) : 0.0;
    }
    /// Constant subtracted so the tail vanishes continuously at the cutoff.
    double floor_level() const {
        return (!cutoff_atom && std::isfinite(cutoff)) ? c * std::pow(cutoff, -index) : 0.0;
    }
};

struct AtomPiece {
    double location = 1.0;  // magnitude, > 0
    double mass = 0.0;
};

/// Tail given on an increasing grid; log-log linear in between, constant
/// below the first grid point, zero from the last grid point on (the last
/// value becomes an atom there).
struct TabulatedPiece {
    std::vector<double> grid;
    std::vector<double> values;
};

struct LawPiece {
    JumpLaw law;
    double mass = 0.0;
    Side side = Side::plus;
};

using Piece = std::variant<PowerPiece, AtomPiece, TabulatedPiece, LawPiece>;

/// Grid resolution needed before a tabulated tail may be used to answer
/// infinite-activity questions.
inline constexpr double kTabulatedResolution = 1e-4;

namespace detail {

// -- tabulated helpers ------------------------------------------------------

struct TabSegment {
    double lo, hi, v, slope;  // tail = v * (x/lo)^slope on [lo, hi)
};

inline std::vector<TabSegment> tab_segments(const TabulatedPiece& t) {
    std::vector<TabSegment> out;
    for (std::size_t i = 0; i + 1 < t.grid.size(); ++i) {
        const double v0 = t.values[i];
        const double v1 = t.values[i + 1];
        if (v0 <= 0.0) break;
        const double slope = v1 > 0.0 ? std::log(v1 / v0) / std::log(t.grid[i + 1] / t.grid[i]) : 0.0;
        out.push_back({t.grid[i], t.grid[i + 1], v0, slope});
        if (v1 <= 0.0) break;
    }
    return out;
}

/// Atoms of a tabulated tail: drops to zero and the terminal atom.
inline std::vector<std::pair<double, double>> tab_atoms(const TabulatedPiece& t) {
    std::vector<std::pair<double, double>> atoms;
    for (std::size_t i = 0; i + 1 < t.grid.size(); ++i) {
        if (t.values[i] <= 0.0) return atoms;
        if (t.values[i + 1] <= 0.0) {
            atoms.emplace_back(t.grid[i + 1], t.values[i]);
            return atoms;
        }
    }
    if (!t.values.empty() && t.values.back() > 0.0) atoms.emplace_back(t.grid.back(), t.values.back());
    return atoms;
}

inline double tab_tail(const TabulatedPiece& t, double x) {
    const auto& g = t.grid;
    if (g.empty()) return 0.0;
    if (x < g.front()) return t.values.front();
    if (x >= g.back()) return 0.0;
    const auto it = std::upper_bound(g.begin(), g.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - g.begin()) - 1;
    const double v0 = t.values[i];
    const double v1 = t.values[i + 1];
    if (v0 <= 0.0) return 0.0;
    if (v1 <= 0.0) return v0;
    const double slope = std::log(v1 / v0) / std::log(g[i + 1] / g[i]);
    return v0 * std::pow(x / g[i], slope);
}

/// Local power index of the tabulated tail at the small end of its grid,
/// fitted over the lowest decade; NaN when fewer than two points fall there.
inline double tab_index_at_zero(const TabulatedPiece& t) {
    const auto& g = t.grid;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < g.size() && g[i] <= 10.0 * g.front() * (1 + 1e-12); ++i) {
        if (t.values[i] <= 0.0) break;
        const double lx = std::log(g[i]);
        const double ly = std::log(t.values[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return -slope;
}

// -- per-piece operations -----------------------------------------------------

inline double piece_tail(const PowerPiece& p, double x) {
    if (x >= p.cutoff || p.c == 0.0) return 0.0;
    return p.c * std::pow(x, -p.index) - p.floor_level();
}
inline double piece_tail(const AtomPiece& a, double x) { return x < a.location ? a.mass : 0.0; }
inline double piece_tail(const TabulatedPiece& t, double x) { return tab_tail(t, x); }
inline double piece_tail(const LawPiece& l, double x) { return l.mass * law_tail(l.law, l.side, x); }

/// Integral of s^k * tail(s) over [a, b].
inline double piece_tail_integral(const PowerPiece& p, int k, double a, double b, const QuadConfig&) {
    const double hi = std::min(b, p.cutoff);
    if (!(hi > a) || p.c == 0.0) return 0.0;
    double v = p.c * power_integral(k - p.index, a, hi);
    if (const double f = p.floor_level(); f != 0.0) v -= f * power_integral(k, a, hi);
    return v;
}
inline double piece_tail_integral(const AtomPiece& at, int k, double a, double b, const QuadConfig&) {
    return at.mass * power_integral(k, a, std::min(b, at.location));
}
inline double piece_tail_integral(const TabulatedPiece& t, int k, double a, double b, const QuadConfig&) {
    if (t.grid.empty()) return 0.0;
    double v = t.values.front() * power_integral(k, a, std::min(b, t.grid.front()));
    for (const auto& s : tab_segments(t)) {
        const double lo = std::max(a, s.lo);
        const double hi = std::min(b, s.hi);
        if (hi > lo) v += s.v * std::pow(s.lo, -s.slope) * power_integral(k + s.slope, lo, hi);
    }
    return v;
}
inline double piece_tail_integral(const LawPiece& l, int k, double a, double b, const QuadConfig& q) {
    if (!(b > a) || l.mass == 0.0) return 0.0;
    std::vector<double> cuts{a};
    for (double bp : law_breakpoints(l.law))
        if (bp > a && bp < b) cuts.push_back(bp);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    double v = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        v += integrate_gk([&](double s) { return std::pow(s, k) * law_tail(l.law, l.side, s); }, cuts[i],
                          cuts[i + 1], q)
                 .value;
    }
    return l.mass * v;
}

/// Integral of f over (a, b] against the piece. Atoms at b count, atoms at a do not.
template <class F>
double piece_integrate(const PowerPiece& p, F&& f, double a, double b, const QuadConfig& q, EvalBudget* budget) {
    double v = 0.0;
    const double hi = std::min(b, p.cutoff);
    if (hi > a && p.c != 0.0 && p.index > 0.0) {
        const double lo = std::max(a, 0.0);
        v += integrate_gk([&](double x) { return f(x) * p.c * p.index * std::pow(x, -p.index - 1.0); }, lo, hi,
                          q, budget)
                 .value;
    }
    if (const double m = p.atom_mass(); m > 0.0 && p.cutoff > a && p.cutoff <= b) v += m * f(p.cutoff);
    return v;
}
template <class F>
double piece_integrate(const AtomPiece& at, F&& f, double a, double b, const QuadConfig&, EvalBudget*) {
    return (at.location > a && at.location <= b) ? at.mass * f(at.location) : 0.0;
}
template <class F>
double piece_integrate(const TabulatedPiece& t, F&& f, double a, double b, const QuadConfig& q,
                       EvalBudget* budget) {
    double v = 0.0;
    for (const auto& s : tab_segments(t)) {
        const double lo = std::max(a, s.lo);
        const double hi = std::min(b, s.hi);
        if (hi > lo && s.slope != 0.0) {
            const double coef = -s.slope * s.v * std::pow(s.lo, -s.slope);
            v += integrate_gk([&](double x) { return f(x) * coef * std::pow(x, s.slope - 1.0); }, lo, hi, q, budget)
                     .value;
        }
    }
    for (const auto& [loc, m] : tab_atoms(t))
        if (loc > a && loc <= b) v += m * f(loc);
    return v;
}
template <class F>
double piece_integrate(const LawPiece& l, F&& f, double a, double b, const QuadConfig& q, EvalBudget* budget) {
    if (!(b > a) || l.mass == 0.0) return 0.0;
    std::vector<double> cuts{std::max(a, 0.0)};
    for (double bp : law_breakpoints(l.law))
        if (bp > cuts.front() && bp < b) cuts.push_back(bp);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    double v = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        v += integrate_gk([&](double x) { return f(x) * law_density(l.law, l.side, x); }, cuts[i], cuts[i + 1], q,
                          budget)
                 .value;
    return l.mass * v;
}

/// Integral of x^k over (a, b] against the piece (k >= 0). a = 0 is allowed.
inline double piece_moment(const PowerPiece& p, int k, double a, double b, const QuadConfig&) {
    double v = 0.0;
    const double hi = std::min(b, p.cutoff);
    if (hi > a && p.c != 0.0 && p.index > 0.0) v += p.c * p.index * power_integral(k - p.index - 1.0, a, hi);
    if (const double m = p.atom_mass(); m > 0.0 && p.cutoff > a && p.cutoff <= b) v += m * std::pow(p.cutoff, k);
    return v;
}
inline double piece_moment(const AtomPiece& at, int k, double a, double b, const QuadConfig&) {
    return (at.location > a && at.location <= b) ? at.mass * std::pow(at.location, k) : 0.0;
}
inline double piece_moment(const TabulatedPiece& t, int k, double a, double b, const QuadConfig&) {
    double v = 0.0;
    for (const auto& s : tab_segments(t)) {
        const double lo = std::max(a, s.lo);
        const double hi = std::min(b, s.hi);
        if (hi > lo && s.slope != 0.0)
            v += -s.slope * s.v * std::pow(s.lo, -s.slope) * power_integral(k + s.slope - 1.0, lo, hi);
    }
    for (const auto& [loc, m] : tab_atoms(t))
        if (loc > a && loc <= b) v += m * std::pow(loc, k);
    return v;
}
inline double piece_moment(const LawPiece& l, int k, double a, double b, const QuadConfig& q) {
    return piece_integrate(l, [k](double x) { return std::pow(x, k); }, a, b, q, nullptr);
}

inline Activity piece_activity(const PowerPiece& p) {
    if (p.c == 0.0) return Activity::zero;
    if (p.index > 0.0) return Activity::infinite;
    return p.atom_mass() > 0.0 ? Activity::finite : Activity::zero;
}
inline Activity piece_activity(const AtomPiece& a) { return a.mass > 0.0 ? Activity::finite : Activity::zero; }
inline Activity piece_activity(const TabulatedPiece& t) {
    if (t.values.empty() || t.values.front() <= 0.0) return Activity::zero;
    const double p = tab_index_at_zero(t);
    if (t.grid.front() > kTabulatedResolution || std::isnan(p)) return Activity::indeterminate;
    if (p > 0.05) return Activity::infinite;
    if (p < 0.01) return Activity::finite;
    return Activity::indeterminate;
}
inline Activity piece_activity(const LawPiece& l) {
    return l.mass * law_tail(l.law, l.side, 0.0) > 0.0 ? Activity::finite : Activity::zero;
}

/// Is the integral of x over (0, 1] finite?
inline Finiteness piece_first_moment(const PowerPiece& p) {
    return (p.c == 0.0 || p.index < 1.0) ? Finiteness::finite : Finiteness::infinite;
}
inline Finiteness piece_first_moment(const AtomPiece&) { return Finiteness::finite; }
inline Finiteness piece_first_moment(const TabulatedPiece& t) {
    switch (piece_activity(t)) {
        case Activity::zero:
        case Activity::finite: return Finiteness::finite;
        case Activity::indeterminate: return Finiteness::indeterminate;
        case Activity::infinite: break;
    }
    const double p = tab_index_at_zero(t);
    if (p < 0.95) return Finiteness::finite;
    if (p > 1.05) return Finiteness::infinite;
    return Finiteness::indeterminate;
}
inline Finiteness piece_first_moment(const LawPiece&) { return Finiteness::finite; }

/// Smallest x >= eps with tail(x) <= target, where 0 < target < tail(eps).
inline double piece_sample(const PowerPiece& p, double eps, CounterStream& rng, double tail_at_eps) {
    const double target = rng.uniform() * tail_at_eps;
    if (target < p.atom_mass()) return p.cutoff;
    if (p.index == 0.0) return p.cutoff;
    return std::max(eps, std::pow((target + p.floor_level()) / p.c, -1.0 / p.index));
}
inline double piece_sample(const PowerPiece& p, double eps, CounterStream& rng) {
    return piece_sample(p, eps, rng, piece_tail(p, eps));
}
inline double piece_sample(const AtomPiece& a, double, CounterStream&) { return a.location; }
inline double piece_sample(const TabulatedPiece& t, double eps, CounterStream& rng) {
    const double target = rng.uniform() * tab_tail(t, eps);
    for (const auto& s : tab_segments(t)) {
        if (s.hi <= eps) continue;
        // flat segments never cross inside; a drop to zero is the terminal atom
        if (s.slope == 0.0) continue;
        const double end_value = s.v * std::pow(s.hi / s.lo, s.slope);
        if (end_value <= target) return std::max(eps, s.lo * std::pow(target / s.v, 1.0 / s.slope));
    }
    const auto atoms = tab_atoms(t);
    return atoms.empty() ? eps : atoms.back().first;
}
inline double piece_sample(const LawPiece& l, double eps, CounterStream& rng) {
    const double sg = sign_of(l.side);
    for (int i = 0; i < 10'000'000; ++i) {
        const double j = sg * law_sample(l.law, rng);
        if (j > eps) return j;
    }
    throw IndeterminateError("jump sampler rejected too many proposals; increase epsilon");
}

}  // namespace detail

// ---------------------------------------------------------------------------

/// One side of a Levy measure, as magnitudes on (0, inf).
class HalfMeasure {
public:
    HalfMeasure() = default;
    explicit HalfMeasure(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {}

    const std::vector<Piece>& pieces() const { return pieces_; }
    bool empty() const { return activity() == Activity::zero; }

    void append(const HalfMeasure& other) { pieces_.insert(pieces_.end(), other.pieces_.begin(), other.pieces_.end()); }

    double tail(double x) const {
        double v = 0.0;
        for (const auto& p : pieces_) v += std::visit([x](const auto& q) { return detail::piece_tail(q, x); }, p);
        return v;
    }

    /// Integral of s^k * tail(s) ds over [a, b].
    double tail_integral(int k, double a, double b, const QuadConfig& q = {}) const {
        double v = 0.0;
        for (const auto& p : pieces_)
            v += std::visit([&](const auto& pc) { return detail::piece_tail_integral(pc, k, a, b, q); }, p);
        return v;
    }

    /// Integral of x^k over (a, b].
    double moment(int k, double a, double b, const QuadConfig& q = {}) const {
        double v = 0.0;
        for (const auto& p : pieces_)
            v += std::visit([&](const auto& pc) { return detail::piece_moment(pc, k, a, b, q); }, p);
        return v;
    }

    /// Integral of f over (a, b].
    template <class F>
    double integrate(F&& f, double a, double b, const QuadConfig& q = {}, EvalBudget* budget = nullptr) const {
        double v = 0.0;
        for (const auto& p : pieces_)
            v += std::visit([&](const auto& pc) { return detail::piece_integrate(pc, f, a, b, q, budget); }, p);
        return v;
    }

    Activity activity() const {
        Activity a = Activity::zero;
        for (const auto& p : pieces_)
            a = detail::combine(a, std::visit([](const auto& pc) { return detail::piece_activity(pc); }, p));
        return a;
    }

    /// tail(0+), infinite for infinite activity.
    double total_mass() const {
        const Activity a = activity();
        if (a == Activity::infinite) return kInf;
        if (a == Activity::indeterminate) return std::numeric_limits<double>::quiet_NaN();
        return tail(std::numeric_limits<double>::min());
    }

    Finiteness first_moment_finiteness() const {
        Finiteness f = Finiteness::finite;
        for (const auto& p : pieces_)
            f = detail::combine(f, std::visit([](const auto& pc) { return detail::piece_first_moment(pc); }, p));
        return f;
    }

    /// Draws a jump magnitude from the measure restricted to (eps, inf),
    /// normalised. Requires tail(eps) > 0.
    double sample_above(double eps, CounterStream& rng) const {
        const double total = tail(eps);
        double u = rng.uniform() * total;
        for (const auto& p : pieces_) {
            const double w = std::visit([eps](const auto& pc) { return detail::piece_tail(pc, eps); }, p);
            if (w <= 0.0) continue;
            if (u < w) return std::visit([&](const auto& pc) { return detail::piece_sample(pc, eps, rng); }, p);
            u -= w;
        }
        for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it) {
            if (std::visit([eps](const auto& pc) { return detail::piece_tail(pc, eps); }, *it) > 0.0)
                return std::visit([&](const auto& pc) { return detail::piece_sample(pc, eps, rng); }, *it);
        }
        throw PreconditionError("sample_above: no mass above epsilon");
    }

    /// Analytic power index at 0+ when every infinite piece is a power piece
    /// with a single common index; NaN otherwise.
    double power_index_at_zero() const {
        double idx = std::numeric_limits<double>::quiet_NaN();
        for (const auto& p : pieces_) {
            if (const auto* pp = std::get_if<PowerPiece>(&p); pp && pp->c > 0.0 && pp->index > 0.0) {
                if (std::isnan(idx) || pp->index > idx) idx = pp->index;
            } else if (std::visit([](const auto& pc) { return detail::piece_activity(pc); }, p) ==
                       Activity::infinite) {
                return std::numeric_limits<double>::quiet_NaN();
            }
        }
        return idx;
    }

    /// Smallest grid point of any tabulated piece (0 if none). Below it the
    /// tail is an extrapolation, not data.
    double resolution_floor() const {
        double r = 0.0;
        for (const auto& p : pieces_)
            if (const auto* t = std::get_if<TabulatedPiece>(&p); t && !t->grid.empty() && t->values.front() > 0.0)
                r = std::max(r, t->grid.front());
        return r;
    }

private:
    std::vector<Piece> pieces_;
};

/// sample_above with the per-piece weights above a fixed cutoff computed once.
/// Refers to the pieces of `h`, which must outlive the sampler.
class JumpSampler {
public:
    JumpSampler() = default;
    JumpSampler(const HalfMeasure& h, double eps) : eps_(eps) {
        for (const auto& p : h.pieces()) {
            const double w = std::visit([eps](const auto& pc) { return detail::piece_tail(pc, eps); }, p);
            if (w > 0.0) {
                pieces_.push_back(&p);
                weights_.push_back(w);
                total_ += w;
            }
        }
    }

    /// Intensity of jumps above the cutoff.
    double rate() const { return total_; }

    double operator()(CounterStream& rng) const {
        if (pieces_.empty()) throw PreconditionError("sample_above: no mass above epsilon");
        std::size_t i = 0;
        if (pieces_.size() > 1) {
            double u = rng.uniform() * total_;
            while (i + 1 < pieces_.size() && u >= weights_[i]) u -= weights_[i++];
        }
        const Piece& p = *pieces_[i];
        if (const auto* pp = std::get_if<PowerPiece>(&p)) return detail::piece_sample(*pp, eps_, rng, weights_[i]);
        return std::visit([&](const auto& pc) { return detail::piece_sample(pc, eps_, rng); }, p);
    }

private:
    double eps_ = 0.0;
    std::vector<const Piece*> pieces_;
    std::vector<double> weights_;
    double total_ = 0.0;
};

// ---------------------------------------------------------------------------
// Measure specification tree

class LevyMeasureSpec;

/// Tails c_plus * x^-beta and c_minus * x^-alpha on (0, 1), zero from 1 on;
/// the mass c at 1 completes each side.
struct PowerLawTails {
    double alpha = 1.5;
    double beta = 0.5;
    double c_minus = 1.0;
    double c_plus = 1.0;
};

struct FiniteActivity {
    double total_mass = 0.0;
    JumpLaw jump_law = PointLaw{};
};

struct TabulatedTails {
    std::vector<double> grid;
    std::vector<double> tail_plus;
    std::vector<double> tail_minus;
};

/// General one-sided power tail; the cutoff may be infinite.
struct OneSidedPower {
    Side side = Side::plus;
    double c = 1.0;
    double index = 0.5;
    double cutoff = 1.0;
    bool cutoff_atom = true;
};

struct ZeroMeasure {};

/// SpectrallyPositive (keep = plus) or SpectrallyNegative (keep = minus).
struct OneSided {
    Side keep = Side::plus;
    std::shared_ptr<const LevyMeasureSpec> inner;
};

struct SumMeasure {
    std::vector<LevyMeasureSpec> parts;
};

class LevyMeasureSpec {
public:
    using Variant =
        std::variant<ZeroMeasure, PowerLawTails, FiniteActivity, TabulatedTails, OneSidedPower, OneSided, SumMeasure>;

    LevyMeasureSpec() : LevyMeasureSpec(ZeroMeasure{}) {}
    LevyMeasureSpec(Variant v) : v_(std::move(v)) { build(); }  // NOLINT(google-explicit-constructor)

    static LevyMeasureSpec spectrally_positive(LevyMeasureSpec inner) {
        return Variant(OneSided{Side::plus, std::make_shared<const LevyMeasureSpec>(std::move(inner))});
    }
    static LevyMeasureSpec spectrally_negative(LevyMeasureSpec inner) {
        return Variant(OneSided{Side::minus, std::make_shared<const LevyMeasureSpec>(std::move(inner))});
    }

    const Variant& variant() const { return v_; }
    const HalfMeasure& side(Side s) const { return s == Side::plus ? plus_ : minus_; }
    const HalfMeasure& plus() const { return plus_; }
    const HalfMeasure& minus() const { return minus_; }

    const char* variant_name() const {
        constexpr const char* names[] = {"zero",       "power_law",   "finite_activity", "tabulated",
                                         "one_sided_power", "one_sided", "sum"};
        return names[v_.index()];
    }

private:
    void build();

    Variant v_;
    HalfMeasure plus_;
    HalfMeasure minus_;
};

namespace detail {

inline void check_tabulated(const std::vector<double>& grid, const std::vector<double>& v, const char* which) {
    if (v.size() != grid.size())
        throw std::invalid_argument(std::string("tabulated ") + which + " must match the grid length");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] >= 0.0) || !std::isfinite(v[i]))
            throw std::invalid_argument(std::string("tabulated ") + which + " values must be finite and >= 0");
        if (i > 0 && v[i] > v[i - 1])
            throw std::invalid_argument(std::string("tabulated ") + which + " values must be nonincreasing");
    }
}

}  // namespace detail

inline void LevyMeasureSpec::build() {
    std::visit(
        [this](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, ZeroMeasure>) {
            } else if constexpr (std::is_same_v<M, PowerLawTails>) {
                if (!(m.alpha >= 0.0 && m.alpha < 2.0)) throw std::invalid_argument("alpha must lie in [0, 2)");
                if (!(m.beta >= 0.0 && m.beta < 2.0)) throw std::invalid_argument("beta must lie in [0, 2)");
                if (!(m.c_minus > 0.0) || !std::isfinite(m.c_minus))
                    throw std::invalid_argument("c_minus must be positive");
                if (!(m.c_plus >= 0.0) || !std::isfinite(m.c_plus))
                    throw std::invalid_argument("c_plus must be nonnegative");
                minus_ = HalfMeasure({PowerPiece{m.c_minus, m.alpha, 1.0, true}});
                plus_ = HalfMeasure({PowerPiece{m.c_plus, m.beta, 1.0, true}});
            } else if constexpr (std::is_same_v<M, FiniteActivity>) {
                if (!(m.total_mass >= 0.0) || !std::isfinite(m.total_mass))
                    throw std::invalid_argument("total_mass must be finite and >= 0");
                validate(m.jump_law);
                if (const auto* pt = std::get_if<PointLaw>(&m.jump_law)) {
                    AtomPiece atom{std::abs(pt->at), m.total_mass};
                    (pt->at > 0 ? plus_ : minus_) = HalfMeasure({atom});
                } else {
                    plus_ = HalfMeasure({LawPiece{m.jump_law, m.total_mass, Side::plus}});
                    minus_ = HalfMeasure({LawPiece{m.jump_law, m.total_mass, Side::minus}});
                }
            } else if constexpr (std::is_same_v<M, TabulatedTails>) {
                if (m.grid.empty()) throw std::invalid_argument("tabulated grid must not be empty");
                for (std::size_t i = 0; i < m.grid.size(); ++i) {
                    if (!(m.grid[i] > 0.0) || !std::isfinite(m.grid[i]))
                        throw std::invalid_argument("tabulated grid must be positive");
                    if (i > 0 && !(m.grid[i] > m.grid[i - 1]))
                        throw std::invalid_argument("tabulated grid must be increasing");
                }
                detail::check_tabulated(m.grid, m.tail_plus, "tail_plus");
                detail::check_tabulated(m.grid, m.tail_minus, "tail_minus");
                plus_ = HalfMeasure({TabulatedPiece{m.grid, m.tail_plus}});
                minus_ = HalfMeasure({TabulatedPiece{m.grid, m.tail_minus}});
            } else if constexpr (std::is_same_v<M, OneSidedPower>) {
                if (!(m.index >= 0.0 && m.index < 2.0)) throw std::invalid_argument("index must lie in [0, 2)");
                if (!(m.c >= 0.0) || !std::isfinite(m.c)) throw std::invalid_argument("c must be >= 0");
                if (!(m.cutoff > 0.0)) throw std::invalid_argument("cutoff must be positive");
                (m.side == Side::plus ? plus_ : minus_) =
                    HalfMeasure({PowerPiece{m.c, m.index, m.cutoff, m.cutoff_atom}});
            } else if constexpr (std::is_same_v<M, OneSided>) {
                if (!m.inner) throw std::invalid_argument("one-sided wrapper needs an inner measure");
                (m.keep == Side::plus ? plus_ : minus_) = m.inner->side(m.keep);
            } else {
                for (const auto& part : m.parts) {
                    plus_.append(part.plus());
                    minus_.append(part.minus());
                }
            }
        },
        v_);
}

struct LevyTriplet {
    double gamma = 0.0;
    double sigma = 0.0;
    LevyMeasureSpec measure;

    void validate() const {
        if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be finite and >= 0");
        if (!std::isfinite(gamma)) throw std::invalid_argument("gamma must be finite");
    }
};

// ---------------------------------------------------------------------------
// Operations

/// Tail of the measure on one side at x > 0.
inline double tail(const LevyMeasureSpec& spec, Side side, double x) {
    if (!(x > 0.0)) throw std::domain_error("tail: x must be positive");
    return spec.side(side).tail(x);
}

struct IntegrabilityReport {
    Activity total = Activity::zero;
    Activity plus = Activity::zero;
    Activity minus = Activity::zero;
    double plus_mass = 0.0;   // tail(0+), inf for infinite activity
    double minus_mass = 0.0;
    Finiteness first_moment = Finiteness::finite;  // integral of (1 ^ |x|)
    double second_moment = 0.0;                    // integral of (1 ^ x^2)
    bool second_moment_converged = false;
};

namespace detail {

/// Integral of (1 ^ x^2) over one side, summed over dyadic bands down to
/// 2^-levels, plus the mass beyond 1.
inline double truncated_second_moment(const HalfMeasure& h, int levels) {
    double s = h.tail(1.0);
    for (int k = 0; k < levels; ++k) s += h.moment(2, std::ldexp(1.0, -k - 1), std::ldexp(1.0, -k));
    return s;
}

}  // namespace detail

/// Mass and moment flags of both sides. Throws IndeterminateError when a side
/// cannot be decided from the data.
inline IntegrabilityReport integrability_report(const LevyMeasureSpec& spec) {
    IntegrabilityReport r;
    r.plus = spec.plus().activity();
    r.minus = spec.minus().activity();
    if (r.plus == Activity::indeterminate || r.minus == Activity::indeterminate)
        throw IndeterminateError("activity near 0 cannot be decided: tabulated grid does not resolve small jumps");
    r.total = detail::combine(r.plus, r.minus);
    r.plus_mass = spec.plus().total_mass();
    r.minus_mass = spec.minus().total_mass();
    r.first_moment = detail::combine(spec.plus().first_moment_finiteness(), spec.minus().first_moment_finiteness());
    if (r.first_moment == Finiteness::indeterminate)
        throw IndeterminateError("integral of (1 ^ |x|) cannot be decided from the tabulated grid");

    const double s500 = detail::truncated_second_moment(spec.plus(), 500) +
                        detail::truncated_second_moment(spec.minus(), 500);
    const double s1000 = detail::truncated_second_moment(spec.plus(), 1000) +
                         detail::truncated_second_moment(spec.minus(), 1000);
    r.second_moment = s1000;
    r.second_moment_converged = std::isfinite(s1000) && std::abs(s1000 - s500) <= 1e-8 * (1.0 + s1000);
    return r;
}

struct VariationClass {
    enum class Kind { bounded, unbounded };
    Kind kind = Kind::unbounded;
    double drift_b = std::numeric_limits<double>::quiet_NaN();  // set iff bounded
    Activity plus = Activity::zero;
    Activity minus = Activity::zero;

    bool bounded() const { return kind == Kind::bounded; }
};

/// Signed integral of x over {|x| <= 1}.
inline double small_jump_mean(const LevyMeasureSpec& spec) {
    return spec.plus().moment(1, 0.0, 1.0) - spec.minus().moment(1, 0.0, 1.0);
}

inline VariationClass classify_variation(const LevyTriplet& t) {
    t.validate();
    const IntegrabilityReport r = integrability_report(t.measure);
    VariationClass v;
    v.plus = r.plus;
    v.minus = r.minus;
    if (t.sigma > 0.0 || r.first_moment == Finiteness::infinite) {
        v.kind = VariationClass::Kind::unbounded;
        return v;
    }
    v.kind = VariationClass::Kind::bounded;
    v.drift_b = t.gamma - small_jump_mean(t.measure);
    return v;
}

}  // namespace levy_pri
