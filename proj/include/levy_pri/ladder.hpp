#pragma once

// Renewal functions of (possibly killed) subordinators and the ladder-height
// identities built on them: the x / A(x) envelope, the upward ladder tail from
// the downward renewal function, the convolution square, the integral I and
// the integrated ladder identity as a residual.

#include "levy_pri/criteria.hpp"
#include "levy_pri/errors.hpp"
#include "levy_pri/measures.hpp"
#include "levy_pri/parallel.hpp"
#include "levy_pri/quadrature.hpp"
#include "levy_pri/rng.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace levy_pri {

/// Drift, jump measure (on (0, inf)) and killing rate of a subordinator.
struct SubordinatorSpec {
    double drift = 0.0;
    HalfMeasure jumps;
    double kill_rate = 0.0;

    static SubordinatorSpec pure_drift(double delta, double k = 0.0) { return {delta, {}, k}; }

    /// Stable subordinator with tail c * y^-rho (no cutoff).
    static SubordinatorSpec stable(double rho, double c = 1.0) {
        return {0.0, HalfMeasure({PowerPiece{c, rho, kInf, false}}), 0.0};
    }

    /// The stable subordinator with Laplace exponent lambda^rho.
    static SubordinatorSpec standard_stable(double rho) { return stable(rho, 1.0 / std::tgamma(1.0 - rho)); }

    static SubordinatorSpec compound_poisson(double rate, JumpLaw law, double delta = 0.0, double k = 0.0) {
        if (const auto* pt = std::get_if<PointLaw>(&law))
            return {delta, HalfMeasure({AtomPiece{pt->at, rate}}), k};
        return {delta, HalfMeasure({LawPiece{std::move(law), rate, Side::plus}}), k};
    }

    void validate() const {
        if (!(drift >= 0.0) || !std::isfinite(drift)) throw std::invalid_argument("subordinator drift must be >= 0");
        if (!(kill_rate >= 0.0) || !std::isfinite(kill_rate))
            throw std::invalid_argument("kill rate must be >= 0");
        if (jumps.first_moment_finiteness() != Finiteness::finite)
            throw std::invalid_argument("subordinator jumps need a finite integral of (1 ^ y)");
    }

    double tail(double y) const { return jumps.tail(y); }
};

/// A(y) = integral of the jump tail over (0, y).
inline double integrated_tail(const SubordinatorSpec& s, double y) { return s.jumps.tail_integral(0, 0.0, y); }

/// x / (delta + A(x) + x k): the order of magnitude of U(x).
inline double erickson_envelope(const SubordinatorSpec& s, double x) {
    if (!(x > 0.0)) throw std::domain_error("erickson_envelope: x must be positive");
    return x / (s.drift + integrated_tail(s, x) + x * s.kill_rate);
}

enum class RenewalMethod { monte_carlo, renewal_solve, closed_form };

inline const char* to_string(RenewalMethod m) {
    switch (m) {
        case RenewalMethod::monte_carlo: return "monte_carlo";
        case RenewalMethod::renewal_solve: return "renewal_solve";
        case RenewalMethod::closed_form: return "closed_form";
    }
    return "?";
}

/// U(x) = expected time spent in [0, x], known on a grid.
struct RenewalFunction {
    enum class Interpolation { linear, step };

    std::vector<double> grid;
    std::vector<double> values;
    std::vector<double> std_errors;  // Monte Carlo only
    double at_zero = 0.0;            // U({0}), the mean time spent at 0
    RenewalMethod method = RenewalMethod::closed_form;
    Interpolation interpolation = Interpolation::linear;
    std::function<double(double)> exact;

    double x_max() const { return exact ? kInf : (grid.empty() ? 0.0 : grid.back()); }
    double x_min() const { return exact ? 0.0 : (grid.empty() ? 0.0 : grid.front()); }

    double operator()(double x) const {
        if (!(x > 0.0)) return at_zero;
        if (exact) return exact(x);
        if (grid.empty() || x > grid.back() * (1.0 + 1e-12))
            throw RangeError("renewal function evaluated beyond its grid");
        const auto it = std::upper_bound(grid.begin(), grid.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - grid.begin());
        if (interpolation == Interpolation::step) return i == 0 ? at_zero : values[i - 1];
        if (i == grid.size()) return values.back();
        const double x0 = i == 0 ? 0.0 : grid[i - 1];
        const double u0 = i == 0 ? at_zero : values[i - 1];
        return u0 + (values[i] - u0) * (x - x0) / (grid[i] - x0);
    }

    /// Average of the left and right limits at x.
    double midpoint_value(double x) const {
        if (interpolation != Interpolation::step || exact) return (*this)(x);
        if (!(x > 0.0)) return at_zero;
        const auto it = std::lower_bound(grid.begin(), grid.end(), x);
        if (it != grid.end() && *it == x) {
            const std::size_t i = static_cast<std::size_t>(it - grid.begin());
            return 0.5 * ((i == 0 ? at_zero : values[i - 1]) + values[i]);
        }
        return (*this)(x);
    }
};

inline void write_csv(std::ostream& os, const RenewalFunction& u) {
    os << "x,U\r\n";
    std::ostringstream line;
    line.precision(17);
    for (std::size_t i = 0; i < u.grid.size(); ++i) {
        line.str("");
        line << u.grid[i] << ',' << u.values[i];
        os << line.str() << "\r\n";
    }
}

inline RenewalFunction read_csv(std::istream& is) {
    RenewalFunction u;
    u.method = RenewalMethod::monte_carlo;
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("renewal CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "x,U") throw std::invalid_argument("renewal CSV must start with the header x,U");
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("renewal CSV row without a comma: " + line);
        const double x = std::stod(line.substr(0, comma));
        const double v = std::stod(line.substr(comma + 1));
        if (!u.grid.empty() && !(x > u.grid.back())) throw std::invalid_argument("renewal CSV grid must increase");
        u.grid.push_back(x);
        u.values.push_back(v);
    }
    return u;
}

struct RenewalConfig {
    RenewalMethod method = RenewalMethod::monte_carlo;
    std::size_t n_paths = 10'000;
    std::uint64_t seed = 1;
    /// Jumps at or below epsilon are folded into the drift (Monte Carlo).
    double epsilon = 1e-6;
    unsigned threads = 1;
    /// Lattice step for renewal_solve; 0 picks x_max / 4000.
    double cell = 0.0;
    /// Per-path event cap for Monte Carlo.
    std::size_t max_events_per_path = 10'000'000;
};

namespace detail {

inline void check_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw std::invalid_argument("renewal grid must not be empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) throw std::invalid_argument("renewal grid must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw std::invalid_argument("renewal grid must increase");
    }
}

inline std::optional<std::function<double(double)>> closed_form_renewal(const SubordinatorSpec& s) {
    const double d = s.drift, k = s.kill_rate;
    if (s.jumps.activity() == Activity::zero) {
        if (!(d > 0.0)) return std::nullopt;
        if (k == 0.0) return [d](double x) { return x / d; };
        return [d, k](double x) { return -std::expm1(-k * x / d) / k; };
    }
    if (d != 0.0 || k != 0.0 || s.jumps.pieces().size() != 1) return std::nullopt;
    const auto* p = std::get_if<PowerPiece>(&s.jumps.pieces().front());
    if (!p || std::isfinite(p->cutoff) || !(p->index > 0.0 && p->index < 1.0) || !(p->c > 0.0)) return std::nullopt;
    const double rho = p->index;
    const double scale = 1.0 / (p->c * std::tgamma(1.0 - rho) * std::tgamma(1.0 + rho));
    return [rho, scale](double x) { return scale * std::pow(x, rho); };
}

struct OccupationSums {
    std::vector<double> sum, sum_sq;
    double zero_sum = 0.0;
};

inline RenewalFunction renewal_monte_carlo(const SubordinatorSpec& s, const std::vector<double>& grid,
                                           const RenewalConfig& cfg) {
    const Activity act = s.jumps.activity();
    if (act == Activity::indeterminate) throw IndeterminateError("jump activity of the subordinator is indeterminate");
    double eps = 0.0;
    if (act == Activity::infinite) {
        if (!(cfg.epsilon > 0.0))
            throw PreconditionError("infinite jump activity needs a positive small-jump cutoff");
        eps = cfg.epsilon;
    }
    const double drift = s.drift + (eps > 0.0 ? s.jumps.moment(1, 0.0, eps) : 0.0);
    const double rate = s.jumps.tail(eps > 0.0 ? eps : std::numeric_limits<double>::min());
    const double k = s.kill_rate;
    if (drift == 0.0 && rate == 0.0 && k == 0.0)
        throw PreconditionError("subordinator never moves: the renewal function is infinite");
    const double x_max = grid.back();
    const std::size_t n = grid.size();
    const JumpSampler jump(s.jumps, eps);

    auto one_block = [&](std::size_t begin, std::size_t end) {
        OccupationSums acc{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 0.0};
        std::vector<double> occ(n);
        for (std::size_t path = begin; path < end; ++path) {
            CounterStream rng(cfg.seed, path, StreamPurpose::subordinator);
            std::fill(occ.begin(), occ.end(), 0.0);
            double y = 0.0, at_zero = 0.0;
            std::size_t first = 0;  // grid points below y no longer collect time
            for (std::size_t ev = 0;; ++ev) {
                if (ev > cfg.max_events_per_path)
                    throw BudgetError("renewal Monte Carlo exceeded the per-path event cap", eps * 10.0);
                const double q = rate + k;
                const double tau = q > 0.0 ? rng.exponential(q) : kInf;
                if (drift > 0.0) {
                    for (std::size_t g = first; g < n; ++g) occ[g] += std::min(tau, (grid[g] - y) / drift);
                    y += drift * tau;
                    while (first < n && grid[first] < y) ++first;
                } else {
                    for (std::size_t g = first; g < n; ++g) occ[g] += tau;
                    if (y == 0.0) at_zero += tau;
                }
                if (!std::isfinite(tau) || y > x_max) break;
                if (rng.uniform() * q < k) break;  // killed
                y += jump(rng);
                while (first < n && grid[first] < y) ++first;
                if (y > x_max) break;
            }
            for (std::size_t g = 0; g < n; ++g) {
                acc.sum[g] += occ[g];
                acc.sum_sq[g] += occ[g] * occ[g];
            }
            acc.zero_sum += at_zero;
        }
        return acc;
    };
    const auto blocks = run_blocks(cfg.n_paths, 256, cfg.threads, one_block);

    OccupationSums tot{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 0.0};
    for (const auto& b : blocks) {
        for (std::size_t g = 0; g < n; ++g) {
            tot.sum[g] += b.sum[g];
            tot.sum_sq[g] += b.sum_sq[g];
        }
        tot.zero_sum += b.zero_sum;
    }
    RenewalFunction u;
    u.method = RenewalMethod::monte_carlo;
    u.grid = grid;
    const double np = static_cast<double>(cfg.n_paths);
    for (std::size_t g = 0; g < n; ++g) {
        const double mean = tot.sum[g] / np;
        const double var = std::max(0.0, tot.sum_sq[g] / np - mean * mean);
        u.values.push_back(mean);
        u.std_errors.push_back(std::sqrt(var / std::max(1.0, np - 1.0)));
    }
    u.at_zero = tot.zero_sum / np;
    return u;
}

/// Lattice solution of U = a + (lambda / q) F * U, where q = lambda + k, a(x)
/// is the expected time in [0, x] before the first event and F is the law of
/// the position right after the first jump.
inline RenewalFunction renewal_lattice(const SubordinatorSpec& s, const std::vector<double>& grid,
                                       const RenewalConfig& cfg) {
    const Activity act = s.jumps.activity();
    if (act != Activity::finite && act != Activity::zero)
        throw PreconditionError("renewal_solve needs finite jump activity");
    const double d = s.drift, k = s.kill_rate;
    const double lambda = act == Activity::zero ? 0.0 : s.jumps.total_mass();
    const double q = lambda + k;
    if (q == 0.0 && d == 0.0) throw PreconditionError("subordinator never moves: the renewal function is infinite");
    const double x_max = grid.back();
    const double h = cfg.cell > 0.0 ? cfg.cell : x_max / 4000.0;
    const std::size_t m = static_cast<std::size_t>(std::ceil(x_max / h)) + 1;

    auto a = [&](double x) {
        if (q == 0.0) return x / d;
        if (d == 0.0) return 1.0 / q;
        return -std::expm1(-q * x / d) / q;
    };
    // P(position after first jump <= z) given a jump occurs.
    auto G = [&](double z) {
        if (lambda == 0.0 || z <= 0.0) return 0.0;
        if (d == 0.0) return 1.0 - s.jumps.tail(z) / lambda;
        const double r = q / d;
        return s.jumps.integrate([&](double y) { return -std::expm1(-r * (z - y)); }, 0.0, z) / lambda;
    };
    std::vector<double> F(m);
    double prev = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double g = G((static_cast<double>(j) + 0.5) * h);
        F[j] = std::max(0.0, g - prev);
        prev = g;
    }
    const double w = q > 0.0 ? lambda / q : 0.0;
    std::vector<double> U(m);
    for (std::size_t i = 0; i < m; ++i) {
        double conv = 0.0;
        for (std::size_t j = 1; j <= i; ++j) conv += F[j] * U[i - j];
        U[i] = (a(static_cast<double>(i) * h) + w * conv) / (1.0 - w * F[0]);
    }
    RenewalFunction u;
    u.method = RenewalMethod::renewal_solve;
    u.grid = grid;
    u.at_zero = U[0];
    for (double x : grid) {
        const double pos = x / h;
        const std::size_t i = std::min(m - 2, static_cast<std::size_t>(pos));
        const double f = pos - static_cast<double>(i);
        u.values.push_back(U[i] + f * (U[i + 1] - U[i]));
    }
    return u;
}

}  // namespace detail

inline RenewalFunction renewal_function(const SubordinatorSpec& s, const std::vector<double>& grid,
                                        const RenewalConfig& cfg = {}) {
    s.validate();
    detail::check_grid(grid);
    switch (cfg.method) {
        case RenewalMethod::closed_form: {
            auto f = detail::closed_form_renewal(s);
            if (!f) throw PreconditionError("no closed form renewal function for this subordinator");
            RenewalFunction u;
            u.method = RenewalMethod::closed_form;
            u.grid = grid;
            for (double x : grid) u.values.push_back((*f)(x));
            u.exact = std::move(*f);
            return u;
        }
        case RenewalMethod::renewal_solve: return detail::renewal_lattice(s, grid, cfg);
        case RenewalMethod::monte_carlo: break;
    }
    return detail::renewal_monte_carlo(s, grid, cfg);
}

/// Tail of the upward ladder jumps from the downward renewal function:
/// integral over (x, 1] of U_minus(y - x) against the positive jumps.
inline double vigon_upward_tail(const LevyMeasureSpec& measure, const RenewalFunction& u_minus, double x,
                                const QuadConfig& q = {}) {
    if (!(x > 0.0)) throw std::domain_error("vigon_upward_tail: x must be positive");
    const HalfMeasure& plus = measure.plus();
    if (plus.activity() == Activity::zero || x >= 1.0) return 0.0;
    if (plus.tail(1.0) > 0.0) throw PreconditionError("vigon_upward_tail needs positive jumps truncated at 1");
    if (u_minus.x_max() < (1.0 - x) * (1.0 - 1e-12))
        throw RangeError("downward renewal function does not cover (0, 1 - x]");
    return plus.integrate([&](double y) { return u_minus(y - x); }, x, 1.0, q);
}

/// U*U(y) = integral over [0, y] of U(y - x) U(dx), the atom of U at 0
/// included. Throws IndeterminateError if the result leaves the bracket
/// U(y/2)^2 <= U*U(y) <= U(y)^2.
inline double convolution_square(const RenewalFunction& u, double y) {
    if (!(y > 0.0)) throw std::domain_error("convolution_square: y must be positive");
    if (y > u.x_max() * (1.0 + 1e-12)) throw RangeError("convolution_square: y beyond the renewal grid");

    double v = u.at_zero * u(y);
    if (u.interpolation == RenewalFunction::Interpolation::step && !u.exact) {
        double prev = u.at_zero;
        for (std::size_t i = 0; i < u.grid.size() && u.grid[i] <= y; ++i) {
            v += (u.values[i] - prev) * u.midpoint_value(y - u.grid[i]);
            prev = u.values[i];
        }
    } else {
        std::vector<double> knots{0.0};
        if (!u.exact)
            for (double g : u.grid)
                if (g < y) knots.push_back(g);
        knots.push_back(y);
        constexpr std::size_t kTarget = 8192;
        const std::size_t refine = std::max<std::size_t>(1, kTarget / knots.size());
        double x0 = 0.0, u0 = u.at_zero;
        for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
            const double a = knots[i], b = knots[i + 1];
            for (std::size_t r = 1; r <= refine; ++r) {
                const double x1 = a + (b - a) * static_cast<double>(r) / static_cast<double>(refine);
                const double u1 = u(x1);
                v += (u1 - u0) * u(y - 0.5 * (x0 + x1));
                x0 = x1;
                u0 = u1;
            }
        }
    }
    const double lo = std::pow(u(0.5 * y), 2.0);
    const double hi = std::pow(u(y), 2.0);
    const double slack = 1e-6 * hi;
    if (v < lo - slack || v > hi + slack)
        throw IndeterminateError("convolution square left its bracket: renewal grid too coarse");
    return v;
}

struct IConfig {
    BandProtocol protocol{};
    QuadConfig quad{};
    /// Log-spaced Stieltjes cells per dyadic band.
    int cells_per_band = 64;
};

struct IReport {
    /// I = integral over (0, 1] of mu_plus_tail dU_minus.
    IntegralResult stieltjes;
    /// The same quantity as the integral of (U_minus * U_minus) against the
    /// positive jumps, when those were supplied.
    std::optional<IntegralResult> convolution;
};

inline IReport evaluate_I(const std::function<double(double)>& mu_plus_tail, const RenewalFunction& u_minus,
                          const IConfig& cfg = {}, const HalfMeasure* plus_jumps = nullptr) {
    if (u_minus.x_max() < 1.0 - 1e-12) throw RangeError("evaluate_I needs U_minus on (0, 1]");
    int n_bands = cfg.protocol.max_bands;
    if (!u_minus.exact)
        n_bands = std::min(n_bands, static_cast<int>(std::floor(-std::log2(u_minus.x_min()) + 1e-9)));

    IReport out;
    std::vector<double> masses;
    for (int k = 0; k < n_bands; ++k) {
        const double a = std::ldexp(1.0, -k - 1);
        const double ratio = std::pow(2.0, 1.0 / cfg.cells_per_band);
        double m = 0.0, x0 = a, u0 = u_minus(a);
        for (int i = 1; i <= cfg.cells_per_band; ++i) {
            const double x1 = i == cfg.cells_per_band ? 2.0 * a : x0 * ratio;
            const double u1 = u_minus(x1);
            m += mu_plus_tail(std::sqrt(x0 * x1)) * (u1 - u0);
            x0 = x1;
            u0 = u1;
        }
        masses.push_back(m);
    }
    out.stieltjes = classify_bands(std::move(masses), cfg.protocol);

    if (plus_jumps) {
        std::vector<double> cm;
        EvalBudget budget(cfg.quad.max_evals);
        for (int k = 0; k < n_bands && !budget.exhausted(); ++k)
            cm.push_back(plus_jumps->integrate([&](double y) { return convolution_square(u_minus, y); },
                                               std::ldexp(1.0, -k - 1), std::ldexp(1.0, -k), cfg.quad, &budget));
        out.convolution = classify_bands(std::move(cm), cfg.protocol, budget.exhausted());
    }
    return out;
}

/// Signed residual of the integrated amicale identity at x:
///   int_x^1 tail_minus(y) dy - [ int_0^1 mu_plus(y) mu_minus(x + y) dy + delta_plus mu_minus(x) ].
inline double amicale_integree_residual(const LevyMeasureSpec& measure,
                                        const std::function<double(double)>& mu_plus_tail,
                                        const std::function<double(double)>& mu_minus_tail, double delta_plus,
                                        double x, const QuadConfig& q = {}) {
    if (!(x > 0.0) || x > 1.0) throw std::domain_error("amicale_integree_residual: x must lie in (0, 1]");
    const double lhs = measure.minus().tail_integral(0, x, 1.0, q);
    double conv = 0.0;
    for (int k = 0; k < 60; ++k) {
        conv += integrate_gk([&](double y) { return mu_plus_tail(y) * mu_minus_tail(x + y); },
                             std::ldexp(1.0, -k - 1), std::ldexp(1.0, -k), q)
                    .value;
    }
    return lhs - (conv + delta_plus * mu_minus_tail(x));
}

}  // namespace levy_pri
