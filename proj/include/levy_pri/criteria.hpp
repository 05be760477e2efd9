#pragma once

// Integral tests for the existence of a partial right inverse (PRI) and the
// decision procedure built on them.
//
// Both J and L integrate x^2 / D(x)^p against the positive jumps, where
//
//     D(x) = int_0^x int_y^1 tail_minus(s) ds dy
//          = int_0^x s tail_minus(s) ds + x int_x^1 tail_minus(s) ds,
//
// p = 2 for J and p = 1 for L. Finiteness is decided by integrating over
// dyadic bands (2^-k-1, 2^-k] and fitting the decay of the band masses.

#include "levy_pri/errors.hpp"
#include "levy_pri/measures.hpp"
#include "levy_pri/quadrature.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace levy_pri {

/// Divergence test over dyadic bands.
struct BandProtocol {
    int max_bands = 60;
    int fit_bands = 20;
    int min_fit_bands = 8;
    /// Divergent when the fitted band decay exponent is at most this.
    double divergence_exponent = 0.02;
    /// Largest tolerated deviation of log band mass from the fitted line.
    double max_fit_residual = 1.0;
};

struct IntegralResult {
    enum class Status { convergent, divergent, indeterminate };

    Status status = Status::indeterminate;
    double value = std::numeric_limits<double>::quiet_NaN();
    double abs_error_estimate = std::numeric_limits<double>::quiet_NaN();
    /// Fitted q with integrand ~ x^q near 0 (band mass ~ 2^-k(q+1)).
    double local_exponent = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> analytic_exponent;
    std::vector<double> band_masses;
    std::vector<double> partial_sums;
    std::string note;

    bool convergent() const { return status == Status::convergent; }
    bool divergent() const { return status == Status::divergent; }
    /// Band decay rate e = q + 1; positive means convergent.
    double band_decay() const { return local_exponent + 1.0; }
};

inline const char* to_string(IntegralResult::Status s) {
    switch (s) {
        case IntegralResult::Status::convergent: return "convergent";
        case IntegralResult::Status::divergent: return "divergent";
        case IntegralResult::Status::indeterminate: return "indeterminate";
    }
    return "?";
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double max_residual = 0.0;
};

/// Least-squares line through log(masses[k]) for k in [first, last).
/// Every mass in the window must be positive.
inline LineFit fit_log_masses(const std::vector<double>& masses, std::size_t first, std::size_t last) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(last - first);
    for (std::size_t k = first; k < last; ++k) {
        const double x = static_cast<double>(k);
        const double y = std::log(masses[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    LineFit f;
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / n;
    for (std::size_t k = first; k < last; ++k)
        f.max_residual =
            std::max(f.max_residual, std::abs(std::log(masses[k]) - f.intercept - f.slope * static_cast<double>(k)));
    return f;
}

/// Band decay exponent e (mass ~ 2^-k e) fitted over bands [first, last).
inline double band_decay_exponent(const std::vector<double>& masses, std::size_t first, std::size_t last) {
    return -fit_log_masses(masses, first, last).slope / std::log(2.0);
}

/// Turns band masses (band k = (2^-k-1, 2^-k]) into a verdict.
inline IntegralResult classify_bands(std::vector<double> masses, const BandProtocol& p, bool budget_exhausted = false) {
    IntegralResult r;
    for (double& m : masses) {
        if (!std::isfinite(m)) {
            r.band_masses = masses;
            r.note = "non-finite band mass";
            return r;
        }
        if (m < 0.0) m = 0.0;
    }
    r.band_masses = masses;
    double s = 0.0;
    for (double m : masses) r.partial_sums.push_back(s += m);

    if (budget_exhausted) {
        r.note = "evaluation budget exhausted";
        return r;
    }
    const std::size_t n = masses.size();
    const std::size_t window = std::min<std::size_t>(static_cast<std::size_t>(p.fit_bands), n >= 4 ? n - 4 : 0);
    if (window < static_cast<std::size_t>(p.min_fit_bands)) {
        r.note = "too few resolved bands for a decay fit";
        return r;
    }
    const std::size_t first = n - window;

    std::size_t zeros = 0;
    for (std::size_t k = first; k < n; ++k) zeros += masses[k] == 0.0;
    if (zeros == window) {
        r.status = IntegralResult::Status::convergent;
        r.value = s;
        r.abs_error_estimate = 0.0;
        r.note = "band masses vanish near 0";
        return r;
    }
    if (zeros > 0) {
        // Masses that reach zero and stay there are an exact finite tail.
        std::size_t last_nonzero = n - 1;
        while (masses[last_nonzero] == 0.0) --last_nonzero;
        bool trailing = true;
        for (std::size_t k = first; k <= last_nonzero; ++k) trailing &= masses[k] > 0.0;
        if (trailing) {
            r.status = IntegralResult::Status::convergent;
            r.value = s;
            r.abs_error_estimate = 0.0;
            r.note = "band masses vanish near 0";
        } else {
            r.note = "band masses vanish intermittently";
        }
        return r;
    }

    const LineFit fit = fit_log_masses(masses, first, n);
    const double decay = -fit.slope / std::log(2.0);
    r.local_exponent = decay - 1.0;
    if (decay <= p.divergence_exponent) {
        r.status = IntegralResult::Status::divergent;
        r.value = kInf;
        return r;
    }
    if (fit.max_residual > p.max_fit_residual) {
        r.note = "band masses are not geometric";
        return r;
    }
    const double ratio = std::exp(fit.slope);
    const double last_fitted = std::exp(fit.intercept + fit.slope * static_cast<double>(n - 1));
    const double remainder = last_fitted * ratio / (1.0 - ratio);
    r.status = IntegralResult::Status::convergent;
    r.value = s + remainder;
    r.abs_error_estimate = remainder;
    r.note = "remainder below the last band extrapolated geometrically";
    return r;
}

/// D(x) for x in (0, 1]. Zero when the negative side is empty.
inline double denominator_D(const LevyMeasureSpec& spec, double x, const QuadConfig& q = {}) {
    if (!(x > 0.0) || x > 1.0) throw std::domain_error("denominator_D: x must lie in (0, 1]");
    const HalfMeasure& minus = spec.minus();
    return minus.tail_integral(1, 0.0, x, q) + x * minus.tail_integral(0, x, 1.0, q);
}

namespace detail {

enum class CriterionKind { J, L };

inline std::optional<double> analytic_integrand_exponent(const LevyMeasureSpec& spec, CriterionKind kind) {
    const double a = spec.minus().power_index_at_zero();
    const double b = spec.plus().power_index_at_zero();
    if (std::isnan(a) || std::isnan(b) || a == 1.0) return std::nullopt;
    // D(x) ~ x^{2 - a} for a > 1, ~ x for a < 1.
    const double d = a > 1.0 ? 2.0 - a : 1.0;
    const double p = kind == CriterionKind::J ? 2.0 : 1.0;
    return 2.0 - p * d - b - 1.0;
}

inline IntegralResult evaluate_criterion(const LevyTriplet& t, CriterionKind kind, const QuadConfig& q,
                                         const BandProtocol& proto) {
    t.validate();
    const LevyMeasureSpec& m = t.measure;
    const Activity plus = m.plus().activity();
    const Activity minus = m.minus().activity();
    const char* name = kind == CriterionKind::J ? "J" : "L";
    if (plus == Activity::indeterminate || minus == Activity::indeterminate) {
        IntegralResult r;
        r.note = "activity of the measure is indeterminate";
        return r;
    }
    if (plus == Activity::zero) throw PreconditionError(std::string(name) + " requires positive jumps");
    if (minus != Activity::infinite)
        throw PreconditionError(std::string(name) + " requires infinite mass of negative jumps");

    int n_bands = proto.max_bands;
    const double floor = std::max(m.plus().resolution_floor(), m.minus().resolution_floor());
    if (floor > 0.0) n_bands = std::min(n_bands, static_cast<int>(std::floor(-std::log2(floor))));

    EvalBudget budget(q.max_evals);
    const double power = kind == CriterionKind::J ? 2.0 : 1.0;
    auto integrand = [&](double x) {
        const double d = denominator_D(m, x, q);
        return x * x / std::pow(d, power);
    };
    std::vector<double> masses;
    masses.reserve(static_cast<std::size_t>(std::max(n_bands, 0)));
    for (int k = 0; k < n_bands && !budget.exhausted(); ++k)
        masses.push_back(m.plus().integrate(integrand, std::ldexp(1.0, -k - 1), std::ldexp(1.0, -k), q, &budget));

    IntegralResult r = classify_bands(std::move(masses), proto, budget.exhausted());
    r.analytic_exponent = analytic_integrand_exponent(m, kind);
    return r;
}

}  // namespace detail

/// J = int_0^1 x^2 Pi(dx) / D(x)^2.
inline IntegralResult evaluate_J(const LevyTriplet& t, const QuadConfig& q = {}, const BandProtocol& p = {}) {
    return detail::evaluate_criterion(t, detail::CriterionKind::J, q, p);
}

/// L = int_0^1 x^2 Pi(dx) / D(x); finite iff the process creeps upward
/// (sigma = 0, unbounded variation).
inline IntegralResult evaluate_L(const LevyTriplet& t, const QuadConfig& q = {}, const BandProtocol& p = {}) {
    return detail::evaluate_criterion(t, detail::CriterionKind::L, q, p);
}

// ---------------------------------------------------------------------------
// Decision procedure

enum class PriAnswer { exists, not_exists, indeterminate };

inline const char* to_string(PriAnswer a) {
    switch (a) {
        case PriAnswer::exists: return "exists";
        case PriAnswer::not_exists: return "not_exists";
        case PriAnswer::indeterminate: return "indeterminate";
    }
    return "?";
}

/// Which branch of the case analysis produced the answer.
enum class PriCase {
    continuous_sigma,            // no jumps, sigma > 0
    continuous_drift_up,         // no jumps, sigma = 0, gamma > 0
    continuous_drift_down,       // no jumps, sigma = 0, gamma < 0
    continuous_degenerate,       // no jumps, sigma = 0, gamma = 0
    finite_activity_sigma,
    finite_activity_drift_up,
    finite_activity_drift_down,  // b <= 0
    unbounded_sigma,             // infinite activity, sigma > 0
    spectrally_negative_uv,      // plus side finite, sigma = 0, unbounded variation
    spectrally_negative_drift_up,
    spectrally_negative_drift_down,
    spectrally_positive,         // minus side finite, plus side infinite, sigma = 0
    bounded_plus_infinite,       // both infinite, bounded variation
    uv_j_finite,
    uv_j_infinite,
    uv_j_indeterminate,
    classification_indeterminate,
};

inline const char* branch_name(PriCase c) {
    switch (c) {
        case PriCase::continuous_sigma: return "continuous/sigma";
        case PriCase::continuous_drift_up: return "continuous/drift-positive";
        case PriCase::continuous_drift_down: return "continuous/drift-negative";
        case PriCase::continuous_degenerate: return "continuous/degenerate";
        case PriCase::finite_activity_sigma: return "finite-activity/sigma";
        case PriCase::finite_activity_drift_up: return "finite-activity/b-positive";
        case PriCase::finite_activity_drift_down: return "finite-activity/b-nonpositive";
        case PriCase::unbounded_sigma: return "UV/sigma";
        case PriCase::spectrally_negative_uv: return "plus-finite/UV";
        case PriCase::spectrally_negative_drift_up: return "BV/b-positive";
        case PriCase::spectrally_negative_drift_down: return "BV/b-nonpositive";
        case PriCase::spectrally_positive: return "minus-finite/no-creeping";
        case PriCase::bounded_plus_infinite: return "BV/plus-infinite";
        case PriCase::uv_j_finite: return "UV/J-finite";
        case PriCase::uv_j_infinite: return "UV/J-infinite";
        case PriCase::uv_j_indeterminate: return "UV/J-indeterminate";
        case PriCase::classification_indeterminate: return "classification-indeterminate";
    }
    return "?";
}

/// The answer each branch implies.
inline PriAnswer answer_for(PriCase c) {
    switch (c) {
        case PriCase::continuous_sigma:
        case PriCase::continuous_drift_up:
        case PriCase::finite_activity_sigma:
        case PriCase::finite_activity_drift_up:
        case PriCase::unbounded_sigma:
        case PriCase::spectrally_negative_uv:
        case PriCase::spectrally_negative_drift_up:
        case PriCase::uv_j_finite: return PriAnswer::exists;
        case PriCase::uv_j_indeterminate:
        case PriCase::classification_indeterminate: return PriAnswer::indeterminate;
        default: return PriAnswer::not_exists;
    }
}

struct PriDecision {
    PriAnswer answer = PriAnswer::indeterminate;
    PriCase case_fired = PriCase::classification_indeterminate;
    std::optional<VariationClass> variation;
    std::optional<IntegralResult> J;
    std::optional<IntegralResult> L;
    std::string note;

    const char* branch() const { return branch_name(case_fired); }
};

inline PriDecision decide_pri(const LevyTriplet& t, const QuadConfig& q = {}, const BandProtocol& p = {}) {
    PriDecision d;
    auto fire = [&d](PriCase c) {
        d.case_fired = c;
        d.answer = answer_for(c);
        return d;
    };
    try {
        d.variation = classify_variation(t);
    } catch (const IndeterminateError& e) {
        d.note = e.what();
        return fire(PriCase::classification_indeterminate);
    }
    const VariationClass& v = *d.variation;
    const bool sigma = t.sigma > 0.0;

    if (v.plus == Activity::zero && v.minus == Activity::zero) {
        if (sigma) return fire(PriCase::continuous_sigma);
        if (t.gamma > 0.0) return fire(PriCase::continuous_drift_up);
        if (t.gamma < 0.0) return fire(PriCase::continuous_drift_down);
        return fire(PriCase::continuous_degenerate);
    }
    if (v.plus != Activity::infinite && v.minus != Activity::infinite) {
        if (sigma) return fire(PriCase::finite_activity_sigma);
        return fire(v.drift_b > 0.0 ? PriCase::finite_activity_drift_up : PriCase::finite_activity_drift_down);
    }
    if (sigma) return fire(PriCase::unbounded_sigma);
    if (v.plus != Activity::infinite) {
        if (!v.bounded()) return fire(PriCase::spectrally_negative_uv);
        return fire(v.drift_b > 0.0 ? PriCase::spectrally_negative_drift_up
                                    : PriCase::spectrally_negative_drift_down);
    }
    if (v.minus != Activity::infinite) return fire(PriCase::spectrally_positive);
    if (v.bounded()) return fire(PriCase::bounded_plus_infinite);

    d.J = evaluate_J(t, q, p);
    d.L = evaluate_L(t, q, p);
    switch (d.J->status) {
        case IntegralResult::Status::convergent: return fire(PriCase::uv_j_finite);
        case IntegralResult::Status::divergent: return fire(PriCase::uv_j_infinite);
        case IntegralResult::Status::indeterminate: break;
    }
    d.note = d.J->note;
    return fire(PriCase::uv_j_indeterminate);
}

struct CorollaryDecision {
    bool pri = false;
    bool creeps = false;
};

/// Exact power-law tails with sigma = 0: a PRI exists iff beta < 2 alpha - 2,
/// and the process creeps upward iff beta < alpha.
inline CorollaryDecision corollary_decision(double alpha, double beta) {
    if (!(alpha > 1.0 && alpha < 2.0)) throw std::domain_error("corollary_decision: alpha must lie in (1, 2)");
    if (!(beta >= 0.0 && beta < 2.0)) throw std::domain_error("corollary_decision: beta must lie in [0, 2)");
    return {beta < 2.0 * alpha - 2.0, beta < alpha};
}

}  // namespace levy_pri
