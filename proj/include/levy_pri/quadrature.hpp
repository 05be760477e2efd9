#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <cstddef>
#include <limits>

namespace levy_pri {

struct QuadConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    std::size_t max_evals = 1'000'000;
};

/// Counts integrand evaluations against a shared limit.
class EvalBudget {
public:
    explicit EvalBudget(std::size_t limit = std::numeric_limits<std::size_t>::max()) : limit_(limit) {}

    void charge(std::size_t n) noexcept { used_ += n; }
    bool exhausted() const noexcept { return used_ > limit_; }
    std::size_t used() const noexcept { return used_; }

private:
    std::size_t limit_;
    std::size_t used_ = 0;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

/// Adaptive 15-point Gauss-Kronrod on [a, b]. Degenerate or reversed
/// intervals integrate to zero. For a > 0 the rule runs in log x, which keeps
/// power-law integrands on tiny intervals well resolved.
template <class F>
QuadResult integrate_gk(F&& f, double a, double b, const QuadConfig& cfg, EvalBudget* budget = nullptr) {
    if (!(b > a)) return {};
    std::size_t evals = 0;
    auto counted = [&](double x) {
        ++evals;
        return f(x);
    };
    double error = 0.0;
    double l1 = 0.0;
    double value = 0.0;
    if (a > 0.0) {
        auto in_log = [&](double t) {
            const double x = a * std::exp(t);
            return counted(x) * x;
        };
        value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(in_log, 0.0, std::log(b / a), 12,
                                                                             cfg.rel_tol, &error, &l1);
    } else {
        value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(counted, a, b, 12, cfg.rel_tol,
                                                                             &error, &l1);
    }
    if (budget) budget->charge(evals);
    return {value, error};
}

}  // namespace levy_pri
