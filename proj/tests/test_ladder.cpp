#include "levy_pri/ladder.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace levy_pri;

namespace {

std::vector<double> linear_grid(double lo, double hi, int n) {
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * i / (n - 1));
    return g;
}

RenewalFunction unit_drift(double x_max = 1.0) {
    RenewalConfig c;
    c.method = RenewalMethod::closed_form;
    return renewal_function(SubordinatorSpec::pure_drift(1.0), linear_grid(x_max / 100, x_max, 100), c);
}

}  // namespace

TEST(Renewal, PureDriftIsIdentity) {
    const auto g = linear_grid(0.01, 2.0, 50);
    for (RenewalMethod m : {RenewalMethod::closed_form, RenewalMethod::renewal_solve, RenewalMethod::monte_carlo}) {
        RenewalConfig c;
        c.method = m;
        c.n_paths = 10;
        const RenewalFunction u = renewal_function(SubordinatorSpec::pure_drift(1.0), g, c);
        for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(u.values[i], g[i], 1e-3) << to_string(m);
    }
}

TEST(Renewal, KilledDriftClosedForm) {
    RenewalConfig c;
    c.method = RenewalMethod::renewal_solve;
    const RenewalFunction u = renewal_function(SubordinatorSpec::pure_drift(2.0, 0.5), {0.5, 1.0, 3.0}, c);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(u.values[i], (1 - std::exp(-0.5 * u.grid[i] / 2.0)) / 0.5, 1e-3);
}

TEST(Renewal, UnitJumpPoisson) {
    // Each of the first floor(x) + 1 holding times has mean 1/2.
    const auto s = SubordinatorSpec::compound_poisson(2.0, PointLaw{1.0});
    RenewalConfig c;
    c.method = RenewalMethod::renewal_solve;
    EXPECT_NEAR(renewal_function(s, {0.5, 1.5, 2.5}, c).values[1], 1.0, 1e-9);
    c.method = RenewalMethod::monte_carlo;
    c.n_paths = 20000;
    const RenewalFunction u = renewal_function(s, {0.5, 1.5, 2.5}, c);
    EXPECT_NEAR(u.values[1], 1.0, 4 * u.std_errors[1]);
    EXPECT_NEAR(u.values[2], 1.5, 4 * u.std_errors[2]);
}

TEST(Renewal, StableHalfClosedFormAndMonteCarlo) {
    const auto s = SubordinatorSpec::standard_stable(0.5);
    RenewalConfig c;
    c.method = RenewalMethod::closed_form;
    const double ref = 1.0 / std::tgamma(1.5);
    EXPECT_NEAR(renewal_function(s, {1.0}, c).values[0], ref, 1e-12);
    EXPECT_NEAR(ref, 1.1284, 1e-4);
    c.method = RenewalMethod::monte_carlo;
    c.n_paths = 10000;
    c.epsilon = 1e-5;
    const RenewalFunction u = renewal_function(s, {0.25, 1.0}, c);
    EXPECT_NEAR(u.values[1], ref, 4 * u.std_errors[1]);
    EXPECT_NEAR(u.values[0], 0.5 * ref, 4 * u.std_errors[0]);
}

TEST(Renewal, MonteCarloIsSeededAndThreadIndependent) {
    const auto s = SubordinatorSpec::compound_poisson(3.0, ExponentialLaw{2.0}, 0.5);
    RenewalConfig c;
    c.n_paths = 2000;
    const RenewalFunction a = renewal_function(s, {0.5, 1.0}, c);
    c.threads = 3;
    const RenewalFunction b = renewal_function(s, {0.5, 1.0}, c);
    EXPECT_EQ(a.values, b.values);
    c.seed = 2;
    EXPECT_NE(a.values, renewal_function(s, {0.5, 1.0}, c).values);
}

TEST(Renewal, RejectsBadInput) {
    EXPECT_THROW(renewal_function(SubordinatorSpec::pure_drift(-1.0), {1.0}), std::invalid_argument);
    EXPECT_THROW(renewal_function(SubordinatorSpec::pure_drift(1.0), {1.0, 0.5}), std::invalid_argument);
    RenewalConfig c;
    c.method = RenewalMethod::renewal_solve;
    const RenewalFunction u = renewal_function(SubordinatorSpec::pure_drift(1.0), {0.5, 1.0}, c);
    EXPECT_THROW(u(1.5), RangeError);
}

TEST(Renewal, CsvRoundTrip) {
    RenewalConfig c;
    c.method = RenewalMethod::renewal_solve;
    const RenewalFunction u =
        renewal_function(SubordinatorSpec::compound_poisson(2.0, UniformLaw{0.1, 0.6}, 0.3), linear_grid(0.05, 1, 20), c);
    std::stringstream ss;
    write_csv(ss, u);
    EXPECT_EQ(ss.str().substr(0, 5), "x,U\r\n");
    const RenewalFunction v = read_csv(ss);
    EXPECT_EQ(v.grid, u.grid);
    EXPECT_EQ(v.values, u.values);
}

TEST(Envelope, Examples) {
    for (double x : {0.1, 0.7}) EXPECT_NEAR(erickson_envelope(SubordinatorSpec::pure_drift(1.0), x), x, 1e-12);
    const SubordinatorSpec s{0.0, HalfMeasure({PowerPiece{1.0, 0.5, kInf, false}}), 0.0};
    EXPECT_NEAR(integrated_tail(s, 0.25), 1.0, 1e-10);
    EXPECT_NEAR(erickson_envelope(s, 0.25), 0.25, 1e-10);
    double prev = kInf;
    for (double k : {1.0, 10.0, 1e3, 1e6}) {
        const double e = erickson_envelope(SubordinatorSpec::pure_drift(1.0, k), 0.5);
        EXPECT_LT(e, prev);
        prev = e;
    }
    EXPECT_LT(prev, 1e-5);
}

TEST(UpwardTail, ZeroPlusSide) {
    const LevyMeasureSpec m = LevyMeasureSpec::spectrally_negative(LevyMeasureSpec(PowerLawTails{1.5, 0.5, 1, 1}));
    for (double x : {0.01, 0.5}) EXPECT_EQ(vigon_upward_tail(m, unit_drift(), x), 0.0);
}

TEST(UpwardTail, SingleAtom) {
    const LevyMeasureSpec m(FiniteActivity{1.0, PointLaw{0.8}});
    EXPECT_NEAR(vigon_upward_tail(m, unit_drift(), 0.3), 0.5, 1e-10);
}

TEST(UpwardTail, PowerLawAgainstRiemannSum) {
    const LevyMeasureSpec m(PowerLawTails{1.5, 0.5, 1, 1});
    const double x = 0.2;
    // mu(x) = int_x^1 (y - x) Pi(dy): density 0.5 y^-1.5 plus the atom of mass 1 at 1.
    const int n = 100000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double y = x + (i + 0.5) * (1 - x) / n;
        s += (y - x) * 0.5 * std::pow(y, -1.5) * (1 - x) / n;
    }
    s += 1 - x;
    EXPECT_NEAR(vigon_upward_tail(m, unit_drift(), x), s, 1e-6);
}

TEST(Convolution, UnitDrift) {
    for (double y : {0.1, 0.5, 1.0}) EXPECT_NEAR(convolution_square(unit_drift(), y), y * y / 2, 1e-9);
}

TEST(Convolution, BracketOnMonteCarloFunction) {
    RenewalConfig c;
    c.n_paths = 5000;
    c.epsilon = 1e-4;
    const RenewalFunction u = renewal_function(SubordinatorSpec::standard_stable(0.6), linear_grid(0.01, 1.0, 100), c);
    for (double y : {0.1, 0.5, 1.0}) {
        const double v = convolution_square(u, y);
        EXPECT_GE(v, std::pow(u(y / 2), 2) * (1 - 1e-6));
        EXPECT_LE(v, std::pow(u(y), 2) * (1 + 1e-6));
    }
}

TEST(Convolution, PoissonStepAgainstDiscreteSum) {
    const double lam = 2.0;
    RenewalFunction u;
    u.interpolation = RenewalFunction::Interpolation::step;
    u.at_zero = 1 / lam;
    for (int i = 1; i <= 4; ++i) {
        u.grid.push_back(i);
        u.values.push_back((i + 1) / lam);
    }
    // Brute force: pairs of renewal epochs i + j <= y, each weighted 1/lam^2.
    for (double y : {0.5, 1.5, 2.5, 3.7}) {
        double ref = 0.0;
        for (int i = 0; i <= 4; ++i)
            for (int j = 0; j <= 4; ++j)
                if (i + j <= y) ref += 1 / (lam * lam);
        EXPECT_NEAR(convolution_square(u, y), ref, 1e-12) << y;
    }
}

TEST(IntegralI, ZeroTail) {
    const IReport r = evaluate_I([](double) { return 0.0; }, unit_drift());
    EXPECT_EQ(r.stieltjes.status, IntegralResult::Status::convergent);
    EXPECT_EQ(r.stieltjes.value, 0.0);
}

TEST(IntegralI, UnitDriftInverseSqrt) {
    const IReport r = evaluate_I([](double x) { return 1 / std::sqrt(x); }, unit_drift());
    ASSERT_EQ(r.stieltjes.status, IntegralResult::Status::convergent);
    EXPECT_NEAR(r.stieltjes.value, 2.0, 1e-3);
}

TEST(IntegralI, UnitDriftDivergent) {
    const IReport r = evaluate_I([](double x) { return 1 / x; }, unit_drift());
    EXPECT_EQ(r.stieltjes.status, IntegralResult::Status::divergent);
}

TEST(IntegratedIdentity, SyntheticIdentity) {
    // Minus tail x^-0.5 on (0, 1), the atom at 1 included: int_x^1 tail = 2 (1 - sqrt x).
    const LevyMeasureSpec m = LevyMeasureSpec::spectrally_negative(LevyMeasureSpec(PowerLawTails{0.5, 0.5, 1, 1}));
    const double dp = 0.7;
    auto bar = [](double x) { return x >= 1 ? 0.0 : 2 * (1 - std::sqrt(x)); };
    auto mu_minus = [&](double x) { return bar(x) / dp; };
    auto zero = [](double) { return 0.0; };
    for (double x : {0.05, 0.3, 0.8}) {
        EXPECT_NEAR(amicale_integree_residual(m, zero, mu_minus, dp, x), 0.0, 1e-9);
        EXPECT_NEAR(amicale_integree_residual(m, zero, mu_minus, 1.1 * dp, x), -0.1 * dp * mu_minus(x), 1e-9);
    }
}
