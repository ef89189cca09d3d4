#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "amdiv/errors.hpp"
#include "amdiv/model.hpp"

using namespace amdiv;

namespace {

MarketModel constant_market(double r, double q, double sigma) {
    MarketModel m;
    m.r = Curve::constant(r);
    m.q = Curve::constant(q);
    m.sigma = Curve::constant(sigma);
    return m;
}

MarketModel test2_market() {
    MarketModel m;
    m.r = Curve::exponential(0.01, 0.01, 1.0);
    m.q = Curve::exponential(0.02, -0.01, 0.1);
    m.sigma = Curve::exponential(0.3, 0.0, 2.0);
    return m;
}

double gk(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

}  // namespace

TEST(Model, CoefficientCurves) {
    Model m1(constant_market(0.01, 0.0, 0.6), OptionSpec{});
    EXPECT_DOUBLE_EQ(m1.coeff_a(0.1), 0.01);
    EXPECT_DOUBLE_EQ(m1.coeff_a(0.0), 0.01);

    Model m2(test2_market(), OptionSpec{});
    EXPECT_NEAR(m2.r(0.0), 0.02, 1e-15);
    EXPECT_NEAR(m2.q(0.0), 0.01, 1e-15);
    EXPECT_NEAR(m2.coeff_a(0.0), 0.01, 1e-15);
    EXPECT_NEAR(m2.sigma(0.25), 0.3 * std::exp(-0.5), 1e-15);
}

TEST(Model, TimeMapConstantSigma) {
    OptionSpec s;
    s.T = 0.25;
    Model m(constant_market(0.01, 0.0, 0.6), s);
    EXPECT_NEAR(m.tau_of_t(0.0), 0.045, 1e-14);
    EXPECT_NEAR(m.tau_of_t(0.25), 0.0, 1e-15);
    EXPECT_NEAR(m.tau_max(), 0.045, 1e-14);
}

TEST(Model, TimeMapDecayingSigma) {
    MarketModel mk = constant_market(0.01, 0.0, 0.3);
    mk.sigma = Curve::exponential(0.3, 0.0, 2.0);
    Model m(mk, OptionSpec{});
    const double oracle = gk([](double t) { return 0.5 * std::pow(0.3 * std::exp(-2.0 * t), 2); }, 0.0, 0.25);
    EXPECT_NEAR(m.tau_of_t(0.0), oracle, 1e-13);
    const double mid = gk([](double t) { return 0.5 * std::pow(0.3 * std::exp(-2.0 * t), 2); }, 0.1, 0.25);
    EXPECT_NEAR(m.tau_of_t(0.1), mid, 1e-13);
}

TEST(Model, TimeMapRoundTrip) {
    Model m(test2_market(), OptionSpec{});
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 0.25);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double t = u(rng);
        worst = std::max(worst, std::abs(m.t_of_tau(m.tau_of_t(t)) - t));
    }
    EXPECT_LT(worst, 1e-12 * 0.25);
}

TEST(Model, ForwardTimeMap) {
    TimeMap fwd(Curve::constant(0.4), 0.5, TimeDirection::Forward);
    EXPECT_NEAR(fwd.tau_of_t(0.0), 0.0, 1e-16);
    EXPECT_NEAR(fwd.tau_of_t(0.5), 0.04, 1e-14);
    EXPECT_NEAR(fwd.t_of_tau(0.02), 0.25, 1e-13);
}

TEST(Model, AlphaBetaRhoAtExpiry) {
    Model m(test2_market(), OptionSpec{});
    EXPECT_NEAR(m.alpha(0.0), 1.0, 1e-15);
    EXPECT_NEAR(m.beta(0.0), 1.0, 1e-15);
    EXPECT_NEAR(m.rho(0.0), 0.0, 1e-15);
    EXPECT_NEAR(m.rbar(0.0), 0.0, 1e-15);
}

TEST(Model, ZeroDriftAlpha) {
    Model m(constant_market(0.0, 0.0, 0.5), OptionSpec{});
    for (double tau : {0.001, 0.01, 0.02, m.tau_max()}) {
        EXPECT_NEAR(m.rho(tau), 0.0, 1e-15);
        EXPECT_NEAR(m.alpha(tau), std::exp(-tau), 1e-15);
    }
}

TEST(Model, RhoMatchesQuadrature) {
    Model m(test2_market(), OptionSpec{});
    const double t = 0.07;
    const double tau = m.tau_of_t(t);
    const MarketModel mk = test2_market();
    const double oracle = gk([&](double u) { return mk.r(u) - mk.q(u); }, t, 0.25);
    EXPECT_NEAR(m.rho(tau), oracle, 1e-13);
    const double oracle_r = gk([&](double u) { return mk.r(u); }, t, 0.25);
    EXPECT_NEAR(m.rbar(tau), oracle_r, 1e-13);
    EXPECT_NEAR(m.beta(tau), std::exp(tau + oracle_r - oracle), 1e-12);
}

TEST(Model, ProportionalDividendJump) {
    MarketModel mk = constant_market(0.03, 0.01, 0.3);
    mk.prop_divs.push_back({0.1, 0.05});
    Model m(mk, OptionSpec{});
    const double ti = m.prop_tau()[0];
    // earlier in calendar time than the ex-date the dividend is included
    const double pre = m.alpha(ti, Side::Pre), post = m.alpha(ti, Side::Post);
    EXPECT_NEAR(post / pre, 0.95, 1e-13);
    const double t = 0.05, tau = m.tau_of_t(t);
    const double a_int = 0.02 * (0.25 - t);
    EXPECT_NEAR(m.alpha(tau), std::exp(-tau + a_int + std::log(0.95)), 1e-13);
    EXPECT_NEAR(m.prop_rho_jump()[0], std::log(0.95), 1e-15);
}

TEST(Model, ExpectedSpotWithDividends) {
    MarketModel mk = constant_market(0.04, 0.01, 0.3);
    mk.cash_divs.push_back({0.1, 2.0});
    mk.prop_divs.push_back({0.15, 0.03});
    OptionSpec s;
    s.S = 100.0;
    Model m(mk, s);
    const double a = 0.03;
    EXPECT_NEAR(m.expected_spot(0.05), 100.0 * std::exp(a * 0.05), 1e-10);
    EXPECT_NEAR(m.expected_spot(0.12), 100.0 * std::exp(a * 0.12) - 2.0 * std::exp(a * 0.02), 1e-10);
    EXPECT_NEAR(m.expected_spot(0.2), (100.0 * std::exp(a * 0.2) - 2.0 * std::exp(a * 0.1)) * 0.97, 1e-10);
}

TEST(Model, DiscountFactor) {
    Model m(test2_market(), OptionSpec{});
    const MarketModel mk = test2_market();
    EXPECT_NEAR(m.discount(0.0, 0.25), std::exp(-gk([&](double u) { return mk.r(u); }, 0.0, 0.25)), 1e-14);
}

TEST(Model, ValidationErrors) {
    OptionSpec s;
    MarketModel neg = constant_market(0.01, 0.0, 0.3);
    neg.sigma = Curve::exponential(0.3, -0.2, 10.0);  // crosses zero inside (0,T)
    EXPECT_THROW(Model(neg, s), ConfigError);

    MarketModel late = constant_market(0.01, 0.0, 0.3);
    late.cash_divs.push_back({0.3, 1.0});
    EXPECT_THROW(Model(late, s), ConfigError);

    MarketModel big = constant_market(0.01, 0.0, 0.3);
    big.prop_divs.push_back({0.1, 1.0});
    EXPECT_THROW(Model(big, s), ConfigError);

    MarketModel order = constant_market(0.01, 0.0, 0.3);
    order.cash_divs = {{0.2, 1.0}, {0.1, 1.0}};
    EXPECT_THROW(Model(order, s), ConfigError);

    OptionSpec bad;
    bad.K = -1.0;
    EXPECT_THROW(Model(constant_market(0.01, 0.0, 0.3), bad), ConfigError);
}

TEST(Model, TabulatedCurve) {
    const Curve c = Curve::tabulated({0.0, 0.1, 0.2, 0.3}, {0.01, 0.02, 0.02, 0.05});
    EXPECT_DOUBLE_EQ(c(0.1), 0.02);
    EXPECT_DOUBLE_EQ(c(0.2), 0.02);
    EXPECT_DOUBLE_EQ(c(-1.0), 0.01);
    EXPECT_DOUBLE_EQ(c(1.0), 0.05);
    // monotone data stays monotone between knots, flat data stays flat
    for (double t = 0.0; t < 0.1; t += 0.001) EXPECT_LE(c(t), c(t + 0.001) + 1e-15);
    for (double t = 0.1; t <= 0.2; t += 0.01) EXPECT_NEAR(c(t), 0.02, 1e-15);
    EXPECT_THROW(Curve::tabulated({0.0, 0.0}, {1.0, 1.0}), ConfigError);
}

TEST(Model, LargeCashDividendWarns) {
    MarketModel mk = constant_market(0.01, 0.0, 0.3);
    mk.cash_divs.push_back({0.1, 150.0});
    Model m(mk, OptionSpec{});
    EXPECT_FALSE(m.warnings().empty());
}
