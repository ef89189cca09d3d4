#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "amdiv/deamericanize.hpp"
#include "amdiv/errors.hpp"

using namespace amdiv;

namespace {

MarketModel constant_market(double r, double q, double sigma) {
    MarketModel m;
    m.r = Curve::constant(r);
    m.q = Curve::constant(q);
    m.sigma = Curve::constant(sigma);
    return m;
}

double Phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double bs(bool put, double S, double K, double T, double r, double q, double s) {
    const double d1 = (std::log(S / K) + (r - q + 0.5 * s * s) * T) / (s * std::sqrt(T));
    const double d2 = d1 - s * std::sqrt(T);
    return put ? K * std::exp(-r * T) * Phi(-d2) - S * std::exp(-q * T) * Phi(-d1)
               : S * std::exp(-q * T) * Phi(d1) - K * std::exp(-r * T) * Phi(d2);
}

Model with_K(const Model& m, double K) {
    OptionSpec s = m.spec();
    s.K = K;
    return Model(m.market(), s);
}

}  // namespace

TEST(Deamericanize, MeanSigmaOfConstantCurve) {
    const Model m(constant_market(0.01, 0.0, 0.6), OptionSpec{});
    EXPECT_NEAR(mean_sigma(m), 0.6 / std::sqrt(2.0), 1e-12);
    const Model w = with_mean_sigma(m, 0.2);
    EXPECT_NEAR(mean_sigma(w), 0.2, 1e-12);
}

TEST(Deamericanize, ImpliedSigmaRoundTrip) {
    const Model m(constant_market(0.01, 0.0, 0.6), OptionSpec{});
    const double quote = price_american(m).american;
    const ImpliedResult r = implied_sigma(quote, Model(constant_market(0.01, 0.0, 0.2), OptionSpec{}));
    EXPECT_NEAR(r.sigma_bar, 0.6 / std::sqrt(2.0), 1e-6);
    EXPECT_NEAR(r.residual, 0.0, 1e-6 * 100.0);
    EXPECT_GT(r.iterations, 0);
    EXPECT_LE(r.equivalent_european, r.american);
}

TEST(Deamericanize, BelowIntrinsicHasNoSolution) {
    OptionSpec s;
    s.S = 80.0;
    const Model m(constant_market(0.05, 0.0, 0.3), s);
    EXPECT_THROW(implied_sigma(19.0, m), NumericalError);
}

TEST(Deamericanize, NegativeRateMatchesEuropeanImpliedVol) {
    // no early exercise: the American quote is a European price, inverted here by bisection on Black-Scholes
    const double r = -0.01, sigma = 0.35, T = 0.25;
    const double quote = bs(true, 100.0, 100.0, T, r, 0.0, sigma);
    double lo = 0.01, hi = 3.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (bs(true, 100.0, 100.0, T, r, 0.0, mid) < quote ? lo : hi) = mid;
    }
    const ImpliedResult res = implied_sigma(quote, Model(constant_market(r, 0.0, 0.2), OptionSpec{}));
    EXPECT_NEAR(res.sigma_bar, 0.5 * (lo + hi) / std::sqrt(2.0), 1e-6);
}

TEST(Deamericanize, ImpliedStrikeFixedPoint) {
    const Model m(constant_market(0.03, 0.0, 0.3), OptionSpec{});
    const StrikeQuote q{100.0, price_american(m).american};
    int solves = 0;
    const ImpliedStrikeResult r = implied_strike(q, m, {}, &solves);
    ASSERT_TRUE(r.ok) << r.error;
    EXPECT_NEAR(r.strike, 100.0, 1e-6 * 100.0);
    const double a0S = 100.0 * std::exp((0.03 - 0.5 * 0.09) * 0.25);
    EXPECT_NEAR(r.x, std::log(a0S / 100.0), 1e-8);
    EXPECT_GT(solves, 1);
}

TEST(Deamericanize, BatchMatchesSequentialWithFewerSweeps) {
    const Model m(constant_market(0.03, 0.0, 0.3), OptionSpec{});
    std::vector<StrikeQuote> quotes;
    for (double K : {90.0, 95.0, 100.0, 105.0, 110.0}) quotes.push_back({K, price_american(with_K(m, K)).american});
    const ImpliedStrikeBatch batch = implied_strike_batch(quotes, m);
    ASSERT_EQ(batch.results.size(), quotes.size());
    int sequential = 0;
    for (std::size_t i = 0; i < quotes.size(); ++i) {
        const ImpliedStrikeResult& b = batch.results[i];
        ASSERT_TRUE(b.ok) << b.error;
        EXPECT_LT(std::abs(b.residual), 1e-6 * quotes[i].K) << quotes[i].K;
        int solves = 0;
        const ImpliedStrikeResult s = implied_strike(quotes[i], m, {}, &solves);
        sequential += solves;
        ASSERT_TRUE(s.ok) << s.error;
        EXPECT_NEAR(b.strike, s.strike, 1e-8) << quotes[i].K;
        EXPECT_NEAR(b.strike, quotes[i].K, 1e-6 * quotes[i].K);
    }
    EXPECT_LT(batch.boundary_solves, sequential);
}

TEST(Deamericanize, BatchRejectsCashDividends) {
    MarketModel mk = constant_market(0.03, 0.0, 0.3);
    mk.cash_divs.push_back({0.1, 1.0});
    const Model m(mk, OptionSpec{});
    EXPECT_THROW(implied_strike_batch({{100.0, 6.0}}, m), DomainError);
}

TEST(Deamericanize, DupireRecoversConstantVolatility) {
    const double r = 0.03, q = 0.01, sigma = 0.25, S = 100.0;
    OptionSpec spec;
    spec.T = 0.3;
    const Model m(constant_market(r, q, sigma), spec);
    std::vector<double> T, x;
    for (int i = 0; i < 5; ++i) T.push_back(0.1 + 0.02 * i);
    for (int j = 0; j < 41; ++j) x.push_back(-0.3 + 0.015 * j);
    std::vector<std::vector<double>> C(T.size(), std::vector<double>(x.size()));
    for (std::size_t i = 0; i < T.size(); ++i) {
        const double a0 = std::exp((r - q - 0.5 * sigma * sigma) * T[i]);
        for (std::size_t j = 0; j < x.size(); ++j) C[i][j] = bs(false, S, a0 * S * std::exp(-x[j]), T[i], r, q, sigma);
    }
    const auto lv = dupire_surface(T, x, C, S, m);
    EXPECT_TRUE(std::isnan(lv[0][5]));
    EXPECT_TRUE(std::isnan(lv[2][0]));
    for (std::size_t i = 1; i + 1 < T.size(); ++i)
        for (std::size_t j = 5; j + 5 < x.size(); ++j) EXPECT_NEAR(lv[i][j], sigma * sigma, 2e-3) << T[i] << " " << x[j];
}
