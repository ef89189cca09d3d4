#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "amdiv/errors.hpp"
#include "amdiv/kernels.hpp"

using namespace amdiv;

namespace {

constexpr double kPi = 3.14159265358979323846;

double gk(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-14);
}

double gk_inf(const std::function<double(double)>& f, double a) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, std::numeric_limits<double>::infinity(),
                                                                          20, 1e-14);
}

// integrand carrying a Gaussian in xi around c of variance 2 tau
double gk_gauss_tail(const std::function<double(double)>& f, double a, double c, double tau) {
    return gk(f, a, std::max(a, c) + 40.0 * std::sqrt(tau) + 2.0);
}

double heat(double x, double xi, double tau) {
    const long double d = x - xi;
    return static_cast<double>(std::exp(-d * d / (4.0L * tau)) / (2.0L * std::sqrt(static_cast<long double>(kPi) * tau)));
}

}  // namespace

TEST(Kernels, GaussKernelValues) {
    EXPECT_NEAR(gauss_kernel(0.3, 0.3, 0.045), 1.0 / (2.0 * std::sqrt(kPi * 0.045)), 1e-14);
    EXPECT_NEAR(gauss_kernel(0.3, 0.0, 0.05), heat(0.3, 0.0, 0.05), 1e-14);
    const double tau = 0.045, w = 10.0 * std::sqrt(2.0 * tau);
    EXPECT_NEAR(gk([&](double xi) { return gauss_kernel(0.1, xi, tau); }, 0.1 - w, 0.1 + w), 1.0, 1e-8);
    EXPECT_THROW(gauss_kernel(0.0, 0.0, 0.0), DomainError);
}

TEST(Kernels, Erfcx) {
    for (double x : {-5.0, -1.0, 0.0, 0.5, 3.0, 10.0, 24.0}) {
        const long double ref = std::exp(static_cast<long double>(x) * x) * std::erfc(static_cast<long double>(x));
        EXPECT_NEAR(erfcx(x) / static_cast<double>(ref), 1.0, 1e-12) << x;
    }
    for (double x : {30.0, 1e3, 1e6}) EXPECT_NEAR(erfcx(x) * x * std::sqrt(kPi), 1.0, 1.0 / (2.0 * x * x) + 1e-15);
}

TEST(Kernels, ClosedFormI1) {
    EXPECT_NEAR(closed_form_I1(-40.0, 0.045), 1.0, 1e-12);
    EXPECT_NEAR(closed_form_I1(40.0, 0.045), 0.0, 1e-12);
    for (double x : {-0.5, 0.0, 0.2}) {
        const double tau = 0.045;
        const double ref = gk([&](double xi) { return (1.0 - std::exp(xi)) * heat(x, xi, tau); }, -12.0, 0.0);
        EXPECT_NEAR(closed_form_I1(x, tau), ref, 1e-12) << x;
    }
}

TEST(Kernels, NumericI2MatchesQuadrature) {
    for (double tau : {0.01, 0.125, 0.5}) {
        for (double x : {-2.0, 0.0, 1.5}) {
            const double w = 14.0 * std::sqrt(tau);
            const double ref = -gk([&](double xi) { return std::exp(-std::exp(xi)) * heat(x, xi, tau); }, x - w, x + w);
            EXPECT_NEAR(numeric_I2(x, tau), ref, 1e-12) << x << " " << tau;
        }
    }
}

TEST(Kernels, ApproxI2MatchesFourTermExpansion) {
    // e^{-E} [tau E (2 + tau - E (2 + tau (7 + E (E - 6)))) / 2 - 1], E = e^x
    for (double tau : {0.02, 0.125, 0.3}) {
        for (double x = -3.0; x <= 3.0; x += 0.25) {
            const double E = std::exp(x);
            const double ref = std::exp(-E) * (0.5 * tau * E * (2.0 + tau - E * (2.0 + tau * (7.0 + E * (E - 6.0)))) - 1.0);
            EXPECT_NEAR(approx_I2(x, tau).value, ref, 1e-14) << x << " " << tau;
        }
    }
}

TEST(Kernels, ApproxI2Accuracy) {
    for (double tau : {0.02, 0.125}) {
        double worst = 0.0;
        for (int i = 0; i < 200; ++i) {
            const double x = -3.0 + 6.0 * i / 199.0;
            worst = std::max(worst, std::abs(approx_I2(x, tau).value - numeric_I2(x, tau)));
        }
        EXPECT_LT(worst, 0.01) << tau;
    }
    EXPECT_LT(std::abs(approx_I2(0.0, 0.125).value - numeric_I2(0.0, 0.125)), 0.005);
    EXPECT_NEAR(approx_I2(0.4, 1e-9).value, -std::exp(-std::exp(0.4)), 1e-8);
    EXPECT_FALSE(approx_I2(0.0, 0.3).fallback);
    const ApproxI2 fb = approx_I2(0.0, 0.5);
    EXPECT_TRUE(fb.fallback);
    EXPECT_DOUBLE_EQ(fb.value, numeric_I2(0.0, 0.5));
}

TEST(Kernels, J0Put) {
    const double tau = 0.045;
    EXPECT_NEAR(j0_put(0.0, tau), std::exp(tau) * (1.0 + std::erf(std::sqrt(tau))), 1e-14);
    for (double y : {-0.8, -0.2, 0.0, 0.1}) {
        const double ref = gk_gauss_tail([&](double xi) { return 2.0 * std::exp(xi) * heat(y, xi, tau); }, 0.0, y, tau);
        EXPECT_NEAR(j0_put(y, tau, 100.0), 100.0 * ref, 1e-10) << y;
    }
}

TEST(Kernels, J0Call) {
    const double tau = 0.045;
    for (double y : {-0.1, 0.0, 0.2, 0.8}) {
        const double ref = -gk_gauss_tail([&](double xi) { return 2.0 * std::exp(-xi) * heat(y, xi, tau); }, 0.0, y, tau);
        EXPECT_NEAR(j0_call(y, tau, 100.0), 100.0 * ref, 1e-10) << y;
    }
    EXPECT_LE(j0_call(0.3, tau), 0.0);
    EXPECT_NEAR(j0_call(-40.0, tau), 0.0, 1e-300);
    EXPECT_TRUE(std::isfinite(j0_call(-400.0, tau)));
}

TEST(Kernels, J2FamilyZeroShift) {
    for (double k2 : {0.1, 1.0, 30.0}) EXPECT_NEAR(j2_family(0.0, k2).J2, std::sqrt(kPi) / (2.0 * std::sqrt(k2)), 1e-14);
    double prev = j2_family(0.7, 0.2).J2;
    for (double k2 = 0.3; k2 < 5.0; k2 += 0.1) {
        const double v = j2_family(0.7, k2).J2;
        EXPECT_LT(v, prev);
        prev = v;
    }
}

TEST(Kernels, J2FamilyMomentsMatchQuadrature) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uk1(-6.0, 6.0), uk2(0.2, 40.0);
    for (int i = 0; i < 40; ++i) {
        const double k1 = uk1(rng), k2 = uk2(rng);
        const J2Family f = j2_family(k1, k2);
        const double m[4] = {f.J2, f.J2p, f.J2pp, f.J2ppp};
        for (int n = 0; n < 4; ++n) {
            const double ref = gk_inf([&](double z) { return std::pow(z, n) * std::exp(-k2 * z * z + k1 * z); }, 0.0);
            EXPECT_NEAR(m[n] / ref, 1.0, 1e-10) << k1 << " " << k2 << " n=" << n;
        }
    }
}

TEST(Kernels, J2FamilyDerivativeRecurrence) {
    const double k2 = 2.3, h = 1e-5;
    for (double k1 : {-2.0, 0.0, 1.7}) {
        const J2Family f = j2_family(k1, k2), fp = j2_family(k1 + h, k2), fm = j2_family(k1 - h, k2);
        EXPECT_NEAR((fp.J2 - fm.J2) / (2 * h) / f.J2p, 1.0, 1e-5);
        EXPECT_NEAR((fp.J2p - fm.J2p) / (2 * h) / f.J2pp, 1.0, 1e-5);
        EXPECT_NEAR((fp.J2pp - fm.J2pp) / (2 * h) / f.J2ppp, 1.0, 1e-5);
    }
}

TEST(Kernels, J2FamilyLogScale) {
    const J2Family a = j2_family(3.0, 0.4), b = j2_family(3.0, 0.4, 2.5);
    EXPECT_NEAR(b.J2 / a.J2, std::exp(-2.5), 1e-13);
    EXPECT_NEAR(b.J2ppp / a.J2ppp, std::exp(-2.5), 1e-13);
    // a huge shift stays finite once scaled
    const J2Family c = j2_family(200.0, 1.0, 200.0 * 200.0 / 4.0);
    EXPECT_TRUE(std::isfinite(c.J2ppp));
    EXPECT_GT(c.J2, 0.0);
}

TEST(Kernels, LambdaCashDividendClosedForm) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (OptionKind kind : {OptionKind::Put, OptionKind::Call}) {
        for (int i = 0; i < 25; ++i) {
            const double tj = 0.005 + 0.05 * u(rng);
            const double tau = tj + 0.001 + 0.04 * u(rng);
            const double yj = -0.4 * u(rng) * (kind == OptionKind::Put ? 1.0 : -1.0);
            const double yt = yj + (u(rng) - 0.5) * 0.2;
            const EBCoeffs c{std::exp(-tj + 0.01 * tj), std::exp(tj + 0.02 * tj), 0.1 * u(rng), 0.2 * u(rng)};
            const double closed = lambda_cash_div(kind, tj, tau, yj, yt, c, 100.0);
            const double num = lambda_cash_div_numeric(kind, tj, tau, yj, yt, c, 100.0);
            EXPECT_NEAR(closed, num, 1e-8 * std::max(1.0, std::abs(num))) << i;
        }
    }
    const EBCoeffs c{1.0, 1.0, 0.0, 0.0};
    EXPECT_THROW(lambda_cash_div(OptionKind::Put, 0.02, 0.02, 0.0, 0.0, c, 100.0), DomainError);
}

TEST(Kernels, J10EndpointBehaviour) {
    const EBCoeffs c{0.97, 1.02, 0.05, 0.1};
    for (OptionKind kind : {OptionKind::Put, OptionKind::Call}) {
        const double s = 0.03, ys = kind == OptionKind::Put ? -0.2 : 0.2, sy = -0.01;
        EXPECT_EQ(j10_term(kind, s, s, ys, ys, sy, c, 100.0), 0.0);
        const double lim = j10_limit(kind, s, ys, sy, c, 100.0);
        double prev_err = 1e300;
        for (double d : {1e-4, 1e-6, 1e-8}) {
            const double v = j10_term(kind, s, s + d, ys, ys, sy, c, 100.0);
            const double err = std::abs(v / std::sqrt(kPi * d) - lim);
            EXPECT_LT(err, prev_err);
            prev_err = err;
        }
        EXPECT_LT(prev_err, 1e-3 * std::max(1.0, std::abs(lim)));
    }
}

TEST(Kernels, J10LogScale) {
    const EBCoeffs c{0.97, 1.02, 0.05, 0.1};
    const double a = j10_term(OptionKind::Put, 0.02, 0.03, -0.1, -0.15, 0.002, c, 100.0);
    const double b = j10_term(OptionKind::Put, 0.02, 0.03, -0.1, -0.15, 0.002, c, 100.0, 1.5);
    EXPECT_NEAR(b, a * std::exp(-1.5), 1e-12 * std::abs(a));
    // the scaled integrand stays finite where the plain exponentials would overflow
    const double big = eb_integrand(OptionKind::Put, 0.02, 0.020001, -3.0, 0.0, 0.0, c, 100.0);
    EXPECT_TRUE(std::isfinite(big));
}

TEST(Kernels, EtaZeroRates) {
    const EBCoeffs c{std::exp(-0.04), std::exp(0.04), 0.0, 0.0};
    const double s = 0.04, y = -0.3;
    EXPECT_NEAR(eta_at_boundary(OptionKind::Put, s, y, c, 100.0),
                -2.0 * s * 100.0 * c.beta * (c.alpha - std::exp(y)), 1e-12);
    EXPECT_NEAR(eta_at_boundary(OptionKind::Call, s, -y, c, 100.0),
                -2.0 * s * 100.0 * c.beta * (std::exp(y) - c.alpha), 1e-12);
    EXPECT_NEAR(eb_integrand(OptionKind::Put, s, s, y, y, 0.0, c, 100.0), eta_at_boundary(OptionKind::Put, s, y, c, 100.0),
                1e-14);
}
