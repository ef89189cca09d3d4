#include "amdiv/kernels.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "amdiv/errors.hpp"

namespace amdiv {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrtPi = 1.77245385090551602730;

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

double erfcx(double x) {
    if (x < 0.0) {
        if (x < -26.6) return HUGE_VAL;
        return 2.0 * std::exp(x * x) - erfcx(-x);
    }
    if (x < 25.0) return std::exp(x * x) * std::erfc(x);
    // asymptotic series, terms below 1e-17 relative by n = 8 for x >= 25
    const double inv2x2 = 1.0 / (2.0 * x * x);
    double term = 1.0, sum = 1.0;
    for (int n = 1; n <= 8; ++n) {
        term *= -(2.0 * n - 1.0) * inv2x2;
        sum += term;
    }
    return sum / (x * kSqrtPi);
}

double gauss_kernel(double x, double xi, double tau) {
    if (!(tau > 0.0)) throw DomainError("gauss_kernel requires tau > 0");
    const double d = x - xi;
    return std::exp(-d * d / (4.0 * tau)) / (2.0 * std::sqrt(kPi * tau));
}

double closed_form_I1(double x, double tau) {
    if (!(tau > 0.0)) throw DomainError("closed_form_I1 requires tau > 0");
    const double s = std::sqrt(2.0 * tau);
    const double a = norm_cdf(-x / s);
    const double arg = -(x + 2.0 * tau) / s;
    // e^{x+tau} N(arg) written through erfc to stay finite for large x
    const double b = 0.5 * std::exp(x + tau) * std::erfc(-arg / std::sqrt(2.0));
    return a - b;
}

double numeric_I2(double x, double tau) {
    if (!(tau > 0.0)) throw DomainError("numeric_I2 requires tau > 0");
    // xi = x + 2 sqrt(tau) u, weight e^{-u^2}/sqrt(pi); the integrand is entire
    // in u so the trapezoid rule converges geometrically.
    const double h = 1.0 / 32.0;
    const double c = 2.0 * std::sqrt(tau);
    double sum = 0.0;
    for (int i = -320; i <= 320; ++i) {
        const double u = h * i;
        sum += std::exp(-u * u - std::exp(x + c * u));
    }
    return -sum * h / kSqrtPi;
}

ApproxI2 approx_I2(double x, double tau) {
    if (!(tau > 0.0) || tau > 0.35) return {numeric_I2(x, tau > 0.0 ? tau : 1e-300), true};
    const double ex = std::exp(x);
    const double a2 = -0.5 * (ex - 1.0);
    const double a4 = (1.0 - ex * (ex * (ex - 6.0) + 7.0)) / 24.0;
    // Gaussian moments: E(xi-x)^2 = 2 tau, E(xi-x)^4 = 12 tau^2, odd moments vanish
    const double v = -std::exp(-ex) + std::exp(x - ex) * (2.0 * tau * a2 + 12.0 * tau * tau * a4);
    return {v, false};
}

double j0_put(double y, double tau, double K) {
    if (!(tau > 0.0)) throw DomainError("j0_put requires tau > 0");
    return K * std::exp(tau + y) * (1.0 + std::erf((2.0 * tau + y) / (2.0 * std::sqrt(tau))));
}

double j0_call(double y, double tau, double K) {
    if (!(tau > 0.0)) throw DomainError("j0_call requires tau > 0");
    const double arg = (2.0 * tau - y) / (2.0 * std::sqrt(tau));
    // e^{tau-y} erfc(arg) = e^{tau - y - arg^2} erfcx(arg) avoids overflow as y -> -inf
    if (arg > 0.0) return -K * std::exp(tau - y - arg * arg) * erfcx(arg);
    return -K * std::exp(tau - y) * std::erfc(arg);
}

J2Family j2_family(double k1, double k2, double log_scale) {
    if (!(k2 > 0.0)) throw DomainError("j2_family requires k2 > 0");
    const double sk = std::sqrt(k2);
    const double u = k1 / (2.0 * sk);
    const double sc = std::exp(-log_scale);
    // Es = e^{u^2}(1 + erf u) e^{-log_scale}
    double Es;
    if (u <= 0.0) {
        Es = erfcx(-u) * sc;
    } else {
        Es = 2.0 * std::exp(u * u - log_scale) - erfcx(u) * sc;
    }
    J2Family f;
    f.k1 = k1;
    f.k2 = k2;
    const double k2_15 = k2 * sk, k2_25 = k2_15 * k2, k2_35 = k2_25 * k2;
    f.J2 = kSqrtPi / (2.0 * sk) * Es;
    f.J2p = sc / (2.0 * k2) + kSqrtPi * k1 / (4.0 * k2_15) * Es;
    f.J2pp = sc * k1 / (4.0 * k2 * k2) + kSqrtPi * (2.0 * k2 + k1 * k1) / (8.0 * k2_25) * Es;
    f.J2ppp = sc * (4.0 * k2 + k1 * k1) / (8.0 * k2 * k2 * k2) +
              kSqrtPi * k1 * (6.0 * k2 + k1 * k1) / (16.0 * k2_35) * Es;
    return f;
}

EBCoeffs eb_coeffs(const Model& m, double s, Side side) {
    return {m.alpha(s, side), m.beta(s, side), m.rho_prime(s), m.rbar_prime(s)};
}

double eta_at_boundary(OptionKind kind, double s, double y, const EBCoeffs& c, double K) {
    if (kind == OptionKind::Put) {
        const double z = K * c.beta * (c.alpha - std::exp(y));
        return -(2.0 * s + c.rbar_p) * z - K * c.beta * std::exp(y) * c.rho_p;
    }
    const double z = K * c.beta * (std::exp(-y) - c.alpha);
    return -(2.0 * s + c.rbar_p) * z + K * c.beta * std::exp(-y) * c.rho_p;
}

double j10_term(OptionKind kind, double s, double tau, double y_s, double y_tau, double sy,
                const EBCoeffs& c, double K, double log_scale) {
    if (!(s < tau)) return 0.0;
    const double d = tau - s;
    const double k2 = s + 1.0 / (4.0 * d);
    const double k1 = (y_tau - y_s) / (2.0 * d);
    const double al = c.alpha, rb = c.rbar_p, rp = c.rho_p;
    const double s2 = s * s;
    double a[4], b[4];
    J2Family A, B = j2_family(k1, k2, log_scale);
    double ey;
    if (kind == OptionKind::Put) {
        a[0] = rb - rp + 2.0 * sy + 6.0 * s;
        a[1] = 2.0 * (s * (2.0 - rb + rp) + sy - 6.0 * s2 - 1.0);
        a[2] = -(1.0 + 12.0 * s2 + 4.0 * s * sy);
        a[3] = 2.0 * s * (4.0 * s2 + 1.0);
        b[0] = -2.0 * al * sy;
        b[1] = 2.0 * al * (1.0 + 6.0 * s2 + s * rb);
        b[2] = 4.0 * s * al * sy;
        b[3] = -2.0 * s * al * (4.0 * s2 + 1.0);
        A = j2_family(k1 + 1.0, k2, log_scale);
        ey = std::exp(y_s);
    } else {
        a[0] = -2.0 * sy + 6.0 * s + rb - rp;
        a[1] = 12.0 * s2 + 2.0 * s * rb - 2.0 * s * rp + 2.0 * sy - 4.0 * s + 2.0;
        a[2] = 4.0 * s * sy - 12.0 * s2 - 1.0;
        a[3] = -2.0 * s * (4.0 * s2 + 1.0);
        b[0] = 2.0 * al * sy;
        b[1] = -al * (12.0 * s2 + 2.0 * s * rb + 2.0);
        b[2] = -4.0 * s * al * sy;
        b[3] = 2.0 * s * al * (4.0 * s2 + 1.0);
        A = j2_family(k1 - 1.0, k2, log_scale);
        ey = std::exp(-y_s);
    }
    const double sa = a[0] * A.J2 + a[1] * A.J2p + a[2] * A.J2pp + a[3] * A.J2ppp;
    const double sb = b[0] * B.J2 + b[1] * B.J2p + b[2] * B.J2pp + b[3] * B.J2ppp;
    return K * c.beta * (ey * sa + sb);
}

double j10_limit(OptionKind kind, double s, double y_s, double sy, const EBCoeffs& c, double K) {
    // only the J2(k) terms survive: J2 ~ sqrt(pi (tau - s))
    if (kind == OptionKind::Put) {
        const double a0 = c.rbar_p - c.rho_p + 2.0 * sy + 6.0 * s;
        return K * c.beta * (std::exp(y_s) * a0 - 2.0 * c.alpha * sy);
    }
    const double a0 = -2.0 * sy + 6.0 * s + c.rbar_p - c.rho_p;
    return K * c.beta * (std::exp(-y_s) * a0 + 2.0 * c.alpha * sy);
}

double inner_integral_closed(OptionKind kind, double s, double tau, double y_s, double y_tau, double sy,
                             const EBCoeffs& c, double K) {
    return eta_at_boundary(kind, s, y_s, c, K) + j10_term(kind, s, tau, y_s, y_tau, sy, c, K, 0.0);
}

double eb_integrand(OptionKind kind, double s, double tau, double y_s, double y_tau, double sy,
                    const EBCoeffs& c, double K) {
    if (!(s < tau)) return eta_at_boundary(kind, s, y_s, c, K);
    const double d = tau - s;
    const double ls = (y_s - y_tau) * (y_s - y_tau) / (4.0 * d);
    const double eta = eta_at_boundary(kind, s, y_s, c, K);
    return eta * std::exp(-ls) + j10_term(kind, s, tau, y_s, y_tau, sy, c, K, ls);
}

double lambda_cash_div(OptionKind kind, double tj, double tau, double yj, double yt, const EBCoeffs& cj,
                       double K) {
    if (!(tau > tj)) throw DomainError("lambda_cash_div requires tau > tau_j");
    const double d = tau - tj;
    const double ls = (yj - yt) * (yj - yt) / (4.0 * d);
    const double k1 = (yt - yj) / (2.0 * d);
    const double k2 = tj + 1.0 / (4.0 * d);
    const double al = cj.alpha;
    const J2Family B = j2_family(k1, k2, ls);
    double br;
    if (kind == OptionKind::Put) {
        const J2Family A = j2_family(k1 - 1.0, k2, ls);
        const double sa = 2.0 * tj * al * A.J2 - 2.0 * tj * al * A.J2p - 4.0 * tj * tj * al * A.J2pp;
        const double sb = -2.0 * tj * B.J2 - 2.0 * tj * B.J2p + 4.0 * tj * tj * B.J2pp;
        br = std::exp(-ls) + std::exp(-yj) * sa + sb;
    } else {
        const J2Family A = j2_family(k1 + 1.0, k2, ls);
        const double sa = 2.0 * tj * al * A.J2 + 2.0 * tj * al * A.J2p - 4.0 * tj * tj * al * A.J2pp;
        const double sb = -2.0 * tj * B.J2 + 2.0 * tj * B.J2p + 4.0 * tj * tj * B.J2pp;
        br = -std::exp(-ls) + std::exp(yj) * sa + sb;
    }
    return K * cj.beta * br / std::sqrt(kPi * d);
}

double lambda_cash_div_numeric(OptionKind kind, double tj, double tau, double yj, double yt,
                               const EBCoeffs& cj, double K) {
    if (!(tau > tj)) throw DomainError("lambda_cash_div_numeric requires tau > tau_j");
    const double d = tau - tj;
    auto f = [&](double xi) {
        const double kern = (xi - yt) / (2.0 * kSqrtPi * d * std::sqrt(d)) * std::exp(-(xi - yt) * (xi - yt) / (4.0 * d));
        const double E = std::exp(-tj * (xi - yj) * (xi - yj));
        double zeta;
        if (kind == OptionKind::Put) {
            const double z = K * cj.beta * (cj.alpha - std::exp(xi));
            zeta = 2.0 * tj * z * (xi - yj) * std::exp(-xi) + K * cj.beta;
        } else {
            const double z = K * cj.beta * (std::exp(-xi) - cj.alpha);
            zeta = -K * cj.beta - 2.0 * tj * z * (xi - yj) * std::exp(xi);
        }
        return kern * E * zeta;
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double w = std::sqrt(d);
    double lo = yj, total = 0.0;
    // split where the kernel lives, then integrate the tail
    const double c = std::max(yt, yj);
    const double edges[] = {c - 12.0 * w, c - 4.0 * w, c, c + 4.0 * w, c + 12.0 * w, c + 40.0 * w + 10.0};
    for (double e : edges) {
        if (e <= lo) continue;
        total += GK::integrate(f, lo, e, 15, 1e-14);
        lo = e;
    }
    return total;
}

double prop_div_impulse(OptionKind kind, double ti, double tau, double yi, double yt, double drho,
                        const EBCoeffs& ci, double K) {
    if (!(tau > ti)) throw DomainError("prop_div_impulse requires tau > tau_i");
    const double d = tau - ti;
    const double ls = (yi - yt) * (yi - yt) / (4.0 * d);
    const double k1 = (yt - yi) / (2.0 * d);
    const double k2 = ti + 1.0 / (4.0 * d);
    double br;
    if (kind == OptionKind::Put) {
        const J2Family A = j2_family(k1 + 1.0, k2, ls);
        br = std::exp(yi) * (-std::exp(-ls) - A.J2 + 2.0 * ti * A.J2p);
    } else {
        const J2Family A = j2_family(k1 - 1.0, k2, ls);
        br = std::exp(-yi) * (std::exp(-ls) - A.J2 - 2.0 * ti * A.J2p);
    }
    return drho * K * ci.beta * br / std::sqrt(kPi * d);
}

}  // namespace amdiv
