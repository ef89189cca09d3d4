#pragma once

#include "amdiv/model.hpp"

namespace amdiv {

// Scaled complementary error function e^{x^2} erfc(x), accurate for all x
// where the result is finite.
double erfcx(double x);

// Heat kernel (4 pi tau)^{-1/2} exp(-(x - xi)^2 / (4 tau)); tau <= 0 is a DomainError.
double gauss_kernel(double x, double xi, double tau);

// int (1 - e^xi)^+ G(x, xi, tau) dxi
double closed_form_I1(double x, double tau);

// -int e^{-e^xi} G(x, xi, tau) dxi by exponentially convergent trapezoid
// quadrature in the Gaussian variable.
double numeric_I2(double x, double tau);

struct ApproxI2 {
    double value;
    bool fallback;  // tau outside (0, 0.35]: value is numeric_I2
};

// Four-term Taylor approximation of I2 about xi = x.
ApproxI2 approx_I2(double x, double tau);

// Initial-condition terms of the boundary equations (K scales linearly).
double j0_put(double y_tau, double tau, double K = 1.0);
// Printed sign convention: j0_call <= 0.
double j0_call(double y_tau, double tau, double K = 1.0);

struct J2Family {
    double J2, J2p, J2pp, J2ppp;
    double k1, k2;
};

// J2(k1) = int_0^inf exp(-k2 Z^2 + k1 Z) dZ and its first three k1-derivatives
// (the Z-moments). All values are multiplied by exp(-log_scale), which lets a
// caller fold a small Gaussian prefactor in without overflow.
J2Family j2_family(double k1, double k2, double log_scale = 0.0);

// Coefficients of the transformed boundary problem sampled at one time s.
struct EBCoeffs {
    double alpha;
    double beta;
    double rho_p;   // 2a/sigma^2
    double rbar_p;  // 2r/sigma^2
};

EBCoeffs eb_coeffs(const Model& m, double s, Side side = Side::Pre);

// eta(s, y_s): value at the boundary of the source that survives once the
// continuation-region integral is reduced.
double eta_at_boundary(OptionKind kind, double s, double y_s, const EBCoeffs& c, double K);

// Image-correction term J10 of the reduced inner integral (zero at s = tau),
// multiplied by exp(-log_scale). s_yprime is the product s*y'(s).
double j10_term(OptionKind kind, double s, double tau, double y_s, double y_tau, double s_yprime,
                const EBCoeffs& c, double K, double log_scale = 0.0);

// Limit of J10 / sqrt(pi (tau - s)) as s -> tau (J10 vanishes like sqrt(tau - s)).
double j10_limit(OptionKind kind, double s, double y_s, double s_yprime, const EBCoeffs& c, double K);

// Reduced inner xi-integral of the boundary equation: eta + J10.
double inner_integral_closed(OptionKind kind, double s, double tau, double y_s, double y_tau,
                             double s_yprime, const EBCoeffs& c, double K);

// Integrand of the outer s-integral, e^{-(y_s - y_tau)^2/(4(tau - s))} (eta + J10),
// evaluated without intermediate overflow. At s = tau returns eta(tau, y_tau).
double eb_integrand(OptionKind kind, double s, double tau, double y_s, double y_tau, double s_yprime,
                    const EBCoeffs& c, double K);

// Closed-form dividend term: int_{y_j}^inf k(xi) e^{-tau_j (xi - y_j)^2} zeta(tau_j, xi) dxi
// with k the x-derivative heat kernel (xi - y_tau)/(2 sqrt(pi) D^{3/2}) e^{-(xi-y_tau)^2/(4D)},
// D = tau - tau_j. The boundary equation adds w_j times this, w_j = alpha(tau_j) D_j / K.
double lambda_cash_div(OptionKind kind, double tau_j, double tau, double y_j, double y_tau,
                       const EBCoeffs& cj, double K);

// The same quantity by direct adaptive quadrature (validation path).
double lambda_cash_div_numeric(OptionKind kind, double tau_j, double tau, double y_j, double y_tau,
                               const EBCoeffs& cj, double K);

// Point-source term of a proportional dividend: the continuous formulas with
// rho' replaced by drho * delta(s - tau_i).
double prop_div_impulse(OptionKind kind, double tau_i, double tau, double y_i, double y_tau, double drho,
                        const EBCoeffs& ci, double K);

}  // namespace amdiv
