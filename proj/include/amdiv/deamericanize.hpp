#pragma once

#include <string>
#include <vector>

#include "amdiv/model.hpp"
#include "amdiv/pricer.hpp"

namespace amdiv {

// Mean volatility: Sigma^2 = (1/2T) int_0^T sigma^2, so tau(0) = Sigma^2 T.
double mean_sigma(const Model& m);

// The model with sigma replaced by the constant whose mean volatility is Sigma.
Model with_mean_sigma(const Model& m, double Sigma);
Model with_strike(const Model& m, double K);

struct ImpliedResult {
    double sigma_bar = 0.0;
    double american = 0.0;             // model price at sigma_bar
    double equivalent_european = 0.0;  // European leg of the same final price
    int iterations = 0;                // full reprices
    double residual = 0.0;             // american - quote
    std::vector<std::string> warnings;
};

struct ImpliedOptions {
    double sigma_lo = 0.01, sigma_hi = 3.0;
    double price_tol = 1e-9;  // relative to K
    int max_iterations = 100;
    PricerOptions pricer;
};

// Constant mean volatility Sigma reproducing an American quote for m.spec();
// m's own volatility curve is ignored. Throws NumericalError when the quote is
// outside the price range over the bracket or below intrinsic value.
ImpliedResult implied_sigma(double quote, const Model& m, const ImpliedOptions& opt = {});

struct StrikeQuote {
    double K;
    double price;
};

struct ImpliedStrikeResult {
    double x = 0.0;       // dimensionless implied strike
    double strike = 0.0;  // alpha(0) S e^{-x}
    double residual = 0.0;
    int iterations = 0;
    bool ok = false;
    std::string error;
};

struct ImpliedStrikeBatch {
    std::vector<ImpliedStrikeResult> results;
    int boundary_solves = 0;  // full pricing sweeps
    int price_evaluations = 0;
};

struct StrikeOptions {
    int n_x = 161;            // tabulation nodes of the strike-normalised price curve
    double x_margin = 0.25;   // tabulated range beyond the quotes' own x
    double price_tol = 1e-12; // relative to K
    PricerOptions pricer;
};

// Implied strikes for quotes of one maturity (m.spec().T) and kind at spot m.spec().S.
// One boundary solve gives P/K as a function of x, which is inverted per quote.
// Requires no cash dividends (the strike-normalised problem is autonomous only then).
ImpliedStrikeBatch implied_strike_batch(const std::vector<StrikeQuote>& quotes, const Model& m,
                                        const StrikeOptions& opt = {});

// One quote solved directly, repricing at each trial strike.
ImpliedStrikeResult implied_strike(const StrikeQuote& quote, const Model& m, const StrikeOptions& opt = {},
                                   int* boundary_solves = nullptr);

// Local variance from call prices C(T, x), x = log(alpha S/K), via the
// substitutions dC/dT -> C_T + C_x x_T, dC/dK -> -C_x/K, d2C/dK2 -> (C_x + C_xx)/K^2,
// x_T = a(T) - sigma^2(T)/2.
struct DupireInputs {
    double C, C_T, C_x, C_xx;
    double K, r, q, sigma_T;
};
double dupire_local_variance(const DupireInputs& in);

// Tabulated version: C[i][j] on maturities T[i] and uniform x nodes; central
// differences inside, NaN on the border.
std::vector<std::vector<double>> dupire_surface(const std::vector<double>& T, const std::vector<double>& x,
                                                const std::vector<std::vector<double>>& C, double S,
                                                const Model& m);

}  // namespace amdiv
