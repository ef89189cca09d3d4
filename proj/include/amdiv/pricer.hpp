#pragma once

#include <string>
#include <vector>

#include "amdiv/boundary.hpp"
#include "amdiv/density.hpp"
#include "amdiv/european.hpp"
#include "amdiv/model.hpp"

namespace amdiv {

struct PricerOptions {
    BoundaryOptions boundary;
    EuroOptions euro;
    DensityOptions density;
    int eep_refine = 4;  // EEP quadrature points per boundary interval
    // Put dividend term from the exact left-limit exercise set (empty); false uses the
    // solved calendar-before boundary node instead.
    bool put_theta_left_limit = true;
};

struct PriceReport {
    double american = 0.0;
    double european = 0.0;
    double eep = 0.0;
    double dividend_theta = 0.0;
    BoundaryStatus boundary_status = BoundaryStatus::NoBoundary;
    std::string boundary_reason;
    int boundary_nodes = 0;
    int max_iterations = 0;
    double max_residual = 0.0;
    double seconds_boundary = 0.0, seconds_european = 0.0, seconds_premium = 0.0, seconds_total = 0.0;
    std::vector<std::string> diagnostics;
    BoundaryCurve boundary;
};

// int_0^T DF(0,u) E[(r K - q S_u) 1{S_u <= S_B(u)}] du for a put,
// int_0^T DF(0,u) E[(q S_u - r K) 1{S_u >= S_B(u)}] du for a call.
double eep_integral(const BoundaryCurve& bc, const DensityMarch& dm, const Model& m, int refine = 4);

// Discrete-dividend term, with the boundary and the law of S on the calendar-before
// side of each ex-date: put -sum DF D_j P(S <= S_B) - sum DF d_i E[S 1{S <= S_B}],
// call +sum DF D_j P(S >= S_B) + sum DF d_i E[S 1{S >= S_B}]. With put_left_limit the
// put term is zero (no exercise immediately before an ex-date).
double dividend_theta(const BoundaryCurve& bc, const DensityMarch& dm, const Model& m, bool put_left_limit = true);

// American = European + EEP + dividend term, at the model's spot.
PriceReport price_american(const Model& m, const PricerOptions& opt = {});

// American prices at several spots from one solved boundary (the boundary does not
// depend on the spot). European legs are returned through `european` when given.
std::vector<double> american_at_spots(const Model& m, const BoundaryCurve& bc, const std::vector<double>& spots,
                                      const PricerOptions& opt = {}, std::vector<double>* european = nullptr);

}  // namespace amdiv
