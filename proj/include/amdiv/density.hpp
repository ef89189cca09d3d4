#pragma once

#include <functional>
#include <vector>

#include "amdiv/european.hpp"
#include "amdiv/model.hpp"

namespace amdiv {

// Forward coordinates: S_t = A(t) e^x with A(t) = S exp(int_0^t a - tau_f(t) + sum log(1 - d_i))
// and tau_f(t) = 1/2 int_0^t sigma^2. Between cash ex-dates x diffuses as
// W_tau = W_xx; a cash dividend moves mass along x' = log(e^x - D/A).
struct DensityOptions {
    int n_x = 1201;
};

// W(tau_f, .) at calendar time t. Before the first cash dividend W is the heat
// kernel from x = 0 and `W` is empty.
struct DensityState {
    double t = 0.0;
    double tau = 0.0;    // forward tau at t
    double scale = 1.0;  // A(t)
    bool gaussian = true;
    double base_tau = 0.0;  // forward tau at which the grid was last updated
    GridFunction W;         // on the grid: W(base_tau, .)
    double lost_mass = 0.0; // mass carried to S <= 0 by cash dividends so far

    // probability mass of x (1 up to the lost mass)
    double mass() const;
};

class DensityMarch {
public:
    DensityMarch(const Model& m, double S0, DensityOptions opt = {});

    double S0() const { return S0_; }
    double tau_f(double t) const;
    double scale(double t) const;  // A(t), calendar-after side at ex-dates

    // Law of S_t; with before_event the cash dividend dated exactly t is not yet paid
    // and a proportional dividend dated t not yet applied.
    DensityState state_at(double t, bool before_event = false) const;

    // p(t, S) for each S
    std::vector<double> pdf(const DensityState& st, const std::vector<double>& S) const;
    // P(S_t <= b), E[S_t 1{S_t <= b}], E[S_t]
    double prob_below(const DensityState& st, double b) const;
    double spot_below(const DensityState& st, double b) const;
    double expected_spot(const DensityState& st) const;
    // discount * int_lo^hi payoff(S) p(t, S) dS by quadrature on the x-grid; the
    // region is clipped to the grid and `clipped` reports it
    struct Expectation {
        double value;
        bool clipped;
    };
    Expectation expect_payoff(const DensityState& st, const std::function<double(double)>& payoff, double lo,
                              double hi, double discount = 1.0) const;
    // W(tau, .) propagated to the state's tau on the grid nodes
    GridFunction grid_values(const DensityState& st) const;

    int cash_steps() const { return static_cast<int>(after_.size()); }

private:
    struct CashDate {
        double t;
        double amount;
    };
    // same law, advanced to t with no dividend in between
    DensityState state_at_grid_free(const DensityState& from, double t) const;
    DensityState apply_cash(const DensityState& pre, double D) const;
    // x-coordinate of spot level b in state st
    double x_of(const DensityState& st, double b) const;
    // int_{-inf}^{b} e^{k x} W(tau, x) dx for k in {0, 1}
    double partial_moment(const DensityState& st, double b, int k) const;

    const Model& m_;
    double S0_;
    DensityOptions opt_;
    std::vector<CashDate> cash_;
    std::vector<DensityState> after_;  // state right after each positive cash dividend
    double x0_, dx_;
};

// Law of S_{t*} started from S at t = 0.
DensityState density_march(const Model& m, double S, double t_star, const DensityOptions& opt = {});

}  // namespace amdiv
