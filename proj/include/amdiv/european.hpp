#pragma once

#include <span>
#include <vector>

#include "amdiv/model.hpp"

namespace amdiv {

// Function of one variable on a uniform grid.
struct GridFunction {
    double x0 = 0.0, dx = 1.0;
    std::vector<double> v;

    std::size_t size() const { return v.size(); }
    double x(std::size_t i) const { return x0 + dx * static_cast<double>(i); }
    double x_max() const { return x(v.size() - 1); }
    // linear interpolation; edge value outside
    double operator()(double x) const;
    // int W(xi) G(x, xi, tau) dxi for the piecewise-linear interpolant, edge
    // values extended to infinity
    double convolve(double x, double tau) const;
};

struct EuroOptions {
    int n_x = 1201;
    int gl_points = 8;      // source term: Gauss-Legendre nodes in time
    double u_step = 0.125;  // source term: trapezoid step of the Gaussian variable
    double u_max = 6.5;
};

// W(tau, .) in x = log(alpha S / K); the put is P = DF (W + K e^{-S/K}).
struct EuroState {
    double tau = 0.0;
    GridFunction W;
    bool terminal = false;  // W is the exact terminal profile
};

// K [(1 - e^x)^+ - e^{-e^x}]
double terminal_profile_at(double x, double K);
GridFunction terminal_profile(double x0, double dx, std::size_t n, double K);

class EuropeanSolver {
public:
    EuropeanSolver(const Model& m, EuroOptions opt = {});

    const Model& model() const { return m_; }
    double x_of_spot(double S) const;

    EuroState initial_state() const;
    // W at tau_target; no discrete dividend strictly inside (state.tau, tau_target)
    EuroState propagate_free(const EuroState& st, double tau_target) const;
    double propagate_free_at(const EuroState& st, double tau_target, double x) const;
    // cash dividend j applied at its image (state is on the calendar-after side)
    EuroState dividend_step(const EuroState& st, std::size_t j) const;
    // proportional dividend i: W changes only through the e^{-S/K} split
    EuroState prop_step(const EuroState& st, std::size_t i) const;
    // int_{tau1}^{tau2} int G(x, xi, tau2 - nu) Theta(nu, xi) dxi dnu
    double source_integral(double tau1, double tau2, double x) const;

    // marches all dividend images; history holds the state after each event
    std::vector<EuroState> march(bool keep_history = true) const;
    // W(tau_max, x) for each x
    std::vector<double> W_final(std::span<const double> xs) const;
    // option value at t=0 from W(tau_max, x_of_spot(S)), for put or call
    double value_from_W(double W, double S) const;

    double price() const;
    std::vector<double> prices(std::span<const double> spots) const;

private:
    struct Event {
        double tau;
        bool cash;
        std::size_t index;
    };
    // tau-dependent factors of the source quadrature on one interval
    struct SourceNodes {
        std::vector<double> weight, step, inv_alpha, rho_p;
    };
    SourceNodes source_nodes(double tau1, double tau2) const;
    double source_integral(const SourceNodes& sn, double x) const;
    void check_free_interval(double tau1, double tau2) const;
    double free_value(const EuroState& st, double dt, const SourceNodes& sn, double x) const;

    const Model& m_;
    EuroOptions opt_;
    std::vector<Event> events_;
    double xc_, half_width_;
    std::vector<double> gl_x_, gl_w_, u_weight_;  // source-term quadrature
};

// European price of m.spec() at t = 0.
double price_european(const Model& m, const EuroOptions& opt = {});

// Black-Scholes with continuous yield (closed-form oracle).
double black_scholes(OptionKind kind, double S, double K, double T, double r, double q, double sigma);

}  // namespace amdiv
