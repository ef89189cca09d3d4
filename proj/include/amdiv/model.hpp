#pragma once

#include <string>
#include <vector>

namespace amdiv {

enum class OptionKind { Put, Call };

const char* to_string(OptionKind kind);

struct OptionSpec {
    OptionKind kind = OptionKind::Put;
    double K = 100.0;
    double T = 0.25;
    double S = 100.0;

    void validate() const;
};

// Coefficient curve: c0 * exp(-k t) + c1, or a tabulated override interpolated
// with a monotone (Fritsch-Carlson) cubic and held flat outside its knots.
class Curve {
public:
    Curve() = default;
    static Curve exponential(double c0, double c1, double k);
    static Curve constant(double c) { return exponential(0.0, c, 0.0); }
    static Curve tabulated(std::vector<double> t, std::vector<double> v);

    double operator()(double t) const;
    bool is_tabulated() const { return !knots_.empty(); }
    double c0() const { return c0_; }
    double c1() const { return c1_; }
    double k() const { return k_; }
    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& values() const { return values_; }

private:
    double c0_ = 0.0, c1_ = 0.0, k_ = 0.0;
    std::vector<double> knots_, values_, slopes_;
};

struct CashDividend {
    double t;       // ex-date, yr
    double amount;  // currency
};

struct PropDividend {
    double t;         // ex-date, yr
    double fraction;  // in [0,1)
};

struct MarketModel {
    Curve r = Curve::constant(0.0);
    Curve q = Curve::constant(0.0);
    Curve sigma = Curve::constant(0.2);
    std::vector<CashDividend> cash_divs;
    std::vector<PropDividend> prop_divs;

    // Throws ConfigError when an invariant is broken on [0,T].
    void validate(double T) const;
    bool has_discrete_dividends() const { return !cash_divs.empty() || !prop_divs.empty(); }
};

// Cumulative integral of a curve on a dense uniform grid over [0,T]; each cell
// is integrated with 10-point Gauss-Legendre, partial cells likewise.
class CurveIntegral {
public:
    CurveIntegral() = default;
    CurveIntegral(const Curve& f, double T, int n_nodes, bool squared = false);

    // int_{t1}^{t2} f(u) du (or f^2), t1,t2 in [0,T]
    double integral(double t1, double t2) const;
    double from_zero(double t) const;

private:
    double partial(int cell, double a, double b) const;
    Curve f_;
    bool squared_ = false;
    double T_ = 0.0, dt_ = 0.0;
    std::vector<double> cum_;
};

enum class TimeDirection {
    Backward,  // tau(t) = 1/2 int_t^T sigma^2, tau(T) = 0
    Forward    // tau(t) = 1/2 int_0^t sigma^2, tau(0) = 0
};

class TimeMap {
public:
    TimeMap(const Curve& sigma, double T, TimeDirection dir, int n_nodes = 512);

    double tau_of_t(double t) const;
    double t_of_tau(double tau) const;
    double tau_max() const { return tau_max_; }
    double T() const { return T_; }
    TimeDirection direction() const { return dir_; }

private:
    double half_int_sigma2_from_zero(double t) const;
    Curve sigma_;
    double T_, tau_max_;
    TimeDirection dir_;
    CurveIntegral s2_;
    int n_;
    double dt_;
};

// Which side of a proportional-dividend tau-image to evaluate on. Pre is the
// side reached first when marching in tau (calendar time just after the
// ex-date); Post includes the dividend.
enum class Side { Pre, Post };

// Market model plus contract: the single provider of every coefficient and
// time-transform used by the solvers (backward tau convention).
class Model {
public:
    Model(MarketModel market, OptionSpec spec, int n_time_nodes = 512);

    const MarketModel& market() const { return market_; }
    const OptionSpec& spec() const { return spec_; }
    const TimeMap& time_map() const { return map_; }
    double T() const { return spec_.T; }
    double K() const { return spec_.K; }

    double r(double t) const;
    double q(double t) const;
    double sigma(double t) const;
    // Continuous part of a(t) = r(t) - q(t); discrete proportional dividends
    // enter only through the jump terms of rho().
    double coeff_a(double t) const;

    double int_r(double t1, double t2) const { return int_r_.integral(t1, t2); }
    double int_q(double t1, double t2) const { return int_q_.integral(t1, t2); }
    double int_sigma2(double t1, double t2) const { return int_s2_.integral(t1, t2); }
    double discount(double t1, double t2) const;
    // sum of log(1 - d_i) over ex-dates t_i in (t1, t2]
    double prop_log_factor(double t1, double t2) const;

    double tau_of_t(double t) const { return map_.tau_of_t(t); }
    double t_of_tau(double tau) const { return map_.t_of_tau(tau); }
    double tau_max() const { return map_.tau_max(); }

    double rho(double tau, Side side = Side::Pre) const;
    double rbar(double tau) const;
    double alpha(double tau, Side side = Side::Pre) const;
    double beta(double tau, Side side = Side::Pre) const;
    double rho_prime(double tau) const;   // 2 a(t)/sigma^2(t), continuous part
    double rbar_prime(double tau) const;  // 2 r(t)/sigma^2(t)

    const std::vector<double>& cash_tau() const { return cash_tau_; }
    const std::vector<double>& prop_tau() const { return prop_tau_; }
    // log(1 - d_i) for each proportional dividend, in schedule order
    const std::vector<double>& prop_rho_jump() const { return prop_jump_; }

    // E[S_t] from the first-moment ODE dE/dt = a E - b with the dividend impulses.
    double expected_spot(double t) const;

    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    bool is_prop_image(double tau, std::size_t i, Side side) const;

    MarketModel market_;
    OptionSpec spec_;
    TimeMap map_;
    CurveIntegral int_r_, int_q_, int_s2_;
    std::vector<double> cash_tau_, prop_tau_, prop_jump_;
    std::vector<std::string> warnings_;
};

}  // namespace amdiv
