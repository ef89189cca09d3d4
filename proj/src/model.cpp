#include "amdiv/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <boost/math/quadrature/gauss.hpp>

#include "amdiv/errors.hpp"

namespace amdiv {

namespace {

using GL10 = boost::math::quadrature::gauss<double, 10>;

bool strictly_increasing(const std::vector<double>& t) {
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1])) return false;
    return true;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

const char* to_string(OptionKind kind) { return kind == OptionKind::Put ? "put" : "call"; }

void OptionSpec::validate() const {
    if (!(K > 0.0) || !std::isfinite(K)) throw ConfigError("strike K must be positive");
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("maturity T must be positive");
    if (!(S > 0.0) || !std::isfinite(S)) throw ConfigError("spot S must be positive");
}

Curve Curve::exponential(double c0, double c1, double k) {
    Curve c;
    c.c0_ = c0;
    c.c1_ = c1;
    c.k_ = k;
    return c;
}

Curve Curve::tabulated(std::vector<double> t, std::vector<double> v) {
    if (t.size() != v.size() || t.size() < 2)
        throw ConfigError("tabulated curve needs at least two (t, value) knots");
    if (!strictly_increasing(t)) throw ConfigError("tabulated curve knots must be strictly increasing");
    Curve c;
    const std::size_t n = t.size();
    std::vector<double> h(n - 1), delta(n - 1), m(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = t[i + 1] - t[i];
        delta[i] = (v[i + 1] - v[i]) / h[i];
    }
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] <= 0.0) {
            m[i] = 0.0;
        } else {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    c.knots_ = std::move(t);
    c.values_ = std::move(v);
    c.slopes_ = std::move(m);
    return c;
}

double Curve::operator()(double t) const {
    if (knots_.empty()) return c0_ * std::exp(-k_ * t) + c1_;
    if (t <= knots_.front()) return values_.front();
    if (t >= knots_.back()) return values_.back();
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
    const double h = knots_[i + 1] - knots_[i];
    const double s = (t - knots_[i]) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    return h00 * values_[i] + h10 * h * slopes_[i] + h01 * values_[i + 1] + h11 * h * slopes_[i + 1];
}

void MarketModel::validate(double T) const {
    const int n = 2048;
    for (int i = 0; i <= n; ++i) {
        const double t = T * i / n;
        const double s = sigma(t);
        if (!(s > 0.0) || !std::isfinite(s))
            throw ConfigError("volatility must be positive on [0,T]; sigma(" + fmt_double(t) + ") = " + fmt_double(s));
        if (!std::isfinite(r(t)) || !std::isfinite(q(t))) throw ConfigError("rate curves must be finite on [0,T]");
    }
    std::vector<double> tc, tp;
    for (const auto& d : cash_divs) {
        if (!(d.t > 0.0 && d.t < T)) throw ConfigError("cash dividend date must lie strictly inside (0,T)");
        if (!(d.amount >= 0.0) || !std::isfinite(d.amount)) throw ConfigError("cash dividend amount must be >= 0");
        tc.push_back(d.t);
    }
    for (const auto& d : prop_divs) {
        if (!(d.t > 0.0 && d.t < T)) throw ConfigError("proportional dividend date must lie strictly inside (0,T)");
        if (!(d.fraction >= 0.0 && d.fraction < 1.0))
            throw ConfigError("proportional dividend fraction must lie in [0,1)");
        tp.push_back(d.t);
    }
    if (!strictly_increasing(tc)) throw ConfigError("cash dividend dates must be strictly increasing");
    if (!strictly_increasing(tp)) throw ConfigError("proportional dividend dates must be strictly increasing");
}

CurveIntegral::CurveIntegral(const Curve& f, double T, int n_nodes, bool squared)
    : f_(f), squared_(squared), T_(T) {
    if (n_nodes < 2) n_nodes = 2;
    dt_ = T / (n_nodes - 1);
    cum_.assign(n_nodes, 0.0);
    for (int i = 1; i < n_nodes; ++i) cum_[i] = cum_[i - 1] + partial(i - 1, dt_ * (i - 1), dt_ * i);
}

double CurveIntegral::partial(int, double a, double b) const {
    if (b <= a) return 0.0;
    if (squared_) {
        return GL10::integrate([this](double u) { const double v = f_(u); return v * v; }, a, b);
    }
    return GL10::integrate([this](double u) { return f_(u); }, a, b);
}

double CurveIntegral::from_zero(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= T_) return cum_.back();
    int cell = static_cast<int>(t / dt_);
    cell = std::clamp(cell, 0, static_cast<int>(cum_.size()) - 2);
    return cum_[cell] + partial(cell, dt_ * cell, t);
}

double CurveIntegral::integral(double t1, double t2) const { return from_zero(t2) - from_zero(t1); }

TimeMap::TimeMap(const Curve& sigma, double T, TimeDirection dir, int n_nodes)
    : sigma_(sigma), T_(T), dir_(dir), n_(std::max(n_nodes, 2)) {
    if (!(T > 0.0)) throw DomainError("time map needs T > 0");
    dt_ = T / (n_ - 1);
    s2_ = CurveIntegral(sigma, T, n_, true);
    for (int i = 0; i < n_; ++i) {
        const double s = sigma(dt_ * i);
        if (!(s * s > 0.0)) throw DomainError("degenerate time map: sigma vanishes at t = " + fmt_double(dt_ * i));
    }
    tau_max_ = 0.5 * s2_.from_zero(T);
    if (!(tau_max_ > 0.0)) throw DomainError("degenerate time map: zero total variance");
}

double TimeMap::half_int_sigma2_from_zero(double t) const { return 0.5 * s2_.from_zero(t); }

double TimeMap::tau_of_t(double t) const {
    if (t < -1e-14 * T_ || t > T_ * (1 + 1e-14)) throw DomainError("t outside [0,T] in tau_of_t");
    t = std::clamp(t, 0.0, T_);
    const double F = half_int_sigma2_from_zero(t);
    return dir_ == TimeDirection::Backward ? tau_max_ - F : F;
}

double TimeMap::t_of_tau(double tau) const {
    const double tol = 1e-13 * (1.0 + tau_max_);
    if (tau < -tol || tau > tau_max_ + tol) throw DomainError("tau outside [0, tau_max] in t_of_tau");
    tau = std::clamp(tau, 0.0, tau_max_);
    const double target = dir_ == TimeDirection::Backward ? tau_max_ - tau : tau;
    if (target <= 0.0) return 0.0;
    if (target >= tau_max_) return T_;
    // locate the cell on the node table, then safeguarded Newton inside it
    int lo = 0, hi = n_ - 1;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        if (half_int_sigma2_from_zero(dt_ * mid) <= target) lo = mid; else hi = mid;
    }
    double a = dt_ * lo, b = dt_ * hi;
    double t = a + (b - a) * 0.5;
    for (int it = 0; it < 60; ++it) {
        const double f = half_int_sigma2_from_zero(t) - target;
        if (f > 0) b = t; else a = t;
        const double s = sigma_(t);
        double tn = t - f / (0.5 * s * s);
        if (!(tn > a && tn < b)) tn = 0.5 * (a + b);
        if (std::abs(tn - t) <= 1e-16 * T_ + 1e-15 * std::abs(t)) { t = tn; break; }
        t = tn;
    }
    return t;
}

Model::Model(MarketModel market, OptionSpec spec, int n_time_nodes)
    : market_(std::move(market)),
      spec_(spec),
      map_((spec.validate(), market_.validate(spec.T), market_.sigma), spec.T, TimeDirection::Backward,
           std::max(n_time_nodes, 512)) {
    const int n = std::max(n_time_nodes, 512);
    int_r_ = CurveIntegral(market_.r, spec_.T, n);
    int_q_ = CurveIntegral(market_.q, spec_.T, n);
    int_s2_ = CurveIntegral(market_.sigma, spec_.T, n, true);
    for (const auto& d : market_.cash_divs) cash_tau_.push_back(map_.tau_of_t(d.t));
    for (const auto& d : market_.prop_divs) {
        prop_tau_.push_back(map_.tau_of_t(d.t));
        prop_jump_.push_back(std::log1p(-d.fraction));
    }
    // mean positivity of the spot under the dividend impulses, checked on a grid
    for (int i = 0; i <= 512; ++i) {
        const double t = spec_.T * i / 512.0;
        if (expected_spot(t) <= 0.0) {
            warnings_.push_back("expected spot becomes non-positive at t = " + fmt_double(t) +
                                "; dividends exceed the admissible range");
            break;
        }
    }
    for (const auto& d : market_.cash_divs) {
        const double before = expected_spot(d.t) + d.amount;
        if (d.amount >= before)
            warnings_.push_back("cash dividend at t = " + fmt_double(d.t) + " exceeds the expected spot");
    }
}

double Model::r(double t) const { return market_.r(t); }
double Model::q(double t) const { return market_.q(t); }
double Model::sigma(double t) const { return market_.sigma(t); }

double Model::coeff_a(double t) const {
    if (t < 0.0 || t > spec_.T) throw DomainError("coeff_a: t outside [0,T]");
    return market_.r(t) - market_.q(t);
}

double Model::discount(double t1, double t2) const { return std::exp(-int_r_.integral(t1, t2)); }

double Model::prop_log_factor(double t1, double t2) const {
    double s = 0.0;
    for (std::size_t i = 0; i < market_.prop_divs.size(); ++i) {
        const double ti = market_.prop_divs[i].t;
        if (ti > t1 && ti <= t2) s += prop_jump_[i];
    }
    return s;
}

bool Model::is_prop_image(double tau, std::size_t i, Side side) const {
    const double ti = prop_tau_[i];
    const double tol = 1e-12 * (1.0 + map_.tau_max());
    if (std::abs(tau - ti) <= tol) return side == Side::Post;
    return ti < tau;
}

double Model::rho(double tau, Side side) const {
    const double t = map_.t_of_tau(tau);
    double v = int_r_.integral(t, spec_.T) - int_q_.integral(t, spec_.T);
    for (std::size_t i = 0; i < prop_tau_.size(); ++i)
        if (is_prop_image(tau, i, side)) v += prop_jump_[i];
    return v;
}

double Model::rbar(double tau) const {
    const double t = map_.t_of_tau(tau);
    return int_r_.integral(t, spec_.T);
}

double Model::alpha(double tau, Side side) const { return std::exp(-tau + rho(tau, side)); }

double Model::beta(double tau, Side side) const { return std::exp(tau + rbar(tau) - rho(tau, side)); }

double Model::rho_prime(double tau) const {
    const double t = map_.t_of_tau(tau);
    const double s = market_.sigma(t);
    return 2.0 * (market_.r(t) - market_.q(t)) / (s * s);
}

double Model::rbar_prime(double tau) const {
    const double t = map_.t_of_tau(tau);
    const double s = market_.sigma(t);
    return 2.0 * market_.r(t) / (s * s);
}

double Model::expected_spot(double t) const {
    const double growth = std::exp(int_r_.integral(0.0, t) - int_q_.integral(0.0, t));
    double e = spec_.S * growth * std::exp(prop_log_factor(0.0, t));
    for (const auto& d : market_.cash_divs) {
        if (d.t <= t) {
            const double g = std::exp(int_r_.integral(d.t, t) - int_q_.integral(d.t, t) + prop_log_factor(d.t, t));
            e -= d.amount * g;
        }
    }
    return e;
}

}  // namespace amdiv
