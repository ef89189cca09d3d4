#include "amdiv/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "amdiv/errors.hpp"

namespace amdiv {

namespace {

constexpr double kPi = 3.14159265358979323846;

double Phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double heat(double x, double tau) { return std::exp(-x * x / (4.0 * tau)) / std::sqrt(4.0 * kPi * tau); }

double trapezoid_mass(const GridFunction& g) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += (i == 0 || i + 1 == g.size() ? 0.5 : 1.0) * g.v[i];
    return s * g.dx;
}

// int_{x0}^{b} of the piecewise-linear interpolant of f on the grid of g
double linear_integral_below(const GridFunction& g, const std::vector<double>& f, double b) {
    const std::size_t n = g.size();
    if (b <= g.x0) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double xa = g.x(i), xb = g.x(i + 1);
        if (b >= xb) {
            s += 0.5 * (f[i] + f[i + 1]) * g.dx;
        } else {
            const double w = (b - xa) / g.dx;
            const double fb = f[i] + w * (f[i + 1] - f[i]);
            s += 0.5 * (f[i] + fb) * (b - xa);
            break;
        }
    }
    return s;
}

}  // namespace

double DensityState::mass() const { return gaussian ? 1.0 - lost_mass : trapezoid_mass(W); }

DensityMarch::DensityMarch(const Model& m, double S0, DensityOptions opt) : m_(m), S0_(S0), opt_(opt) {
    if (!(S0 > 0.0)) throw DomainError("density: spot must be positive");
    if (opt_.n_x < 21) throw DomainError("density grid needs at least 21 nodes");
    double dsum = 0.0;
    for (const auto& d : m.market().cash_divs)
        if (d.amount > 0.0) {
            cash_.push_back({d.t, d.amount});
            dsum += d.amount;
        }
    const double half = 10.0 * std::sqrt(2.0 * tau_f(m.T())) + std::log1p(4.0 * dsum / S0);
    x0_ = -half;
    dx_ = 2.0 * half / (opt_.n_x - 1);
    DensityState st;
    for (const CashDate& c : cash_) {
        st = state_at_grid_free(st, c.t);
        st = apply_cash(st, c.amount);
        after_.push_back(st);
    }
}

double DensityMarch::tau_f(double t) const { return 0.5 * m_.int_sigma2(0.0, t); }

double DensityMarch::scale(double t) const {
    return S0_ * std::exp(m_.int_r(0.0, t) - m_.int_q(0.0, t) - tau_f(t) + m_.prop_log_factor(0.0, t));
}

DensityState DensityMarch::state_at_grid_free(const DensityState& from, double t) const {
    DensityState st = from;
    st.t = t;
    st.tau = tau_f(t);
    st.scale = scale(t);
    return st;
}

DensityState DensityMarch::apply_cash(const DensityState& pre, double D) const {
    DensityState out = pre;
    const double c = D / pre.scale;
    const double dt = pre.tau - pre.base_tau;
    out.gaussian = false;
    out.base_tau = pre.tau;
    out.W = GridFunction{x0_, dx_, std::vector<double>(static_cast<std::size_t>(opt_.n_x))};
    for (std::size_t i = 0; i < out.W.size(); ++i) {
        const double ex = std::exp(out.W.x(i));
        const double xp = std::log(ex + c);
        double w;
        if (pre.gaussian)
            w = pre.tau > 0.0 ? heat(xp, pre.tau) : 0.0;
        else
            w = pre.W.convolve(xp, dt);
        out.W.v[i] = w * ex / (ex + c);
    }
    out.lost_mass = pre.lost_mass + std::max(0.0, pre.mass() - out.mass());
    return out;
}

DensityState DensityMarch::state_at(double t, bool before_event) const {
    if (t < 0.0 || t > m_.T()) throw DomainError("density: t outside [0,T]");
    DensityState st;
    for (std::size_t j = 0; j < cash_.size(); ++j) {
        const bool paid = before_event ? cash_[j].t < t : cash_[j].t <= t;
        if (paid) st = after_[j];
    }
    st = state_at_grid_free(st, t);
    if (before_event) {
        const auto& pd = m_.market().prop_divs;
        for (std::size_t i = 0; i < pd.size(); ++i)
            if (pd[i].t == t) st.scale /= 1.0 - pd[i].fraction;
    }
    return st;
}

double DensityMarch::x_of(const DensityState& st, double b) const {
    if (!(b > 0.0)) return -std::numeric_limits<double>::infinity();
    return std::log(b / st.scale);
}

GridFunction DensityMarch::grid_values(const DensityState& st) const {
    GridFunction g{x0_, dx_, std::vector<double>(static_cast<std::size_t>(opt_.n_x))};
    if (st.gaussian) {
        if (!(st.tau > 0.0)) throw DomainError("density: no diffusion before the first positive time step");
        for (std::size_t i = 0; i < g.size(); ++i) g.v[i] = heat(g.x(i), st.tau);
        return g;
    }
    const double dt = st.tau - st.base_tau;
    if (dt == 0.0) return st.W;
    for (std::size_t i = 0; i < g.size(); ++i) g.v[i] = st.W.convolve(g.x(i), dt);
    return g;
}

double DensityMarch::partial_moment(const DensityState& st, double b, int k) const {
    if (b == -std::numeric_limits<double>::infinity()) return 0.0;
    if (st.gaussian) {
        if (!(st.tau > 0.0)) return b >= 0.0 ? 1.0 : 0.0;
        const double s = std::sqrt(2.0 * st.tau);
        if (b == std::numeric_limits<double>::infinity()) return k == 0 ? 1.0 : std::exp(st.tau);
        return k == 0 ? Phi(b / s) : std::exp(st.tau) * Phi((b - 2.0 * st.tau) / s);
    }
    const double dt = st.tau - st.base_tau;
    const double s = std::sqrt(2.0 * dt);
    const GridFunction& W = st.W;
    if (s >= 2.0 * W.dx) {
        // each trapezoid node carries its own Gaussian, integrated in closed form
        double sum = 0.0;
        for (std::size_t i = 0; i < W.size(); ++i) {
            const double w = (i == 0 || i + 1 == W.size() ? 0.5 : 1.0) * W.dx * W.v[i];
            if (w == 0.0) continue;
            const double xi = W.x(i);
            const double shift = k == 0 ? 0.0 : 2.0 * dt;
            const double z = b == std::numeric_limits<double>::infinity() ? 1e300 : (b - xi - shift) / s;
            sum += w * (k == 0 ? 1.0 : std::exp(xi + dt)) * Phi(z);
        }
        return sum;
    }
    const GridFunction g = grid_values(st);
    std::vector<double> f(g.v);
    if (k == 1)
        for (std::size_t i = 0; i < f.size(); ++i) f[i] *= std::exp(g.x(i));
    return linear_integral_below(g, f, std::min(b, g.x_max()));
}

double DensityMarch::prob_below(const DensityState& st, double b) const { return partial_moment(st, x_of(st, b), 0); }

double DensityMarch::spot_below(const DensityState& st, double b) const {
    return st.scale * partial_moment(st, x_of(st, b), 1);
}

double DensityMarch::expected_spot(const DensityState& st) const {
    return st.scale * partial_moment(st, std::numeric_limits<double>::infinity(), 1);
}

std::vector<double> DensityMarch::pdf(const DensityState& st, const std::vector<double>& S) const {
    std::vector<double> out(S.size(), 0.0);
    const double dt = st.tau - st.base_tau;
    for (std::size_t i = 0; i < S.size(); ++i) {
        if (!(S[i] > 0.0)) continue;
        const double x = std::log(S[i] / st.scale);
        double w;
        if (st.gaussian) {
            if (!(st.tau > 0.0)) throw DomainError("density: no diffusion before the first positive time step");
            w = heat(x, st.tau);
        } else {
            w = dt > 0.0 ? st.W.convolve(x, dt) : st.W(x);
        }
        out[i] = w / S[i];
    }
    return out;
}

DensityMarch::Expectation DensityMarch::expect_payoff(const DensityState& st,
                                                      const std::function<double(double)>& payoff, double lo,
                                                      double hi, double discount) const {
    const GridFunction g = grid_values(st);
    double a = lo > 0.0 ? std::log(lo / st.scale) : -std::numeric_limits<double>::infinity();
    double b = std::isfinite(hi) ? std::log(hi / st.scale) : std::numeric_limits<double>::infinity();
    bool clipped = false;
    if (a < g.x0) {
        clipped = lo > 0.0;
        a = g.x0;
    }
    if (b > g.x_max()) {
        clipped = true;
        b = g.x_max();
    }
    if (!(b > a)) return {0.0, clipped};
    std::vector<double> f(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) f[i] = payoff(st.scale * std::exp(g.x(i))) * g.v[i];
    const double v = linear_integral_below(g, f, b) - linear_integral_below(g, f, a);
    return {discount * v, clipped};
}

DensityState density_march(const Model& m, double S, double t_star, const DensityOptions& opt) {
    if (!(t_star > 0.0) || t_star > m.T()) throw DomainError("density_march: horizon outside (0,T]");
    return DensityMarch(m, S, opt).state_at(t_star);
}

}  // namespace amdiv
