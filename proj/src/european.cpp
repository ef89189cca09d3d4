#include "amdiv/european.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include "amdiv/errors.hpp"
#include "amdiv/kernels.hpp"

namespace amdiv {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrtPi = 1.77245385090551602730;

double Phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi); }

// Gauss-Legendre nodes/weights on [-1,1]
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const double p = boost::math::legendre_p(n, z);
            const double dp = boost::math::legendre_p_prime(n, z);
            const double dz = p / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = z;
        const double dp = boost::math::legendre_p_prime(n, z);
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

// four-point Lagrange interpolation on the uniform grid, edge value outside
double cubic_at(const GridFunction& g, double x) {
    const double p = (x - g.x0) / g.dx;
    const long n = static_cast<long>(g.size());
    if (p <= 0.0) return g.v.front();
    if (p >= static_cast<double>(n - 1)) return g.v.back();
    long i = static_cast<long>(p);
    i = std::clamp<long>(i, 1, n - 3);
    const double t = p - static_cast<double>(i);
    const double f0 = g.v[i - 1], f1 = g.v[i], f2 = g.v[i + 1], f3 = g.v[i + 2];
    return f0 * (-t * (t - 1.0) * (t - 2.0) / 6.0) + f1 * ((t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0) +
           f2 * (-(t + 1.0) * t * (t - 2.0) / 2.0) + f3 * ((t + 1.0) * t * (t - 1.0) / 6.0);
}

}  // namespace

double GridFunction::operator()(double x) const {
    if (v.empty()) return 0.0;
    const double p = (x - x0) / dx;
    if (p <= 0.0) return v.front();
    const std::size_t n = v.size();
    if (p >= static_cast<double>(n - 1)) return v.back();
    const std::size_t i = static_cast<std::size_t>(p);
    const double w = p - static_cast<double>(i);
    return (1.0 - w) * v[i] + w * v[i + 1];
}

double GridFunction::convolve(double x, double tau) const {
    if (v.empty()) return 0.0;
    if (!(tau > 0.0)) return (*this)(x);
    const double s = std::sqrt(2.0 * tau);
    const std::size_t n = v.size();
    // tails: edge values held constant
    double sum = v.front() * Phi((x0 - x) / s) + v.back() * (1.0 - Phi((x_max() - x) / s));
    const double reach = 9.0 * s;
    const long i0 = std::max<long>(0, static_cast<long>(std::floor((x - reach - x0) / dx)));
    const long i1 = std::min<long>(static_cast<long>(n) - 1, static_cast<long>(std::ceil((x + reach - x0) / dx)));
    if (i1 <= i0) return sum;
    double za = (this->x(i0) - x) / s;
    double Pa = Phi(za), pa = phi(za);
    for (long i = i0; i < i1; ++i) {
        const double zb = (this->x(i + 1) - x) / s;
        const double Pb = Phi(zb), pb = phi(zb);
        // L(z) = v_i + slope (z - za), slope per unit z
        const double slope = (v[i + 1] - v[i]) / (zb - za);
        sum += (v[i] - slope * za) * (Pb - Pa) + slope * (pa - pb);
        za = zb;
        Pa = Pb;
        pa = pb;
    }
    return sum;
}

double terminal_profile_at(double x, double K) {
    const double ex = std::exp(x);
    return K * (std::max(1.0 - ex, 0.0) - std::exp(-ex));
}

GridFunction terminal_profile(double x0, double dx, std::size_t n, double K) {
    GridFunction g{x0, dx, std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) g.v[i] = terminal_profile_at(g.x(i), K);
    return g;
}

EuropeanSolver::EuropeanSolver(const Model& m, EuroOptions opt) : m_(m), opt_(opt) {
    if (opt_.n_x < 21) throw DomainError("european grid needs at least 21 nodes");
    const auto& cash = m.market().cash_divs;
    const auto& prop = m.market().prop_divs;
    double span = 0.0, dsum = 0.0;
    for (std::size_t j = 0; j < cash.size(); ++j)
        if (cash[j].amount > 0.0) {
            events_.push_back({m.cash_tau()[j], true, j});
            dsum += cash[j].amount;
        }
    for (std::size_t i = 0; i < prop.size(); ++i)
        if (prop[i].fraction > 0.0) {
            events_.push_back({m.prop_tau()[i], false, i});
            span += std::abs(m.prop_rho_jump()[i]);
        }
    std::sort(events_.begin(), events_.end(), [](const Event& a, const Event& b) { return a.tau < b.tau; });
    span += std::log1p(4.0 * dsum / m.spec().S);
    xc_ = x_of_spot(m.spec().S);
    half_width_ = 10.0 * std::sqrt(2.0 * m.tau_max()) + span;
    gauss_legendre(opt_.gl_points, gl_x_, gl_w_);
    const int nu_n = static_cast<int>(std::round(opt_.u_max / opt_.u_step));
    u_weight_.resize(nu_n + 1);
    for (int j = 0; j <= nu_n; ++j) u_weight_[j] = std::exp(-std::pow(j * opt_.u_step, 2));
}

double EuropeanSolver::x_of_spot(double S) const { return std::log(m_.alpha(m_.tau_max(), Side::Post) * S / m_.K()); }

EuropeanSolver::SourceNodes EuropeanSolver::source_nodes(double tau1, double tau2) const {
    SourceNodes sn;
    if (!(tau2 > tau1)) return sn;
    for (std::size_t g = 0; g < gl_x_.size(); ++g) {
        const double nu = 0.5 * (tau1 + tau2) + 0.5 * (tau2 - tau1) * gl_x_[g];
        sn.weight.push_back(0.5 * (tau2 - tau1) * gl_w_[g]);
        sn.step.push_back(std::exp(2.0 * std::sqrt(tau2 - nu) * opt_.u_step));
        sn.inv_alpha.push_back(1.0 / m_.alpha(nu));
        sn.rho_p.push_back(m_.rho_prime(nu));
    }
    return sn;
}

double EuropeanSolver::source_integral(const SourceNodes& sn, double x) const {
    const int nu_n = static_cast<int>(u_weight_.size()) - 1;
    const double ex = std::exp(x);
    double total = 0.0;
    for (std::size_t g = 0; g < sn.weight.size(); ++g) {
        const double rp = sn.rho_p[g];
        const double step = sn.step[g];
        double inner = 0.0;
        double vp = ex * sn.inv_alpha[g], vm = vp;
        for (int j = 0; j <= nu_n; ++j) {
            const double wu = u_weight_[j];
            inner += wu * std::exp(-vp) * (vp * vp - rp * vp);
            if (j > 0) inner += wu * std::exp(-vm) * (vm * vm - rp * vm);
            vp *= step;
            vm /= step;
        }
        total += sn.weight[g] * inner;
    }
    return total * m_.K() * opt_.u_step / kSqrtPi;
}

double EuropeanSolver::source_integral(double tau1, double tau2, double x) const {
    return source_integral(source_nodes(tau1, tau2), x);
}

EuroState EuropeanSolver::initial_state() const {
    const std::size_t n = static_cast<std::size_t>(opt_.n_x);
    const double x0 = xc_ - half_width_;
    const double dx = 2.0 * half_width_ / static_cast<double>(n - 1);
    EuroState st;
    st.tau = 0.0;
    st.W = terminal_profile(x0, dx, n, m_.K());
    st.terminal = true;
    return st;
}

void EuropeanSolver::check_free_interval(double tau1, double tau2) const {
    if (tau2 < tau1) throw DomainError("propagate_free: target before state");
    for (const Event& e : events_)
        if (e.tau > tau1 + 1e-14 && e.tau < tau2 - 1e-14)
            throw DomainError("propagate_free: dividend image inside the interval");
}

double EuropeanSolver::free_value(const EuroState& st, double dt, const SourceNodes& sn, double x) const {
    if (dt == 0.0) return st.terminal ? terminal_profile_at(x, m_.K()) : st.W(x);
    const double w = st.terminal ? m_.K() * (closed_form_I1(x, dt) + numeric_I2(x, dt)) : st.W.convolve(x, dt);
    return w + source_integral(sn, x);
}

double EuropeanSolver::propagate_free_at(const EuroState& st, double tau_target, double x) const {
    check_free_interval(st.tau, tau_target);
    return free_value(st, tau_target - st.tau, source_nodes(st.tau, tau_target), x);
}

EuroState EuropeanSolver::propagate_free(const EuroState& st, double tau_target) const {
    EuroState out;
    out.tau = tau_target;
    out.W = st.W;
    check_free_interval(st.tau, tau_target);
    const SourceNodes sn = source_nodes(st.tau, tau_target);
    for (std::size_t i = 0; i < out.W.size(); ++i) out.W.v[i] = free_value(st, tau_target - st.tau, sn, st.W.x(i));
    out.terminal = false;
    return out;
}

EuroState EuropeanSolver::dividend_step(const EuroState& st, std::size_t j) const {
    const double D = m_.market().cash_divs.at(j).amount;
    EuroState out = st;
    out.terminal = false;
    if (D == 0.0) return out;
    // characteristics of W + (alpha D/K) dW/dv = W- + D e^{-v/alpha}: the value at spot
    // S comes from S - D; spots below D see the zero-spot edge value
    const double al = m_.alpha(st.tau);
    const double K = m_.K();
    const double w = al * D / K;
    const GridFunction& Wa = st.W;
    for (std::size_t i = 0; i < out.W.size(); ++i) {
        const double v = std::exp(Wa.x(i));
        const double S = K * v / al;
        if (v > w) {
            const double xs = std::log(v - w);
            out.W.v[i] = cubic_at(Wa, xs) + K * (std::exp(-(S - D) / K) - std::exp(-S / K));
        } else {
            out.W.v[i] = Wa.v.front() + K * (1.0 - std::exp(-S / K));
        }
    }
    return out;
}

EuroState EuropeanSolver::prop_step(const EuroState& st, std::size_t i) const {
    EuroState out = st;
    out.terminal = false;
    const double tau = m_.prop_tau().at(i);
    const double a_pre = m_.alpha(tau, Side::Pre), a_post = m_.alpha(tau, Side::Post);
    const double K = m_.K();
    for (std::size_t k = 0; k < out.W.size(); ++k) {
        const double ex = std::exp(out.W.x(k));
        if (st.terminal) out.W.v[k] = terminal_profile_at(out.W.x(k), K);
        out.W.v[k] += K * (std::exp(-ex / a_pre) - std::exp(-ex / a_post));
    }
    return out;
}

std::vector<EuroState> EuropeanSolver::march(bool keep_history) const {
    std::vector<EuroState> hist;
    EuroState st = initial_state();
    if (keep_history) hist.push_back(st);
    for (const Event& e : events_) {
        st = propagate_free(st, e.tau);
        st = e.cash ? dividend_step(st, e.index) : prop_step(st, e.index);
        if (keep_history) hist.push_back(st);
    }
    if (!keep_history) hist.push_back(st);
    return hist;
}

std::vector<double> EuropeanSolver::W_final(std::span<const double> xs) const {
    EuroState st;
    if (events_.empty()) {
        st.tau = 0.0;
        st.terminal = true;
    } else {
        st = march(false).back();
    }
    check_free_interval(st.tau, m_.tau_max());
    const SourceNodes sn = source_nodes(st.tau, m_.tau_max());
    std::vector<double> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = free_value(st, m_.tau_max() - st.tau, sn, xs[i]);
    return out;
}

double EuropeanSolver::value_from_W(double W, double S) const {
    const double T = m_.T(), K = m_.K();
    const double df = m_.discount(0.0, T);
    const double put = df * (W + K * std::exp(-S / K));
    if (m_.spec().kind == OptionKind::Put) return put;
    // parity with the forward of the dividend-paying spot started at S
    const double g0 = std::exp(m_.int_r(0.0, T) - m_.int_q(0.0, T) + m_.prop_log_factor(0.0, T));
    const double fwd = m_.expected_spot(T) + (S - m_.spec().S) * g0;
    return put + df * (fwd - K);
}

std::vector<double> EuropeanSolver::prices(std::span<const double> spots) const {
    std::vector<double> xs(spots.size());
    for (std::size_t i = 0; i < spots.size(); ++i) xs[i] = x_of_spot(spots[i]);
    std::vector<double> W = W_final(xs);
    for (std::size_t i = 0; i < spots.size(); ++i) W[i] = value_from_W(W[i], spots[i]);
    return W;
}

double EuropeanSolver::price() const {
    const double S = m_.spec().S;
    return prices(std::span<const double>(&S, 1))[0];
}

double price_european(const Model& m, const EuroOptions& opt) { return EuropeanSolver(m, opt).price(); }

double black_scholes(OptionKind kind, double S, double K, double T, double r, double q, double sigma) {
    const double sq = sigma * std::sqrt(T);
    const double d1 = (std::log(S / K) + (r - q + 0.5 * sigma * sigma) * T) / sq;
    const double d2 = d1 - sq;
    if (kind == OptionKind::Put) return K * std::exp(-r * T) * Phi(-d2) - S * std::exp(-q * T) * Phi(-d1);
    return S * std::exp(-q * T) * Phi(d1) - K * std::exp(-r * T) * Phi(d2);
}

}  // namespace amdiv
