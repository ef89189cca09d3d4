#include "amdiv/boundary.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include <boost/math/tools/roots.hpp>

#include "amdiv/errors.hpp"

namespace amdiv {

namespace {

constexpr double kPi = 3.14159265358979323846;
const double kNegInf = -std::numeric_limits<double>::infinity();

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

Side node_side(NodeKind k) { return is_post(k) ? Side::Post : Side::Pre; }


// s * y'(s) at list position i; pieces start at 0 and at post-dividend nodes
double s_yprime(const std::vector<double>& s, const std::vector<double>& y, const std::vector<char>& start,
                std::size_t i) {
    if (s[i] == 0.0 || !std::isfinite(y[i])) return 0.0;
    std::size_t a = i;
    while (a > 0 && !start[a]) --a;
    double d = 0.0;
    if (i - a >= 2 && std::isfinite(y[i - 1]) && std::isfinite(y[i - 2])) {
        const double h1 = s[i - 1] - s[i - 2], h2 = s[i] - s[i - 1];
        d = y[i - 2] * h2 / (h1 * (h1 + h2)) - y[i - 1] * (h1 + h2) / (h1 * h2) +
            y[i] * (2.0 * h2 + h1) / (h2 * (h1 + h2));
    } else if (i - a >= 1 && std::isfinite(y[i - 1])) {
        d = (y[i] - y[i - 1]) / (s[i] - s[i - 1]);
    } else if (i + 1 < s.size() && !start[i + 1] && std::isfinite(y[i + 1])) {
        d = (y[i + 1] - y[i]) / (s[i + 1] - s[i]);
    }
    return s[i] * d;
}

}  // namespace

double sb_from_y(OptionKind kind, double y, double alpha, double K) {
    if (!std::isfinite(y)) return kind == OptionKind::Put ? 0.0 : std::numeric_limits<double>::infinity();
    return kind == OptionKind::Put ? K * std::exp(y) / alpha : K * std::exp(-y) / alpha;
}

const char* to_string(BoundaryStatus s) {
    switch (s) {
        case BoundaryStatus::Found: return "Found";
        case BoundaryStatus::Partial: return "Partial";
        case BoundaryStatus::NoBoundary: return "NoBoundary";
    }
    return "?";
}

double BoundaryCurve::sb_at(const Model& m, double t, Side side) const {
    const double none = kind == OptionKind::Put ? 0.0 : std::numeric_limits<double>::infinity();
    if (!exists() || y.empty()) return none;
    const double tau = m.tau_of_t(t);
    const auto& ts = grid.taus();
    const double tol = 1e-12 * (1.0 + ts.back());
    // exact dividend node
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
        if (is_pre(grid.kind(k)) && std::abs(ts[k] - tau) <= tol) return sb[side == Side::Pre ? k : k + 1];
    }
    if (tau >= ts.back()) return sb.back();
    auto it = std::upper_bound(ts.begin(), ts.end(), tau);
    std::size_t hi = static_cast<std::size_t>(it - ts.begin());
    std::size_t lo = hi - 1;
    if (!std::isfinite(y[lo]) || !std::isfinite(y[hi])) return none;
    const double w = (tau - ts[lo]) / (ts[hi] - ts[lo]);
    const double yi = (1.0 - w) * y[lo] + w * y[hi];
    return sb_from_y(kind, yi, m.alpha(tau, Side::Pre), m.K());
}

void BoundaryCurve::write_csv(std::ostream& os) const {
    os << "t,tau,y,S_B,status,is_dividend_node\n";
    for (std::size_t k = 0; k < y.size(); ++k) {
        const bool div = grid.kind(k) != NodeKind::Regular;
        os << fmt(t[k]) << ',' << fmt(grid.tau(k)) << ',' << (std::isfinite(y[k]) ? fmt(y[k]) : "-inf") << ','
           << fmt(sb[k]) << ',' << (found[k] ? "found" : "none") << ',' << (div ? 1 : 0) << '\n';
    }
}

BoundaryEquation::BoundaryEquation(const Model& m, const TauGrid& grid, const BoundaryOptions& opt)
    : m_(m), kind_(m.spec().kind), grid_(grid), opt_(opt) {
    if (!(opt.post_lag > 0.0 && opt.post_lag <= 1.0)) throw DomainError("post_lag must lie in (0, 1]");
    c_.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) c_[k] = eb_coeffs(m, grid.tau(k), node_side(grid.kind(k)));
    cash_pre_.assign(m.market().cash_divs.size(), grid.size());
    prop_pre_.assign(m.market().prop_divs.size(), grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (grid.kind(k) == NodeKind::CashPre) cash_pre_[grid.event(k)] = k;
        if (grid.kind(k) == NodeKind::PropPre) prop_pre_[grid.event(k)] = k;
    }
}

double BoundaryEquation::eval_tau(std::size_t k) const {
    if (!is_post(grid_.kind(k))) return grid_.tau(k);
    return grid_.tau(k) + opt_.post_lag * (grid_.tau(k + 1) - grid_.tau(k));
}

double BoundaryEquation::assemble(const std::vector<double>& s, const std::vector<double>& yy,
                                  const std::vector<char>& start, const std::vector<EBCoeffs>& c,
                                  std::size_t div_below) const {
    const double K = m_.K();
    const std::size_t n = s.size() - 1;
    const double tau = s[n], yk = yy[n];
    std::vector<double> G(n + 1, 0.0), F(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(yy[i])) continue;
        const double d = tau - s[i];
        const double ls = (yy[i] - yk) * (yy[i] - yk) / (4.0 * d);
        G[i] = eta_at_boundary(kind_, s[i], yy[i], c[i], K) * std::exp(-ls);
        if (opt_.include_j10) F[i] = j10_term(kind_, s[i], tau, yy[i], yk, s_yprime(s, yy, start, i), c[i], K, ls);
    }
    G[n] = eta_at_boundary(kind_, tau, yk, c[n], K);
    double I = weak_sum(s, G);
    if (opt_.include_j10) I += regular_weak_sum(s, F, j10_limit(kind_, tau, yk, s_yprime(s, yy, start, n), c[n], K));

    double R = (kind_ == OptionKind::Put ? j0_put(yk, tau, K) : -j0_call(yk, tau, K)) + I;
    if (!opt_.include_dividend_terms) return R;

    const auto& cash = m_.market().cash_divs;
    for (std::size_t j = 0; j < cash.size(); ++j) {
        const std::size_t p = cash_pre_[j];
        if (p >= div_below || !std::isfinite(yy[p]) || cash[j].amount == 0.0) continue;
        const double w = c_[p].alpha * cash[j].amount / K;
        R += w * lambda_cash_div(kind_, grid_.tau(p), tau, yy[p], yk, c_[p], K);
    }
    const auto& jumps = m_.prop_rho_jump();
    for (std::size_t i = 0; i < prop_pre_.size(); ++i) {
        const std::size_t p = prop_pre_[i];
        if (p >= div_below || !std::isfinite(yy[p]) || jumps[i] == 0.0) continue;
        R += prop_div_impulse(kind_, grid_.tau(p), tau, yy[p], yk, jumps[i], c_[p], K);
    }
    return R;
}

double BoundaryEquation::continuation(std::size_t k, const std::vector<double>& y) const {
    const std::size_t p = k - 1;
    if (cache_k_ == k && cache_ypre_ == y[p]) return cache_y0_;
    std::vector<double> s(k + 1), yy(k + 1);
    std::vector<char> start(k + 1, 0);
    std::vector<EBCoeffs> c(k + 1);
    for (std::size_t i = 0; i < k; ++i) {
        s[i] = grid_.tau(i);
        yy[i] = y[i];
        start[i] = i == 0 || is_post(grid_.kind(i));
        c[i] = c_[i];
    }
    s[k] = eval_tau(k);
    c[k] = eb_coeffs(m_, s[k], Side::Pre);
    if (grid_.kind(k) == NodeKind::PropPost) {
        // remove this dividend's jump from the coefficients
        const double e = std::exp(m_.prop_rho_jump()[grid_.event(k)]);
        c[k].alpha /= e;
        c[k].beta *= e;
    }
    auto f = [&](double v) {
        yy[k] = v;
        return assemble(s, yy, start, c, p);
    };
    double y0 = y[p];
    if (std::isfinite(y0)) {
        const MarchOptions& mo = opt_.march;
        double a = y0, fa = f(a);
        bool ok = fa == 0.0;
        double b = a, fb = fa;
        for (double step = mo.first_step; !ok && step <= 2.0 * mo.max_below; step *= 2.0) {
            const double t = y0 - std::min(step, mo.max_below);
            const double ft = f(t);
            if (std::signbit(ft) != std::signbit(fb)) {
                a = t;
                fa = ft;
                ok = true;
                break;
            }
            b = t;
            fb = ft;
            if (step >= mo.max_below) break;
        }
        if (ok && fa != 0.0 && a != b) {
            boost::uintmax_t it = mo.max_iterations;
            auto tol = boost::math::tools::eps_tolerance<double>(48);
            const auto r = boost::math::tools::toms748_solve(f, std::min(a, b), std::max(a, b), a < b ? fa : fb,
                                                            a < b ? fb : fa, tol, it);
            y0 = 0.5 * (r.first + r.second);
        }
    }
    cache_k_ = k;
    cache_ypre_ = y[p];
    cache_y0_ = y0;
    return y0;
}

double BoundaryEquation::residual(std::size_t k, double yk, const std::vector<double>& y) const {
    const bool post = is_post(grid_.kind(k));
    const std::size_t n = post ? k + 1 : k;
    std::vector<double> s(n + 1), yy(n + 1);
    std::vector<char> start(n + 1, 0);
    std::vector<EBCoeffs> c(n + 1);
    for (std::size_t i = 0; i < k; ++i) {
        s[i] = grid_.tau(i);
        yy[i] = y[i];
        start[i] = i == 0 || is_post(grid_.kind(i));
        c[i] = c_[i];
    }
    s[k] = grid_.tau(k);
    yy[k] = yk;
    start[k] = k == 0 || post;
    c[k] = c_[k];
    if (post) {
        s[n] = eval_tau(k);
        c[n] = eb_coeffs(m_, s[n], Side::Pre);
        yy[n] = std::isfinite(y[k - 1]) ? yk - y[k - 1] + continuation(k, y) : yk;
    }
    return assemble(s, yy, start, c, k);
}

double put_residual_nodiv(const Model& m, const TauGrid& g, std::size_t k, double yk, const std::vector<double>& y,
                          const BoundaryOptions& opt) {
    if (m.spec().kind != OptionKind::Put || !m.market().cash_divs.empty())
        throw DomainError("put_residual_nodiv needs a put without cash dividends");
    return BoundaryEquation(m, g, opt).residual(k, yk, y);
}

double put_residual_cashdiv(const Model& m, const TauGrid& g, std::size_t k, double yk,
                            const std::vector<double>& y, const BoundaryOptions& opt) {
    if (m.spec().kind != OptionKind::Put) throw DomainError("put_residual_cashdiv needs a put");
    return BoundaryEquation(m, g, opt).residual(k, yk, y);
}

double call_residual(const Model& m, const TauGrid& g, std::size_t k, double yk, const std::vector<double>& y,
                     const BoundaryOptions& opt) {
    if (m.spec().kind != OptionKind::Call) throw DomainError("call_residual needs a call");
    return BoundaryEquation(m, g, opt).residual(k, yk, y);
}

TauGrid boundary_grid(const Model& m, int N) {
    std::vector<GridEvent> ev;
    const auto& cash = m.market().cash_divs;
    for (std::size_t j = 0; j < cash.size(); ++j)
        if (cash[j].amount > 0.0) ev.push_back({m.cash_tau()[j], true, static_cast<int>(j)});
    const auto& prop = m.market().prop_divs;
    for (std::size_t i = 0; i < prop.size(); ++i)
        if (prop[i].fraction > 0.0) ev.push_back({m.prop_tau()[i], false, static_cast<int>(i)});
    return TauGrid::build(m.tau_max(), N, std::move(ev));
}

double terminal_y(const Model& m, OptionKind kind) {
    const double r = m.r(m.T()), q = m.q(m.T());
    // S_B(T-) = min(K, rK/q) for the put and max(K, rK/q) for the call
    if (kind == OptionKind::Put && q > r && r > 0.0) return std::log(r / q);
    if (kind == OptionKind::Call && r > q && q > 0.0) return -std::log(r / q);
    return 0.0;
}

bool boundary_absent(const Model& m, OptionKind kind, std::string* reason) {
    const int n = 1000;
    bool all_neg = true, all_pos = true, q_zero = true;
    for (int i = 0; i <= n; ++i) {
        const double t = m.T() * i / n;
        all_neg = all_neg && m.r(t) < 0.0;
        all_pos = all_pos && m.r(t) > 0.0;
        q_zero = q_zero && m.q(t) == 0.0;
    }
    if (kind == OptionKind::Put && all_neg) {
        if (reason) *reason = "r(t) < 0 on [0,T]: early exercise of the put is never optimal";
        return true;
    }
    if (kind == OptionKind::Call && all_pos && q_zero && !m.market().has_discrete_dividends()) {
        if (reason) *reason = "r(t) > 0 on [0,T] with no dividends: early exercise of the call is never optimal";
        return true;
    }
    return false;
}

std::optional<double> eb_asymptote(double tau, const Model& m, OptionKind kind) {
    if (!(tau > 0.0)) return std::nullopt;
    const double T = m.T();
    double r = m.r(T), q = m.q(T);
    const double sig = m.sigma(T);
    // a call with (r, q) mirrors a put with (q, r) and S_B -> K^2 / S_B
    if (kind == OptionKind::Call) std::swap(r, q);
    const double nu = 2.0 * tau;
    double ratio;
    if (r <= 0.0) return std::nullopt;
    if (std::abs(r - q) <= 1e-12 * std::max(1.0, std::abs(r))) {
        const double arg = sig * sig / (4.0 * std::sqrt(kPi) * q * nu);
        if (!(arg > 1.0)) return std::nullopt;
        ratio = 1.0 - std::sqrt(2.0 * nu * std::log(arg));
    } else if (q < r) {
        const double arg = std::pow(sig, 4) / (8.0 * kPi * nu * (r - q) * (r - q));
        if (!(arg > 1.0)) return std::nullopt;
        ratio = 1.0 - std::sqrt(nu * std::log(arg));
    } else {
        ratio = r / q;
    }
    if (!(ratio > 0.0)) return std::nullopt;
    const double alpha = m.alpha(tau);
    if (kind == OptionKind::Put) return std::log(alpha * ratio);
    // call: S_B/K = 1/ratio, y = -log(alpha S_B / K)
    return -std::log(alpha / ratio);
}

BoundaryCurve solve_boundary(const Model& m, const BoundaryOptions& opt) {
    if (opt.N < 16) throw DomainError("solve_boundary needs N >= 16");
    const auto t0 = std::chrono::steady_clock::now();
    BoundaryCurve bc;
    bc.kind = m.spec().kind;
    bc.grid = boundary_grid(m, opt.N);
    const std::size_t n = bc.grid.size();
    if (bc.grid.max_move() > 0.0)
        bc.diagnostics.push_back("largest grid-node move onto a dividend image (tau): " + fmt(bc.grid.max_move()));

    std::string why;
    if (boundary_absent(m, bc.kind, &why)) {
        bc.y.assign(n, kNegInf);
        bc.y[0] = 0.0;
        bc.found.assign(n, false);
        bc.found[0] = true;
        bc.iterations.assign(n, 0);
        bc.residual.assign(n, 0.0);
        bc.status = BoundaryStatus::NoBoundary;
        bc.reason = why;
    } else {
        const double y0 = terminal_y(m, bc.kind);
        if (y0 != 0.0) bc.diagnostics.push_back("terminal boundary below the strike image: y(0) = " + fmt(y0));
        BoundaryEquation eq(m, bc.grid, opt);
        NodeResidual R = [&](std::size_t k, double yk, const std::vector<double>& y) { return eq.residual(k, yk, y); };
        MarchResult res = march_and_solve(n, R, y0, opt.march);
        bc.y = std::move(res.y);
        bc.found = std::move(res.found);
        bc.iterations = std::move(res.iterations);
        bc.residual = std::move(res.residual);
        bc.max_iterations = res.max_iterations;
        const std::size_t failed = static_cast<std::size_t>(std::count(bc.found.begin() + 1, bc.found.end(), false));
        if (failed >= 0.9 * static_cast<double>(n - 1)) {
            bc.status = BoundaryStatus::NoBoundary;
            bc.reason = "no sign change of the boundary residual at " + std::to_string(failed) + " of " +
                        std::to_string(n - 1) + " nodes";
        } else if (failed > 0) {
            bc.status = BoundaryStatus::Partial;
            std::string map;
            for (std::size_t k = 1; k < n; ++k) map += bc.found[k] ? '+' : '.';
            bc.reason = "no boundary at " + std::to_string(failed) + " nodes: " + map;
        } else {
            bc.status = BoundaryStatus::Found;
        }
        // asymptotic check of the first nodes
        for (std::size_t k = 1; k < n && bc.grid.tau(k) <= opt.asymptote_tau; ++k) {
            const auto ya = eb_asymptote(bc.grid.tau(k), m, bc.kind);
            if (!ya || !bc.found[k]) continue;
            bc.diagnostics.push_back("node " + std::to_string(k) + " y=" + fmt(bc.y[k]) + " asymptote=" + fmt(*ya));
        }
    }
    bc.t.resize(n);
    bc.sb.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        bc.t[k] = m.t_of_tau(bc.grid.tau(k));
        bc.sb[k] = sb_from_y(bc.kind, bc.y[k], m.alpha(bc.grid.tau(k), node_side(bc.grid.kind(k))), m.K());
    }
    bc.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return bc;
}

}  // namespace amdiv
