#include "amdiv/deamericanize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/tools/roots.hpp>

#include "amdiv/errors.hpp"

namespace amdiv {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

double intrinsic(const OptionSpec& s) { return s.kind == OptionKind::Put ? std::max(s.K - s.S, 0.0) : std::max(s.S - s.K, 0.0); }

// alpha at t = 0 for maturity T in calendar form
double alpha0(const Model& m, double T) {
    return std::exp(-0.5 * m.int_sigma2(0.0, T) + m.int_r(0.0, T) - m.int_q(0.0, T) + m.prop_log_factor(0.0, T));
}

}  // namespace

double mean_sigma(const Model& m) { return std::sqrt(m.tau_max() / m.T()); }

Model with_mean_sigma(const Model& m, double Sigma) {
    MarketModel mk = m.market();
    mk.sigma = Curve::constant(std::sqrt(2.0) * Sigma);
    return Model(mk, m.spec());
}

Model with_strike(const Model& m, double K) {
    OptionSpec s = m.spec();
    s.K = K;
    return Model(m.market(), s);
}

ImpliedResult implied_sigma(double quote, const Model& m, const ImpliedOptions& opt) {
    const OptionSpec& spec = m.spec();
    if (!(quote >= intrinsic(spec))) throw NumericalError("implied_sigma: quote below intrinsic value");
    ImpliedResult res;
    PriceReport last;
    auto f = [&](double Sigma) {
        last = price_american(with_mean_sigma(m, Sigma), opt.pricer);
        ++res.iterations;
        return last.american - quote;
    };
    const double flo = f(opt.sigma_lo);
    if (flo == 0.0) {
        res.sigma_bar = opt.sigma_lo;
    } else {
        const double fhi = f(opt.sigma_hi);
        if (flo > 0.0 || fhi < 0.0)
            throw NumericalError("implied_sigma: quote outside the price range over the volatility bracket");
        std::uintmax_t it = static_cast<std::uintmax_t>(opt.max_iterations);
        const auto r = boost::math::tools::toms748_solve(
            f, opt.sigma_lo, opt.sigma_hi, flo, fhi, [](double a, double b) { return std::abs(b - a) < 1e-12; }, it);
        res.sigma_bar = 0.5 * (r.first + r.second);
        if (std::abs(f(res.sigma_bar)) > opt.price_tol * spec.K)
            res.warnings.push_back("price tolerance not reached within the iteration budget");
    }
    res.american = last.american;
    res.equivalent_european = last.european;
    res.residual = last.american - quote;
    // vega from a small bump decides the sensitivity warning
    const double h = 1e-4;
    const double up = price_american(with_mean_sigma(m, res.sigma_bar + h), opt.pricer).american;
    const double vega = (up - res.american) / h;
    if (std::abs(vega) < 1e-3 * spec.K)
        res.warnings.push_back("low sensitivity to volatility: dP/dSigma = " + std::to_string(vega));
    return res;
}

ImpliedStrikeResult implied_strike(const StrikeQuote& quote, const Model& m, const StrikeOptions& opt,
                                   int* boundary_solves) {
    ImpliedStrikeResult res;
    const double S = m.spec().S, T = m.T();
    const double a0S = alpha0(m, T) * S;
    int solves = 0;
    auto price_at_x = [&](double x) {
        ++solves;
        return price_american(with_strike(m, a0S * std::exp(-x)), opt.pricer).american - quote.price;
    };
    const double x0 = std::log(a0S / quote.K);
    const double lo = x0 - opt.x_margin, hi = x0 + opt.x_margin;
    const double flo = price_at_x(lo), fhi = price_at_x(hi);
    if (flo * fhi > 0.0) {
        res.error = "quote outside the searched strike range";
        if (boundary_solves) *boundary_solves += solves;
        return res;
    }
    std::uintmax_t it = 100;
    const auto r = boost::math::tools::toms748_solve(
        price_at_x, lo, hi, flo, fhi, [](double a, double b) { return std::abs(b - a) < 1e-13; }, it);
    const double best = 0.5 * (r.first + r.second);
    const double fbest = price_at_x(best);
    res.x = best;
    res.strike = a0S * std::exp(-best);
    res.residual = fbest;
    res.iterations = solves;
    res.ok = true;
    if (boundary_solves) *boundary_solves += solves;
    return res;
}

ImpliedStrikeBatch implied_strike_batch(const std::vector<StrikeQuote>& quotes, const Model& m,
                                        const StrikeOptions& opt) {
    if (!m.market().cash_divs.empty())
        throw DomainError("implied_strike_batch: cash dividends make the strike-normalised problem non-autonomous");
    if (opt.n_x < 8) throw DomainError("implied_strike_batch: n_x must be at least 8");
    ImpliedStrikeBatch out;
    if (quotes.empty()) return out;
    const double S = m.spec().S, T = m.T(), Kref = m.K();
    const double a0S = alpha0(m, T) * S;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    for (const auto& q : quotes) {
        if (!(q.K > 0.0)) throw DomainError("implied_strike_batch: strike must be positive");
        const double x = std::log(a0S / q.K);
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
    }
    xmin -= opt.x_margin;
    xmax += opt.x_margin;
    // P(S; K) = K g(log(alpha S / K)): vary the spot at the reference strike
    const BoundaryCurve bc = solve_boundary(m, opt.pricer.boundary);
    out.boundary_solves = 1;
    const double a0 = alpha0(m, T);
    auto spot_of_x = [&](double x) { return Kref * std::exp(x) / a0; };
    const double dx = (xmax - xmin) / (opt.n_x - 1);
    std::vector<double> spots(opt.n_x);
    for (int i = 0; i < opt.n_x; ++i) spots[i] = spot_of_x(xmin + i * dx);
    std::vector<double> g = american_at_spots(m, bc, spots, opt.pricer);
    out.price_evaluations += opt.n_x;
    for (double& v : g) v /= Kref;
    const boost::math::interpolators::cardinal_cubic_b_spline<double> spline(g.begin(), g.end(), xmin, dx);
    auto g_exact = [&](double x) {
        ++out.price_evaluations;
        return american_at_spots(m, bc, {spot_of_x(x)}, opt.pricer)[0] / Kref;
    };

    for (const auto& q : quotes) {
        ImpliedStrikeResult r;
        auto h = [&](double x) { return a0S * std::exp(-x) * spline(x) - q.price; };
        const double hlo = h(xmin), hhi = h(xmax);
        if (hlo * hhi > 0.0) {
            r.error = "quote outside the tabulated strike range; extrapolation refused";
            out.results.push_back(r);
            continue;
        }
        std::uintmax_t it = 200;
        auto root = boost::math::tools::toms748_solve(
            h, xmin, xmax, hlo, hhi, [](double a, double b) { return std::abs(b - a) < 1e-14; }, it);
        double x = 0.5 * (root.first + root.second);
        // polish on exact prices from the same boundary (secant started from the spline root)
        double fx = a0S * std::exp(-x) * g_exact(x) - q.price;
        double xp = x + 1e-5, fp = a0S * std::exp(-xp) * g_exact(xp) - q.price;
        int polish = 0;
        while (std::abs(fx) > opt.price_tol * q.K && polish < 8 && fx != fp) {
            const double xn = x - fx * (x - xp) / (fx - fp);
            xp = x;
            fp = fx;
            x = xn;
            fx = a0S * std::exp(-x) * g_exact(x) - q.price;
            ++polish;
        }
        r.x = x;
        r.strike = a0S * std::exp(-x);
        r.residual = fx;
        r.iterations = static_cast<int>(it) + polish;
        r.ok = true;
        out.results.push_back(r);
    }
    return out;
}

double dupire_local_variance(const DupireInputs& in) {
    const double x_T = in.r - in.q - 0.5 * in.sigma_T * in.sigma_T;
    const double C_T = in.C_T + in.C_x * x_T;
    const double C_K = -in.C_x / in.K;
    const double C_KK = (in.C_x + in.C_xx) / (in.K * in.K);
    return (C_T + (in.r - in.q) * in.K * C_K + in.q * in.C) / (0.5 * in.K * in.K * C_KK);
}

std::vector<std::vector<double>> dupire_surface(const std::vector<double>& T, const std::vector<double>& x,
                                                const std::vector<std::vector<double>>& C, double S,
                                                const Model& m) {
    const std::size_t nT = T.size(), nx = x.size();
    if (C.size() != nT) throw DomainError("dupire_surface: C rows must match T");
    std::vector<std::vector<double>> out(nT, std::vector<double>(nx, kNaN));
    for (std::size_t i = 1; i + 1 < nT; ++i) {
        if (C[i].size() != nx || C[i - 1].size() != nx || C[i + 1].size() != nx)
            throw DomainError("dupire_surface: C columns must match x");
        if (T[i + 1] > m.T()) throw DomainError("dupire_surface: maturity beyond the model horizon");
        const double a0 = alpha0(m, T[i]);
        for (std::size_t j = 1; j + 1 < nx; ++j) {
            const double hx1 = x[j] - x[j - 1], hx2 = x[j + 1] - x[j];
            DupireInputs in;
            in.C = C[i][j];
            // x is held fixed between maturities, so C_T here is at fixed x
            in.C_T = (C[i + 1][j] - C[i - 1][j]) / (T[i + 1] - T[i - 1]);
            in.C_x = (C[i][j + 1] - C[i][j - 1]) / (hx1 + hx2);
            in.C_xx = 2.0 * (hx1 * C[i][j + 1] - (hx1 + hx2) * C[i][j] + hx2 * C[i][j - 1]) /
                      (hx1 * hx2 * (hx1 + hx2));
            in.K = a0 * S * std::exp(-x[j]);
            in.r = m.r(T[i]);
            in.q = m.q(T[i]);
            in.sigma_T = m.sigma(T[i]);
            out[i][j] = dupire_local_variance(in);
        }
    }
    return out;
}

}  // namespace amdiv
