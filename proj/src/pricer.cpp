#include "amdiv/pricer.hpp"

#include <chrono>
#include <cmath>

#include "amdiv/errors.hpp"

namespace amdiv {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// E[(r K - q S) 1{exercise}] for a put, E[(q S - r K) 1{exercise}] for a call
double premium_rate(const DensityMarch& dm, const DensityState& st, const Model& m, double sb) {
    const double r = m.r(st.t), q = m.q(st.t), K = m.K();
    if (m.spec().kind == OptionKind::Put) {
        if (!(sb > 0.0)) return 0.0;
        return r * K * dm.prob_below(st, sb) - q * dm.spot_below(st, sb);
    }
    if (!std::isfinite(sb)) return 0.0;
    const double p_above = st.mass() - dm.prob_below(st, sb);
    const double s_above = dm.expected_spot(st) - dm.spot_below(st, sb);
    return q * s_above - r * K * p_above;
}

}  // namespace

double eep_integral(const BoundaryCurve& bc, const DensityMarch& dm, const Model& m, int refine) {
    if (!bc.exists()) return 0.0;
    if (refine < 1) throw DomainError("eep_integral: refine must be at least 1");
    const TauGrid& g = bc.grid;
    const OptionKind kind = bc.kind;
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < g.size(); ++k) {
        const double ta = g.tau(k), tb = g.tau(k + 1);
        if (tb == ta) continue;  // pre/post pair
        const double ya = bc.y[k], yb = bc.y[k + 1];
        double prev_t = 0.0, prev_f = 0.0;
        for (int i = 0; i <= refine; ++i) {
            const double w = static_cast<double>(i) / refine;
            const double tau = ta + w * (tb - ta);
            const double t = i == 0 ? bc.t[k] : (i == refine ? bc.t[k + 1] : m.t_of_tau(tau));
            // the lower end of an interval after a post node sits on the calendar-before side
            const bool before = i == 0 && is_post(g.kind(k));
            const Side side = before ? Side::Post : Side::Pre;
            double f = 0.0;
            if (std::isfinite(ya) && std::isfinite(yb)) {
                const double sb = sb_from_y(kind, (1.0 - w) * ya + w * yb, m.alpha(tau, side), m.K());
                const DensityState st = dm.state_at(t, before);
                f = m.discount(0.0, t) * premium_rate(dm, st, m, sb);
            }
            if (i > 0) total += 0.5 * (f + prev_f) * (prev_t - t);
            prev_t = t;
            prev_f = f;
        }
    }
    return total;
}

double dividend_theta(const BoundaryCurve& bc, const DensityMarch& dm, const Model& m, bool put_left_limit) {
    if (!bc.exists()) return 0.0;
    const bool put = bc.kind == OptionKind::Put;
    // Just before an ex-date a put is worth at least V(t+, S - D) >= K - S + D (or
    // K - (1-d)S), so its exercise set there is empty and the term vanishes.
    if (put && put_left_limit) return 0.0;
    const double sgn = put ? -1.0 : 1.0;
    double theta = 0.0;
    auto region = [&](const DensityState& st, double sb, bool spot_weighted) {
        if (put) {
            if (!(sb > 0.0)) return 0.0;
            return spot_weighted ? dm.spot_below(st, sb) : dm.prob_below(st, sb);
        }
        if (!std::isfinite(sb)) return 0.0;
        return spot_weighted ? dm.expected_spot(st) - dm.spot_below(st, sb) : st.mass() - dm.prob_below(st, sb);
    };
    for (const auto& d : m.market().cash_divs) {
        if (d.amount == 0.0) continue;
        const double sb = bc.sb_at(m, d.t, Side::Post);
        const DensityState st = dm.state_at(d.t, true);
        theta += sgn * m.discount(0.0, d.t) * d.amount * region(st, sb, false);
    }
    for (const auto& d : m.market().prop_divs) {
        if (d.fraction == 0.0) continue;
        const double sb = bc.sb_at(m, d.t, Side::Post);
        const DensityState st = dm.state_at(d.t, true);
        theta += sgn * m.discount(0.0, d.t) * d.fraction * region(st, sb, true);
    }
    return theta;
}

PriceReport price_american(const Model& m, const PricerOptions& opt) {
    const auto t0 = Clock::now();
    PriceReport rep;
    auto t1 = Clock::now();
    rep.boundary = solve_boundary(m, opt.boundary);
    rep.seconds_boundary = seconds_since(t1);
    rep.boundary_status = rep.boundary.status;
    rep.boundary_reason = rep.boundary.reason;
    rep.boundary_nodes = static_cast<int>(rep.boundary.y.size());
    rep.max_iterations = rep.boundary.max_iterations;
    for (double r : rep.boundary.residual)
        if (std::isfinite(r)) rep.max_residual = std::max(rep.max_residual, std::abs(r));
    rep.diagnostics = rep.boundary.diagnostics;

    t1 = Clock::now();
    rep.european = price_european(m, opt.euro);
    rep.seconds_european = seconds_since(t1);

    t1 = Clock::now();
    if (rep.boundary.exists()) {
        const DensityMarch dm(m, m.spec().S, opt.density);
        rep.eep = eep_integral(rep.boundary, dm, m, opt.eep_refine);
        rep.dividend_theta = dividend_theta(rep.boundary, dm, m, opt.put_theta_left_limit);
        const DensityState last = dm.state_at(m.T());
        if (last.lost_mass > 1e-10)
            rep.diagnostics.push_back("probability mass sent to S <= 0 by cash dividends: " +
                                      std::to_string(last.lost_mass));
    }
    rep.seconds_premium = seconds_since(t1);
    rep.american = rep.european + rep.eep + rep.dividend_theta;
    for (const auto& w : m.warnings()) rep.diagnostics.push_back("model: " + w);
    rep.seconds_total = seconds_since(t0);
    return rep;
}

std::vector<double> american_at_spots(const Model& m, const BoundaryCurve& bc, const std::vector<double>& spots,
                                      const PricerOptions& opt, std::vector<double>* european) {
    const EuropeanSolver es(m, opt.euro);
    std::vector<double> out = es.prices(spots);
    if (european) *european = out;
    if (!bc.exists()) return out;
    for (std::size_t i = 0; i < spots.size(); ++i) {
        const DensityMarch dm(m, spots[i], opt.density);
        out[i] += eep_integral(bc, dm, m, opt.eep_refine) + dividend_theta(bc, dm, m, opt.put_theta_left_limit);
    }
    return out;
}

}  // namespace amdiv
