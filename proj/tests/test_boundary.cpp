#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "amdiv/baseline.hpp"
#include "amdiv/boundary.hpp"
#include "amdiv/errors.hpp"

using namespace amdiv;

namespace {

MarketModel constant_market(double r, double q, double sigma) {
    MarketModel m;
    m.r = Curve::constant(r);
    m.q = Curve::constant(q);
    m.sigma = Curve::constant(sigma);
    return m;
}

MarketModel test1_market() { return constant_market(0.01, 0.0, 0.6); }

MarketModel test2_market() {
    MarketModel m;
    m.r = Curve::exponential(0.01, 0.01, 1.0);
    m.q = Curve::exponential(0.02, -0.01, 0.1);
    m.sigma = Curve::exponential(0.3, 0.0, 2.0);
    return m;
}

void add_cash_schedule(MarketModel& mk, double scale) {
    const double t[] = {0.07, 0.12, 0.17, 0.22};
    const double d[] = {5.0, 4.0, 3.0, 2.0};
    for (int i = 0; i < 4; ++i) mk.cash_divs.push_back({t[i], scale * d[i]});
}

// S_B(calendar-before) - S_B(calendar-after) at each cash ex-date node
std::vector<double> cash_jumps(const BoundaryCurve& bc) {
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < bc.grid.size(); ++k)
        if (bc.grid.kind(k) == NodeKind::CashPre) out.push_back(bc.sb[k + 1] - bc.sb[k]);
    return out;
}

// the same jumps in y, i.e. log(S_B) up to the continuous factor alpha
std::vector<double> cash_log_jumps(const BoundaryCurve& bc) {
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < bc.grid.size(); ++k)
        if (bc.grid.kind(k) == NodeKind::CashPre) out.push_back(bc.y[k + 1] - bc.y[k]);
    return out;
}

OptionSpec call_spec() {
    OptionSpec s;
    s.kind = OptionKind::Call;
    return s;
}

}  // namespace

TEST(Boundary, NegativeRatePutHasNoBoundary) {
    const Model m(constant_market(-0.01, 0.0, 0.3), OptionSpec{});
    std::string why;
    EXPECT_TRUE(boundary_absent(m, OptionKind::Put, &why));
    EXPECT_FALSE(why.empty());
    const BoundaryCurve bc = solve_boundary(m);
    EXPECT_EQ(bc.status, BoundaryStatus::NoBoundary);
    EXPECT_EQ(bc.sb_at(m, 0.1), 0.0);
}

TEST(Boundary, TestOneShape) {
    const Model m(test1_market(), OptionSpec{});
    const BoundaryCurve bc = solve_boundary(m);
    ASSERT_EQ(bc.status, BoundaryStatus::Found);
    EXPECT_EQ(bc.y[0], 0.0);
    EXPECT_NEAR(bc.sb[0], 100.0, 1e-12);
    // expiry first: S_B falls as time to expiry grows
    for (std::size_t k = 1; k < bc.sb.size(); ++k) EXPECT_LT(bc.sb[k], bc.sb[k - 1]) << k;
    EXPECT_NEAR(bc.sb_at(m, 0.25), 100.0, 1e-9);
}

TEST(Boundary, TestOneMatchesTree) {
    const Model m(test1_market(), OptionSpec{});
    BoundaryOptions opt;
    opt.N = 50;
    const BoundaryCurve bc = solve_boundary(m, opt);
    TreeSpec ts;
    ts.n_time = 3000;
    const BoundaryComparison c = compare_boundaries(bc, tree_boundary(m, ts), m.K());
    EXPECT_GT(c.compared, 40);
    EXPECT_LT(c.max_dev, 0.01);
}

TEST(Boundary, CallWithLargeYieldMatchesTree) {
    const Model m(constant_market(0.01, 0.08, 0.3), call_spec());
    const BoundaryCurve bc = solve_boundary(m);
    ASSERT_TRUE(bc.exists());
    TreeSpec ts;
    ts.n_time = 3000;
    const BoundaryComparison c = compare_boundaries(bc, tree_boundary(m, ts), m.K());
    EXPECT_GT(c.compared, 30);
    EXPECT_LT(c.max_dev, 0.01);
}

TEST(Boundary, PositiveRateCallHasNoBoundary) {
    const Model m(constant_market(0.01, 0.0, 0.3), call_spec());
    EXPECT_TRUE(boundary_absent(m, OptionKind::Call));
    const BoundaryCurve bc = solve_boundary(m);
    EXPECT_EQ(bc.status, BoundaryStatus::NoBoundary);
    EXPECT_TRUE(std::isinf(bc.sb_at(m, 0.1)));
}

TEST(Boundary, NegativeRateCall) {
    const Model m(constant_market(-0.01, 0.0, 0.3), call_spec());
    EXPECT_FALSE(boundary_absent(m, OptionKind::Call));
    const BoundaryCurve bc = solve_boundary(m);
    ASSERT_TRUE(bc.exists());
    // expiry first: S_B rises with time to expiry
    for (std::size_t k = 1; k < bc.sb.size(); ++k) EXPECT_GT(bc.sb[k], bc.sb[k - 1]) << k;
    TreeSpec ts;
    ts.n_time = 3000;
    const BoundaryComparison c = compare_boundaries(bc, tree_boundary(m, ts), m.K());
    EXPECT_LT(c.max_dev, 0.01);
}

TEST(Boundary, ZeroCashDividendsMatchNoDividendResidual) {
    const Model plain(test2_market(), OptionSpec{});
    MarketModel mk = test2_market();
    add_cash_schedule(mk, 0.0);
    const Model zero(mk, OptionSpec{});
    const TauGrid g = boundary_grid(zero, 50);
    ASSERT_EQ(g.size(), boundary_grid(plain, 50).size());
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.3, 0.0);
    std::vector<double> y(g.size());
    y[0] = terminal_y(plain, OptionKind::Put);
    for (std::size_t k = 1; k < g.size(); ++k) y[k] = y[k - 1] + 0.02 * u(rng);
    for (std::size_t k : {1u, 7u, 30u, 50u}) {
        const double a = put_residual_nodiv(plain, g, k, y[k], y);
        const double b = put_residual_cashdiv(zero, g, k, y[k], y);
        EXPECT_DOUBLE_EQ(a, b) << k;
    }
    EXPECT_THROW(put_residual_nodiv(zero, g, 1, y[1], y), DomainError);
}

TEST(Boundary, TinyDividendIsAPerturbation) {
    // at the lagged ex-date node the dividend term scales like D / sqrt(h), so the deviation is linear in D
    const Model plain(test1_market(), OptionSpec{});
    const BoundaryCurve b0 = solve_boundary(plain);
    auto deviation = [&](double D) {
        MarketModel mk = test1_market();
        mk.cash_divs.push_back({0.12, D});
        const Model m(mk, OptionSpec{});
        const BoundaryCurve b = solve_boundary(m);
        EXPECT_EQ(b.status, BoundaryStatus::Found);
        double worst = 0.0;
        for (std::size_t k = 0; k < b.t.size(); ++k)
            worst = std::max(worst, std::abs(std::log(b.sb[k] / b0.sb_at(plain, b.t[k]))));
        return worst;
    };
    const double d6 = deviation(1e-6 * 100.0), d5 = deviation(1e-5 * 100.0);
    EXPECT_GT(d6, 0.0);
    EXPECT_LT(d6, 1e-3);
    EXPECT_NEAR(d5 / d6, 10.0, 0.5);
}

TEST(Boundary, CashDividendsGiveDownwardJumps) {
    for (const MarketModel& base : {test1_market(), test2_market()}) {
        MarketModel mk = base;
        add_cash_schedule(mk, 1.0);
        const BoundaryCurve bc = solve_boundary(Model(mk, OptionSpec{}));
        ASSERT_TRUE(bc.exists());
        const std::vector<double> jumps = cash_jumps(bc), big = cash_log_jumps(bc);
        ASSERT_EQ(jumps.size(), 4u);
        for (double j : jumps) EXPECT_LT(j, 0.0);

        MarketModel small = base;
        add_cash_schedule(small, 0.1);
        const BoundaryCurve bs = solve_boundary(Model(small, OptionSpec{}));
        const std::vector<double> js = cash_jumps(bs), ls = cash_log_jumps(bs);
        ASSERT_EQ(js.size(), 4u);
        for (std::size_t i = 0; i < 4; ++i) {
            EXPECT_LT(js[i], 0.0);
            EXPECT_LT(std::abs(ls[i]), std::abs(big[i])) << i;
        }
    }
}

TEST(Boundary, ProportionalDividendsGiveJumps) {
    // the boundary falls steeply over the nodes calendar-before each ex-date
    MarketModel mk = test2_market();
    mk.prop_divs = {{0.08, 0.05}, {0.18, 0.03}};
    const Model m(mk, OptionSpec{});
    const BoundaryCurve bc = solve_boundary(m);
    ASSERT_TRUE(bc.exists());
    int seen = 0;
    for (std::size_t k = 0; k + 1 < bc.grid.size(); ++k) {
        if (bc.grid.kind(k) != NodeKind::PropPre) continue;
        ++seen;
        ASSERT_LT(k + 12, bc.grid.size());
        const std::size_t p = k + 1;
        EXPECT_LT(bc.sb[p + 2], bc.sb[k]);
        const double near = (bc.sb[p + 1] - bc.sb[p + 2]) / (bc.t[p + 1] - bc.t[p + 2]);
        const double far = (bc.sb[p + 6] - bc.sb[p + 11]) / (bc.t[p + 6] - bc.t[p + 11]);
        EXPECT_GT(near, 2.0 * far) << bc.t[k];
    }
    EXPECT_EQ(seen, 2);
}

TEST(Boundary, YieldAboveRateStartsBelowStrike) {
    const Model m(constant_market(0.01, 0.03, 0.3), OptionSpec{});
    EXPECT_NEAR(terminal_y(m, OptionKind::Put), std::log(1.0 / 3.0), 1e-15);
    const BoundaryCurve bc = solve_boundary(m);
    ASSERT_TRUE(bc.exists());
    EXPECT_NEAR(bc.sb[0], 100.0 / 3.0 * 1.0, 1e-9);
    const auto a = eb_asymptote(1e-8, m, OptionKind::Put);
    ASSERT_TRUE(a.has_value());
    EXPECT_NEAR(std::exp(*a) * 100.0, 100.0 / 3.0, 0.1);
}

TEST(Boundary, AsymptoteNearExpiry) {
    const Model m(test1_market(), OptionSpec{});
    const auto a0 = eb_asymptote(1e-12, m, OptionKind::Put);
    ASSERT_TRUE(a0.has_value());
    EXPECT_NEAR(*a0, 0.0, 1e-4);
    const BoundaryCurve bc = solve_boundary(m);
    const auto a2 = eb_asymptote(bc.grid.tau(2), m, OptionKind::Put);
    ASSERT_TRUE(a2.has_value());
    EXPECT_LT(std::abs(bc.y[2] - *a2), 0.25 * std::abs(*a2));
}

TEST(Boundary, ResidualVanishesAtRoot) {
    const Model m(test1_market(), OptionSpec{});
    const TauGrid g = boundary_grid(m, 50);
    const BoundaryCurve bc = solve_boundary(m);
    for (std::size_t k : {5u, 20u, 45u}) {
        EXPECT_NEAR(put_residual_nodiv(m, g, k, bc.y[k], bc.y), 0.0, 1e-8 * 100.0);
    }
}

TEST(Boundary, GridRefinementStable) {
    const Model m(test1_market(), OptionSpec{});
    BoundaryOptions o50, o100, o200;
    o50.N = 50;
    o100.N = 100;
    o200.N = 200;
    const BoundaryCurve b50 = solve_boundary(m, o50), b100 = solve_boundary(m, o100), b200 = solve_boundary(m, o200);
    for (std::size_t k = 0; k < b50.t.size(); ++k) {
        EXPECT_LT(std::abs(b50.sb[k] - b100.sb[2 * k]), 0.002 * 100.0) << k;
        EXPECT_LT(std::abs(b100.sb[2 * k] - b200.sb[4 * k]), 0.002 * 100.0) << k;
    }
}

TEST(Boundary, CsvHasOneRowPerNode) {
    const Model m(test1_market(), OptionSpec{});
    const BoundaryCurve bc = solve_boundary(m);
    std::ostringstream os;
    bc.write_csv(os);
    const std::string s = os.str();
    EXPECT_EQ(static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')), bc.t.size() + 1);
}
