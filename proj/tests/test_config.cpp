#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "amdiv/config.hpp"
#include "amdiv/errors.hpp"

using namespace amdiv;

namespace {

const char* kBase = R"(# comment line
command = compare
kind = put
K = 100
T = 0.25
S = 100
r0 = 0.01     # trailing comment
sigma0 = 0.6
cash_divs = [(0.07, 5), (0.12, 4)]
N = 50
tree_steps = 3000
tree_handling = lump
)";

}  // namespace

TEST(Config, ParsesModelAndNumerics) {
    const JobConfig c = parse_config(kBase);
    EXPECT_EQ(c.command, Command::Compare);
    EXPECT_EQ(c.spec.kind, OptionKind::Put);
    EXPECT_EQ(c.spec.K, 100.0);
    EXPECT_EQ(c.spec.T, 0.25);
    EXPECT_EQ(c.pricer.boundary.N, 50);
    EXPECT_EQ(c.tree.n_time, 3000);
    EXPECT_EQ(c.tree.handling, DividendHandling::LumpSum);
    ASSERT_EQ(c.market.cash_divs.size(), 2u);
    EXPECT_EQ(c.market.cash_divs[1].t, 0.12);
    EXPECT_EQ(c.market.cash_divs[1].amount, 4.0);
    EXPECT_NEAR(c.market.r(0.1), 0.01, 1e-15);
    EXPECT_NEAR(c.market.sigma(0.2), 0.6, 1e-15);
    EXPECT_EQ(c.entries.at("r0"), "0.01");
}

TEST(Config, ExponentialCurves) {
    const JobConfig c = parse_config("r0 = 0.01\nr1 = 0.01\nrk = 1.0\n");
    EXPECT_NEAR(c.market.r(0.0), 0.02, 1e-15);
    EXPECT_NEAR(c.market.r(0.2), 0.01 * std::exp(-0.2) + 0.01, 1e-15);
}

TEST(Config, OverridesReplaceValues) {
    const JobConfig c = parse_config(kBase, {"N = 200", "kind=call"});
    EXPECT_EQ(c.pricer.boundary.N, 200);
    EXPECT_EQ(c.spec.kind, OptionKind::Call);
}

TEST(Config, RejectsBadInput) {
    const std::string base = kBase;
    EXPECT_THROW(parse_config(base + "colour = red\n"), ConfigError);
    EXPECT_THROW(parse_config(base + "N = 50\n"), ConfigError);
    EXPECT_THROW(parse_config(base + "just words\n"), ConfigError);
    EXPECT_THROW(parse_config(base, {"N = fifty"}), ConfigError);
    EXPECT_THROW(parse_config(base, {"N = 50.5"}), ConfigError);
    EXPECT_THROW(parse_config(base, {"N = 8"}), ConfigError);
    EXPECT_THROW(parse_config(base, {"kind = straddle"}), ConfigError);
    EXPECT_THROW(parse_config(base, {"command = fly"}), ConfigError);
    EXPECT_THROW(parse_config(base, {"include_j10 = maybe"}), ConfigError);
    EXPECT_THROW(parse_config(base, {"post_lag = 0"}), ConfigError);
    EXPECT_THROW(parse_config(base, {"r_table = [(0, 0.01)]"}), ConfigError);
    EXPECT_THROW(parse_config("command = implied\n"), ConfigError);
}

TEST(Config, RejectsInvalidModel) {
    EXPECT_THROW(parse_config("sigma0 = -0.3\n"), ConfigError);
    EXPECT_THROW(parse_config("T = 0.25\ncash_divs = [(0.3, 1)]\n"), ConfigError);
}

TEST(Config, PairLists) {
    const auto p = parse_pairs(" [ (0.1, 2) ,(0.2,3e-1)] ");
    ASSERT_EQ(p.size(), 2u);
    EXPECT_EQ(p[0].first, 0.1);
    EXPECT_EQ(p[1].second, 0.3);
    EXPECT_TRUE(parse_pairs("[]").empty());
    EXPECT_THROW(parse_pairs("[(1,2),]"), ConfigError);
    EXPECT_THROW(parse_pairs("[(1,2,3)]"), ConfigError);
    EXPECT_THROW(parse_pairs("[(1,2)"), ConfigError);
    EXPECT_THROW(parse_pairs("(1,2)"), ConfigError);
    EXPECT_THROW(parse_number("K", "1e"), ConfigError);
    EXPECT_THROW(parse_number("K", "nan"), ConfigError);
}

TEST(Config, QuotesPathIsRelativeToConfig) {
    const JobConfig c = parse_config("command = implied\nquotes = q.csv\n", {}, "/data/run");
    EXPECT_EQ(c.quotes_path, "/data/run/q.csv");
}
