#pragma once

#include <map>
#include <string>
#include <vector>

#include "amdiv/baseline.hpp"
#include "amdiv/model.hpp"
#include "amdiv/pricer.hpp"

namespace amdiv {

enum class Command { Price, Boundary, Density, Implied, ImpliedStrike, Compare };

const char* to_string(Command c);

// One job read from a key = value config file. Model keys: r0 r1 rk q0 q1 qk
// sigma0 sigma1 sigmak (x(t) = x0 e^{-xk t} + x1), r_table q_table sigma_table ([(t,v),...] overrides),
// cash_divs prop_divs ([(t,amount),...]), K T S kind. See README for the rest.
struct JobConfig {
    Command command = Command::Price;
    MarketModel market;
    OptionSpec spec;
    PricerOptions pricer;
    TreeSpec tree;  // handling defaults to shift
    double density_t = 0.0;   // 0 means T
    double density_lo = 0.0;  // spot range of the dumped density; 0 means automatic
    double density_hi = 0.0;
    int density_points = 401;
    double quote = -1.0;      // single quote for implied / implied-strike; < 0 when unset
    std::string quotes_path;  // CSV K,T,price,kind; resolved against the config's directory
    std::map<std::string, std::string> entries;  // every key as given, for the report echo

    Model model() const { return Model(market, spec); }
};

// Parses config text, then applies key=value overrides. Throws ConfigError on
// unknown keys, malformed values or a model that fails validation.
JobConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {},
                       const std::string& base_dir = ".");
JobConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

// [(a,b),(c,d)] -> {{a,b},{c,d}}; "[]" is empty.
std::vector<std::pair<double, double>> parse_pairs(const std::string& value);
double parse_number(const std::string& key, const std::string& value);

}  // namespace amdiv
