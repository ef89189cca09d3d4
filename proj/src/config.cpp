#include "amdiv/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "amdiv/errors.hpp"

namespace amdiv {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "command", "kind", "K", "T", "S",
        "r0", "r1", "rk", "q0", "q1", "qk", "sigma0", "sigma1", "sigmak",
        "r_table", "q_table", "sigma_table", "cash_divs", "prop_divs",
        "N", "n_x", "tol", "max_iterations", "include_j10", "dividend_terms", "post_lag", "asymptote_tau",
        "eep_refine", "gl_points", "tree_steps", "tree_handling",
        "density_t", "density_lo", "density_hi", "density_points", "quote", "quotes"};
    return keys;
}

void put_entry(std::map<std::string, std::string>& entries, const std::string& line, bool allow_replace,
               const std::string& where) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (!known_keys().count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    if (value.empty()) throw ConfigError(where + ": empty value for '" + key + "'");
    if (!allow_replace && entries.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    entries[key] = value;
}

int parse_int(const std::string& key, const std::string& value) {
    const double v = parse_number(key, value);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(key + ": expected an integer, got '" + value + "'");
    return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

Command parse_command(const std::string& v) {
    if (v == "price") return Command::Price;
    if (v == "boundary") return Command::Boundary;
    if (v == "density") return Command::Density;
    if (v == "implied") return Command::Implied;
    if (v == "implied-strike") return Command::ImpliedStrike;
    if (v == "compare") return Command::Compare;
    throw ConfigError("command: unknown command '" + v + "'");
}

Curve curve_from(const std::map<std::string, std::string>& e, const std::string& name, double def0) {
    const auto tab = e.find(name + "_table");
    const bool has_param = e.count(name + "0") || e.count(name + "1") || e.count(name + "k");
    if (tab != e.end()) {
        if (has_param) throw ConfigError(name + "_table cannot be combined with " + name + "0/" + name + "1/" + name + "k");
        std::vector<double> t, v;
        for (const auto& [a, b] : parse_pairs(tab->second)) {
            t.push_back(a);
            v.push_back(b);
        }
        return Curve::tabulated(std::move(t), std::move(v));
    }
    auto get = [&](const std::string& k, double d) {
        const auto it = e.find(k);
        return it == e.end() ? d : parse_number(k, it->second);
    };
    return Curve::exponential(get(name + "0", def0), get(name + "1", 0.0), get(name + "k", 0.0));
}

}  // namespace

const char* to_string(Command c) {
    switch (c) {
        case Command::Price: return "price";
        case Command::Boundary: return "boundary";
        case Command::Density: return "density";
        case Command::Implied: return "implied";
        case Command::ImpliedStrike: return "implied-strike";
        case Command::Compare: return "compare";
    }
    return "?";
}

double parse_number(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    double out = 0.0;
    const char* first = v.data();
    const char* last = v.data() + v.size();
    if (first != last && *first == '+') ++first;
    const auto res = std::from_chars(first, last, out);
    if (res.ec != std::errc() || res.ptr != last || !std::isfinite(out))
        throw ConfigError(key + ": expected a number, got '" + value + "'");
    return out;
}

std::vector<std::pair<double, double>> parse_pairs(const std::string& value) {
    const std::string v = trim(value);
    if (v.size() < 2 || v.front() != '[' || v.back() != ']')
        throw ConfigError("expected a list [(a,b),...], got '" + value + "'");
    std::vector<std::pair<double, double>> out;
    std::size_t i = 1;
    const std::size_t end = v.size() - 1;
    auto skip_ws = [&] {
        while (i < end && (v[i] == ' ' || v[i] == '\t')) ++i;
    };
    skip_ws();
    while (i < end) {
        if (v[i] != '(') throw ConfigError("expected '(' in list '" + value + "'");
        const auto close = v.find(')', i);
        if (close == std::string::npos || close > end) throw ConfigError("unclosed '(' in list '" + value + "'");
        const std::string inner = v.substr(i + 1, close - i - 1);
        const auto comma = inner.find(',');
        if (comma == std::string::npos || inner.find(',', comma + 1) != std::string::npos)
            throw ConfigError("list entries must be pairs: '(" + inner + ")'");
        out.emplace_back(parse_number("list entry", inner.substr(0, comma)),
                         parse_number("list entry", inner.substr(comma + 1)));
        i = close + 1;
        skip_ws();
        if (i < end) {
            if (v[i] != ',') throw ConfigError("expected ',' between list entries in '" + value + "'");
            ++i;
            skip_ws();
            if (i >= end) throw ConfigError("trailing ',' in list '" + value + "'");
        }
    }
    return out;
}

JobConfig parse_config(const std::string& text, const std::vector<std::string>& overrides,
                       const std::string& base_dir) {
    JobConfig cfg;
    auto& e = cfg.entries;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        put_entry(e, line, false, "line " + std::to_string(lineno));
    }
    for (const auto& o : overrides) put_entry(e, o, true, "--set " + o);

    auto num = [&](const std::string& k, double& dst) {
        if (const auto it = e.find(k); it != e.end()) dst = parse_number(k, it->second);
    };
    auto integer = [&](const std::string& k, int& dst) {
        if (const auto it = e.find(k); it != e.end()) dst = parse_int(k, it->second);
    };
    auto boolean = [&](const std::string& k, bool& dst) {
        if (const auto it = e.find(k); it != e.end()) dst = parse_bool(k, it->second);
    };

    if (const auto it = e.find("command"); it != e.end()) cfg.command = parse_command(it->second);
    if (const auto it = e.find("kind"); it != e.end()) {
        if (it->second == "put") cfg.spec.kind = OptionKind::Put;
        else if (it->second == "call") cfg.spec.kind = OptionKind::Call;
        else throw ConfigError("kind: expected put or call, got '" + it->second + "'");
    }
    num("K", cfg.spec.K);
    num("T", cfg.spec.T);
    num("S", cfg.spec.S);

    cfg.market.r = curve_from(e, "r", 0.0);
    cfg.market.q = curve_from(e, "q", 0.0);
    cfg.market.sigma = curve_from(e, "sigma", 0.2);
    if (const auto it = e.find("cash_divs"); it != e.end())
        for (const auto& [t, d] : parse_pairs(it->second)) cfg.market.cash_divs.push_back({t, d});
    if (const auto it = e.find("prop_divs"); it != e.end())
        for (const auto& [t, d] : parse_pairs(it->second)) cfg.market.prop_divs.push_back({t, d});

    integer("N", cfg.pricer.boundary.N);
    if (const auto it = e.find("n_x"); it != e.end()) {
        cfg.pricer.euro.n_x = parse_int("n_x", it->second);
        cfg.pricer.density.n_x = cfg.pricer.euro.n_x;
    }
    num("tol", cfg.pricer.boundary.march.tol);
    integer("max_iterations", cfg.pricer.boundary.march.max_iterations);
    boolean("include_j10", cfg.pricer.boundary.include_j10);
    boolean("dividend_terms", cfg.pricer.boundary.include_dividend_terms);
    num("post_lag", cfg.pricer.boundary.post_lag);
    num("asymptote_tau", cfg.pricer.boundary.asymptote_tau);
    integer("eep_refine", cfg.pricer.eep_refine);
    integer("gl_points", cfg.pricer.euro.gl_points);
    integer("tree_steps", cfg.tree.n_time);
    if (const auto it = e.find("tree_handling"); it != e.end()) {
        if (it->second == "shift") cfg.tree.handling = DividendHandling::Shift;
        else if (it->second == "lump") cfg.tree.handling = DividendHandling::LumpSum;
        else if (it->second == "none") cfg.tree.handling = DividendHandling::ContinuousOnly;
        else throw ConfigError("tree_handling: expected shift, lump or none, got '" + it->second + "'");
    }
    num("density_t", cfg.density_t);
    num("density_lo", cfg.density_lo);
    num("density_hi", cfg.density_hi);
    integer("density_points", cfg.density_points);
    num("quote", cfg.quote);
    if (const auto it = e.find("quotes"); it != e.end()) {
        std::filesystem::path p(it->second);
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        cfg.quotes_path = p.lexically_normal().string();
    }

    // numerics ranges checked here so that no job starts with a bad option
    if (cfg.pricer.boundary.N < 16) throw ConfigError("N must be at least 16");
    if (cfg.pricer.euro.n_x < 21) throw ConfigError("n_x must be at least 21");
    if (!(cfg.pricer.boundary.march.tol > 0.0)) throw ConfigError("tol must be positive");
    if (cfg.pricer.boundary.march.max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
    if (!(cfg.pricer.boundary.post_lag > 0.0 && cfg.pricer.boundary.post_lag <= 1.0))
        throw ConfigError("post_lag must lie in (0, 1]");
    if (cfg.pricer.eep_refine < 1) throw ConfigError("eep_refine must be at least 1");
    if (cfg.pricer.euro.gl_points < 2) throw ConfigError("gl_points must be at least 2");
    if (cfg.tree.n_time < 1) throw ConfigError("tree_steps must be at least 1");
    if (cfg.density_points < 2) throw ConfigError("density_points must be at least 2");
    if (cfg.density_t < 0.0 || cfg.density_t > cfg.spec.T) throw ConfigError("density_t must lie in [0, T]");
    if (cfg.density_lo < 0.0 || (cfg.density_hi != 0.0 && cfg.density_hi <= cfg.density_lo))
        throw ConfigError("density range must satisfy 0 <= density_lo < density_hi");
    if ((cfg.command == Command::Implied || cfg.command == Command::ImpliedStrike) && cfg.quote < 0.0 &&
        cfg.quotes_path.empty())
        throw ConfigError(std::string(to_string(cfg.command)) + " needs quote or quotes");

    cfg.spec.validate();
    cfg.market.validate(cfg.spec.T);
    return cfg;
}

JobConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    const std::string dir = std::filesystem::path(path).parent_path().string();
    return parse_config(ss.str(), overrides, dir.empty() ? "." : dir);
}

}  // namespace amdiv
