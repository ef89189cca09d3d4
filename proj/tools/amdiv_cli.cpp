#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "amdiv/baseline.hpp"
#include "amdiv/boundary.hpp"
#include "amdiv/config.hpp"
#include "amdiv/deamericanize.hpp"
#include "amdiv/density.hpp"
#include "amdiv/errors.hpp"
#include "amdiv/io.hpp"
#include "amdiv/pricer.hpp"

using namespace amdiv;
using nlohmann::json;

namespace {

struct Artifacts {
    std::vector<std::pair<std::string, std::string>> files;
    std::string summary;  // one line on stdout
};

json boundary_json(const BoundaryCurve& bc) {
    json j;
    j["status"] = to_string(bc.status);
    j["reason"] = bc.reason;
    j["nodes"] = bc.y.size();
    j["max_iterations"] = bc.max_iterations;
    double res = 0.0;
    for (double r : bc.residual)
        if (std::isfinite(r)) res = std::max(res, std::abs(r));
    j["max_residual"] = json_number(res);
    j["diagnostics"] = bc.diagnostics;
    return j;
}

Model model_for(const JobConfig& cfg, double K, double T, OptionKind kind) {
    OptionSpec s = cfg.spec;
    s.K = K;
    s.T = T;
    s.kind = kind;
    return Model(cfg.market, s);
}

std::vector<QuoteRow> quotes_of(const JobConfig& cfg) {
    if (!cfg.quotes_path.empty()) return read_quotes_csv(cfg.quotes_path);
    return {{cfg.spec.K, cfg.spec.T, cfg.quote, cfg.spec.kind}};
}

void run_price(const JobConfig& cfg, json& res, Artifacts& a) {
    const PriceReport rep = price_american(cfg.model(), cfg.pricer);
    if (!std::isfinite(rep.american)) throw NumericalError("american price is not finite");
    res = to_json(rep);
    a.files.emplace_back("boundary.csv", boundary_csv(rep.boundary));
    a.summary = "american " + fmt10(rep.american) + " european " + fmt10(rep.european) + " boundary " +
                to_string(rep.boundary_status);
}

void run_boundary(const JobConfig& cfg, json& res, Artifacts& a) {
    const BoundaryCurve bc = solve_boundary(cfg.model(), cfg.pricer.boundary);
    res = boundary_json(bc);
    a.files.emplace_back("boundary.csv", boundary_csv(bc));
    a.summary = std::string("boundary ") + to_string(bc.status) + " nodes " + std::to_string(bc.y.size());
}

void run_density(const JobConfig& cfg, json& res, Artifacts& a) {
    const Model m = cfg.model();
    const double t = cfg.density_t > 0.0 ? cfg.density_t : m.T();
    if (!(t > 0.0)) throw DomainError("density: the dump date must be positive");
    const DensityMarch dm(m, cfg.spec.S, cfg.pricer.density);
    const DensityState st = dm.state_at(t);
    const double spread = 8.0 * std::sqrt(2.0 * st.tau);
    const double lo = cfg.density_lo > 0.0 ? cfg.density_lo : st.scale * std::exp(-spread);
    const double hi = cfg.density_hi > 0.0 ? cfg.density_hi : st.scale * std::exp(spread);
    std::vector<double> S(static_cast<std::size_t>(cfg.density_points));
    for (std::size_t i = 0; i < S.size(); ++i) S[i] = lo + (hi - lo) * static_cast<double>(i) / (S.size() - 1);
    const std::vector<double> p = dm.pdf(st, S);
    CsvTable tab({"S", "p"});
    for (std::size_t i = 0; i < S.size(); ++i) tab.add_row(std::vector<double>{S[i], p[i]});
    a.files.emplace_back("density.csv", tab.str());
    res["t"] = t;
    res["mass"] = json_number(st.mass());
    res["lost_mass"] = json_number(st.lost_mass);
    res["expected_spot"] = json_number(dm.expected_spot(st));
    res["expected_spot_moment_ode"] = json_number(m.expected_spot(t));
    a.summary = "density at t " + fmt10(t) + " mass " + fmt10(st.mass());
}

void run_implied(const JobConfig& cfg, json& res, Artifacts& a) {
    ImpliedOptions io;
    io.pricer = cfg.pricer;
    CsvTable tab({"K", "T", "kind", "price", "sigma_bar", "equivalent_european", "american", "residual", "iterations",
                  "status"});
    json rows = json::array();
    int ok = 0;
    for (const QuoteRow& q : quotes_of(cfg)) {
        json r;
        r["K"] = q.K;
        r["T"] = q.T;
        r["kind"] = to_string(q.kind);
        r["price"] = q.price;
        try {
            const ImpliedResult ir = implied_sigma(q.price, model_for(cfg, q.K, q.T, q.kind), io);
            tab.add_row(std::vector<std::string>{fmt10(q.K), fmt10(q.T), to_string(q.kind), fmt10(q.price),
                                                 fmt10(ir.sigma_bar), fmt10(ir.equivalent_european),
                                                 fmt10(ir.american), fmt10(ir.residual),
                                                 std::to_string(ir.iterations), "ok"});
            r["sigma_bar"] = ir.sigma_bar;
            r["warnings"] = ir.warnings;
            ++ok;
        } catch (const NumericalError& e) {
            tab.add_row(std::vector<std::string>{fmt10(q.K), fmt10(q.T), to_string(q.kind), fmt10(q.price), "nan",
                                                 "nan", "nan", "nan", "0", e.what()});
            r["error"] = e.what();
        }
        rows.push_back(r);
    }
    a.files.emplace_back("implied.csv", tab.str());
    res["quotes"] = rows;
    res["solved"] = ok;
    a.summary = "implied volatility: " + std::to_string(ok) + " of " + std::to_string(rows.size()) + " quotes solved";
}

void run_implied_strike(const JobConfig& cfg, json& res, Artifacts& a) {
    StrikeOptions so;
    so.pricer = cfg.pricer;
    const std::vector<QuoteRow> quotes = quotes_of(cfg);
    // one batch per (T, kind), in order of first appearance
    std::vector<std::pair<double, OptionKind>> keys;
    std::map<std::size_t, ImpliedStrikeResult> by_row;
    int solves = 0, evals = 0;
    json groups = json::array();
    for (const auto& q : quotes) {
        const std::pair<double, OptionKind> key{q.T, q.kind};
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }
    for (const auto& [T, kind] : keys) {
        const Model m = model_for(cfg, cfg.spec.K, T, kind);
        std::vector<std::size_t> rows;
        std::vector<StrikeQuote> sq;
        for (std::size_t i = 0; i < quotes.size(); ++i)
            if (quotes[i].T == T && quotes[i].kind == kind) {
                rows.push_back(i);
                sq.push_back({quotes[i].K, quotes[i].price});
            }
        json g;
        g["T"] = T;
        g["kind"] = to_string(kind);
        g["quotes"] = sq.size();
        if (m.market().cash_divs.empty()) {
            const ImpliedStrikeBatch b = implied_strike_batch(sq, m, so);
            for (std::size_t i = 0; i < rows.size(); ++i) by_row[rows[i]] = b.results[i];
            solves += b.boundary_solves;
            evals += b.price_evaluations;
            g["method"] = "batch";
            g["boundary_solves"] = b.boundary_solves;
        } else {
            int s = 0;
            for (std::size_t i = 0; i < rows.size(); ++i) by_row[rows[i]] = implied_strike(sq[i], m, so, &s);
            solves += s;
            evals += s;
            g["method"] = "sequential (cash dividends)";
            g["boundary_solves"] = s;
        }
        groups.push_back(g);
    }
    CsvTable tab({"K", "T", "kind", "price", "x", "strike", "residual", "iterations", "status"});
    int ok = 0;
    for (std::size_t i = 0; i < quotes.size(); ++i) {
        const auto& q = quotes[i];
        const auto& r = by_row[i];
        ok += r.ok ? 1 : 0;
        tab.add_row(std::vector<std::string>{fmt10(q.K), fmt10(q.T), to_string(q.kind), fmt10(q.price),
                                             r.ok ? fmt10(r.x) : "nan", r.ok ? fmt10(r.strike) : "nan",
                                             r.ok ? fmt10(r.residual) : "nan", std::to_string(r.iterations),
                                             r.ok ? "ok" : r.error});
    }
    a.files.emplace_back("implied_strike.csv", tab.str());
    res["groups"] = groups;
    res["boundary_solves"] = solves;
    res["price_evaluations"] = evals;
    res["solved"] = ok;
    a.summary = "implied strike: " + std::to_string(ok) + " of " + std::to_string(quotes.size()) + " quotes solved";
}

void run_compare(const JobConfig& cfg, json& res, Artifacts& a) {
    const Model m = cfg.model();
    const BoundaryCurve bc = solve_boundary(m, cfg.pricer.boundary);
    TreeSpec ts = cfg.tree;
    ts.american = true;
    const TreeResult tr = tree_solve(m, ts);
    const BoundaryComparison c = compare_boundaries(bc, tr.boundary, m.K());
    a.files.emplace_back("boundary_git.csv", boundary_csv(bc));
    a.files.emplace_back("boundary_tree.csv", tree_boundary_csv(tr.boundary, m));
    CsvTable plot({"t", "S_B_git", "S_B_tree"});
    for (std::size_t i = 0; i < c.t.size(); ++i) plot.add_row(std::vector<double>{c.t[i], c.sb_git[i], c.sb_tree[i]});
    a.files.emplace_back("plot_data.csv", plot.str());
    res["git"] = boundary_json(bc);
    res["tree_steps"] = ts.n_time;
    res["tree_handling"] = to_string(ts.handling);
    res["tree_price"] = json_number(tr.price);
    res["tree_warnings"] = tr.warnings;
    res["max_rel_deviation"] = json_number(c.max_dev);
    res["mean_rel_deviation"] = json_number(c.mean_dev);
    res["nodes_compared"] = c.compared;
    res["excluded_final_nodes"] = 3;
    res["skipped_dividend_nodes"] = c.skipped_dividend;
    res["skipped_undefined_tree_nodes"] = c.skipped_undefined;
    a.summary = "max |dS_B|/K " + fmt10(c.max_dev) + " mean " + fmt10(c.mean_dev) + " over " +
                std::to_string(c.compared) + " nodes";
}

Artifacts run(const JobConfig& cfg, const std::string& format) {
    Artifacts a;
    json res;
    switch (cfg.command) {
        case Command::Price: run_price(cfg, res, a); break;
        case Command::Boundary: run_boundary(cfg, res, a); break;
        case Command::Density: run_density(cfg, res, a); break;
        case Command::Implied: run_implied(cfg, res, a); break;
        case Command::ImpliedStrike: run_implied_strike(cfg, res, a); break;
        case Command::Compare: run_compare(cfg, res, a); break;
    }
    json report;
    report["command"] = to_string(cfg.command);
    report["config"] = to_json(cfg);
    report["versions"] = versions_json();
    report["result"] = res;
    if (format == "json")
        a.files.emplace_back("report.json", report.dump(2) + "\n");
    else
        a.files.emplace_back("report.csv", report_csv(report));
    return a;
}

void write_all(const std::filesystem::path& dir, const Artifacts& a) {
    std::filesystem::create_directories(dir);
    for (const auto& [name, content] : a.files) write_file_atomic(dir / name, content);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"American options with discrete and continuous dividends"};
    std::string config_path, out_dir = "out", format = "json";
    std::vector<std::string> sets;
    app.add_option("--config", config_path, "job config file")->required();
    app.add_option("--set", sets, "override, key=value (repeatable)")->take_all();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "json"}));
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    JobConfig cfg;
    try {
        cfg = load_config(config_path, sets);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    Artifacts a;
    try {
        a = run(cfg, format);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        json d;
        d["command"] = to_string(cfg.command);
        d["config"] = to_json(cfg);
        d["error"] = e.what();
        try {
            Artifacts diag;
            diag.files.emplace_back("diagnostics.json", d.dump(2) + "\n");
            write_all(out_dir, diag);
        } catch (const std::exception& w) {
            std::cerr << "cannot write diagnostics: " << w.what() << "\n";
        }
        return 2;
    }
    try {
        write_all(out_dir, a);
    } catch (const std::exception& e) {
        std::cerr << "output error: " << e.what() << "\n";
        return 2;
    }
    std::cout << a.summary << "\n";
    return 0;
}
