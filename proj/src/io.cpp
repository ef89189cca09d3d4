#include "amdiv/io.hpp"

#include <boost/version.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "amdiv/errors.hpp"

namespace amdiv {

namespace {

constexpr const char* kVersion = "1.0.0";

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string scalar_text(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) return fmt10(v.get<double>());
    return v.dump();
}

void flatten(const nlohmann::json& v, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
    if (v.is_object()) {
        for (const auto& [k, x] : v.items()) flatten(x, prefix.empty() ? k : prefix + "." + k, out);
    } else if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) flatten(v[i], prefix + "[" + std::to_string(i) + "]", out);
    } else {
        out.emplace_back(prefix, scalar_text(v));
    }
}

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

}  // namespace

std::string fmt10(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(const std::vector<std::string>& cells) {
    if (cells.size() != header_.size()) throw DomainError("csv row width does not match the header");
    rows_.push_back(cells);
}

void CsvTable::add_row(const std::vector<double>& cells) {
    std::vector<std::string> s;
    s.reserve(cells.size());
    for (double v : cells) s.push_back(fmt10(v));
    add_row(s);
}

std::string CsvTable::str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += csv_cell(cells[i]);
        }
        out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        f << content;
        f.flush();
        if (!f) {
            f.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw std::runtime_error("write failed for '" + tmp.string() + "'");
        }
    }
    std::filesystem::rename(tmp, path);
}

nlohmann::json json_number(double v) {
    if (std::isfinite(v)) return v;
    return fmt10(v);
}

nlohmann::json to_json(const PriceReport& rep) {
    nlohmann::json j;
    j["american"] = json_number(rep.american);
    j["european"] = json_number(rep.european);
    j["eep"] = json_number(rep.eep);
    j["dividend_theta"] = json_number(rep.dividend_theta);
    j["boundary_status"] = to_string(rep.boundary_status);
    j["boundary_reason"] = rep.boundary_reason;
    j["boundary_nodes"] = rep.boundary_nodes;
    j["max_iterations"] = rep.max_iterations;
    j["max_residual"] = json_number(rep.max_residual);
    j["diagnostics"] = rep.diagnostics;
    return j;
}

nlohmann::json to_json(const JobConfig& cfg) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : cfg.entries) j[k] = v;
    return j;
}

nlohmann::json versions_json() {
    nlohmann::json j;
    j["amdiv"] = kVersion;
    j["boost"] = BOOST_LIB_VERSION;
    j["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                         "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH);
    return j;
}

std::string report_csv(const nlohmann::json& report) {
    std::vector<std::pair<std::string, std::string>> rows;
    flatten(report, "", rows);
    CsvTable t({"key", "value"});
    for (const auto& [k, v] : rows) t.add_row(std::vector<std::string>{k, v});
    return t.str();
}

std::string boundary_csv(const BoundaryCurve& bc) {
    std::ostringstream os;
    bc.write_csv(os);
    return os.str();
}

std::string tree_boundary_csv(const TreeBoundary& tb, const Model& m) {
    std::ostringstream os;
    tb.write_csv(os, m);
    return os.str();
}

std::vector<QuoteRow> read_quotes_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read quotes file '" + path + "'");
    std::string line;
    if (!std::getline(f, line)) throw ConfigError("quotes file '" + path + "' is empty");
    const auto header = split_csv(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const char* name : {"K", "T", "price", "kind"})
        if (!col.count(name)) throw ConfigError("quotes file '" + path + "' lacks column '" + name + "'");
    std::vector<QuoteRow> out;
    int lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != header.size())
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                              " columns");
        QuoteRow q{};
        q.K = parse_number("K", cells[col["K"]]);
        q.T = parse_number("T", cells[col["T"]]);
        q.price = parse_number("price", cells[col["price"]]);
        const std::string& k = cells[col["kind"]];
        if (k == "put") q.kind = OptionKind::Put;
        else if (k == "call") q.kind = OptionKind::Call;
        else throw ConfigError(path + ":" + std::to_string(lineno) + ": kind must be put or call");
        if (!(q.K > 0.0) || !(q.T > 0.0) || !(q.price >= 0.0))
            throw ConfigError(path + ":" + std::to_string(lineno) + ": K and T must be positive, price >= 0");
        out.push_back(q);
    }
    return out;
}

}  // namespace amdiv
