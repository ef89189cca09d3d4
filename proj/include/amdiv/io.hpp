#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "amdiv/baseline.hpp"
#include "amdiv/boundary.hpp"
#include "amdiv/config.hpp"
#include "amdiv/deamericanize.hpp"
#include "amdiv/pricer.hpp"

namespace amdiv {

// 10 significant digits; nan, inf, -inf spelled out.
std::string fmt10(double v);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);
    void add_row(const std::vector<std::string>& cells);
    void add_row(const std::vector<double>& cells);
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// Writes via a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// Finite numbers as JSON numbers, non-finite ones as the strings of fmt10.
nlohmann::json json_number(double v);

nlohmann::json to_json(const PriceReport& rep);  // all fields except wall-clock timings
nlohmann::json to_json(const JobConfig& cfg);    // config echo: the given entries, as strings
nlohmann::json versions_json();

// A JSON object of scalars and arrays of scalars flattened to key,value rows.
std::string report_csv(const nlohmann::json& report);

std::string boundary_csv(const BoundaryCurve& bc);
std::string tree_boundary_csv(const TreeBoundary& tb, const Model& m);

struct QuoteRow {
    double K, T, price;
    OptionKind kind;
};

// Header K,T,price,kind (any column order); throws ConfigError on malformed rows.
std::vector<QuoteRow> read_quotes_csv(const std::string& path);

}  // namespace amdiv
