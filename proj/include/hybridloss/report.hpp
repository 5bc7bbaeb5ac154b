#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace hybridloss {

/// One report cell. Doubles are rendered with 6 significant digits and
/// the same token appears in CSV and JSON output.
using Cell = std::variant<std::string, double, long long>;

std::string format_cell(const Cell& c);

/// Tabular experiment result: a header, a configuration echo, and rows.
/// Writable as CSV (default) and JSON with identical cell values.
struct ExperimentReport {
  std::string experiment;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> config;  // echoed settings
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  std::string to_csv() const;
  std::string to_json() const;
  void write(const std::string& path, bool as_json) const;
};

}  // namespace hybridloss
