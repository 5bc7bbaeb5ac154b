#include "hybridloss/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace hybridloss {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

bool needs_csv_quotes(const std::string& s) {
  return s.find_first_of(",\"\n") != std::string::npos;
}

std::string csv_escape(const std::string& s) {
  if (!needs_csv_quotes(s)) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

std::string json_escape(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += "\"";
  return out;
}

// Doubles keep the same printed token in both formats; non-finite values
// are quoted in JSON to keep the document valid.
std::string json_cell(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return json_escape(*s);
  if (const auto* d = std::get_if<double>(&c)) {
    if (!std::isfinite(*d)) return json_escape(format_double(*d));
    return format_double(*d);
  }
  return std::to_string(std::get<long long>(c));
}

}  // namespace

std::string format_cell(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  return std::to_string(std::get<long long>(c));
}

void ExperimentReport::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw std::invalid_argument("row width does not match column count");
  }
  rows.push_back(std::move(row));
}

std::string ExperimentReport::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(columns[i]);
  }
  out += '\n';
  for (const std::vector<Cell>& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_escape(format_cell(row[i]));
    }
    out += '\n';
  }
  return out;
}

std::string ExperimentReport::to_json() const {
  std::string out = "{\n";
  out += "  \"experiment\": " + json_escape(experiment) + ",\n";
  out += "  \"seed\": " + std::to_string(seed) + ",\n";
  out += "  \"config\": {";
  for (std::size_t i = 0; i < config.size(); ++i) {
    if (i) out += ", ";
    out += json_escape(config[i].first) + ": " + json_escape(config[i].second);
  }
  out += "},\n  \"columns\": [";
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += ", ";
    out += json_escape(columns[i]);
  }
  out += "],\n  \"rows\": [\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += "    [";
    for (std::size_t i = 0; i < rows[r].size(); ++i) {
      if (i) out += ", ";
      out += json_cell(rows[r][i]);
    }
    out += r + 1 < rows.size() ? "],\n" : "]\n";
  }
  out += "  ]\n}\n";
  return out;
}

void ExperimentReport::write(const std::string& path, bool as_json) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open report file for writing: " + path);
  std::string text = as_json ? to_json() : to_csv();
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("failed to write report file: " + path);
}

}  // namespace hybridloss
