#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fluentnet/core/error.hpp"

namespace fluentnet::csv {

/// Splits one CSV line on commas. Quoted fields are not supported; none of
/// the formats written here contain commas inside fields.
inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  for (auto& f : fields) {
    while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.pop_back();
    std::size_t start = 0;
    while (start < f.size() && f[start] == ' ') ++start;
    f.erase(0, start);
  }
  return fields;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV file: " + path);
  Table table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      table.header = split_line(line);
      first = false;
    } else {
      table.rows.push_back(split_line(line));
    }
  }
  if (first) throw DataError("CSV file has no header: " + path);
  return table;
}

inline double parse_double(const std::string& text, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw DataError("cannot parse number '" + text + "' in " + context);
  }
}

inline long long parse_int(const std::string& text, const std::string& context) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw DataError("cannot parse integer '" + text + "' in " + context);
  }
}

}  // namespace fluentnet::csv
