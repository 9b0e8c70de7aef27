#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fluentnet/core/csv.hpp"
#include "fluentnet/synthesis/types.hpp"

namespace fluentnet::synthesis {

namespace detail {

inline void expect_header(const csv::Table& t, const std::vector<std::string>& expected, const std::string& path) {
  if (t.header != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw DataError(path + ": expected header " + want);
  }
}

inline std::string format_ms(double seconds) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", seconds);
  return buf;
}

}  // namespace detail

/// Validates and sorts word timestamps: sorted by start, start < end, no
/// overlaps.
inline std::vector<WordTimestamp> validate_timestamps(std::vector<WordTimestamp> words, const std::string& context) {
  for (const auto& w : words) {
    if (!(w.start_s >= 0.0) || !(w.start_s < w.end_s))
      throw DataError(context + ": non-monotone times for word '" + w.word + "'");
  }
  std::stable_sort(words.begin(), words.end(),
                   [](const WordTimestamp& a, const WordTimestamp& b) { return a.start_s < b.start_s; });
  for (std::size_t i = 1; i < words.size(); ++i) {
    if (words[i].start_s < words[i - 1].end_s)
      throw DataError(context + ": overlapping words '" + words[i - 1].word + "' and '" + words[i].word + "'");
  }
  return words;
}

inline std::vector<WordTimestamp> parse_timestamps_csv(const csv::Table& table, const std::string& context) {
  detail::expect_header(table, {"word", "start_s", "end_s"}, context);
  std::vector<WordTimestamp> words;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = context + " row " + std::to_string(r + 2);
    if (row.size() != 3) throw DataError(where + ": expected 3 fields");
    words.push_back({row[0], csv::parse_double(row[1], where), csv::parse_double(row[2], where)});
  }
  return validate_timestamps(std::move(words), context);
}

inline std::vector<WordTimestamp> read_timestamps_csv(const std::string& path) {
  return parse_timestamps_csv(csv::read_file(path), path);
}

inline void write_timestamps_csv(const std::vector<WordTimestamp>& words, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << "word,start_s,end_s\n";
  for (const auto& w : words) out << w.word << ',' << detail::format_ms(w.start_s) << ',' << detail::format_ms(w.end_s) << '\n';
  if (!out) throw DataError("I/O failure writing " + path);
}

/// One row of a label CSV: a clean word or a disfluent utterance.
using LabelRow = DisfluencyLabel;

/// Writes word,start_s,end_s,type rows sorted by start with millisecond
/// precision.
inline void write_labels_csv(std::vector<LabelRow> rows, const std::string& path) {
  for (const auto& r : rows)
    if (!(r.start_s < r.end_s)) throw std::invalid_argument("write_labels_csv: label with start >= end");
  std::stable_sort(rows.begin(), rows.end(), [](const LabelRow& a, const LabelRow& b) { return a.start_s < b.start_s; });
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << "word,start_s,end_s,type\n";
  for (const auto& r : rows)
    out << r.word << ',' << detail::format_ms(r.start_s) << ',' << detail::format_ms(r.end_s) << ',' << to_string(r.dtype)
        << '\n';
  if (!out) throw DataError("I/O failure writing " + path);
}

inline std::vector<LabelRow> read_labels_csv(const std::string& path) {
  const auto table = csv::read_file(path);
  detail::expect_header(table, {"word", "start_s", "end_s", "type"}, path);
  std::vector<LabelRow> rows;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = path + " row " + std::to_string(r + 2);
    if (row.size() != 4) throw DataError(where + ": expected 4 fields");
    rows.push_back({row[0], csv::parse_double(row[1], where), csv::parse_double(row[2], where),
                    disfluency_from_string(row[3])});
  }
  return rows;
}

}  // namespace fluentnet::synthesis
