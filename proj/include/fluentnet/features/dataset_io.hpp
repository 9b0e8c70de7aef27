#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "fluentnet/core/csv.hpp"
#include "fluentnet/features/normalization.hpp"

namespace fluentnet::features {

static_assert(std::endian::native == std::endian::little, "binary containers assume a little-endian host");

/// Clips of one detector dataset plus optional normalization statistics.
struct ClipDataset {
  std::vector<Clip> clips;
  NormalizationStats stats;
};

namespace detail {

inline constexpr char kContainerMagic[8] = {'F', 'N', 'C', 'L', 'I', 'P', 'S', '\0'};
inline constexpr std::uint32_t kContainerVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw DataError(path + ": truncated container");
  return v;
}

inline void check_field(const std::string& s, const std::string& what) {
  if (s.find_first_of(",\n\r") != std::string::npos) throw DataError(what + " contains a comma or newline: " + s);
}

}  // namespace detail

/// Writes `<stem>.bin` (header, stats, row-major frames per clip) and `<stem>.csv`
/// (clip_id,subject,dtype,label,source,offset_s).
inline void write_dataset(const ClipDataset& data, const std::string& stem) {
  std::uint32_t frames = 0, bins = 0;
  if (!data.clips.empty()) {
    frames = static_cast<std::uint32_t>(data.clips.front().spectrogram.frames);
    bins = static_cast<std::uint32_t>(data.clips.front().spectrogram.bins);
  }
  std::ofstream bin(stem + ".bin", std::ios::binary | std::ios::trunc);
  if (!bin) throw DataError("cannot write " + stem + ".bin");
  bin.write(detail::kContainerMagic, sizeof detail::kContainerMagic);
  detail::put(bin, detail::kContainerVersion);
  detail::put(bin, static_cast<std::uint64_t>(data.clips.size()));
  detail::put(bin, frames);
  detail::put(bin, bins);
  detail::put(bin, static_cast<std::uint32_t>(data.stats.bins()));
  for (double m : data.stats.mean) detail::put(bin, m);
  for (double s : data.stats.stddev) detail::put(bin, s);
  for (const auto& c : data.clips) {
    if (c.spectrogram.frames != frames || c.spectrogram.bins != bins)
      throw std::invalid_argument("write_dataset: clips have differing shapes");
    bin.write(reinterpret_cast<const char*>(c.spectrogram.values.data()),
              static_cast<std::streamsize>(c.spectrogram.values.size() * sizeof(float)));
  }
  if (!bin) throw DataError("I/O failure writing " + stem + ".bin");

  std::ofstream idx(stem + ".csv", std::ios::trunc);
  if (!idx) throw DataError("cannot write " + stem + ".csv");
  idx << "clip_id,subject,dtype,label,source,offset_s\n";
  for (std::size_t i = 0; i < data.clips.size(); ++i) {
    const auto& c = data.clips[i];
    detail::check_field(c.subject_id, "subject id");
    detail::check_field(c.source, "source");
    char offset[32];
    std::snprintf(offset, sizeof offset, "%.3f", c.offset_s);
    idx << i << ',' << c.subject_id << ',' << synthesis::to_string(c.dtype) << ',' << c.label << ',' << c.source << ','
        << offset << '\n';
  }
  if (!idx) throw DataError("I/O failure writing " + stem + ".csv");
}

inline ClipDataset read_dataset(const std::string& stem, const audio::StftConfig& config = {}) {
  const std::string path = stem + ".bin";
  std::ifstream bin(path, std::ios::binary);
  if (!bin) throw DataError("cannot open dataset container " + path);
  char magic[8];
  bin.read(magic, sizeof magic);
  if (!bin || std::memcmp(magic, detail::kContainerMagic, sizeof magic) != 0) throw DataError(path + ": bad magic");
  if (detail::get<std::uint32_t>(bin, path) != detail::kContainerVersion) throw DataError(path + ": unsupported version");
  const auto count = detail::get<std::uint64_t>(bin, path);
  const auto frames = detail::get<std::uint32_t>(bin, path);
  const auto bins = detail::get<std::uint32_t>(bin, path);
  const auto stat_bins = detail::get<std::uint32_t>(bin, path);
  ClipDataset data;
  for (std::uint32_t k = 0; k < stat_bins; ++k) data.stats.mean.push_back(detail::get<double>(bin, path));
  for (std::uint32_t k = 0; k < stat_bins; ++k) data.stats.stddev.push_back(detail::get<double>(bin, path));

  const auto table = csv::read_file(stem + ".csv");
  if (table.header != std::vector<std::string>{"clip_id", "subject", "dtype", "label", "source", "offset_s"})
    throw DataError(stem + ".csv: unexpected header");
  if (table.rows.size() != count) throw DataError(stem + ": index rows do not match container clip count");
  data.clips.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    auto& c = data.clips[i];
    const auto& row = table.rows[i];
    const std::string where = stem + ".csv row " + std::to_string(i + 2);
    if (row.size() != 6) throw DataError(where + ": expected 6 fields");
    c.subject_id = row[1];
    c.dtype = synthesis::disfluency_from_string(row[2]);
    c.label = static_cast<int>(csv::parse_int(row[3], where));
    if (c.label != 0 && c.label != 1) throw DataError(where + ": label must be 0 or 1");
    c.source = row[4];
    c.offset_s = csv::parse_double(row[5], where);
    c.spectrogram.frames = frames;
    c.spectrogram.bins = bins;
    c.spectrogram.config = config;
    c.spectrogram.origin_time = c.offset_s;
    c.spectrogram.values.resize(static_cast<std::size_t>(frames) * bins);
    bin.read(reinterpret_cast<char*>(c.spectrogram.values.data()),
             static_cast<std::streamsize>(c.spectrogram.values.size() * sizeof(float)));
    if (!bin) throw DataError(path + ": truncated clip data");
  }
  return data;
}

}  // namespace fluentnet::features
