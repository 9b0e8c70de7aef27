#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "fluentnet/audio/wav.hpp"
#include "fluentnet/synthesis/injectors.hpp"

namespace fluentnet::synthesis {

/// Loads every *.wav in `dir` (sorted by file name); the stem names the filler.
inline std::vector<Filler> load_filler_pool(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw DataError("filler pool directory not found: " + dir);
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".wav") paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());
  std::vector<Filler> pool;
  for (const auto& p : paths) pool.push_back({p.stem().string(), audio::load_wav(p.string())});
  return pool;
}

inline void save_filler_pool(const std::vector<Filler>& pool, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& f : pool) audio::save_wav(f.audio, (std::filesystem::path(dir) / (f.name + ".wav")).string());
}

}  // namespace fluentnet::synthesis
