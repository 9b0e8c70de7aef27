#pragma once

#include <cmath>
#include <vector>

#include "fluentnet/features/clips.hpp"

namespace fluentnet::features {

/// Per-bin mean / standard deviation fitted on a training split.
struct NormalizationStats {
  static constexpr double kVarianceFloor = 1e-10;

  std::vector<double> mean;
  std::vector<double> stddev;

  bool empty() const { return mean.empty(); }
  std::size_t bins() const { return mean.size(); }

  static NormalizationStats fit(const std::vector<Clip>& train) {
    require(!train.empty(), "NormalizationStats::fit: empty training set");
    const std::size_t bins = train.front().spectrogram.bins;
    std::vector<double> sum(bins, 0.0), sq(bins, 0.0);
    std::size_t count = 0;
    for (const auto& clip : train) {
      const auto& s = clip.spectrogram;
      require(s.bins == bins, "NormalizationStats::fit: inconsistent bin count");
      for (std::size_t f = 0; f < s.frames; ++f)
        for (std::size_t k = 0; k < bins; ++k) sum[k] += s.at(f, k);
      count += s.frames;
    }
    NormalizationStats stats;
    stats.mean.resize(bins);
    stats.stddev.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) stats.mean[k] = sum[k] / static_cast<double>(count);
    // second pass around the mean for accuracy
    for (const auto& clip : train) {
      const auto& s = clip.spectrogram;
      for (std::size_t f = 0; f < s.frames; ++f)
        for (std::size_t k = 0; k < bins; ++k) {
          const double d = s.at(f, k) - stats.mean[k];
          sq[k] += d * d;
        }
    }
    for (std::size_t k = 0; k < bins; ++k)
      stats.stddev[k] = std::sqrt(std::max(sq[k] / static_cast<double>(count), kVarianceFloor));
    return stats;
  }

  Spectrogram apply(const Spectrogram& in) const {
    require(in.bins == bins(), "NormalizationStats::apply: bin count mismatch");
    Spectrogram out = in;
    for (std::size_t f = 0; f < in.frames; ++f)
      for (std::size_t k = 0; k < in.bins; ++k)
        out.at(f, k) = static_cast<float>((in.at(f, k) - mean[k]) / stddev[k]);
    return out;
  }

  std::vector<Clip> apply(std::vector<Clip> clips) const {
    for (auto& c : clips) c.spectrogram = apply(c.spectrogram);
    return clips;
  }

  bool operator==(const NormalizationStats&) const = default;
};

/// Fits on `train` and normalizes every split with those statistics.
inline NormalizationStats normalize_spectrograms(std::vector<Clip>& train, std::vector<std::vector<Clip>*> others = {}) {
  auto stats = NormalizationStats::fit(train);
  train = stats.apply(std::move(train));
  for (auto* split : others) *split = stats.apply(std::move(*split));
  return stats;
}

}  // namespace fluentnet::features
