#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fluentnet/core/error.hpp"
#include "fluentnet/core/log.hpp"

namespace fluentnet::audio {

/// Mono sample sequence in [-1, 1] at a fixed sample rate.
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  Waveform() = default;
  Waveform(std::vector<double> s, int rate) : samples(std::move(s)), sample_rate(rate) {}

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate; }

  /// Sub-range [begin, end) in samples, clamped to the signal.
  Waveform slice(std::size_t begin, std::size_t end) const {
    end = std::min(end, samples.size());
    begin = std::min(begin, end);
    return Waveform(std::vector<double>(samples.begin() + static_cast<std::ptrdiff_t>(begin),
                                        samples.begin() + static_cast<std::ptrdiff_t>(end)),
                    sample_rate);
  }

  bool operator==(const Waveform&) const = default;
};

inline std::size_t seconds_to_samples(double seconds, int sample_rate) {
  return static_cast<std::size_t>(std::llround(std::max(0.0, seconds) * sample_rate));
}

inline double samples_to_seconds(std::size_t samples, int sample_rate) {
  return static_cast<double>(samples) / sample_rate;
}

/// Clamps samples into [-1, 1]; returns how many were out of range.
inline std::size_t clip_to_unit_range(Waveform& w, const char* context = "waveform") {
  std::size_t clipped = 0;
  for (double& s : w.samples) {
    if (!std::isfinite(s)) throw NumericalError(std::string(context) + ": non-finite sample");
    if (s > 1.0) {
      s = 1.0;
      ++clipped;
    } else if (s < -1.0) {
      s = -1.0;
      ++clipped;
    }
  }
  if (clipped > 0) log_warning(std::string(context) + ": clipped " + std::to_string(clipped) + " samples");
  return clipped;
}

inline double rms(const Waveform& w) {
  if (w.empty()) return 0.0;
  double acc = 0.0;
  for (double s : w.samples) acc += s * s;
  return std::sqrt(acc / static_cast<double>(w.size()));
}

inline Waveform concatenate(const std::vector<Waveform>& pieces) {
  require(!pieces.empty(), "concatenate: no pieces");
  Waveform out({}, pieces.front().sample_rate);
  for (const auto& p : pieces) {
    require(p.sample_rate == out.sample_rate, "concatenate: sample rate mismatch");
    out.samples.insert(out.samples.end(), p.samples.begin(), p.samples.end());
  }
  return out;
}

}  // namespace fluentnet::audio
