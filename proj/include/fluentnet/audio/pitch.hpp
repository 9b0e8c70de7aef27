#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "fluentnet/audio/waveform.hpp"

namespace fluentnet::audio {

struct PitchOptions {
  double min_hz = 60.0;
  double max_hz = 400.0;
  double frame_ms = 40.0;
  double hop_ms = 10.0;
  /// Minimum normalized autocorrelation at the chosen lag for a voiced frame.
  double voicing_threshold = 0.5;
  /// Frames quieter than this RMS are unvoiced.
  double silence_rms = 1e-4;

  PitchOptions scaled(double factor) const {
    PitchOptions o = *this;
    o.min_hz *= factor;
    o.max_hz *= factor;
    return o;
  }
};

namespace detail {

/// Normalized autocorrelation r(lag) over the overlapping part of one frame.
inline double normalized_autocorrelation(const double* x, std::size_t n, std::size_t lag) {
  double cross = 0.0, e0 = 0.0, e1 = 0.0;
  for (std::size_t i = 0; i + lag < n; ++i) {
    cross += x[i] * x[i + lag];
    e0 += x[i] * x[i];
    e1 += x[i + lag] * x[i + lag];
  }
  const double denom = std::sqrt(e0 * e1);
  return denom > 0.0 ? cross / denom : 0.0;
}

/// f0 of one frame, or nullopt when unvoiced.
inline std::optional<double> frame_pitch(const double* x, std::size_t n, int sample_rate, const PitchOptions& opt) {
  double energy = 0.0;
  for (std::size_t i = 0; i < n; ++i) energy += x[i] * x[i];
  if (std::sqrt(energy / static_cast<double>(n)) < opt.silence_rms) return std::nullopt;

  const auto min_lag = static_cast<std::size_t>(std::floor(sample_rate / opt.max_hz));
  auto max_lag = static_cast<std::size_t>(std::ceil(sample_rate / opt.min_hz));
  max_lag = std::min(max_lag, n / 2);
  if (min_lag < 2 || max_lag <= min_lag + 1) return std::nullopt;

  std::vector<double> r(max_lag + 2, 0.0);
  for (std::size_t lag = min_lag - 1; lag <= max_lag + 1; ++lag) r[lag] = normalized_autocorrelation(x, n, lag);

  double best = -1.0;
  for (std::size_t lag = min_lag; lag <= max_lag; ++lag) best = std::max(best, r[lag]);
  if (best < opt.voicing_threshold) return std::nullopt;

  // The shortest lag whose local peak comes close to the global maximum; this
  // avoids picking sub-harmonics of a periodic signal.
  std::size_t chosen = 0;
  for (std::size_t lag = min_lag; lag <= max_lag; ++lag) {
    if (r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1] && r[lag] >= 0.9 * best) {
      chosen = lag;
      break;
    }
  }
  if (chosen == 0) return std::nullopt;

  double refined = static_cast<double>(chosen);
  const double a = r[chosen - 1], b = r[chosen], c = r[chosen + 1];
  const double curvature = a - 2.0 * b + c;
  if (curvature < 0.0) refined += 0.5 * (a - c) / curvature;
  return sample_rate / refined;
}

}  // namespace detail

/// Mean f0 over voiced frames by autocorrelation peak picking with parabolic
/// refinement. Returns nullopt when no frame is voiced.
inline std::optional<double> estimate_mean_pitch(const Waveform& w, const PitchOptions& opt = {}) {
  const auto min_len = static_cast<std::size_t>(std::ceil(0.05 * w.sample_rate));
  if (w.size() < min_len) throw std::invalid_argument("estimate_mean_pitch: segment shorter than 50 ms");
  require(opt.min_hz > 0.0 && opt.max_hz > opt.min_hz, "estimate_mean_pitch: invalid search band");

  const auto max_lag = static_cast<std::size_t>(std::ceil(w.sample_rate / opt.min_hz));
  std::size_t frame_len =
      std::max(static_cast<std::size_t>(std::llround(opt.frame_ms * w.sample_rate / 1000.0)), 2 * max_lag + 2);
  frame_len = std::min(frame_len, w.size());
  const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opt.hop_ms * w.sample_rate / 1000.0)));

  double sum = 0.0;
  std::size_t voiced = 0;
  for (std::size_t start = 0; start + frame_len <= w.size(); start += hop) {
    if (auto f0 = detail::frame_pitch(w.samples.data() + start, frame_len, w.sample_rate, opt)) {
      sum += *f0;
      ++voiced;
    }
  }
  if (voiced == 0) return std::nullopt;
  return sum / static_cast<double>(voiced);
}

}  // namespace fluentnet::audio
