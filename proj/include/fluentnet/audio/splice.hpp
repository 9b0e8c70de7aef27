#pragma once

#include <cmath>
#include <string>

#include "fluentnet/audio/waveform.hpp"

namespace fluentnet::audio {

inline std::size_t ms_to_samples(double ms, int sample_rate) {
  return static_cast<std::size_t>(std::llround(std::max(0.0, ms) * sample_rate / 1000.0));
}

inline Waveform make_silence(double duration_ms, int sample_rate) {
  require(duration_ms >= 0.0, "make_silence: negative duration");
  return Waveform(std::vector<double>(ms_to_samples(duration_ms, sample_rate), 0.0), sample_rate);
}

/// Joins a and b with a linear crossfade over `overlap` samples; the result
/// has a.size() + b.size() - overlap samples.
inline Waveform crossfade_join(const Waveform& a, const Waveform& b, std::size_t overlap) {
  require(a.sample_rate == b.sample_rate, "crossfade: sample rate mismatch");
  if (a.size() < overlap || b.size() < overlap)
    throw std::invalid_argument("crossfade: piece shorter than overlap (" + std::to_string(overlap) + " samples)");
  Waveform out({}, a.sample_rate);
  out.samples.reserve(a.size() + b.size() - overlap);
  out.samples.insert(out.samples.end(), a.samples.begin(), a.samples.end() - static_cast<std::ptrdiff_t>(overlap));
  const std::size_t a_tail = a.size() - overlap;
  for (std::size_t j = 0; j < overlap; ++j) {
    const double w = (static_cast<double>(j) + 0.5) / static_cast<double>(overlap);
    out.samples.push_back((1.0 - w) * a.samples[a_tail + j] + w * b.samples[j]);
  }
  out.samples.insert(out.samples.end(), b.samples.begin() + static_cast<std::ptrdiff_t>(overlap), b.samples.end());
  return out;
}

/// left + insert + right with a linear crossfade at both joins; total length
/// is the sum of the pieces minus 2 * overlap.
inline Waveform crossfade_splice_samples(const Waveform& left, const Waveform& insert, const Waveform& right,
                                         std::size_t overlap) {
  return crossfade_join(crossfade_join(left, insert, overlap), right, overlap);
}

inline Waveform crossfade_splice(const Waveform& left, const Waveform& insert, const Waveform& right,
                                 double overlap_ms = 10.0) {
  return crossfade_splice_samples(left, insert, right, ms_to_samples(overlap_ms, left.sample_rate));
}

/// Linear fade-out over the last `len` samples, in place.
inline void fade_out(Waveform& w, std::size_t len) {
  len = std::min(len, w.size());
  const std::size_t start = w.size() - len;
  for (std::size_t j = 0; j < len; ++j)
    w.samples[start + j] *= 1.0 - (static_cast<double>(j) + 0.5) / static_cast<double>(len);
}

}  // namespace fluentnet::audio
