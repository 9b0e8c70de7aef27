#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fluentnet/audio/stft.hpp"
#include "fluentnet/synthesis/types.hpp"

namespace fluentnet::features {

using audio::Spectrogram;
using synthesis::DisfluencyLabel;
using synthesis::DisfluencyType;

inline constexpr double kClipSeconds = 4.0;

struct Clip {
  Spectrogram spectrogram;
  int label = 0;  // 1 when the target disfluency is present
  DisfluencyType dtype = DisfluencyType::CLEAN;
  std::string subject_id;
  std::string source;
  double offset_s = 0.0;

  bool operator==(const Clip&) const = default;
};

enum class WindowClass { negative, positive, excluded };

/// Classifies each 4 s window of a `duration_s` file for a detector of `target`.
///
/// A label belongs to the window holding its midpoint. A window is negative when no
/// disfluency label touches it, positive when it owns a target label and every label
/// touching it is of the target type, and excluded otherwise.
inline std::vector<WindowClass> classify_windows(double duration_s, const std::vector<DisfluencyLabel>& labels,
                                                 DisfluencyType target, double window_s = kClipSeconds) {
  require(target != DisfluencyType::CLEAN, "classify_windows: target must be a disfluency type");
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(duration_s / window_s - 1e-9)));
  std::vector<WindowClass> out(n, WindowClass::negative);
  std::vector<bool> owns_target(n, false), foreign(n, false);
  for (const auto& l : labels) {
    if (l.dtype == DisfluencyType::CLEAN) continue;
    const double mid = 0.5 * (l.start_s + l.end_s);
    const auto owner = std::min(n - 1, static_cast<std::size_t>(std::max(0.0, std::floor(mid / window_s))));
    for (std::size_t w = 0; w < n; ++w) {
      const double a = static_cast<double>(w) * window_s, b = a + window_s;
      if (l.end_s <= a || l.start_s >= b) continue;
      if (l.dtype != target) foreign[w] = true;
      else if (w == owner) owns_target[w] = true;
      else foreign[w] = true;  // straddling tail of a target label owned elsewhere
    }
  }
  for (std::size_t w = 0; w < n; ++w) {
    if (foreign[w]) out[w] = WindowClass::excluded;
    else if (owns_target[w]) out[w] = WindowClass::positive;
  }
  return out;
}

/// One clip per non-overlapping 4 s window; the last window is zero-padded.
inline std::vector<Clip> extract_clips(const audio::Waveform& waveform, const std::vector<DisfluencyLabel>& labels,
                                       DisfluencyType target, const audio::StftConfig& config = {},
                                       const std::string& subject_id = "", const std::string& source = "") {
  const auto win = audio::seconds_to_samples(kClipSeconds, waveform.sample_rate);
  const auto classes = classify_windows(waveform.duration_s(), labels, target);
  std::vector<Clip> clips;
  for (std::size_t w = 0; w < classes.size(); ++w) {
    if (classes[w] == WindowClass::excluded) continue;
    audio::Waveform piece(std::vector<double>(win, 0.0), waveform.sample_rate);
    const std::size_t begin = w * win;
    for (std::size_t i = 0; i < win && begin + i < waveform.size(); ++i) piece.samples[i] = waveform.samples[begin + i];
    Clip clip;
    clip.spectrogram = audio::stft(piece, config);
    clip.spectrogram.origin_time = static_cast<double>(begin) / waveform.sample_rate;
    clip.label = classes[w] == WindowClass::positive ? 1 : 0;
    clip.dtype = clip.label ? target : DisfluencyType::CLEAN;
    clip.subject_id = subject_id;
    clip.source = source;
    clip.offset_s = clip.spectrogram.origin_time;
    clips.push_back(std::move(clip));
  }
  return clips;
}

/// Flattened cosine similarity; 0 when either grid is all zeros.
inline double cosine_similarity(const Spectrogram& a, const Spectrogram& b) {
  if (a.frames != b.frames || a.bins != b.bins)
    throw std::invalid_argument("cosine_similarity: shape mismatch " + std::to_string(a.frames) + "x" +
                                std::to_string(a.bins) + " vs " + std::to_string(b.frames) + "x" + std::to_string(b.bins));
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double x = a.values[i], y = b.values[i];
    ab += x * y;
    aa += x * x;
    bb += y * y;
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

}  // namespace fluentnet::features
