#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "fluentnet/audio/stft.hpp"
#include "fluentnet/audio/waveform.hpp"

namespace fluentnet::audio {

namespace detail {

/// Linear interpolation of `in` onto `out_len` points spaced `step` apart.
inline std::vector<double> resample_linear(const std::vector<double>& in, std::size_t out_len, double step) {
  std::vector<double> out(out_len, 0.0);
  if (in.empty()) return out;
  const std::size_t last = in.size() - 1;
  for (std::size_t i = 0; i < out_len; ++i) {
    const double pos = static_cast<double>(i) * step;
    const auto i0 = static_cast<std::size_t>(pos);
    if (i0 >= last) {
      out[i] = in[last];
      continue;
    }
    const double frac = pos - static_cast<double>(i0);
    out[i] = frac == 0.0 ? in[i0] : in[i0] + frac * (in[i0 + 1] - in[i0]);
  }
  return out;
}

inline double wrap_phase(double p) {
  const double two_pi = 2.0 * std::numbers::pi;
  return p - two_pi * std::round(p / two_pi);
}

}  // namespace detail

/// Changes duration by `factor` by resampling the sample grid; pitch is
/// divided by the same factor.
inline Waveform time_stretch(const Waveform& w, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw std::invalid_argument("time_stretch: factor must be positive");
  const auto out_len = static_cast<std::size_t>(std::llround(static_cast<double>(w.size()) * factor));
  Waveform out(detail::resample_linear(w.samples, out_len, 1.0 / factor), w.sample_rate);
  clip_to_unit_range(out, "time_stretch");
  return out;
}

struct PhaseVocoderOptions {
  std::size_t fft_size = 2048;
  std::size_t hop = 256;
};

/// Pitch-preserving duration change by `stretch` (output length is
/// round(len * stretch)).
inline Waveform phase_vocoder_stretch(const Waveform& w, double stretch, const PhaseVocoderOptions& opt = {}) {
  if (!(stretch > 0.0) || !std::isfinite(stretch))
    throw std::invalid_argument("phase_vocoder_stretch: stretch must be positive");
  const auto out_len = static_cast<std::size_t>(std::llround(static_cast<double>(w.size()) * stretch));
  if (w.empty()) return Waveform({}, w.sample_rate);

  const auto frames = complex_stft(w.samples, opt.fft_size, opt.hop);
  const std::size_t n_bins = opt.fft_size / 2 + 1;
  const double rate = 1.0 / stretch;

  std::vector<double> phase_advance(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k)
    phase_advance[k] = 2.0 * std::numbers::pi * static_cast<double>(k * opt.hop) / static_cast<double>(opt.fft_size);

  std::vector<double> phase(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) phase[k] = std::arg(frames[0][k]);

  const std::vector<std::complex<double>> silent(n_bins, {0.0, 0.0});
  const std::size_t out_frames = out_len / opt.hop + 1;
  std::vector<std::vector<std::complex<double>>> synth;
  synth.reserve(out_frames);
  for (std::size_t s = 0; s < out_frames; ++s) {
    const double t = static_cast<double>(s) * rate;
    const auto left = static_cast<std::size_t>(t);
    const double alpha = t - static_cast<double>(left);
    const auto& a = left < frames.size() ? frames[left] : silent;
    const auto& b = left + 1 < frames.size() ? frames[left + 1] : silent;
    std::vector<std::complex<double>> frame(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double mag = (1.0 - alpha) * std::abs(a[k]) + alpha * std::abs(b[k]);
      frame[k] = std::polar(mag, phase[k]);
      const double delta = detail::wrap_phase(std::arg(b[k]) - std::arg(a[k]) - phase_advance[k]);
      phase[k] += phase_advance[k] + delta;
    }
    synth.push_back(std::move(frame));
  }
  Waveform out(inverse_complex_stft(synth, opt.fft_size, opt.hop, out_len), w.sample_rate);
  clip_to_unit_range(out, "phase_vocoder_stretch");
  return out;
}

/// Multiplies pitch by `ratio` and keeps the length exactly: phase-vocoder
/// stretch by `ratio`, then resample back onto the original sample count.
inline Waveform pitch_shift(const Waveform& w, double ratio, const PhaseVocoderOptions& opt = {}) {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) throw std::invalid_argument("pitch_shift: ratio must be positive");
  if (ratio == 1.0 || w.empty()) return w;
  const Waveform stretched = phase_vocoder_stretch(w, ratio, opt);
  const double step = static_cast<double>(stretched.size()) / static_cast<double>(w.size());
  Waveform out(detail::resample_linear(stretched.samples, w.size(), step), w.sample_rate);
  clip_to_unit_range(out, "pitch_shift");
  return out;
}

}  // namespace fluentnet::audio
