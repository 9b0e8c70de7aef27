#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "fluentnet/audio/waveform.hpp"
#include "fluentnet/core/error.hpp"

namespace fluentnet::audio {

enum class WindowFn { hann, hamming, rectangular };

inline std::string to_string(WindowFn w) {
  switch (w) {
    case WindowFn::hann: return "hann";
    case WindowFn::hamming: return "hamming";
    case WindowFn::rectangular: return "rectangular";
  }
  return "hann";
}

inline WindowFn window_fn_from_string(const std::string& s) {
  if (s == "hann") return WindowFn::hann;
  if (s == "hamming") return WindowFn::hamming;
  if (s == "rectangular") return WindowFn::rectangular;
  throw std::invalid_argument("unknown window function: " + s);
}

/// Defaults give 25 ms windows every 10 ms at 16 kHz, zero-padded into a
/// 512-point FFT, keeping the lowest 256 bins.
struct StftConfig {
  std::size_t window_len = 400;
  std::size_t hop = 160;
  std::size_t fft_size = 512;
  std::size_t n_bins = 256;
  WindowFn window_fn = WindowFn::hann;

  void validate() const {
    require(window_len >= 1 && window_len <= fft_size, "StftConfig: window_len must be in [1, fft_size]");
    require(n_bins >= 1 && n_bins <= fft_size / 2 + 1, "StftConfig: n_bins must be in [1, fft_size/2 + 1]");
    require(hop >= 1, "StftConfig: hop must be >= 1");
  }

  /// floor((len - window_len) / hop) + 1, zero below one window.
  std::size_t frame_count(std::size_t len) const { return len < window_len ? 0 : (len - window_len) / hop + 1; }

  bool operator==(const StftConfig&) const = default;
};

/// Periodic window of the given length.
inline std::vector<double> make_window(WindowFn fn, std::size_t len) {
  std::vector<double> w(len, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t n = 0; n < len; ++n) {
    const double phase = two_pi * static_cast<double>(n) / static_cast<double>(len);
    switch (fn) {
      case WindowFn::hann: w[n] = 0.5 - 0.5 * std::cos(phase); break;
      case WindowFn::hamming: w[n] = 0.54 - 0.46 * std::cos(phase); break;
      case WindowFn::rectangular: break;
    }
  }
  return w;
}

/// Frames x bins grid of log(1 + |X|) values, row-major by frame.
struct Spectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<float> values;
  StftConfig config{};
  double origin_time = 0.0;

  float at(std::size_t frame, std::size_t bin) const { return values[frame * bins + bin]; }
  float& at(std::size_t frame, std::size_t bin) { return values[frame * bins + bin]; }
  bool operator==(const Spectrogram&) const = default;
};

inline Spectrogram stft(const Waveform& waveform, const StftConfig& config = {}) {
  config.validate();
  const std::size_t len = waveform.size();
  if (len < config.window_len)
    throw std::invalid_argument("stft: signal shorter than one window (" + std::to_string(len) + " < " +
                                std::to_string(config.window_len) + ")");
  Spectrogram spec;
  spec.config = config;
  spec.frames = config.frame_count(len);
  spec.bins = config.n_bins;
  spec.values.assign(spec.frames * spec.bins, 0.0f);

  const auto window = make_window(config.window_fn, config.window_len);
  Eigen::FFT<double> fft;
  std::vector<double> frame(config.fft_size, 0.0);
  std::vector<std::complex<double>> spectrum;
  for (std::size_t t = 0; t < spec.frames; ++t) {
    const std::size_t start = t * config.hop;
    std::fill(frame.begin(), frame.end(), 0.0);
    for (std::size_t n = 0; n < config.window_len; ++n) frame[n] = waveform.samples[start + n] * window[n];
    fft.fwd(spectrum, frame);
    for (std::size_t k = 0; k < spec.bins; ++k)
      spec.values[t * spec.bins + k] = static_cast<float>(std::log1p(std::abs(spectrum[k])));
  }
  return spec;
}

/// Centered complex STFT (zero padding of fft_size/2 on both ends), used by
/// the phase vocoder. Result is frames x (fft_size/2 + 1).
inline std::vector<std::vector<std::complex<double>>> complex_stft(const std::vector<double>& signal,
                                                                   std::size_t fft_size, std::size_t hop) {
  const std::size_t pad = fft_size / 2;
  std::vector<double> padded(signal.size() + 2 * pad, 0.0);
  std::copy(signal.begin(), signal.end(), padded.begin() + static_cast<std::ptrdiff_t>(pad));
  const std::size_t frames = padded.size() < fft_size ? 1 : (padded.size() - fft_size) / hop + 1;
  padded.resize(std::max(padded.size(), (frames - 1) * hop + fft_size), 0.0);

  const auto window = make_window(WindowFn::hann, fft_size);
  Eigen::FFT<double> fft;
  std::vector<std::vector<std::complex<double>>> out(frames);
  std::vector<double> frame(fft_size);
  std::vector<std::complex<double>> spectrum;
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t n = 0; n < fft_size; ++n) frame[n] = padded[t * hop + n] * window[n];
    fft.fwd(spectrum, frame);
    out[t].assign(spectrum.begin(), spectrum.begin() + static_cast<std::ptrdiff_t>(fft_size / 2 + 1));
  }
  return out;
}

/// Weighted overlap-add inverse of complex_stft; output trimmed to `length`.
inline std::vector<double> inverse_complex_stft(const std::vector<std::vector<std::complex<double>>>& frames,
                                                std::size_t fft_size, std::size_t hop, std::size_t length) {
  const std::size_t pad = fft_size / 2;
  const std::size_t total = frames.empty() ? 0 : (frames.size() - 1) * hop + fft_size;
  std::vector<double> out(std::max(total, length + 2 * pad), 0.0);
  std::vector<double> norm(out.size(), 0.0);
  const auto window = make_window(WindowFn::hann, fft_size);
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> full(fft_size);
  std::vector<double> time;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    for (std::size_t k = 0; k <= fft_size / 2; ++k) full[k] = frames[t][k];
    for (std::size_t k = 1; k < (fft_size + 1) / 2; ++k) full[fft_size - k] = std::conj(frames[t][k]);
    fft.inv(time, full);
    for (std::size_t n = 0; n < fft_size; ++n) {
      out[t * hop + n] += time[n] * window[n];
      norm[t * hop + n] += window[n] * window[n];
    }
  }
  std::vector<double> result(length, 0.0);
  for (std::size_t i = 0; i < length; ++i) {
    const double nrm = norm[i + pad];
    result[i] = nrm > 1e-8 ? out[i + pad] / nrm : 0.0;
  }
  return result;
}

}  // namespace fluentnet::audio
