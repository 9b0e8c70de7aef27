#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "fluentnet/audio/waveform.hpp"
#include "fluentnet/core/rng.hpp"

namespace fluentnet::testing {

inline audio::Waveform sine(double hz, double seconds, int rate = 16000, double amp = 0.5) {
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate);
  return audio::Waveform(std::move(s), rate);
}

/// Harmonic "vowel": f0 plus decaying harmonics.
inline audio::Waveform vowel(double f0, double seconds, int rate = 16000) {
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  std::vector<double> s(n, 0.0);
  for (int h = 1; h <= 6; ++h) {
    const double amp = 0.3 / h;
    for (std::size_t i = 0; i < n; ++i)
      s[i] += amp * std::sin(2.0 * std::numbers::pi * f0 * h * static_cast<double>(i) / rate);
  }
  return audio::Waveform(std::move(s), rate);
}

inline audio::Waveform white_noise(double seconds, std::uint64_t seed, int rate = 16000, double amp = 0.3) {
  Rng rng(seed);
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  std::vector<double> s(n);
  for (auto& v : s) v = amp * (2.0 * rng.uniform() - 1.0);
  return audio::Waveform(std::move(s), rate);
}

/// Direct O(N^2) DFT magnitude of a real sequence, bins 0..n_bins-1.
inline std::vector<double> dft_magnitude(const std::vector<double>& x, std::size_t n_fft, std::size_t n_bins) {
  std::vector<double> mag(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t n = 0; n < x.size() && n < n_fft; ++n) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k * n) / static_cast<double>(n_fft);
      acc += x[n] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    mag[k] = std::abs(acc);
  }
  return mag;
}

}  // namespace fluentnet::testing
