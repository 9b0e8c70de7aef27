#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "fluentnet/audio/waveform.hpp"
#include "fluentnet/core/rng.hpp"
#include "fluentnet/synthesis/injectors.hpp"
#include "fluentnet/synthesis/types.hpp"

namespace fluentnet::synthesis {

/// Deterministic stand-in for read speech: syllable-like words built from a
/// noise-burst onset and a harmonic vowel with two formants. Used for test
/// fixtures, demos, and the placeholder filler pool.
struct Speaker {
  std::string id;
  double f0 = 120.0;
  /// Multiplies every formant frequency (vocal tract length proxy).
  double formant_scale = 1.0;
  double gain = 0.4;
};

struct Syllable {
  const char* name;
  double f1;
  double f2;
  /// true: high-passed burst (s/t/k-like); false: low-passed (b/d/g-like).
  bool bright_onset;
};

inline constexpr std::array<Syllable, 12> kSyllables = {{{"ba", 750, 1200, false},
                                                         {"de", 500, 1800, false},
                                                         {"ki", 300, 2200, true},
                                                         {"mo", 450, 900, false},
                                                         {"pu", 350, 800, true},
                                                         {"sa", 700, 1300, true},
                                                         {"te", 480, 1900, true},
                                                         {"no", 420, 950, false},
                                                         {"li", 320, 2100, false},
                                                         {"ga", 720, 1250, false},
                                                         {"ro", 480, 1000, false},
                                                         {"vi", 300, 2300, true}}};

struct FixtureOptions {
  double word_min_s = 0.30;
  double word_max_s = 0.70;
  double gap_min_s = 0.05;
  double gap_max_s = 0.25;
  double noise_floor = 5e-4;
};

inline Speaker make_speaker(std::size_t index, Rng& rng) {
  Speaker s;
  s.id = "spk" + std::to_string(index);
  s.f0 = rng.uniform(95.0, 230.0);
  s.formant_scale = rng.uniform(0.9, 1.15);
  s.gain = rng.uniform(0.3, 0.5);
  return s;
}

namespace detail {

inline std::vector<double> harmonic_vowel(double f0, double f1, double f2, std::size_t n, int rate, double contour,
                                          double phase0) {
  std::vector<double> out(n, 0.0);
  const double nyquist_cap = std::min(4000.0, 0.45 * rate);
  double phase = phase0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pos = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    const double f = f0 * (1.0 + contour * (pos - 0.5));
    phase += 2.0 * std::numbers::pi * f / rate;
    double v = 0.0;
    for (int h = 1; h * f0 < nyquist_cap; ++h) {
      const double hf = h * f0;
      const double g1 = std::exp(-std::pow((hf - f1) / 160.0, 2.0));
      const double g2 = std::exp(-std::pow((hf - f2) / 260.0, 2.0));
      v += (1.0 + 3.0 * g1 + 2.0 * g2) / h * std::sin(h * phase);
    }
    out[i] = v;
  }
  return out;
}

inline void apply_envelope(std::vector<double>& x, std::size_t attack, std::size_t release) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    double g = 1.0;
    if (i < attack) g = static_cast<double>(i + 1) / static_cast<double>(attack + 1);
    if (n - i <= release) g = std::min(g, static_cast<double>(n - i) / static_cast<double>(release + 1));
    x[i] *= g;
  }
}

inline void normalize_peak(std::vector<double>& x, double peak) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  if (m > 0.0)
    for (double& v : x) v *= peak / m;
}

}  // namespace detail

/// One syllable word: onset burst then voiced vowel.
inline std::vector<double> synthesize_word(const Syllable& syl, const Speaker& spk, double duration_s, int rate, Rng& rng) {
  const auto n = static_cast<std::size_t>(std::llround(duration_s * rate));
  const auto burst = std::min(n / 3, static_cast<std::size_t>(std::llround(rng.uniform(0.025, 0.05) * rate)));
  std::vector<double> out(n, 0.0);

  double prev = 0.0, lp = 0.0;
  for (std::size_t i = 0; i < burst; ++i) {
    const double white = 2.0 * rng.uniform() - 1.0;
    double v;
    if (syl.bright_onset) {
      v = white - prev;
      prev = white;
    } else {
      lp = 0.8 * lp + 0.2 * white;
      v = 2.5 * lp;
    }
    const double decay = 1.0 - static_cast<double>(i) / static_cast<double>(burst + 1);
    out[i] = 0.25 * v * decay;
  }

  const std::size_t vowel_len = n - burst;
  auto vowel = detail::harmonic_vowel(spk.f0 * rng.uniform(0.95, 1.05), syl.f1 * spk.formant_scale,
                                      syl.f2 * spk.formant_scale, vowel_len, rate, rng.uniform(-0.08, 0.08),
                                      rng.uniform(0.0, 6.28));
  detail::normalize_peak(vowel, 1.0);
  detail::apply_envelope(vowel, static_cast<std::size_t>(0.015 * rate), static_cast<std::size_t>(0.04 * rate));
  for (std::size_t i = 0; i < vowel_len; ++i) out[burst + i] += vowel[i];
  detail::normalize_peak(out, spk.gain);
  return out;
}

struct Utterance {
  audio::Waveform audio;
  std::vector<WordTimestamp> words;
};

inline Utterance synthesize_utterance(double duration_s, const Speaker& spk, Rng& rng, int rate = 16000,
                                      const FixtureOptions& opt = {}) {
  Utterance u;
  u.audio = audio::Waveform(std::vector<double>(static_cast<std::size_t>(std::llround(duration_s * rate)), 0.0), rate);
  for (double& s : u.audio.samples) s = opt.noise_floor * (2.0 * rng.uniform() - 1.0);

  double t = rng.uniform(0.1, 0.3);
  while (true) {
    const double dur = rng.uniform(opt.word_min_s, opt.word_max_s);
    if (t + dur + 0.05 > duration_s) break;
    const Syllable& syl = kSyllables[rng.index(kSyllables.size())];
    const auto word = synthesize_word(syl, spk, dur, rate, rng);
    const auto start = audio::seconds_to_samples(t, rate);
    for (std::size_t i = 0; i < word.size() && start + i < u.audio.size(); ++i) u.audio.samples[start + i] += word[i];
    const double start_s = static_cast<double>(start) / rate;
    const double end_s = static_cast<double>(start + word.size()) / rate;
    u.words.push_back({syl.name, start_s, end_s});
    t = end_s + rng.uniform(opt.gap_min_s, opt.gap_max_s);
  }
  audio::clip_to_unit_range(u.audio, "synthesize_utterance");
  return u;
}

/// Three synthetic filler utterances standing in for recorded ones.
inline std::vector<Filler> placeholder_fillers(int rate = 16000) {
  struct Spec {
    const char* name;
    double f0, f1, f2, dur;
  };
  const Spec specs[] = {{"um", 110.0, 480.0, 1000.0, 0.35}, {"uh", 130.0, 650.0, 1200.0, 0.30}, {"er", 150.0, 500.0, 1500.0, 0.40}};
  std::vector<Filler> out;
  for (const auto& s : specs) {
    const auto n = static_cast<std::size_t>(std::llround(s.dur * rate));
    auto v = detail::harmonic_vowel(s.f0, s.f1, s.f2, n, rate, -0.05, 0.0);
    detail::normalize_peak(v, 1.0);
    detail::apply_envelope(v, static_cast<std::size_t>(0.03 * rate), static_cast<std::size_t>(0.06 * rate));
    detail::normalize_peak(v, 0.35);
    out.push_back({s.name, audio::Waveform(std::move(v), rate)});
  }
  return out;
}

}  // namespace fluentnet::synthesis
