#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fluentnet/audio/pitch.hpp"
#include "fluentnet/audio/splice.hpp"
#include "fluentnet/audio/stretch.hpp"
#include "fluentnet/core/rng.hpp"
#include "fluentnet/synthesis/types.hpp"

namespace fluentnet::synthesis {

struct Injection {
  audio::Waveform audio;
  DisfluencyLabel label;
  InsertionRecord record;
};

/// A short recorded filler utterance ("um", "uh", ...).
struct Filler {
  std::string name;
  audio::Waveform audio;
};

namespace detail {

struct SampleSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

inline SampleSpan word_span(const audio::Waveform& w, const WordTimestamp& word) {
  const auto b = audio::seconds_to_samples(word.start_s, w.sample_rate);
  const auto e = audio::seconds_to_samples(word.end_s, w.sample_rate);
  if (!(word.start_s >= 0.0) || e <= b || e > w.size())
    throw std::invalid_argument("word '" + word.word + "' span is not within the waveform");
  return {b, e};
}

inline double to_seconds(long long samples, int rate) { return static_cast<double>(samples) / rate; }

inline std::size_t draw_count(const Range& r, Rng& rng) {
  return static_cast<std::size_t>(rng.uniform_int(std::llround(r.lo), std::llround(r.hi)));
}

inline std::size_t draw_pause(const SynthesisConfig& cfg, int rate, Rng& rng) {
  return audio::ms_to_samples(rng.uniform(cfg.pause_ms.lo, cfg.pause_ms.hi), rate);
}

/// Inserts `material` at sample `at` with crossfades on both joins. The
/// overlap shrinks when a neighbouring piece is shorter than the nominal
/// crossfade.
inline audio::Waveform insert_at(const audio::Waveform& w, std::size_t at, const audio::Waveform& material,
                                 double crossfade_ms, std::size_t& overlap) {
  overlap = audio::ms_to_samples(crossfade_ms, w.sample_rate);
  overlap = std::min({overlap, at, material.size(), w.size() - at});
  return audio::crossfade_splice_samples(w.slice(0, at), material, w.slice(at, w.size()), overlap);
}

/// Builds copy, pause, copy, pause, ... Each copy fades out into its pause.
inline audio::Waveform repeated_material(const audio::Waveform& segment, std::size_t copies, const SynthesisConfig& cfg,
                                         Rng& rng, InsertionRecord& record) {
  audio::Waveform material({}, segment.sample_rate);
  const auto fade = audio::ms_to_samples(cfg.crossfade_ms, segment.sample_rate);
  for (std::size_t c = 0; c < copies; ++c) {
    audio::Waveform copy = segment;
    audio::fade_out(copy, fade);
    const auto pause = draw_pause(cfg, segment.sample_rate, rng);
    material.samples.insert(material.samples.end(), copy.samples.begin(), copy.samples.end());
    material.samples.insert(material.samples.end(), pause, 0.0);
    record.pieces.push_back(copy.size());
    record.pieces.push_back(pause);
  }
  return material;
}

/// Splices repetition material immediately before `span`; the label runs
/// from the first inserted sample to the (shifted) end of the span.
inline Injection insert_repetition(const audio::Waveform& w, SampleSpan span, const audio::Waveform& material,
                                   InsertionRecord record, const std::string& word, const SynthesisConfig& cfg) {
  std::size_t overlap = 0;
  Injection out;
  out.audio = insert_at(w, span.begin, material, cfg.crossfade_ms, overlap);
  record.shift_from = span.begin;
  record.crossfade_loss = 2 * overlap;
  const int rate = w.sample_rate;
  out.label = {word, to_seconds(static_cast<long long>(span.begin - overlap), rate),
               to_seconds(static_cast<long long>(span.end) + record.net(), rate), record.dtype};
  out.record = std::move(record);
  return out;
}

}  // namespace detail

/// Minimum word length for a sound repetition: the smallest fraction must
/// still yield min_sound_ms.
inline double min_sound_repetition_word_s(const SynthesisConfig& cfg) {
  return cfg.min_sound_ms / cfg.sound_fraction.lo / 1000.0;
}

/// Repeats the initial fraction of `word` 1-3 times before it, each copy
/// followed by a pause.
inline Injection inject_sound_repetition(const audio::Waveform& w, const WordTimestamp& word, const SynthesisConfig& cfg,
                                         Rng& rng) {
  const auto span = detail::word_span(w, word);
  if (static_cast<double>(span.size()) + 0.5 < min_sound_repetition_word_s(cfg) * w.sample_rate)
    throw std::invalid_argument("inject_sound_repetition: word '" + word.word + "' too short for a sound fragment");
  const auto copies = detail::draw_count(cfg.sound_rep_count, rng);
  const double fraction = rng.uniform(cfg.sound_fraction.lo, cfg.sound_fraction.hi);
  auto frag_len = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(span.size())));
  frag_len = std::clamp(frag_len, audio::ms_to_samples(cfg.min_sound_ms, w.sample_rate), span.size());
  const auto fragment = w.slice(span.begin, span.begin + frag_len);

  InsertionRecord record;
  record.dtype = DisfluencyType::S;
  const auto material = detail::repeated_material(fragment, copies, cfg, rng, record);
  return detail::insert_repetition(w, span, material, std::move(record), word.word, cfg);
}

/// Repeats the whole word 1-2 times before it.
inline Injection inject_word_repetition(const audio::Waveform& w, const WordTimestamp& word, const SynthesisConfig& cfg,
                                        Rng& rng) {
  const auto span = detail::word_span(w, word);
  if (span.size() < audio::ms_to_samples(cfg.min_sound_ms, w.sample_rate))
    throw std::invalid_argument("inject_word_repetition: word '" + word.word + "' too short");
  const auto copies = detail::draw_count(cfg.word_rep_count, rng);
  InsertionRecord record;
  record.dtype = DisfluencyType::W;
  const auto material = detail::repeated_material(w.slice(span.begin, span.end), copies, cfg, rng, record);
  return detail::insert_repetition(w, span, material, std::move(record), word.word, cfg);
}

/// Inserts one copy of a 2-3 word phrase (with its internal gaps) before it.
inline Injection inject_phrase_repetition(const audio::Waveform& w, const std::vector<WordTimestamp>& words,
                                          const SynthesisConfig& cfg, Rng& rng) {
  if (words.size() < 2) throw std::invalid_argument("inject_phrase_repetition: fewer than 2 words available");
  if (words.size() > 3) throw std::invalid_argument("inject_phrase_repetition: phrase longer than 3 words");
  const auto first = detail::word_span(w, words.front());
  const auto last = detail::word_span(w, words.back());
  if (last.end <= first.begin) throw std::invalid_argument("inject_phrase_repetition: words out of order");
  const detail::SampleSpan span{first.begin, last.end};
  std::string text;
  for (const auto& wt : words) text += (text.empty() ? "" : " ") + wt.word;

  InsertionRecord record;
  record.dtype = DisfluencyType::PH;
  const auto material = detail::repeated_material(w.slice(span.begin, span.end), 1, cfg, rng, record);
  return detail::insert_repetition(w, span, material, std::move(record), text, cfg);
}

/// Replaces the final prolong_fraction of `word` by its time-stretched
/// version, pitch-shifted back to the word's mean pitch.
inline Injection inject_prolongation(const audio::Waveform& w, const WordTimestamp& word, const SynthesisConfig& cfg,
                                     Rng& /*rng*/, const audio::PitchOptions& pitch = {}) {
  const auto span = detail::word_span(w, word);
  if (span.size() < audio::ms_to_samples(100.0, w.sample_rate))
    throw std::invalid_argument("inject_prolongation: word '" + word.word + "' shorter than 100 ms");
  require(cfg.prolong_factor >= 1.0, "inject_prolongation: prolong_factor must be >= 1");
  const int rate = w.sample_rate;

  Injection out;
  out.record.dtype = DisfluencyType::PR;
  out.record.shift_from = span.end;
  if (cfg.prolong_factor == 1.0) {
    out.audio = w;
    out.label = {word.word, detail::to_seconds(static_cast<long long>(span.begin), rate),
                 detail::to_seconds(static_cast<long long>(span.end), rate), DisfluencyType::PR};
    return out;
  }

  const auto tail_len =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.prolong_fraction * static_cast<double>(span.size()))));
  const auto tail = w.slice(span.end - tail_len, span.end);
  const auto stretched = audio::time_stretch(tail, cfg.prolong_factor);

  audio::Waveform corrected = stretched;
  const auto target = audio::estimate_mean_pitch(w.slice(span.begin, span.end), pitch);
  std::optional<double> dropped;
  if (stretched.size() >= audio::ms_to_samples(50.0, rate))
    dropped = audio::estimate_mean_pitch(stretched, pitch.scaled(1.0 / cfg.prolong_factor));
  if (target && dropped) {
    corrected = audio::pitch_shift(stretched, *target / *dropped);
    // Blend from the raw stretch (continuous with the word head) into the
    // corrected signal so the join has no step.
    const auto blend = std::min(audio::ms_to_samples(cfg.crossfade_ms, rate), corrected.size());
    for (std::size_t j = 0; j < blend; ++j) {
      const double a = (static_cast<double>(j) + 0.5) / static_cast<double>(blend);
      corrected.samples[j] = (1.0 - a) * stretched.samples[j] + a * corrected.samples[j];
    }
  } else {
    out.record.pitch_corrected = false;
    log_warning("inject_prolongation: pitch estimation failed for '" + word.word + "', correction skipped");
  }

  out.audio = w.slice(0, span.end - tail_len);
  out.audio.samples.insert(out.audio.samples.end(), corrected.samples.begin(), corrected.samples.end());
  out.audio.samples.insert(out.audio.samples.end(), w.samples.begin() + static_cast<std::ptrdiff_t>(span.end),
                           w.samples.end());
  out.record.pieces = {corrected.size()};
  out.record.removed = tail_len;
  out.label = {word.word, detail::to_seconds(static_cast<long long>(span.begin), rate),
               detail::to_seconds(static_cast<long long>(span.end) + out.record.net(), rate), DisfluencyType::PR};
  return out;
}

/// Inserts a random filler from `pool` in the gap between `before` and
/// `after`, pitch-normalized to the surrounding speech and followed by a
/// pause. The label covers the filler itself.
inline Injection inject_interjection(const audio::Waveform& w, const WordTimestamp& before, const WordTimestamp& after,
                                     const std::vector<Filler>& pool, const SynthesisConfig& cfg, Rng& rng,
                                     const audio::PitchOptions& pitch = {}) {
  if (pool.empty()) throw std::invalid_argument("inject_interjection: empty filler pool");
  const auto a = detail::word_span(w, before);
  const auto b = detail::word_span(w, after);
  if (b.begin < a.end) throw std::invalid_argument("inject_interjection: no word boundary between the two words");
  const int rate = w.sample_rate;

  const Filler& filler = pool[rng.index(pool.size())];
  require(filler.audio.sample_rate == rate, "inject_interjection: filler sample rate mismatch");
  InsertionRecord record;
  record.dtype = DisfluencyType::I;

  audio::Waveform voiced = filler.audio;
  const auto context = w.slice(a.begin, b.end);
  std::optional<double> context_pitch, filler_pitch;
  if (context.size() >= audio::ms_to_samples(50.0, rate)) context_pitch = audio::estimate_mean_pitch(context, pitch);
  if (voiced.size() >= audio::ms_to_samples(50.0, rate)) filler_pitch = audio::estimate_mean_pitch(voiced, pitch);
  if (context_pitch && filler_pitch) {
    voiced = audio::pitch_shift(voiced, *context_pitch / *filler_pitch);
  } else {
    record.pitch_corrected = false;
    log_warning("inject_interjection: pitch estimation failed, filler inserted unnormalized");
  }

  const auto pause = detail::draw_pause(cfg, rate, rng);
  audio::Waveform material = voiced;
  material.samples.insert(material.samples.end(), pause, 0.0);
  record.pieces = {voiced.size(), pause};

  const std::size_t at = (a.end + b.begin) / 2;
  std::size_t overlap = 0;
  Injection out;
  out.audio = detail::insert_at(w, at, material, cfg.crossfade_ms, overlap);
  record.shift_from = at;
  record.crossfade_loss = 2 * overlap;
  const auto start = static_cast<long long>(at - overlap);
  out.label = {filler.name, detail::to_seconds(start, rate),
               detail::to_seconds(start + static_cast<long long>(voiced.size()), rate), DisfluencyType::I};
  out.record = std::move(record);
  return out;
}

}  // namespace fluentnet::synthesis
