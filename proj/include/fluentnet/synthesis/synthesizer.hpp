#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "fluentnet/synthesis/csv_io.hpp"
#include "fluentnet/synthesis/injectors.hpp"

namespace fluentnet::synthesis {

struct WindowStats {
  std::size_t windows = 0;
  std::size_t inserted = 0;
  /// Windows the policy chose to leave clean.
  std::size_t clean_by_policy = 0;
  /// Windows selected for insertion that had no eligible target.
  std::size_t no_target = 0;
  std::array<std::size_t, 5> per_type{};
};

struct SynthesisResult {
  audio::Waveform audio;
  std::vector<DisfluencyLabel> labels;
  /// Every source word with its timestamps shifted into output time.
  std::vector<WordTimestamp> words;
  /// Source word indices covered by each label (empty for interjections).
  std::vector<std::vector<std::size_t>> label_words;
  std::vector<InsertionRecord> insertions;
  WindowStats stats;

  /// CLEAN rows for uncovered words plus one row per label, sorted by start.
  std::vector<LabelRow> rows() const {
    std::vector<bool> covered(words.size(), false);
    for (const auto& ids : label_words)
      for (auto id : ids) covered[id] = true;
    std::vector<LabelRow> out;
    for (std::size_t i = 0; i < words.size(); ++i)
      if (!covered[i]) out.push_back({words[i].word, words[i].start_s, words[i].end_s, DisfluencyType::CLEAN});
    out.insert(out.end(), labels.begin(), labels.end());
    std::stable_sort(out.begin(), out.end(), [](const LabelRow& a, const LabelRow& b) { return a.start_s < b.start_s; });
    return out;
  }
};

/// Applies the per-window insertion policy to successive files. Quotas, when
/// configured, are shared by every file this instance processes, and all
/// randomness comes from one generator seeded by cfg.seed.
///
/// Per window the generator is consumed in this order: insertion draw, type
/// draw, target draw, then the injector's own draws.
class Synthesizer {
 public:
  explicit Synthesizer(SynthesisConfig cfg, std::vector<Filler> fillers = {})
      : cfg_(std::move(cfg)), fillers_(std::move(fillers)), rng_(cfg_.seed) {
    cfg_.validate();
    if (cfg_.quotas) remaining_ = *cfg_.quotas;
  }

  const std::optional<std::array<int, 5>>& remaining_quotas() const { return remaining_; }
  const SynthesisConfig& config() const { return cfg_; }

  SynthesisResult synthesize(const audio::Waveform& clean, std::vector<WordTimestamp> timestamps) {
    timestamps = validate_timestamps(std::move(timestamps), "synthesize");
    const int rate = clean.sample_rate;
    const double duration = clean.duration_s();
    for (const auto& w : timestamps)
      if (w.end_s > duration + 1.0 / rate)
        throw std::invalid_argument("synthesize: word '" + w.word + "' ends after the audio");

    SynthesisResult result;
    result.audio = clean;
    std::vector<Span> word_pos;
    for (const auto& w : timestamps)
      word_pos.push_back({audio::seconds_to_samples(w.start_s, rate),
                          std::min(audio::seconds_to_samples(w.end_s, rate), clean.size())});
    std::vector<Span> label_pos;

    const auto n_windows = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(duration / cfg_.window_s - 1e-9)));
    std::size_t next_word = 0;
    for (std::size_t win = 0; win < n_windows; ++win) {
      ++result.stats.windows;
      const double lo = static_cast<double>(win) * cfg_.window_s;
      const double hi = lo + cfg_.window_s;
      const bool insert = rng_.uniform() < cfg_.insert_prob;
      if (!insert || quotas_exhausted()) {
        ++result.stats.clean_by_policy;
        continue;
      }

      std::vector<std::size_t> in_window;
      for (std::size_t j = next_word; j < timestamps.size(); ++j)
        if (timestamps[j].start_s >= lo && timestamps[j].start_s < hi) in_window.push_back(j);

      std::array<std::vector<std::size_t>, 5> targets;
      for (std::size_t t = 0; t < 5; ++t)
        for (auto j : in_window)
          if (eligible(kStutterTypes[t], j, word_pos, rate)) targets[t].push_back(j);

      const auto type_slot = pick_type(targets);
      if (!type_slot) {
        ++result.stats.no_target;
        continue;
      }
      const auto dtype = kStutterTypes[*type_slot];
      const auto& candidates = targets[*type_slot];
      const std::size_t j = candidates[rng_.index(candidates.size())];

      auto current_word = [&](std::size_t k) {
        return WordTimestamp{timestamps[k].word, static_cast<double>(word_pos[k].begin) / rate,
                             static_cast<double>(word_pos[k].end) / rate};
      };

      Injection inj;
      std::vector<std::size_t> covered;
      switch (dtype) {
        case DisfluencyType::S:
          inj = inject_sound_repetition(result.audio, current_word(j), cfg_, rng_);
          covered = {j};
          break;
        case DisfluencyType::W:
          inj = inject_word_repetition(result.audio, current_word(j), cfg_, rng_);
          covered = {j};
          break;
        case DisfluencyType::PH: {
          const auto wanted = detail::draw_count(cfg_.phrase_words, rng_);
          const auto n = std::min(wanted, timestamps.size() - j);
          std::vector<WordTimestamp> phrase;
          for (std::size_t k = j; k < j + n; ++k) {
            phrase.push_back(current_word(k));
            covered.push_back(k);
          }
          inj = inject_phrase_repetition(result.audio, phrase, cfg_, rng_);
          break;
        }
        case DisfluencyType::I:
          inj = inject_interjection(result.audio, current_word(j), current_word(j + 1), fillers_, cfg_, rng_);
          break;
        case DisfluencyType::PR:
          inj = inject_prolongation(result.audio, current_word(j), cfg_, rng_);
          covered = {j};
          break;
        case DisfluencyType::CLEAN: break;
      }

      const auto& rec = inj.record;
      const long long net = rec.net();
      auto shift = [&](Span& s) {
        if (s.begin >= rec.shift_from) {
          s.begin = static_cast<std::size_t>(static_cast<long long>(s.begin) + net);
          s.end = static_cast<std::size_t>(static_cast<long long>(s.end) + net);
        }
      };
      for (auto& s : word_pos) shift(s);
      for (auto& s : label_pos) shift(s);
      if (dtype == DisfluencyType::PR)
        word_pos[j].end = static_cast<std::size_t>(static_cast<long long>(word_pos[j].end) + net);

      label_pos.push_back({audio::seconds_to_samples(inj.label.start_s, rate), audio::seconds_to_samples(inj.label.end_s, rate)});
      result.labels.push_back(inj.label);
      result.label_words.push_back(covered);
      result.insertions.push_back(inj.record);
      result.audio = std::move(inj.audio);
      ++result.stats.inserted;
      ++result.stats.per_type[*type_slot];
      if (remaining_) --(*remaining_)[*type_slot];
      next_word = covered.empty() ? j + 1 : covered.back() + 1;
    }

    for (std::size_t k = 0; k < timestamps.size(); ++k)
      result.words.push_back({timestamps[k].word, static_cast<double>(word_pos[k].begin) / rate,
                              static_cast<double>(word_pos[k].end) / rate});
    for (std::size_t l = 0; l < result.labels.size(); ++l) {
      result.labels[l].start_s = static_cast<double>(label_pos[l].begin) / rate;
      result.labels[l].end_s = static_cast<double>(label_pos[l].end) / rate;
    }
    return result;
  }

 private:
  struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;
  };

  bool quotas_exhausted() const {
    if (!remaining_) return false;
    for (int q : *remaining_)
      if (q > 0) return false;
    return true;
  }

  bool eligible(DisfluencyType t, std::size_t j, const std::vector<Span>& pos, int rate) const {
    const std::size_t len = pos[j].end - pos[j].begin;
    const bool has_next = j + 1 < pos.size();
    switch (t) {
      case DisfluencyType::S:
        return static_cast<double>(len) + 0.5 >= min_sound_repetition_word_s(cfg_) * rate;
      case DisfluencyType::W: return len >= audio::ms_to_samples(cfg_.min_sound_ms, rate);
      case DisfluencyType::PH: return has_next;
      case DisfluencyType::I: return has_next && !fillers_.empty();
      case DisfluencyType::PR: return len >= audio::ms_to_samples(100.0, rate);
      case DisfluencyType::CLEAN: return false;
    }
    return false;
  }

  std::optional<std::size_t> weighted_pick(const std::array<double, 5>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) return std::nullopt;
    double u = rng_.uniform() * total;
    for (std::size_t t = 0; t < 5; ++t) {
      if (weights[t] <= 0.0) continue;
      if (u < weights[t]) return t;
      u -= weights[t];
    }
    for (std::size_t t = 5; t-- > 0;)
      if (weights[t] > 0.0) return t;
    return std::nullopt;
  }

  std::optional<std::size_t> pick_type(const std::array<std::vector<std::size_t>, 5>& targets) {
    if (!remaining_) {
      const auto t = weighted_pick(cfg_.type_weights);
      if (!t || targets[*t].empty()) return std::nullopt;
      return t;
    }
    std::array<double, 5> weights{};
    for (std::size_t t = 0; t < 5; ++t)
      weights[t] = ((*remaining_)[t] > 0 && !targets[t].empty()) ? static_cast<double>((*remaining_)[t]) : 0.0;
    return weighted_pick(weights);
  }

  SynthesisConfig cfg_;
  std::vector<Filler> fillers_;
  Rng rng_;
  std::optional<std::array<int, 5>> remaining_;
};

inline SynthesisResult synthesize_file(const audio::Waveform& clean, const std::vector<WordTimestamp>& timestamps,
                                       const SynthesisConfig& cfg, const std::vector<Filler>& fillers = {}) {
  return Synthesizer(cfg, fillers).synthesize(clean, timestamps);
}

}  // namespace fluentnet::synthesis
