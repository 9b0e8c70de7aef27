#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fluentnet/core/error.hpp"

namespace fluentnet::synthesis {

/// Label alphabet. Revisions and blocks are recognised disfluencies but are
/// never synthesized, so they have no value here.
enum class DisfluencyType { CLEAN, S, W, PH, I, PR };

inline constexpr std::array<DisfluencyType, 5> kStutterTypes = {DisfluencyType::S, DisfluencyType::W, DisfluencyType::PH,
                                                                DisfluencyType::I, DisfluencyType::PR};

inline std::string to_string(DisfluencyType t) {
  switch (t) {
    case DisfluencyType::CLEAN: return "CLEAN";
    case DisfluencyType::S: return "S";
    case DisfluencyType::W: return "W";
    case DisfluencyType::PH: return "PH";
    case DisfluencyType::I: return "I";
    case DisfluencyType::PR: return "PR";
  }
  return "CLEAN";
}

inline DisfluencyType disfluency_from_string(const std::string& s) {
  if (s == "CLEAN") return DisfluencyType::CLEAN;
  if (s == "S") return DisfluencyType::S;
  if (s == "W") return DisfluencyType::W;
  if (s == "PH") return DisfluencyType::PH;
  if (s == "I") return DisfluencyType::I;
  if (s == "PR") return DisfluencyType::PR;
  throw DataError("unknown disfluency type: " + s);
}

/// Index of a stutter type within kStutterTypes.
inline std::size_t stutter_index(DisfluencyType t) {
  for (std::size_t i = 0; i < kStutterTypes.size(); ++i)
    if (kStutterTypes[i] == t) return i;
  throw std::invalid_argument("CLEAN has no stutter index");
}

struct WordTimestamp {
  std::string word;
  double start_s = 0.0;
  double end_s = 0.0;

  double duration_s() const { return end_s - start_s; }
  bool operator==(const WordTimestamp&) const = default;
};

struct DisfluencyLabel {
  std::string word;
  double start_s = 0.0;
  double end_s = 0.0;
  DisfluencyType dtype = DisfluencyType::CLEAN;

  bool operator==(const DisfluencyLabel&) const = default;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool valid() const { return lo <= hi; }
};

struct SynthesisConfig {
  std::uint64_t seed = 0;
  double window_s = 4.0;
  /// 15000 disfluencies over 18000 four-second windows of a 20 h corpus.
  double insert_prob = 15000.0 / 18000.0;
  Range pause_ms{100.0, 350.0};
  Range sound_rep_count{1.0, 3.0};
  Range word_rep_count{1.0, 2.0};
  Range phrase_words{2.0, 3.0};
  double prolong_fraction = 0.2;
  double prolong_factor = 5.0;
  Range sound_fraction{0.15, 0.35};
  double min_sound_ms = 60.0;
  double crossfade_ms = 10.0;
  /// Relative weights over kStutterTypes in probability mode.
  std::array<double, 5> type_weights{1.0, 1.0, 1.0, 1.0, 1.0};
  /// When set, per-type counts to insert (corpus-wide) instead of weights.
  std::optional<std::array<int, 5>> quotas;

  void validate() const {
    require(window_s > 0.0, "SynthesisConfig: window_s must be positive");
    require(insert_prob >= 0.0 && insert_prob <= 1.0, "SynthesisConfig: insert_prob must be in [0, 1]");
    require(pause_ms.valid() && pause_ms.lo >= 0.0, "SynthesisConfig: invalid pause range");
    require(sound_rep_count.valid() && sound_rep_count.lo >= 1.0, "SynthesisConfig: invalid sound repetition count");
    require(word_rep_count.valid() && word_rep_count.lo >= 1.0, "SynthesisConfig: invalid word repetition count");
    require(phrase_words.valid() && phrase_words.lo >= 2.0, "SynthesisConfig: invalid phrase word range");
    require(prolong_fraction > 0.0 && prolong_fraction < 1.0, "SynthesisConfig: prolong_fraction must be in (0, 1)");
    require(prolong_factor > 1.0, "SynthesisConfig: prolong_factor must exceed 1");
    require(sound_fraction.valid() && sound_fraction.lo > 0.0 && sound_fraction.hi <= 1.0,
            "SynthesisConfig: invalid sound fraction range");
    require(min_sound_ms > 0.0 && crossfade_ms >= 0.0, "SynthesisConfig: invalid durations");
    double total = 0.0;
    for (double w : type_weights) {
      require(w >= 0.0, "SynthesisConfig: negative type weight");
      total += w;
    }
    require(total > 0.0, "SynthesisConfig: type weights sum to zero");
    if (quotas)
      for (int q : *quotas) require(q >= 0, "SynthesisConfig: negative quota");
  }
};

/// What one injection did to the timeline, in samples of the audio it was
/// applied to. Replaying these against the clean source predicts the output
/// length: len_out = len_in + sum(net()).
struct InsertionRecord {
  DisfluencyType dtype = DisfluencyType::CLEAN;
  /// Timestamps at or after this sample move by net().
  std::size_t shift_from = 0;
  /// Lengths of every inserted piece (fragments, copies, fillers, pauses,
  /// or the stretched tail).
  std::vector<std::size_t> pieces;
  /// Samples of original audio replaced (the prolonged tail).
  std::size_t removed = 0;
  /// Samples lost to crossfades (2 * overlap per splice).
  std::size_t crossfade_loss = 0;
  /// False when pitch correction was skipped because estimation failed.
  bool pitch_corrected = true;

  std::size_t added() const {
    std::size_t total = 0;
    for (auto p : pieces) total += p;
    return total;
  }
  long long net() const {
    return static_cast<long long>(added()) - static_cast<long long>(removed) - static_cast<long long>(crossfade_loss);
  }
};

}  // namespace fluentnet::synthesis
