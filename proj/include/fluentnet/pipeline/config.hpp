#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "fluentnet/audio/stft.hpp"
#include "fluentnet/core/rng.hpp"
#include "fluentnet/model/config.hpp"
#include "fluentnet/synthesis/types.hpp"
#include "json.hpp"

namespace fluentnet::pipeline {

using synthesis::DisfluencyType;

struct EvaluationSettings {
  std::string split = "loso";  // loso | kfold
  std::size_t k = 10;
  double threshold = 0.5;
  /// Fraction of each stratum held out for validation by the train command.
  double val_fraction = 0.1;
  std::vector<DisfluencyType> dtypes{synthesis::kStutterTypes.begin(), synthesis::kStutterTypes.end()};

  void validate() const {
    require(split == "loso" || split == "kfold", "evaluation.split must be 'loso' or 'kfold'");
    require(k >= 2, "evaluation.k must be >= 2");
    require(val_fraction >= 0.0 && val_fraction < 1.0, "evaluation.val_fraction must be in [0, 1)");
    require(!dtypes.empty(), "evaluation.dtypes is empty");
    for (auto t : dtypes) require(t != DisfluencyType::CLEAN, "evaluation.dtypes cannot contain CLEAN");
  }
};

/// Empty paths are derived from out_dir (corpus/, features/, models/, report/).
/// An empty filler_dir selects the built-in synthetic fillers.
struct PipelinePaths {
  std::string clean_dir;
  std::string filler_dir;
  std::string out_dir = "fluentnet_out";
  std::string corpus_dir, features_dir, models_dir, report_dir;

  std::string corpus() const { return or_default(corpus_dir, "corpus"); }
  std::string features() const { return or_default(features_dir, "features"); }
  std::string models() const { return or_default(models_dir, "models"); }
  std::string report() const { return or_default(report_dir, "report"); }

 private:
  std::string or_default(const std::string& p, const char* sub) const {
    return p.empty() ? (std::filesystem::path(out_dir) / sub).string() : p;
  }
};

/// One seed drives everything; sub-seeds are derived per stage by label.
struct PipelineConfig {
  std::uint64_t seed = 0;
  PipelinePaths paths;
  synthesis::SynthesisConfig synthesis;
  audio::StftConfig stft;
  model::FluentNetConfig model;
  EvaluationSettings evaluation;

  std::uint64_t stage_seed(const std::string& label) const { return Rng::derive_seed(seed, label); }

  void validate() const {
    synthesis.validate();
    stft.validate();
    model.validate();
    evaluation.validate();
  }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& section) {
  if (!j.is_object()) throw std::invalid_argument("config section '" + section + "' must be an object");
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw std::invalid_argument("config: unknown key '" + key + "' in " + section);
}

template <typename V>
void get(const nlohmann::json& j, const char* key, V& field) {
  if (j.contains(key)) j.at(key).get_to(field);
}

inline void get_range(const nlohmann::json& j, const char* key, synthesis::Range& r) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2) throw std::invalid_argument(std::string("config: ") + key + " must be [lo, hi]");
  r = {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace detail

inline nlohmann::json to_json(const synthesis::SynthesisConfig& c) {
  nlohmann::json j{{"window_s", c.window_s},
                   {"insert_prob", c.insert_prob},
                   {"pause_ms", {c.pause_ms.lo, c.pause_ms.hi}},
                   {"sound_rep_count", {c.sound_rep_count.lo, c.sound_rep_count.hi}},
                   {"word_rep_count", {c.word_rep_count.lo, c.word_rep_count.hi}},
                   {"phrase_words", {c.phrase_words.lo, c.phrase_words.hi}},
                   {"prolong_fraction", c.prolong_fraction},
                   {"prolong_factor", c.prolong_factor},
                   {"sound_fraction", {c.sound_fraction.lo, c.sound_fraction.hi}},
                   {"min_sound_ms", c.min_sound_ms},
                   {"crossfade_ms", c.crossfade_ms},
                   {"type_weights", c.type_weights}};
  if (c.quotas) j["quotas"] = *c.quotas;
  return j;
}

inline void from_json(const nlohmann::json& j, synthesis::SynthesisConfig& c) {
  detail::reject_unknown(j,
                         {"window_s", "insert_prob", "pause_ms", "sound_rep_count", "word_rep_count", "phrase_words",
                          "prolong_fraction", "prolong_factor", "sound_fraction", "min_sound_ms", "crossfade_ms",
                          "type_weights", "quotas"},
                         "synthesis");
  detail::get(j, "window_s", c.window_s);
  detail::get(j, "insert_prob", c.insert_prob);
  detail::get_range(j, "pause_ms", c.pause_ms);
  detail::get_range(j, "sound_rep_count", c.sound_rep_count);
  detail::get_range(j, "word_rep_count", c.word_rep_count);
  detail::get_range(j, "phrase_words", c.phrase_words);
  detail::get(j, "prolong_fraction", c.prolong_fraction);
  detail::get(j, "prolong_factor", c.prolong_factor);
  detail::get_range(j, "sound_fraction", c.sound_fraction);
  detail::get(j, "min_sound_ms", c.min_sound_ms);
  detail::get(j, "crossfade_ms", c.crossfade_ms);
  detail::get(j, "type_weights", c.type_weights);
  if (j.contains("quotas") && !j.at("quotas").is_null()) c.quotas = j.at("quotas").get<std::array<int, 5>>();
}

inline nlohmann::json to_json(const audio::StftConfig& c) {
  return {{"window_len", c.window_len}, {"hop", c.hop}, {"fft_size", c.fft_size}, {"n_bins", c.n_bins}, {"window_fn", audio::to_string(c.window_fn)}};
}

inline void from_json(const nlohmann::json& j, audio::StftConfig& c) {
  detail::reject_unknown(j, {"window_len", "hop", "fft_size", "n_bins", "window_fn"}, "stft");
  detail::get(j, "window_len", c.window_len);
  detail::get(j, "hop", c.hop);
  detail::get(j, "fft_size", c.fft_size);
  detail::get(j, "n_bins", c.n_bins);
  if (j.contains("window_fn")) c.window_fn = audio::window_fn_from_string(j.at("window_fn").get<std::string>());
}

inline nlohmann::json to_json(const EvaluationSettings& e) {
  std::vector<std::string> types;
  for (auto t : e.dtypes) types.push_back(synthesis::to_string(t));
  return {{"split", e.split}, {"k", e.k}, {"threshold", e.threshold}, {"val_fraction", e.val_fraction}, {"dtypes", types}};
}

inline void from_json(const nlohmann::json& j, EvaluationSettings& e) {
  detail::reject_unknown(j, {"split", "k", "threshold", "val_fraction", "dtypes"}, "evaluation");
  detail::get(j, "split", e.split);
  detail::get(j, "k", e.k);
  detail::get(j, "threshold", e.threshold);
  detail::get(j, "val_fraction", e.val_fraction);
  if (j.contains("dtypes")) {
    e.dtypes.clear();
    for (const auto& s : j.at("dtypes")) e.dtypes.push_back(synthesis::disfluency_from_string(s.get<std::string>()));
  }
}

inline nlohmann::json to_json(const PipelinePaths& p) {
  return {{"clean_dir", p.clean_dir},       {"filler_dir", p.filler_dir},     {"out_dir", p.out_dir},
          {"corpus_dir", p.corpus_dir},     {"features_dir", p.features_dir}, {"models_dir", p.models_dir},
          {"report_dir", p.report_dir}};
}

inline void from_json(const nlohmann::json& j, PipelinePaths& p) {
  detail::reject_unknown(j, {"clean_dir", "filler_dir", "out_dir", "corpus_dir", "features_dir", "models_dir", "report_dir"}, "paths");
  detail::get(j, "clean_dir", p.clean_dir);
  detail::get(j, "filler_dir", p.filler_dir);
  detail::get(j, "out_dir", p.out_dir);
  detail::get(j, "corpus_dir", p.corpus_dir);
  detail::get(j, "features_dir", p.features_dir);
  detail::get(j, "models_dir", p.models_dir);
  detail::get(j, "report_dir", p.report_dir);
}

/// The model section's own "seed" key is ignored; the global seed is used.
inline nlohmann::json to_json(const PipelineConfig& c) {
  auto model = nlohmann::json(c.model);
  model.erase("seed");
  return {{"seed", c.seed},
          {"paths", to_json(c.paths)},
          {"synthesis", to_json(c.synthesis)},
          {"stft", to_json(c.stft)},
          {"model", model},
          {"evaluation", to_json(c.evaluation)}};
}

inline PipelineConfig config_from_json(const nlohmann::json& j) {
  detail::reject_unknown(j, {"seed", "paths", "synthesis", "stft", "model", "evaluation"}, "top level");
  PipelineConfig c;
  try {
    detail::get(j, "seed", c.seed);
    if (j.contains("paths")) from_json(j.at("paths"), c.paths);
    if (j.contains("synthesis")) from_json(j.at("synthesis"), c.synthesis);
    if (j.contains("stft")) from_json(j.at("stft"), c.stft);
    if (j.contains("model")) c.model = j.at("model").get<model::FluentNetConfig>();
    if (j.contains("evaluation")) from_json(j.at("evaluation"), c.evaluation);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  } catch (const DataError& e) {
    throw std::invalid_argument(e.what());
  }
  return c;
}

inline PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  try {
    return config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

}  // namespace fluentnet::pipeline
