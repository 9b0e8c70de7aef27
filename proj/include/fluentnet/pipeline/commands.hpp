#pragma once

#include <filesystem>
#include <iostream>
#include <map>
#include <set>

#include "fluentnet/audio/wav.hpp"
#include "fluentnet/eval/report.hpp"
#include "fluentnet/features/clips.hpp"
#include "fluentnet/features/dataset_io.hpp"
#include "fluentnet/model/checkpoint.hpp"
#include "fluentnet/model/model_gradcheck.hpp"
#include "fluentnet/model/train.hpp"
#include "fluentnet/nn/conv.hpp"
#include "fluentnet/pipeline/config.hpp"
#include "fluentnet/synthesis/fillers.hpp"
#include "fluentnet/synthesis/speech_fixture.hpp"
#include "fluentnet/synthesis/synthesizer.hpp"

namespace fluentnet::pipeline {

namespace fs = std::filesystem;

/// A clean source: <clean_dir>/<subject>/<stem>.wav with <stem>.csv word
/// timestamps beside it. Files directly under clean_dir use the stem as subject.
struct CleanFile {
  fs::path wav, timestamps;
  std::string subject, stem;
  std::string relpath() const { return subject + "/" + stem; }
};

inline std::vector<CleanFile> list_clean_files(const std::string& dir) {
  if (!fs::is_directory(dir)) throw DataError("clean corpus directory not found: " + dir);
  std::vector<CleanFile> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".wav") continue;
    CleanFile f;
    f.wav = e.path();
    f.timestamps = fs::path(e.path()).replace_extension(".csv");
    f.stem = e.path().stem().string();
    const auto parent = fs::relative(e.path().parent_path(), dir);
    f.subject = parent.empty() || parent == "." ? f.stem : parent.begin()->string();
    files.push_back(std::move(f));
  }
  std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) { return a.relpath() < b.relpath(); });
  return files;
}

struct ManifestRow {
  std::string path;  // relative to the corpus dir, without extension
  std::string subject;
  double duration_s = 0.0;
  std::array<int, 5> counts{};
};

inline void write_manifest(const std::vector<ManifestRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << "path,subject,duration_s,S,W,PH,I,PR\n";
  for (const auto& r : rows) {
    char dur[32];
    std::snprintf(dur, sizeof dur, "%.4f", r.duration_s);
    out << r.path << ',' << r.subject << ',' << dur;
    for (int c : r.counts) out << ',' << c;
    out << '\n';
  }
}

inline std::vector<ManifestRow> read_manifest(const std::string& corpus_dir) {
  const auto path = (fs::path(corpus_dir) / "manifest.csv").string();
  if (!fs::exists(path)) throw DataError("no corpus manifest at " + path + " (run synthesize first)");
  const auto t = csv::read_file(path);
  if (t.header != std::vector<std::string>{"path", "subject", "duration_s", "S", "W", "PH", "I", "PR"})
    throw DataError(path + ": unexpected header");
  std::vector<ManifestRow> rows;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::string where = path + " row " + std::to_string(i + 2);
    if (r.size() != 8) throw DataError(where + ": expected 8 fields");
    ManifestRow m{r[0], r[1], csv::parse_double(r[2], where), {}};
    for (std::size_t k = 0; k < 5; ++k) m.counts[k] = static_cast<int>(csv::parse_int(r[3 + k], where));
    rows.push_back(std::move(m));
  }
  return rows;
}

struct SynthesizeSummary {
  std::size_t files = 0;
  std::array<int, 5> counts{};
  std::vector<std::string> failures;
};

/// Injects disfluencies into every clean file. Files are processed in sorted
/// order by one synthesizer so quotas and the random stream span the corpus.
/// A file that fails leaves no outputs; failures are reported after the rest
/// of the corpus is written.
inline SynthesizeSummary cmd_synthesize(const PipelineConfig& cfg) {
  cfg.synthesis.validate();
  const auto files = list_clean_files(cfg.paths.clean_dir);
  std::vector<synthesis::Filler> fillers;
  if (cfg.paths.filler_dir.empty()) {
    log_warning("synthesize: no filler_dir configured, using built-in synthetic fillers");
    fillers = synthesis::placeholder_fillers();
  } else {
    fillers = synthesis::load_filler_pool(cfg.paths.filler_dir);
  }
  auto scfg = cfg.synthesis;
  scfg.seed = cfg.stage_seed("synthesis");
  synthesis::Synthesizer synth(scfg, fillers);

  const fs::path out_dir = cfg.paths.corpus();
  fs::create_directories(out_dir);
  SynthesizeSummary summary;
  std::vector<ManifestRow> manifest;
  for (const auto& f : files) {
    const auto wav_out = out_dir / (f.relpath() + ".wav");
    const auto csv_out = out_dir / (f.relpath() + ".csv");
    try {
      if (!fs::exists(f.timestamps)) throw DataError("missing timestamp file " + f.timestamps.string());
      const auto clean = audio::load_wav(f.wav.string());
      const auto result = synth.synthesize(clean, synthesis::read_timestamps_csv(f.timestamps.string()));
      fs::create_directories(wav_out.parent_path());
      if (result.insertions.empty()) fs::copy_file(f.wav, wav_out, fs::copy_options::overwrite_existing);
      else audio::save_wav(result.audio, wav_out.string());
      synthesis::write_labels_csv(result.rows(), csv_out.string());
      ManifestRow row{f.relpath(), f.subject, result.audio.duration_s(), {}};
      for (const auto& l : result.labels) ++row.counts[synthesis::stutter_index(l.dtype)];
      for (std::size_t k = 0; k < 5; ++k) summary.counts[k] += row.counts[k];
      manifest.push_back(std::move(row));
      ++summary.files;
    } catch (const std::exception& e) {
      std::error_code ec;
      fs::remove(wav_out, ec);
      fs::remove(csv_out, ec);
      summary.failures.push_back(f.relpath() + ": " + e.what());
      std::cerr << "synthesize: failed " << summary.failures.back() << "\n";
    }
  }
  write_manifest(manifest, (out_dir / "manifest.csv").string());
  if (!summary.failures.empty())
    throw DataError("synthesize: " + std::to_string(summary.failures.size()) + " of " + std::to_string(files.size()) + " files failed");
  return summary;
}

inline std::string dataset_stem(const PipelineConfig& cfg, DisfluencyType t) {
  return (fs::path(cfg.paths.features()) / synthesis::to_string(t)).string();
}

/// Clip containers per target type. Clips are stored unnormalized; statistics
/// are fitted on each training set at train time.
inline std::map<DisfluencyType, std::size_t> cmd_featurize(const PipelineConfig& cfg) {
  cfg.stft.validate();
  cfg.evaluation.validate();
  const auto manifest = read_manifest(cfg.paths.corpus());
  if (manifest.empty()) log_warning("featurize: corpus is empty; writing empty containers");
  fs::create_directories(cfg.paths.features());
  std::map<DisfluencyType, std::size_t> counts;
  for (auto t : cfg.evaluation.dtypes) {
    features::ClipDataset data;
    for (const auto& row : manifest) {
      const auto base = fs::path(cfg.paths.corpus()) / row.path;
      const auto labels_path = base.string() + ".csv";
      if (!fs::exists(labels_path)) throw DataError("featurize: missing labels " + labels_path);
      const auto wave = audio::load_wav(base.string() + ".wav");
      auto clips = features::extract_clips(wave, synthesis::read_labels_csv(labels_path), t, cfg.stft, row.subject, row.path);
      std::move(clips.begin(), clips.end(), std::back_inserter(data.clips));
    }
    features::write_dataset(data, dataset_stem(cfg, t));
    counts[t] = data.clips.size();
  }
  return counts;
}

inline features::ClipDataset load_dataset(const PipelineConfig& cfg, DisfluencyType t) {
  const auto stem = dataset_stem(cfg, t);
  if (!fs::exists(stem + ".bin")) throw DataError("missing dataset " + stem + ".bin (run featurize first)");
  return features::read_dataset(stem, cfg.stft);
}

/// Model config for a dataset: input shape follows the clips; the seed is per stage.
inline model::FluentNetConfig model_config_for(const PipelineConfig& cfg, const std::vector<features::Clip>& clips,
                                               const std::string& stage) {
  auto m = cfg.model;
  if (!clips.empty()) {
    m.input_frames = clips.front().spectrogram.frames;
    m.input_bins = clips.front().spectrogram.bins;
  }
  m.seed = cfg.stage_seed(stage);
  return m;
}

/// Trains one detector on the full dataset minus a stratified validation holdout.
inline model::TrainHistory cmd_train(const PipelineConfig& cfg, DisfluencyType t) {
  cfg.validate();
  const auto data = load_dataset(cfg, t);
  if (data.clips.empty()) throw DataError("train: dataset for " + synthesis::to_string(t) + " is empty");
  const auto hold = eval::holdout_split(data.clips, cfg.evaluation.val_fraction, cfg.stage_seed("holdout." + synthesis::to_string(t)));
  auto m = model::build_fluentnet<float>(model_config_for(cfg, data.clips, "train." + synthesis::to_string(t)), t);
  model::TrainOptions<float> opts;
  opts.checkpoint_dir = (fs::path(cfg.paths.models()) / synthesis::to_string(t)).string();
  opts.on_epoch = [&](const model::EpochRecord& r) {
    char line[160];
    std::snprintf(line, sizeof line, "train %s: epoch %zu train_loss %.5f val_loss %.5f train_acc %.4f val_acc %.4f",
                  synthesis::to_string(t).c_str(), r.epoch, r.train_loss, r.val_loss, r.train_acc, r.val_acc);
    log_info(line);
  };
  return model::train(m, eval::select(data.clips, hold.train), eval::select(data.clips, hold.test), opts);
}

enum class EvalMode { cross_validate, checkpoint, scores };

inline std::vector<eval::Split> splits_for(const PipelineConfig& cfg, const std::vector<features::Clip>& clips, DisfluencyType t) {
  // Too few subjects or clips is a property of the dataset, not of the invocation.
  try {
    if (cfg.evaluation.split == "loso") return eval::loso_splits(clips);
    return eval::kfold_splits(clips, cfg.evaluation.k, cfg.stage_seed("kfold." + synthesis::to_string(t)));
  } catch (const std::invalid_argument& e) {
    throw DataError(synthesis::to_string(t) + ": " + e.what());
  }
}

/// Reads dtype,clip_id,score rows.
inline std::map<DisfluencyType, std::map<std::size_t, double>> read_scores_csv(const std::string& path) {
  const auto t = csv::read_file(path);
  if (t.header != std::vector<std::string>{"dtype", "clip_id", "score"}) throw DataError(path + ": expected header dtype,clip_id,score");
  std::map<DisfluencyType, std::map<std::size_t, double>> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string where = path + " row " + std::to_string(i + 2);
    if (t.rows[i].size() != 3) throw DataError(where + ": expected 3 fields");
    out[synthesis::disfluency_from_string(t.rows[i][0])][static_cast<std::size_t>(csv::parse_int(t.rows[i][1], where))] =
        csv::parse_double(t.rows[i][2], where);
  }
  return out;
}

/// cross_validate trains a fresh detector per split and scores its test clips.
/// checkpoint scores every clip with models/<dtype>/best.ckpt as a single split.
/// scores evaluates precomputed scores over the configured splits.
inline eval::EvaluationReport cmd_evaluate(const PipelineConfig& cfg, EvalMode mode = EvalMode::cross_validate,
                                          const std::string& scores_path = "") {
  cfg.validate();
  std::map<DisfluencyType, features::ClipDataset> data;
  std::map<DisfluencyType, std::map<std::size_t, double>> given;
  if (mode == EvalMode::scores) given = read_scores_csv(scores_path);
  std::vector<eval::DetectorTask> tasks;
  for (auto t : cfg.evaluation.dtypes) data[t] = load_dataset(cfg, t);
  for (auto t : cfg.evaluation.dtypes) {
    const auto& clips = data[t].clips;
    const auto name = synthesis::to_string(t);
    if (clips.empty()) throw DataError("evaluate: dataset for " + name + " is empty");
    eval::DetectorTask task{t, &clips, {}, {}};
    if (mode == EvalMode::checkpoint) {
      eval::Split all{"all", {}, {}};
      for (std::size_t i = 0; i < clips.size(); ++i) all.test.push_back(i);
      task.splits = {all};
      const auto path = (fs::path(cfg.paths.models()) / name / "best.ckpt").string();
      if (!fs::exists(path)) throw DataError("evaluate: missing model " + path);
      auto model = std::make_shared<model::FluentNetModel<float>>(model::load_checkpoint<float>(path));
      task.score = [model](std::size_t, const std::vector<features::Clip>& test) { return model::predict(*model, test).scores; };
    } else if (mode == EvalMode::scores) {
      task.splits = splits_for(cfg, clips, t);
      if (!given.count(t)) throw DataError("evaluate: no scores for " + name + " in " + scores_path);
      const auto& table = given.at(t);
      task.score = [&table, splits = task.splits, name](std::size_t s, const std::vector<features::Clip>&) {
        std::vector<double> out;
        for (auto id : splits[s].test) {
          const auto it = table.find(id);
          if (it == table.end()) throw DataError("evaluate: no score for " + name + " clip " + std::to_string(id));
          out.push_back(it->second);
        }
        return out;
      };
    } else {
      task.splits = splits_for(cfg, clips, t);
      task.score = [&cfg, &clips, t, name, splits = task.splits](std::size_t s, const std::vector<features::Clip>& test) {
        const auto train_clips = eval::select(clips, splits[s].train);
        auto m = model::build_fluentnet<float>(model_config_for(cfg, clips, "evaluate." + name + "." + splits[s].name), t);
        try {
          model::train(m, train_clips, {});
        } catch (const DataError& e) {
          throw DataError("evaluate " + name + ", split " + splits[s].name + ": " + e.what());
        }
        log_info("evaluate " + name + ": trained split " + splits[s].name);
        return model::predict(m, test, cfg.evaluation.threshold).scores;
      };
    }
    tasks.push_back(std::move(task));
  }
  const auto report = eval::ensemble_evaluate(std::move(tasks), cfg.evaluation.threshold);
  eval::write_report(report, cfg.paths.report());
  return report;
}

struct GradcheckSummary {
  std::vector<nn::GradcheckReport> reports;
  bool passed = true;
};

/// Runs every op case and the full model over the given seeds.
inline GradcheckSummary cmd_gradcheck(std::size_t seeds, bool inject_conv_fault, std::ostream& out) {
  nn::conv_weight_grad_fault() = inject_conv_fault;
  GradcheckSummary summary;
  const auto cases = model::all_gradcheck_cases();
  char line[200];
  std::snprintf(line, sizeof line, "%-22s %14s %10s %8s %6s %s", "op", "max_rel_error", "tolerance", "checked", "kinks", "result");
  out << line << "\n";
  for (const auto& c : cases) {
    nn::GradcheckReport worst;
    worst.name = c.name;
    worst.tolerance = c.tolerance;
    worst.passed = true;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
      const auto r = c.run(seed);
      summary.reports.push_back(r);
      worst.max_rel_error = std::max(worst.max_rel_error, r.max_rel_error);
      worst.checked += r.checked;
      worst.skipped_kinks += r.skipped_kinks;
      worst.passed = worst.passed && r.passed;
    }
    summary.passed = summary.passed && worst.passed;
    std::snprintf(line, sizeof line, "%-22s %14.3e %10.1e %8zu %6zu %s", c.name.c_str(), worst.max_rel_error, c.tolerance,
                  worst.checked, worst.skipped_kinks, worst.passed ? "PASS" : "FAIL");
    out << line << "\n";
  }
  nn::conv_weight_grad_fault() = false;
  return summary;
}

/// Corpus and dataset counts, printed as key,value lines.
inline void cmd_stats(const PipelineConfig& cfg, std::ostream& out) {
  const auto manifest = read_manifest(cfg.paths.corpus());
  double duration = 0;
  std::array<int, 5> counts{};
  std::set<std::string> subjects;
  for (const auto& r : manifest) {
    duration += r.duration_s;
    subjects.insert(r.subject);
    for (std::size_t k = 0; k < 5; ++k) counts[k] += r.counts[k];
  }
  out << "files," << manifest.size() << "\nsubjects," << subjects.size() << "\nduration_s," << duration << "\n";
  for (std::size_t k = 0; k < 5; ++k) out << "labels_" << synthesis::to_string(synthesis::kStutterTypes[k]) << ',' << counts[k] << "\n";
  for (auto t : cfg.evaluation.dtypes) {
    const auto stem = dataset_stem(cfg, t);
    if (!fs::exists(stem + ".csv")) continue;
    const auto idx = csv::read_file(stem + ".csv");
    std::size_t pos = 0;
    for (const auto& row : idx.rows) pos += row.size() > 3 && row[3] == "1";
    out << "clips_" << synthesis::to_string(t) << ',' << idx.rows.size() << "\npositives_" << synthesis::to_string(t) << ',' << pos << "\n";
  }
}

/// Synthetic clean corpus: harmonic-vowel speech per speaker with word
/// timestamps, plus a filler pool directory.
inline std::size_t cmd_make_fixture(const std::string& dir, std::size_t subjects, std::size_t files_per_subject, double duration_s,
                                    std::uint64_t seed) {
  require(subjects >= 1 && files_per_subject >= 1 && duration_s > 0.5, "make-fixture: need subjects, files and duration > 0.5 s");
  Rng rng(Rng::derive_seed(seed, "fixture"));
  std::size_t n = 0;
  for (std::size_t s = 0; s < subjects; ++s) {
    const auto spk = synthesis::make_speaker(s, rng);
    char subject[32];
    std::snprintf(subject, sizeof subject, "spk%02zu", s);
    const auto sub = fs::path(dir) / "clean" / subject;
    fs::create_directories(sub);
    for (std::size_t f = 0; f < files_per_subject; ++f, ++n) {
      const auto u = synthesis::synthesize_utterance(duration_s, spk, rng);
      char stem[32];
      std::snprintf(stem, sizeof stem, "utt%03zu", f);
      audio::save_wav(u.audio, (sub / (std::string(stem) + ".wav")).string());
      synthesis::write_timestamps_csv(u.words, (sub / (std::string(stem) + ".csv")).string());
    }
  }
  synthesis::save_filler_pool(synthesis::placeholder_fillers(), (fs::path(dir) / "fillers").string());
  return n;
}

}  // namespace fluentnet::pipeline
