#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fluentnet/pipeline/commands.hpp"

using namespace fluentnet;
using namespace fluentnet::pipeline;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

// "S=2,W=1" or five comma-separated counts in S,W,PH,I,PR order.
std::array<int, 5> parse_quota(const std::string& text) {
  std::array<int, 5> q{};
  const auto fields = csv::split_line(text);
  const bool named = text.find('=') != std::string::npos;
  if (!named && fields.size() != 5) throw std::invalid_argument("--quota: expected five counts (S,W,PH,I,PR) or TYPE=N pairs");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    std::string type, count = fields[i];
    if (named) {
      const auto eq = fields[i].find('=');
      if (eq == std::string::npos) throw std::invalid_argument("--quota: expected TYPE=N, got " + fields[i]);
      type = fields[i].substr(0, eq);
      count = fields[i].substr(eq + 1);
    }
    int value = 0;
    try {
      std::size_t used = 0;
      value = std::stoi(count, &used);
      if (used != count.size() || value < 0) throw std::invalid_argument("bad");
    } catch (const std::exception&) {
      throw std::invalid_argument("--quota: bad count '" + count + "'");
    }
    std::size_t slot = i;
    if (named) {
      try {
        slot = synthesis::stutter_index(synthesis::disfluency_from_string(type));
      } catch (const std::exception&) {
        throw std::invalid_argument("--quota: unknown type '" + type + "'");
      }
    }
    q[slot] = value;
  }
  return q;
}

void print_report(const eval::EvaluationReport& r) {
  std::printf("%-6s %10s %10s %7s %8s\n", "dtype", "MR(%)", "Acc(%)", "splits", "AUC");
  for (const auto& d : r.detectors)
    std::printf("%-6s %10.2f %10.2f %7zu %8.4f\n", synthesis::to_string(d.dtype).c_str(), d.mean_miss_rate, d.mean_accuracy, d.splits,
                d.roc.points.empty() ? std::nan("") : d.roc.auc);
  std::printf("%-6s %10.2f %10.2f\n", "avg", r.average_miss_rate, r.average_accuracy);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stuttered-speech synthesis and FluentNet disfluency detection"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_help_all_flag("--help-all", "Show help for every command");

  std::string config_path, out_dir, dtype_name;
  std::optional<std::uint64_t> seed;
  std::optional<double> width_scale;
  bool verbose = false;
  app.add_option("--config", config_path, "JSON pipeline configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Global seed (overrides the config)");
  app.add_option("--out-dir", out_dir, "Output root for corpus/, features/, models/, report/");
  app.add_option("--width-scale", width_scale, "Model width factor (overrides the config)");
  app.add_option("--dtype", dtype_name, "Restrict to one disfluency type (S, W, PH, I, PR)");
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

  auto* synth = app.add_subcommand("synthesize", "Inject labelled disfluencies into a clean corpus");
  std::string clean_dir, filler_dir, quota;
  std::optional<double> prob;
  synth->add_option("--clean-dir", clean_dir, "Clean WAVs with word timestamp CSVs (overrides the config)");
  synth->add_option("--filler-dir", filler_dir, "Filler pool directory of WAVs (overrides the config)");
  auto* prob_opt = synth->add_option("--prob", prob, "Per-window insertion probability");
  synth->add_option("--quota", quota, "Corpus-wide counts: S=2,W=2,... or five counts")->excludes(prob_opt);

  auto* feat = app.add_subcommand("featurize", "Extract 4 s spectrogram clips per target type");
  auto* train = app.add_subcommand("train", "Train one detector per type (or --dtype)");
  auto* evaluate = app.add_subcommand("evaluate", "Cross-validate detectors and write report CSVs");
  std::string mode = "cv", scores_path, split;
  evaluate->add_option("--mode", mode, "cv (train per split), checkpoint (score with trained models), scores (precomputed)")
      ->check(CLI::IsMember({"cv", "checkpoint", "scores"}));
  evaluate->add_option("--scores", scores_path, "CSV of dtype,clip_id,score for --mode scores");
  evaluate->add_option("--split", split, "loso or kfold (overrides the config)")->check(CLI::IsMember({"loso", "kfold"}));

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of every op and the full model");
  std::size_t grad_seeds = 3;
  bool inject = false;
  grad->add_option("--seeds", grad_seeds, "Random instances per op")->check(CLI::PositiveNumber);
  grad->add_flag("--inject-fault", inject, "Negate the conv weight gradient (the check must fail)");

  auto* stats = app.add_subcommand("stats", "Corpus and dataset statistics");

  auto* fixture = app.add_subcommand("make-fixture", "Write a synthetic clean corpus and filler pool");
  std::string fixture_dir;
  std::size_t subjects = 4, files = 3;
  double duration = 8.0;
  fixture->add_option("dir", fixture_dir, "Output directory")->required();
  fixture->add_option("--subjects", subjects, "Speakers");
  fixture->add_option("--files", files, "Files per speaker");
  fixture->add_option("--duration", duration, "Seconds per file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  set_log_level(verbose ? LogLevel::info : LogLevel::warning);

  try {
    PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.paths.out_dir = out_dir;
    if (width_scale) cfg.model.width_scale = *width_scale;
    if (!dtype_name.empty()) {
      const auto t = synthesis::disfluency_from_string(dtype_name);
      if (t == DisfluencyType::CLEAN) throw std::invalid_argument("--dtype cannot be CLEAN");
      cfg.evaluation.dtypes = {t};
    }
    if (!clean_dir.empty()) cfg.paths.clean_dir = clean_dir;
    if (!filler_dir.empty()) cfg.paths.filler_dir = filler_dir;
    if (prob) {
      cfg.synthesis.insert_prob = *prob;
      cfg.synthesis.quotas.reset();
    }
    if (!quota.empty()) cfg.synthesis.quotas = parse_quota(quota);
    if (!split.empty()) cfg.evaluation.split = split;
    cfg.validate();

    if (*synth) {
      const auto s = cmd_synthesize(cfg);
      std::printf("synthesized %zu files into %s:", s.files, cfg.paths.corpus().c_str());
      for (std::size_t k = 0; k < 5; ++k) std::printf(" %s=%d", synthesis::to_string(synthesis::kStutterTypes[k]).c_str(), s.counts[k]);
      std::printf("\n");
    } else if (*feat) {
      for (const auto& [t, n] : cmd_featurize(cfg)) std::printf("%s: %zu clips\n", synthesis::to_string(t).c_str(), n);
    } else if (*train) {
      for (auto t : cfg.evaluation.dtypes) {
        const auto h = cmd_train(cfg, t);
        std::printf("%s: %zu epochs, best epoch %zu (loss %.5f)\n", synthesis::to_string(t).c_str(), h.epochs.size(), h.best_epoch,
                    h.best_val_loss);
      }
    } else if (*evaluate) {
      if (mode == "scores" && scores_path.empty()) throw std::invalid_argument("--mode scores requires --scores");
      const auto m = mode == "cv" ? EvalMode::cross_validate : mode == "checkpoint" ? EvalMode::checkpoint : EvalMode::scores;
      print_report(cmd_evaluate(cfg, m, scores_path));
      std::printf("report written to %s\n", cfg.paths.report().c_str());
    } else if (*grad) {
      if (!cmd_gradcheck(grad_seeds, inject, std::cout).passed) {
        std::cerr << "gradcheck: FAILED\n";
        return kNumerical;
      }
      std::cout << "gradcheck: all passed\n";
    } else if (*stats) {
      cmd_stats(cfg, std::cout);
    } else if (*fixture) {
      const auto n = cmd_make_fixture(fixture_dir, subjects, files, duration, cfg.seed);
      std::printf("wrote %zu clean files and a filler pool under %s\n", n, fixture_dir.c_str());
    }
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kOk;
}
