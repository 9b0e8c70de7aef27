#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>

#include "fluentnet/core/parallel.hpp"
#include "fluentnet/eval/metrics.hpp"
#include "fluentnet/eval/splits.hpp"

namespace fluentnet::eval {

using synthesis::DisfluencyType;

/// Scores the test clips of split `split_index`; stands in for "the model trained on that split".
using SplitScorer = std::function<std::vector<double>(std::size_t split_index, const std::vector<features::Clip>& test)>;

struct DetectorTask {
  DisfluencyType dtype = DisfluencyType::S;
  const std::vector<features::Clip>* clips = nullptr;
  std::vector<Split> splits;
  SplitScorer score;
};

struct SplitResult {
  DisfluencyType dtype;
  std::string split;
  ConfusionCounts counts;
  double miss_rate;  // percent; NaN when the split holds no positives
  double accuracy;   // percent
};

struct DetectorSummary {
  DisfluencyType dtype;
  double mean_miss_rate;  // unweighted over splits with positives
  double mean_accuracy;   // unweighted over splits
  std::size_t splits = 0;
  ConfusionCounts pooled;
  RocCurve roc;  // pooled test scores over all splits; empty when single-class
};

struct EvaluationReport {
  std::vector<SplitResult> splits;
  std::vector<DetectorSummary> detectors;  // fixed dtype order
  double average_miss_rate = 0.0, average_accuracy = 0.0;
};

/// Runs every detector on every split's test set and assembles MR/Acc per
/// split, per-detector means, and the cross-detector average.
inline EvaluationReport ensemble_evaluate(std::vector<DetectorTask> tasks, double threshold = 0.5) {
  std::sort(tasks.begin(), tasks.end(), [](const auto& a, const auto& b) { return a.dtype < b.dtype; });
  EvaluationReport report;
  for (const auto& task : tasks) {
    if (!task.score) throw DataError("ensemble_evaluate: missing model for " + synthesis::to_string(task.dtype));
    if (task.clips == nullptr || task.splits.empty()) throw DataError("ensemble_evaluate: no splits for " + synthesis::to_string(task.dtype));
    const auto& clips = *task.clips;
    std::vector<std::vector<double>> scores(task.splits.size());
    parallel_for(task.splits.size(), [&](std::size_t s) {
      scores[s] = task.score(s, select(clips, task.splits[s].test));
      if (scores[s].size() != task.splits[s].test.size()) throw DataError("ensemble_evaluate: scorer returned wrong count");
    });

    DetectorSummary summary{task.dtype, 0.0, 0.0, task.splits.size(), {}, {}};
    std::vector<double> pooled_scores;
    std::vector<int> pooled_labels;
    double mr_sum = 0, acc_sum = 0;
    std::size_t mr_n = 0;
    for (std::size_t s = 0; s < task.splits.size(); ++s) {
      std::vector<int> truth;
      for (auto i : task.splits[s].test) truth.push_back(clips[i].label);
      const auto counts = confusion_at(scores[s], truth, threshold);
      SplitResult r{task.dtype, task.splits[s].name, counts, std::numeric_limits<double>::quiet_NaN(), 100.0 * accuracy(counts)};
      if (counts.positives() > 0) {
        r.miss_rate = 100.0 * miss_rate(counts);
        mr_sum += r.miss_rate;
        ++mr_n;
      }
      acc_sum += r.accuracy;
      summary.pooled += counts;
      pooled_scores.insert(pooled_scores.end(), scores[s].begin(), scores[s].end());
      pooled_labels.insert(pooled_labels.end(), truth.begin(), truth.end());
      report.splits.push_back(std::move(r));
    }
    summary.mean_miss_rate = mr_n ? mr_sum / static_cast<double>(mr_n) : std::numeric_limits<double>::quiet_NaN();
    summary.mean_accuracy = acc_sum / static_cast<double>(task.splits.size());
    if (summary.pooled.positives() > 0 && summary.pooled.positives() < summary.pooled.total())
      summary.roc = roc_curve(pooled_scores, pooled_labels);
    report.detectors.push_back(std::move(summary));
  }
  double mr = 0, acc = 0;
  std::size_t n_mr = 0;
  for (const auto& d : report.detectors) {
    if (!std::isnan(d.mean_miss_rate)) {
      mr += d.mean_miss_rate;
      ++n_mr;
    }
    acc += d.mean_accuracy;
  }
  report.average_miss_rate = n_mr ? mr / static_cast<double>(n_mr) : std::numeric_limits<double>::quiet_NaN();
  report.average_accuracy = report.detectors.empty() ? 0.0 : acc / static_cast<double>(report.detectors.size());
  return report;
}

namespace detail {

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

}  // namespace detail

/// Writes per_split.csv, summary.csv, table.csv and roc_<dtype>.csv into `dir`.
/// MR and Acc are percentages.
inline void write_report(const EvaluationReport& r, const std::string& dir, const std::string& method = "FluentNet") {
  using detail::fmt;
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  {
    auto out = detail::open_out(d / "per_split.csv");
    out << "dtype,split,MR,Acc,tp,fp,tn,fn\n";
    for (const auto& s : r.splits)
      out << synthesis::to_string(s.dtype) << ',' << s.split << ',' << fmt(s.miss_rate) << ',' << fmt(s.accuracy) << ','
          << s.counts.tp << ',' << s.counts.fp << ',' << s.counts.tn << ',' << s.counts.fn << '\n';
  }
  {
    auto out = detail::open_out(d / "summary.csv");
    out << "dtype,MR,Acc,splits,auc\n";
    for (const auto& s : r.detectors)
      out << synthesis::to_string(s.dtype) << ',' << fmt(s.mean_miss_rate) << ',' << fmt(s.mean_accuracy) << ',' << s.splits << ','
          << (s.roc.points.empty() ? "nan" : fmt(s.roc.auc)) << '\n';
    out << "Average," << fmt(r.average_miss_rate) << ',' << fmt(r.average_accuracy) << ",,\n";
  }
  {
    auto out = detail::open_out(d / "table.csv");
    out << "method";
    for (const auto& s : r.detectors) out << ',' << synthesis::to_string(s.dtype) << "_MR," << synthesis::to_string(s.dtype) << "_Acc";
    out << ",Average_MR,Average_Acc\n" << method;
    for (const auto& s : r.detectors) out << ',' << fmt(s.mean_miss_rate) << ',' << fmt(s.mean_accuracy);
    out << ',' << fmt(r.average_miss_rate) << ',' << fmt(r.average_accuracy) << '\n';
  }
  for (const auto& s : r.detectors) {
    if (s.roc.points.empty()) continue;
    auto out = detail::open_out(d / ("roc_" + synthesis::to_string(s.dtype) + ".csv"));
    out << "threshold,fpr,tpr\n";
    for (const auto& p : s.roc.points) out << (std::isinf(p.threshold) ? std::string("inf") : fmt(p.threshold)) << ',' << fmt(p.fpr) << ',' << fmt(p.tpr) << '\n';
  }
}

}  // namespace fluentnet::eval
