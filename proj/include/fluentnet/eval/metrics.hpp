#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace fluentnet::eval {

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  std::size_t positives() const { return tp + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

inline ConfusionCounts confusion(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("confusion: predicted and truth differ in length");
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = predicted[i] != 0, t = truth[i] != 0;
    if (p && t) ++c.tp;
    else if (p) ++c.fp;
    else if (t) ++c.fn;
    else ++c.tn;
  }
  return c;
}

inline ConfusionCounts confusion_at(const std::vector<double>& scores, const std::vector<int>& truth, double threshold) {
  std::vector<int> predicted(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) predicted[i] = scores[i] >= threshold ? 1 : 0;
  return confusion(predicted, truth);
}

/// fn / (tp + fn).
inline double miss_rate(const ConfusionCounts& c) {
  if (c.positives() == 0) throw std::invalid_argument("miss_rate: no positives evaluated");
  return static_cast<double>(c.fn) / static_cast<double>(c.positives());
}

inline double recall(const ConfusionCounts& c) {
  if (c.positives() == 0) throw std::invalid_argument("recall: no positives evaluated");
  return static_cast<double>(c.tp) / static_cast<double>(c.positives());
}

inline double accuracy(const ConfusionCounts& c) {
  if (c.total() == 0) throw std::invalid_argument("accuracy: empty set");
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

struct RocPoint {
  double threshold;  // predicted positive when score >= threshold
  double fpr;
  double tpr;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// One point per distinct score plus the (0,0) start. AUC is the trapezoid
/// area, accumulated in integer counts so it is exact up to the final division.
inline RocCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("roc_curve: scores and labels differ in length");
  std::uint64_t P = 0, N = 0;
  for (int l : labels) (l ? P : N) += 1;
  if (P == 0 || N == 0) throw std::invalid_argument("roc_curve: both classes are required");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::uint64_t tp = 0, fp = 0, area2 = 0;  // area2 = 2 * P * N * AUC
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    const std::uint64_t tp0 = tp, fp0 = fp;
    for (; i < order.size() && scores[order[i]] == s; ++i) (labels[order[i]] ? tp : fp) += 1;
    area2 += (fp - fp0) * (tp + tp0);
    roc.points.push_back({s, static_cast<double>(fp) / static_cast<double>(N), static_cast<double>(tp) / static_cast<double>(P)});
  }
  roc.auc = static_cast<double>(area2) / static_cast<double>(2 * P * N);
  return roc;
}

}  // namespace fluentnet::eval
