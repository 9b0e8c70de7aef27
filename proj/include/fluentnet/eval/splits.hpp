#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "fluentnet/core/rng.hpp"
#include "fluentnet/features/clips.hpp"

namespace fluentnet::eval {

/// Clip ids are indices into the clip list the split was built from.
struct Split {
  std::string name;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// One split per subject, in sorted subject order; each test set is that subject's clips.
inline std::vector<Split> loso_splits(const std::vector<features::Clip>& clips) {
  std::map<std::string, std::vector<std::size_t>> by_subject;
  for (std::size_t i = 0; i < clips.size(); ++i) by_subject[clips[i].subject_id].push_back(i);
  if (by_subject.size() < 2) throw std::invalid_argument("loso_splits: need at least two subjects");
  std::vector<Split> out;
  for (const auto& [subject, ids] : by_subject) {
    Split s;
    s.name = "subject_" + subject;
    s.test = ids;
    const std::set<std::size_t> held(ids.begin(), ids.end());
    for (std::size_t i = 0; i < clips.size(); ++i)
      if (!held.count(i)) s.train.push_back(i);
    out.push_back(std::move(s));
  }
  return out;
}

/// Stratified by (dtype, label). Members of each stratum are shuffled and dealt
/// round-robin; the dealing offset carries over between strata so fold sizes
/// differ by at most one overall.
inline std::vector<Split> kfold_splits(const std::vector<features::Clip>& clips, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("kfold_splits: k must be >= 2");
  std::map<std::pair<int, int>, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < clips.size(); ++i) strata[{static_cast<int>(clips[i].dtype), clips[i].label}].push_back(i);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t offset = 0;
  for (auto& [key, ids] : strata) {
    if (ids.size() < k)
      throw std::invalid_argument("kfold_splits: stratum (" + synthesis::to_string(static_cast<synthesis::DisfluencyType>(key.first)) +
                                  ", label " + std::to_string(key.second) + ") has " + std::to_string(ids.size()) +
                                  " clips, fewer than k = " + std::to_string(k));
    Rng rng(Rng::derive_seed(seed, "kfold." + std::to_string(key.first) + "." + std::to_string(key.second)));
    rng.shuffle(ids.begin(), ids.end());
    for (std::size_t j = 0; j < ids.size(); ++j) folds[(offset + j) % k].push_back(ids[j]);
    offset = (offset + ids.size()) % k;
  }
  std::vector<Split> out;
  for (std::size_t f = 0; f < k; ++f) {
    Split s;
    s.name = "fold_" + std::to_string(f + 1);
    s.test = folds[f];
    std::sort(s.test.begin(), s.test.end());
    for (std::size_t g = 0; g < k; ++g)
      if (g != f) s.train.insert(s.train.end(), folds[g].begin(), folds[g].end());
    std::sort(s.train.begin(), s.train.end());
    out.push_back(std::move(s));
  }
  return out;
}

/// Stratified random holdout: round(fraction * size) of every (dtype, label)
/// stratum goes to test, the rest to train.
inline Split holdout_split(const std::vector<features::Clip>& clips, double fraction, std::uint64_t seed) {
  if (fraction < 0.0 || fraction >= 1.0) throw std::invalid_argument("holdout_split: fraction must be in [0, 1)");
  std::map<std::pair<int, int>, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < clips.size(); ++i) strata[{static_cast<int>(clips[i].dtype), clips[i].label}].push_back(i);
  Split s;
  s.name = "holdout";
  for (auto& [key, ids] : strata) {
    Rng rng(Rng::derive_seed(seed, "holdout." + std::to_string(key.first) + "." + std::to_string(key.second)));
    rng.shuffle(ids.begin(), ids.end());
    const auto n_test = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ids.size())));
    s.test.insert(s.test.end(), ids.begin(), ids.begin() + static_cast<long>(n_test));
    s.train.insert(s.train.end(), ids.begin() + static_cast<long>(n_test), ids.end());
  }
  std::sort(s.test.begin(), s.test.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

template <typename V>
std::vector<V> select(const std::vector<V>& items, const std::vector<std::size_t>& ids) {
  std::vector<V> out;
  out.reserve(ids.size());
  for (auto i : ids) out.push_back(items.at(i));
  return out;
}

}  // namespace fluentnet::eval
