#pragma once

#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>

#include "fluentnet/core/log.hpp"
#include "fluentnet/model/checkpoint.hpp"
#include "fluentnet/model/optimizer.hpp"

namespace fluentnet::model {

using features::Clip;

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0, val_loss = 0, train_acc = 0, val_acc = 0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  bool stopped_early = false;
  std::size_t kept_negatives = 0, dropped_negatives = 0;
};

template <typename T>
struct TrainOptions {
  std::string checkpoint_dir;              // final.ckpt, best.ckpt and history.csv when set
  FluentNetModel<T>* best_model = nullptr;  // receives the lowest-val-loss weights
  std::function<void(const EpochRecord&)> on_epoch;
};

inline void write_history_csv(const TrainHistory& h, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << "epoch,train_loss,val_loss,train_acc,val_acc\n";
  char line[256];
  for (const auto& e : h.epochs) {
    std::snprintf(line, sizeof line, "%zu,%.9g,%.9g,%.6f,%.6f\n", e.epoch, e.train_loss, e.val_loss, e.train_acc, e.val_acc);
    out << line;
  }
}

struct Prediction {
  std::vector<double> scores;
  std::vector<int> labels;
};

namespace detail {

inline std::vector<audio::Spectrogram> normalized(const features::NormalizationStats& stats, const std::vector<Clip>& clips) {
  std::vector<audio::Spectrogram> out;
  out.reserve(clips.size());
  for (const auto& c : clips) out.push_back(stats.empty() ? c.spectrogram : stats.apply(c.spectrogram));
  return out;
}

template <typename T>
std::vector<double> score_spectrograms(FluentNetModel<T>& m, const std::vector<audio::Spectrogram>& specs) {
  std::vector<double> scores;
  scores.reserve(specs.size());
  for (std::size_t start = 0; start < specs.size(); start += m.config.batch_size) {
    std::vector<const audio::Spectrogram*> batch;
    for (std::size_t i = start; i < std::min(specs.size(), start + m.config.batch_size); ++i) batch.push_back(&specs[i]);
    nn::Graph<T> g(nn::Mode::eval);
    const auto p = forward(m, g.constant(make_batch<T>(batch)));
    for (T v : p.value().data) scores.push_back(static_cast<double>(v));
  }
  return scores;
}

inline std::pair<double, double> loss_and_accuracy(const std::vector<double>& scores, const std::vector<Clip>& clips) {
  if (clips.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  double loss = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const double q = std::clamp(scores[i], nn::kBceClamp, 1.0 - nn::kBceClamp);
    const double y = clips[i].label;
    loss -= y * std::log(q) + (1 - y) * std::log(1 - q);
    correct += (scores[i] >= 0.5) == (clips[i].label == 1);
  }
  return {loss / static_cast<double>(clips.size()), static_cast<double>(correct) / static_cast<double>(clips.size())};
}

}  // namespace detail

/// Scores in eval mode; spectrograms are normalized with the model's stats.
template <typename T>
Prediction predict(FluentNetModel<T>& m, const std::vector<Clip>& clips, double threshold = 0.5) {
  Prediction out;
  out.scores = detail::score_spectrograms(m, detail::normalized(m.stats, clips));
  for (double s : out.scores) out.labels.push_back(s >= threshold ? 1 : 0);
  return out;
}

/// Eval-mode mean BCE and accuracy at threshold 0.5.
template <typename T>
std::pair<double, double> evaluate_loss(FluentNetModel<T>& m, const std::vector<Clip>& clips) {
  return detail::loss_and_accuracy(predict(m, clips).scores, clips);
}

/// Keeps at most `ratio` negatives per positive, chosen with a seeded shuffle;
/// original order is preserved.
inline std::vector<Clip> downsample_negatives(const std::vector<Clip>& clips, double ratio, std::uint64_t seed,
                                              std::size_t* dropped = nullptr) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < clips.size(); ++i) (clips[i].label ? pos : neg).push_back(i);
  const auto cap = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(pos.size())));
  if (dropped) *dropped = 0;
  if (ratio <= 0.0 || neg.size() <= cap) return clips;
  Rng rng(Rng::derive_seed(seed, "downsample"));
  rng.shuffle(neg.begin(), neg.end());
  neg.resize(cap);
  std::vector<std::size_t> keep = pos;
  keep.insert(keep.end(), neg.begin(), neg.end());
  std::sort(keep.begin(), keep.end());
  if (dropped) *dropped = clips.size() - keep.size();
  std::vector<Clip> out;
  for (auto i : keep) out.push_back(clips[i]);
  return out;
}

/// Seeded minibatch RMSProp training of one detector. Normalization stats are
/// fitted on the (downsampled) training set and stored in the model.
template <typename T>
TrainHistory train(FluentNetModel<T>& model, const std::vector<Clip>& train_clips, const std::vector<Clip>& val_clips,
                   const TrainOptions<T>& options = {}) {
  const auto& cfg = model.config;
  cfg.validate();
  if (train_clips.empty()) throw DataError("train: empty training set");
  std::size_t positives = 0;
  for (const auto& c : train_clips) positives += c.label == 1;
  if (positives == 0 || positives == train_clips.size()) throw DataError("train: single-class training set");

  TrainHistory history;
  const auto clips = downsample_negatives(train_clips, cfg.max_negative_ratio, cfg.seed, &history.dropped_negatives);
  history.kept_negatives = clips.size() - positives;
  if (history.dropped_negatives > 0)
    log_info("train: dropped " + std::to_string(history.dropped_negatives) + " negatives to keep at most " +
             std::to_string(cfg.max_negative_ratio) + ":1");
  model.stats = features::NormalizationStats::fit(clips);
  const auto train_specs = detail::normalized(model.stats, clips);
  const auto val_specs = detail::normalized(model.stats, val_clips);

  RmsProp<T> opt{cfg.lr, cfg.rmsprop_rho, cfg.rmsprop_eps, {}};
  const auto params = model.parameters();
  FluentNetModel<T> best = model;
  std::vector<std::size_t> order(clips.size());
  for (std::size_t e = 1; e <= cfg.epochs; ++e) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(Rng::derive_seed(cfg.seed, "epoch" + std::to_string(e)));
    shuffle_rng.shuffle(order.begin(), order.end());
    double loss_sum = 0;
    std::size_t correct = 0;
    for (std::size_t start = 0, b = 0; start < order.size(); start += cfg.batch_size, ++b) {
      std::vector<const audio::Spectrogram*> batch;
      std::vector<T> targets;
      for (std::size_t i = start; i < std::min(order.size(), start + cfg.batch_size); ++i) {
        batch.push_back(&train_specs[order[i]]);
        targets.push_back(static_cast<T>(clips[order[i]].label));
      }
      nn::Graph<T> g(nn::Mode::train, Rng::derive_seed(cfg.seed, "dropout" + std::to_string(e) + "." + std::to_string(b)));
      const auto probs = forward(model, g.constant(make_batch<T>(batch)));
      const auto loss = nn::bce(probs, targets);
      const double batch_loss = loss.value()[0];
      if (!std::isfinite(batch_loss)) throw NumericalError("train: non-finite loss at epoch " + std::to_string(e));
      loss_sum += batch_loss * static_cast<double>(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) correct += (probs.value()[i] >= T(0.5)) == (targets[i] == T(1));
      model.zero_grad();
      g.backward(loss, true);
      opt.step(params);
    }
    EpochRecord rec;
    rec.epoch = e;
    rec.train_loss = loss_sum / static_cast<double>(clips.size());
    rec.train_acc = static_cast<double>(correct) / static_cast<double>(clips.size());
    std::tie(rec.val_loss, rec.val_acc) = detail::loss_and_accuracy(detail::score_spectrograms(model, val_specs), val_clips);
    bool stop = false;
    if (cfg.stop_at_train_accuracy) {
      const auto eval_train = detail::loss_and_accuracy(detail::score_spectrograms(model, train_specs), clips);
      rec.train_acc = eval_train.second;
      stop = eval_train.second >= *cfg.stop_at_train_accuracy;
    }
    history.epochs.push_back(rec);
    if (options.on_epoch) options.on_epoch(rec);
    const double criterion = val_clips.empty() ? rec.train_loss : rec.val_loss;
    if (criterion < history.best_val_loss) {
      history.best_val_loss = criterion;
      history.best_epoch = e;
      best = model;
    }
    if (stop) {
      history.stopped_early = true;
      break;
    }
  }
  if (options.best_model) *options.best_model = best;
  if (!options.checkpoint_dir.empty()) {
    std::filesystem::create_directories(options.checkpoint_dir);
    const std::filesystem::path dir(options.checkpoint_dir);
    save_checkpoint(model, (dir / "final.ckpt").string());
    save_checkpoint(best, (dir / "best.ckpt").string());
    write_history_csv(history, (dir / "history.csv").string());
  }
  return history;
}

}  // namespace fluentnet::model
