#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "json.hpp"

#include "fluentnet/core/error.hpp"
#include "fluentnet/nn/recurrent.hpp"

namespace fluentnet::model {

inline constexpr std::array<std::size_t, 8> kChannelPlan = {16, 16, 32, 32, 64, 64, 128, 128};

struct FluentNetConfig {
  std::size_t n_blocks = 8;
  std::size_t hidden_size = 512;
  std::size_t n_blstm_layers = 2;
  double dropout = 0.2;
  double lr = 1e-4;
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  double width_scale = 1.0;
  std::uint64_t seed = 0;
  nn::BlstmMerge merge = nn::BlstmMerge::product;
  std::size_t input_frames = 398;
  std::size_t input_bins = 256;
  double rmsprop_rho = 0.9;
  double rmsprop_eps = 1e-7;
  double max_negative_ratio = 4.0;  // negatives kept per positive in a training set; 0 disables
  std::optional<double> stop_at_train_accuracy;  // early stop once eval-mode train accuracy reaches this

  void validate() const {
    require(n_blocks >= 1, "FluentNetConfig: n_blocks must be >= 1");
    require(n_blstm_layers >= 1, "FluentNetConfig: n_blstm_layers must be >= 1");
    require(dropout >= 0.0 && dropout < 1.0, "FluentNetConfig: dropout must be in [0, 1)");
    require(lr > 0.0, "FluentNetConfig: lr must be > 0");
    require(batch_size >= 1, "FluentNetConfig: batch_size must be >= 1");
    require(width_scale > 0.0, "FluentNetConfig: width_scale must be > 0");
    require(hidden_size >= 1, "FluentNetConfig: hidden_size must be >= 1");
    require(rmsprop_rho >= 0.0 && rmsprop_rho < 1.0, "FluentNetConfig: rmsprop_rho must be in [0, 1)");
    require(max_negative_ratio >= 0.0, "FluentNetConfig: max_negative_ratio must be >= 0");
    require(input_frames >= 1 && input_bins >= 1, "FluentNetConfig: empty input shape");
  }

  std::size_t block_channels(std::size_t block) const {
    const std::size_t base = kChannelPlan[std::min(block, kChannelPlan.size() - 1)];
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(static_cast<double>(base) * width_scale)));
  }
  /// Frequency stride 2 on every second block, time stride 2 on every fourth.
  std::size_t freq_stride(std::size_t block) const { return (block + 1) % 2 == 0 ? 2 : 1; }
  std::size_t time_stride(std::size_t block) const { return (block + 1) % 4 == 0 ? 2 : 1; }
  std::size_t hidden() const {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(static_cast<double>(hidden_size) * width_scale)));
  }
  /// Width of a merged BLSTM output.
  std::size_t blstm_output() const { return merge == nn::BlstmMerge::product ? hidden() : 2 * hidden(); }
};

inline void to_json(nlohmann::json& j, const FluentNetConfig& c) {
  j = nlohmann::json{{"n_blocks", c.n_blocks},
                     {"hidden_size", c.hidden_size},
                     {"n_blstm_layers", c.n_blstm_layers},
                     {"dropout", c.dropout},
                     {"lr", c.lr},
                     {"epochs", c.epochs},
                     {"batch_size", c.batch_size},
                     {"width_scale", c.width_scale},
                     {"seed", c.seed},
                     {"merge", nn::to_string(c.merge)},
                     {"input_frames", c.input_frames},
                     {"input_bins", c.input_bins},
                     {"rmsprop_rho", c.rmsprop_rho},
                     {"rmsprop_eps", c.rmsprop_eps},
                     {"max_negative_ratio", c.max_negative_ratio}};
  if (c.stop_at_train_accuracy) j["stop_at_train_accuracy"] = *c.stop_at_train_accuracy;
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline void from_json(const nlohmann::json& j, FluentNetConfig& c) {
  static const std::array<const char*, 16> known = {"n_blocks",    "hidden_size", "n_blstm_layers", "dropout",
                                                    "lr",          "epochs",      "batch_size",     "width_scale",
                                                    "seed",        "merge",       "input_frames",   "input_bins",
                                                    "rmsprop_rho", "rmsprop_eps", "max_negative_ratio", "stop_at_train_accuracy"};
  for (const auto& [key, _] : j.items())
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end())
      throw DataError("model config: unknown key '" + key + "'");
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("n_blocks", c.n_blocks);
  get("hidden_size", c.hidden_size);
  get("n_blstm_layers", c.n_blstm_layers);
  get("dropout", c.dropout);
  get("lr", c.lr);
  get("epochs", c.epochs);
  get("batch_size", c.batch_size);
  get("width_scale", c.width_scale);
  get("seed", c.seed);
  if (j.contains("merge")) c.merge = nn::blstm_merge_from_string(j.at("merge").get<std::string>());
  get("input_frames", c.input_frames);
  get("input_bins", c.input_bins);
  get("rmsprop_rho", c.rmsprop_rho);
  get("rmsprop_eps", c.rmsprop_eps);
  get("max_negative_ratio", c.max_negative_ratio);
  if (j.contains("stop_at_train_accuracy") && !j.at("stop_at_train_accuracy").is_null())
    c.stop_at_train_accuracy = j.at("stop_at_train_accuracy").get<double>();
}

}  // namespace fluentnet::model
