#pragma once

#include "fluentnet/features/normalization.hpp"
#include "fluentnet/model/config.hpp"
#include "fluentnet/nn/attention.hpp"
#include "fluentnet/nn/blocks.hpp"

namespace fluentnet::model {

using synthesis::DisfluencyType;

/// One binary detector: SE-ResNet stack, BLSTM layers, global attention, dense head.
template <typename T>
struct FluentNetModel {
  FluentNetConfig config;
  DisfluencyType target = DisfluencyType::S;
  std::vector<nn::SeBlockParams<T>> blocks;
  std::vector<std::pair<nn::LstmParams<T>, nn::LstmParams<T>>> blstm;
  nn::AttentionParams<T> attention;
  nn::Parameter<T> head_W, head_b;
  features::NormalizationStats stats;

  std::vector<nn::Parameter<T>*> parameters() {
    std::vector<nn::Parameter<T>*> out;
    for (auto& b : blocks)
      for (auto* p : b.parameters()) out.push_back(p);
    for (auto& [f, b] : blstm) {
      for (auto* p : f.parameters()) out.push_back(p);
      for (auto* p : b.parameters()) out.push_back(p);
    }
    out.push_back(&attention.W_c);
    out.push_back(&head_W);
    out.push_back(&head_b);
    return out;
  }

  /// Batch-norm running statistics with stable names, in block order.
  std::vector<std::pair<std::string, nn::BatchNormState<T>*>> bn_states() {
    std::vector<std::pair<std::string, nn::BatchNormState<T>*>> out;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const std::string prefix = "block" + std::to_string(i + 1);
      auto& b = blocks[i];
      out.push_back({prefix + ".conv1", &b.conv1.stats});
      out.push_back({prefix + ".conv2", &b.conv2.stats});
      out.push_back({prefix + ".conv3", &b.conv3.stats});
      out.push_back({prefix + ".shortcut", &b.shortcut.stats});
    }
    return out;
  }

  std::size_t parameter_count() {
    std::size_t n = 0;
    for (auto* p : parameters()) n += p->value.size();
    return n;
  }

  void zero_grad() {
    for (auto* p : parameters()) p->zero_grad();
  }
};

/// Constructs and initializes a model; deterministic per (config.seed).
template <typename T>
FluentNetModel<T> build_fluentnet(const FluentNetConfig& config, DisfluencyType target = DisfluencyType::S) {
  config.validate();
  FluentNetModel<T> m;
  m.config = config;
  m.target = target;
  Rng rng(Rng::derive_seed(config.seed, "fluentnet.init"));
  std::size_t in = 1;
  for (std::size_t i = 0; i < config.n_blocks; ++i) {
    const std::size_t out = config.block_channels(i);
    m.blocks.emplace_back("block" + std::to_string(i + 1), in, out, config.time_stride(i), config.freq_stride(i));
    m.blocks.back().init(rng);
    in = out;
  }
  const std::size_t H = config.hidden();
  std::size_t seq_in = in;
  for (std::size_t l = 0; l < config.n_blstm_layers; ++l) {
    const std::string prefix = "blstm" + std::to_string(l + 1);
    m.blstm.emplace_back(nn::LstmParams<T>(prefix + ".fwd", seq_in, H), nn::LstmParams<T>(prefix + ".bwd", seq_in, H));
    m.blstm.back().first.init(rng);
    m.blstm.back().second.init(rng);
    seq_in = config.blstm_output();
  }
  m.attention = nn::AttentionParams<T>("attention", seq_in, seq_in);
  m.attention.init(rng);
  m.head_W = nn::Parameter<T>("head.W", {1, seq_in});
  m.head_b = nn::Parameter<T>("head.b", {1});
  nn::he_uniform(m.head_W, seq_in, rng);
  nn::constant_init(m.head_b, T(0));
  return m;
}

/// Input [B, 1, frames, bins] -> probabilities [B].
template <typename T>
nn::Var<T> forward(FluentNetModel<T>& m, nn::Var<T> input) {
  auto& g = *input.graph;
  const auto& cfg = m.config;
  if (input.shape() != nn::Shape{input.dim(0), 1, cfg.input_frames, cfg.input_bins} || input.dim(0) == 0)
    throw std::invalid_argument("forward: expected input [B,1," + std::to_string(cfg.input_frames) + "," +
                                std::to_string(cfg.input_bins) + "], got " + nn::shape_string(input.shape()));
  auto x = input;
  for (auto& block : m.blocks) x = nn::se_resnet_block(x, block);
  auto seq = nn::freq_mean_sequence(x);
  for (auto& [fwd, bwd] : m.blstm) seq = nn::dropout(nn::blstm_layer(seq, fwd, bwd, cfg.merge), cfg.dropout);
  const auto att = nn::global_attention(seq, m.attention);
  const auto logits = nn::dense(att.output, g.param(m.head_W), g.param(m.head_b));
  return nn::reshape(nn::sigmoid(logits), {input.dim(0)});
}

/// Stacks (already normalized) spectrograms into a [B, 1, frames, bins] tensor.
template <typename T>
nn::Tensor<T> make_batch(const std::vector<const audio::Spectrogram*>& specs) {
  require(!specs.empty(), "make_batch: empty batch");
  const std::size_t F = specs[0]->frames, K = specs[0]->bins;
  nn::Tensor<T> out({specs.size(), 1, F, K});
  for (std::size_t b = 0; b < specs.size(); ++b) {
    if (specs[b]->frames != F || specs[b]->bins != K) throw std::invalid_argument("make_batch: clips have differing shapes");
    std::copy(specs[b]->values.begin(), specs[b]->values.end(), out.ptr() + b * F * K);
  }
  return out;
}

}  // namespace fluentnet::model
