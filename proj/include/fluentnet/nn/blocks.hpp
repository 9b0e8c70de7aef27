#pragma once

#include "fluentnet/nn/conv.hpp"
#include "fluentnet/nn/init.hpp"

namespace fluentnet::nn {

/// Convolution followed by batch normalization.
template <typename T>
struct ConvBn {
  Parameter<T> weight, gamma, beta;
  BatchNormState<T> stats;
  Conv2dSpec spec;

  ConvBn() = default;
  ConvBn(const std::string& prefix, std::size_t in, std::size_t out, std::size_t k, Conv2dSpec s)
      : weight(prefix + ".weight", {out, in, k, k}),
        gamma(prefix + ".gamma", {out}),
        beta(prefix + ".beta", {out}),
        stats(out),
        spec(s) {}

  void init(Rng& rng) {
    he_uniform(weight, weight.value.dim(1) * weight.value.dim(2) * weight.value.dim(3), rng);
    constant_init(gamma, T(1));
    constant_init(beta, T(0));
    stats = BatchNormState<T>(gamma.value.size());
  }
  std::vector<Parameter<T>*> parameters() { return {&weight, &gamma, &beta}; }

  Var<T> operator()(Var<T> x) {
    auto& g = *x.graph;
    return batch_norm(conv2d(x, g.param(weight), spec), g.param(gamma), g.param(beta), stats);
  }
};

inline constexpr std::size_t kSeReduction = 16;

inline std::size_t se_reduced_width(std::size_t channels, std::size_t ratio = kSeReduction) {
  return std::max<std::size_t>(1, (channels + ratio - 1) / ratio);
}

/// Squeeze-and-excitation bottleneck: dense C->r, relu, dense r->C, sigmoid.
template <typename T>
struct SeUnitParams {
  Parameter<T> W1, b1, W2, b2;

  SeUnitParams() = default;
  SeUnitParams(const std::string& prefix, std::size_t channels, std::size_t ratio = kSeReduction)
      : W1(prefix + ".W1", {se_reduced_width(channels, ratio), channels}),
        b1(prefix + ".b1", {se_reduced_width(channels, ratio)}),
        W2(prefix + ".W2", {channels, se_reduced_width(channels, ratio)}),
        b2(prefix + ".b2", {channels}) {}

  void init(Rng& rng) {
    he_uniform(W1, W1.value.dim(1), rng);
    he_uniform(W2, W2.value.dim(1), rng);
    constant_init(b1, T(0));
    constant_init(b2, T(0));
  }
  std::vector<Parameter<T>*> parameters() { return {&W1, &b1, &W2, &b2}; }
};

template <typename T>
Var<T> se_scales(Var<T> x, SeUnitParams<T>& p) {
  auto& g = *x.graph;
  const auto squeeze = global_avg_pool(x);
  detail::shape_check(squeeze.dim(1) == p.W1.value.dim(1), "se_unit", "input " + shape_string(x.shape()));
  const auto hidden = relu(dense(squeeze, g.param(p.W1), g.param(p.b1)));
  return sigmoid(dense(hidden, g.param(p.W2), g.param(p.b2)));
}

template <typename T>
Var<T> se_unit(Var<T> x, SeUnitParams<T>& p) {
  return channel_scale(x, se_scales(x, p));
}

/// Block layout: three 3x3 conv+bn (the first strided); relu after the first
/// two; SE scaling of the third; plus a 1x1 conv+bn shortcut; final relu.
template <typename T>
struct SeBlockParams {
  std::size_t in = 0, out = 0;
  ConvBn<T> conv1, conv2, conv3, shortcut;
  SeUnitParams<T> se;

  SeBlockParams() = default;
  SeBlockParams(const std::string& prefix, std::size_t in_ch, std::size_t out_ch, std::size_t stride_time,
                std::size_t stride_freq)
      : in(in_ch),
        out(out_ch),
        conv1(prefix + ".conv1", in_ch, out_ch, 3, {stride_time, stride_freq, 1, 1}),
        conv2(prefix + ".conv2", out_ch, out_ch, 3, {1, 1, 1, 1}),
        conv3(prefix + ".conv3", out_ch, out_ch, 3, {1, 1, 1, 1}),
        shortcut(prefix + ".shortcut", in_ch, out_ch, 1, {stride_time, stride_freq, 0, 0}),
        se(prefix + ".se", out_ch) {}

  void init(Rng& rng) {
    conv1.init(rng);
    conv2.init(rng);
    conv3.init(rng);
    shortcut.init(rng);
    se.init(rng);
  }

  std::vector<Parameter<T>*> parameters() {
    std::vector<Parameter<T>*> out_params;
    for (auto* c : {&conv1, &conv2, &conv3, &shortcut})
      for (auto* p : c->parameters()) out_params.push_back(p);
    for (auto* p : se.parameters()) out_params.push_back(p);
    return out_params;
  }
  std::vector<BatchNormState<T>*> bn_states() { return {&conv1.stats, &conv2.stats, &conv3.stats, &shortcut.stats}; }
};

template <typename T>
Var<T> se_resnet_block(Var<T> x, SeBlockParams<T>& p) {
  detail::shape_check(x.shape().size() == 4 && x.dim(1) == p.in, "se_resnet_block", "input " + shape_string(x.shape()));
  const auto a = relu(p.conv1(x));
  const auto b = relu(p.conv2(a));
  const auto c = p.conv3(b);
  const auto main = se_unit(c, p.se);
  const auto skip = p.shortcut(x);
  detail::require_same_shape(main, skip, "se_resnet_block");
  return relu(add(main, skip));
}

}  // namespace fluentnet::nn
