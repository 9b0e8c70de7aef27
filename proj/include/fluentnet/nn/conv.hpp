#pragma once

#include <atomic>

#include "fluentnet/core/parallel.hpp"
#include "fluentnet/nn/ops.hpp"

namespace fluentnet::nn {

struct Conv2dSpec {
  std::size_t stride_h = 1, stride_w = 1;
  std::size_t pad_h = 0, pad_w = 0;
};

inline std::size_t conv_out_dim(std::size_t in, std::size_t k, std::size_t stride, std::size_t pad) {
  if (in + 2 * pad < k) throw std::invalid_argument("conv2d: kernel larger than padded input");
  return (in + 2 * pad - k) / stride + 1;
}

/// Test fixture hook: flips the sign of the conv weight gradient so the
/// gradient checker can be shown to catch it.
inline std::atomic<bool>& conv_weight_grad_fault() {
  static std::atomic<bool> flag{false};
  return flag;
}

namespace detail {

struct ConvGeometry {
  std::size_t C, H, W, O, kh, kw, Ho, Wo;
  Conv2dSpec spec;
  std::size_t K() const { return C * kh * kw; }
  std::size_t P() const { return Ho * Wo; }
  bool pointwise() const {
    return kh == 1 && kw == 1 && spec.stride_h == 1 && spec.stride_w == 1 && spec.pad_h == 0 && spec.pad_w == 0;
  }
};

/// Output columns [lo, hi) whose input column lies inside the row.
inline std::pair<std::size_t, std::size_t> valid_columns(const ConvGeometry& g, std::size_t kj) {
  const long pad = static_cast<long>(g.spec.pad_w), k = static_cast<long>(kj), s = static_cast<long>(g.spec.stride_w);
  const long first = std::max(0L, (pad - k + s - 1) / s);                      // ow*s + k - pad >= 0
  const long last = std::min(static_cast<long>(g.Wo), (static_cast<long>(g.W) + pad - k + s - 1) / s);  // < W
  const auto lo = static_cast<std::size_t>(std::min(first, static_cast<long>(g.Wo)));
  return {lo, std::max(lo, static_cast<std::size_t>(std::max(0L, last)))};
}

template <typename T>
void im2col(const T* x, const ConvGeometry& g, T* col) {
  const std::size_t sw = g.spec.stride_w;
  for (std::size_t c = 0; c < g.C; ++c)
    for (std::size_t ki = 0; ki < g.kh; ++ki)
      for (std::size_t kj = 0; kj < g.kw; ++kj) {
        T* row = col + ((c * g.kh + ki) * g.kw + kj) * g.P();
        const auto [lo, hi] = valid_columns(g, kj);
        for (std::size_t oh = 0; oh < g.Ho; ++oh) {
          const long ih = static_cast<long>(oh * g.spec.stride_h + ki) - static_cast<long>(g.spec.pad_h);
          T* dst = row + oh * g.Wo;
          if (ih < 0 || ih >= static_cast<long>(g.H)) {
            std::fill_n(dst, g.Wo, T(0));
            continue;
          }
          const long base = static_cast<long>((c * g.H + static_cast<std::size_t>(ih)) * g.W + kj) - static_cast<long>(g.spec.pad_w);
          std::fill_n(dst, lo, T(0));
          if (sw == 1) std::copy_n(x + base + static_cast<long>(lo), hi - lo, dst + lo);
          else
            for (std::size_t ow = lo; ow < hi; ++ow) dst[ow] = x[base + static_cast<long>(ow * sw)];
          std::fill(dst + hi, dst + g.Wo, T(0));
        }
      }
}

template <typename T>
void col2im_add(const T* col, const ConvGeometry& g, T* x) {
  const std::size_t sw = g.spec.stride_w;
  for (std::size_t c = 0; c < g.C; ++c)
    for (std::size_t ki = 0; ki < g.kh; ++ki)
      for (std::size_t kj = 0; kj < g.kw; ++kj) {
        const T* row = col + ((c * g.kh + ki) * g.kw + kj) * g.P();
        const auto [lo, hi] = valid_columns(g, kj);
        for (std::size_t oh = 0; oh < g.Ho; ++oh) {
          const long ih = static_cast<long>(oh * g.spec.stride_h + ki) - static_cast<long>(g.spec.pad_h);
          if (ih < 0 || ih >= static_cast<long>(g.H)) continue;
          const long base = static_cast<long>((c * g.H + static_cast<std::size_t>(ih)) * g.W + kj) - static_cast<long>(g.spec.pad_w);
          const T* src = row + oh * g.Wo;
          for (std::size_t ow = lo; ow < hi; ++ow) x[base + static_cast<long>(ow * sw)] += src[ow];
        }
      }
}

}  // namespace detail

/// Cross-correlation of x [B, C, H, W] with w [O, C, kh, kw]; no bias.
template <typename T>
Var<T> conv2d(Var<T> x, Var<T> w, Conv2dSpec spec = {}) {
  detail::require_rank(x, 4, "conv2d");
  detail::require_rank(w, 4, "conv2d");
  detail::shape_check(x.dim(1) == w.dim(1), "conv2d", "input " + shape_string(x.shape()) + " weights " + shape_string(w.shape()));
  if (spec.stride_h == 0 || spec.stride_w == 0) throw std::invalid_argument("conv2d: zero stride");
  const std::size_t B = x.dim(0);
  detail::ConvGeometry geo{x.dim(1), x.dim(2), x.dim(3), w.dim(0), w.dim(2), w.dim(3), 0, 0, spec};
  geo.Ho = conv_out_dim(geo.H, geo.kh, spec.stride_h, spec.pad_h);
  geo.Wo = conv_out_dim(geo.W, geo.kw, spec.stride_w, spec.pad_w);
  const std::size_t in_size = geo.C * geo.H * geo.W, out_size = geo.O * geo.P();

  Tensor<T> out({B, geo.O, geo.Ho, geo.Wo});
  const T* xv = x.value().ptr();
  detail::CMapR<T> Wm(w.value().ptr(), geo.O, geo.K());
  parallel_for(B, [&](std::size_t b) {
    detail::MapR<T> Y(out.ptr() + b * out_size, geo.O, geo.P());
    if (geo.pointwise()) {
      Y.noalias() = Wm * detail::CMapR<T>(xv + b * in_size, geo.C, geo.P());
    } else {
      std::vector<T> col(geo.K() * geo.P());
      detail::im2col(xv + b * in_size, geo, col.data());
      Y.noalias() = Wm * detail::CMapR<T>(col.data(), geo.K(), geo.P());
    }
  });

  return x.graph->make(std::move(out), {x.id, w.id}, [x = x.id, w = w.id, geo, B, in_size, out_size](Graph<T>& g, std::size_t self) {
    const T* go = g.grad(self).ptr();
    const T* xv = g.value(x).ptr();
    detail::CMapR<T> Wm(g.value(w).ptr(), geo.O, geo.K());
    const bool need_x = g.needs_grad(x), need_w = g.needs_grad(w);
    T* gx = need_x ? g.grad(x).ptr() : nullptr;
    std::vector<T> partials(need_w ? B * geo.O * geo.K() : 0);
    parallel_for(B, [&](std::size_t b) {
      detail::CMapR<T> dY(go + b * out_size, geo.O, geo.P());
      if (geo.pointwise()) {
        if (need_x) detail::MapR<T>(gx + b * in_size, geo.C, geo.P()).noalias() += Wm.transpose() * dY;
        if (need_w)
          detail::MapR<T>(partials.data() + b * geo.O * geo.K(), geo.O, geo.K()).noalias() =
              dY * detail::CMapR<T>(xv + b * in_size, geo.C, geo.P()).transpose();
        return;
      }
      std::vector<T> col(geo.K() * geo.P());
      if (need_x) {
        detail::MapR<T>(col.data(), geo.K(), geo.P()).noalias() = Wm.transpose() * dY;
        detail::col2im_add(col.data(), geo, gx + b * in_size);
      }
      if (need_w) {
        detail::im2col(xv + b * in_size, geo, col.data());
        detail::MapR<T>(partials.data() + b * geo.O * geo.K(), geo.O, geo.K()).noalias() =
            dY * detail::CMapR<T>(col.data(), geo.K(), geo.P()).transpose();
      }
    });
    if (need_w) {
      auto& gw = g.grad(w);
      const T sign = conv_weight_grad_fault() ? T(-1) : T(1);
      const std::size_t n = geo.O * geo.K();
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t i = 0; i < n; ++i) gw[i] += sign * partials[b * n + i];
    }
  });
}

/// Running statistics of one batch-norm layer.
template <typename T>
struct BatchNormState {
  Tensor<T> running_mean;
  Tensor<T> running_var;

  BatchNormState() = default;
  explicit BatchNormState(std::size_t channels) : running_mean({channels}, T(0)), running_var({channels}, T(1)) {}
};

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.9;

namespace detail {

template <typename T>
using ConstArray = Eigen::Map<const Eigen::Array<T, Eigen::Dynamic, 1>>;
template <typename T>
using MutArray = Eigen::Map<Eigen::Array<T, Eigen::Dynamic, 1>>;

}  // namespace detail

/// Per-channel normalization of x [B, C, ...] (channel axis 1).
template <typename T>
Var<T> batch_norm(Var<T> x, Var<T> gamma, Var<T> beta, BatchNormState<T>& state) {
  using A = detail::ConstArray<T>;
  detail::shape_check(x.shape().size() >= 2, "batch_norm", shape_string(x.shape()));
  const std::size_t B = x.dim(0), C = x.dim(1), inner = x.value().size() / std::max<std::size_t>(1, B * C);
  const auto n = static_cast<Eigen::Index>(inner);
  detail::shape_check(gamma.shape() == Shape{C} && beta.shape() == Shape{C}, "batch_norm", "parameters for " + shape_string(x.shape()));
  detail::shape_check(state.running_mean.shape == Shape{C}, "batch_norm", "running stats for " + shape_string(x.shape()));
  auto& graph = *x.graph;
  const bool train = graph.mode == Mode::train;
  const auto& xv = x.value();
  const double N = static_cast<double>(B * inner);
  std::vector<double> mean(C), invstd(C);
  for (std::size_t c = 0; c < C; ++c) {
    double m, var;
    if (train) {
      double s = 0;
      for (std::size_t b = 0; b < B; ++b) s += A(xv.ptr() + (b * C + c) * inner, n).template cast<double>().sum();
      m = s / N;
      double sq = 0;
      for (std::size_t b = 0; b < B; ++b) sq += (A(xv.ptr() + (b * C + c) * inner, n).template cast<double>() - m).square().sum();
      var = sq / N;
      if (graph.update_running_stats) {
        state.running_mean[c] = static_cast<T>(kBatchNormMomentum * state.running_mean[c] + (1 - kBatchNormMomentum) * m);
        state.running_var[c] = static_cast<T>(kBatchNormMomentum * state.running_var[c] + (1 - kBatchNormMomentum) * var);
      }
    } else {
      m = state.running_mean[c];
      var = state.running_var[c];
    }
    mean[c] = m;
    invstd[c] = 1.0 / std::sqrt(var + kBatchNormEps);
  }
  Tensor<T> out(x.shape());
  const auto& gv = gamma.value();
  const auto& bv = beta.value();
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c) {
      const T a = static_cast<T>(gv[c] * invstd[c]), shift = static_cast<T>(bv[c] - gv[c] * invstd[c] * mean[c]);
      detail::MutArray<T>(out.ptr() + (b * C + c) * inner, n) = A(xv.ptr() + (b * C + c) * inner, n) * a + shift;
    }
  return graph.make(std::move(out), {x.id, gamma.id, beta.id},
                    [x = x.id, gm = gamma.id, bt = beta.id, mean, invstd, train, B, C, inner](Graph<T>& g, std::size_t self) {
    using A = detail::ConstArray<T>;
    const auto n = static_cast<Eigen::Index>(inner);
    const auto& go = g.grad(self);
    const auto& xv = g.value(x);
    const auto& gv = g.value(gm);
    const double N = static_cast<double>(B * inner);
    // sum_dy_xhat = invstd * (sum(dy * x) - mean * sum(dy))
    std::vector<double> sum_dy(C, 0.0), sum_dy_xhat(C, 0.0);
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t c = 0; c < C; ++c) {
        const std::size_t base = (b * C + c) * inner;
        const auto dy = A(go.ptr() + base, n).template cast<double>();
        sum_dy[c] += dy.sum();
        sum_dy_xhat[c] += (dy * A(xv.ptr() + base, n).template cast<double>()).sum();
      }
    for (std::size_t c = 0; c < C; ++c) sum_dy_xhat[c] = invstd[c] * (sum_dy_xhat[c] - mean[c] * sum_dy[c]);
    detail::accumulate(g, gm, [&](Tensor<T>& gg) {
      for (std::size_t c = 0; c < C; ++c) gg[c] += static_cast<T>(sum_dy_xhat[c]);
    });
    detail::accumulate(g, bt, [&](Tensor<T>& gb) {
      for (std::size_t c = 0; c < C; ++c) gb[c] += static_cast<T>(sum_dy[c]);
    });
    detail::accumulate(g, x, [&](Tensor<T>& gx) {
      for (std::size_t c = 0; c < C; ++c) {
        const double k = static_cast<double>(gv[c]) * invstd[c];
        // train: dx = k * (dy - mean(dy) - xhat * mean(dy * xhat)), written as p*dy + q*x + r
        const double mdy = train ? sum_dy[c] / N : 0.0, mdyx = train ? sum_dy_xhat[c] / N : 0.0;
        const T p = static_cast<T>(k), q = static_cast<T>(-k * mdyx * invstd[c]),
                r = static_cast<T>(-k * mdy + k * mdyx * invstd[c] * mean[c]);
        for (std::size_t b = 0; b < B; ++b) {
          const std::size_t base = (b * C + c) * inner;
          detail::MutArray<T>(gx.ptr() + base, n) += A(go.ptr() + base, n) * p + A(xv.ptr() + base, n) * q + r;
        }
      }
    });
  });
}

}  // namespace fluentnet::nn
