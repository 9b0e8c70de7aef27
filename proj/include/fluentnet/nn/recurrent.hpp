#pragma once

#include <memory>

#include "fluentnet/nn/init.hpp"
#include "fluentnet/nn/ops.hpp"

namespace fluentnet::nn {

/// Gate weights act on the concatenation [h_{t-1}, x_t].
template <typename T>
struct LstmParams {
  std::size_t input = 0, hidden = 0;
  Parameter<T> W_f, W_i, W_C, W_o;
  Parameter<T> b_f, b_i, b_C, b_o;

  LstmParams() = default;
  LstmParams(const std::string& prefix, std::size_t input_size, std::size_t hidden_size)
      : input(input_size),
        hidden(hidden_size),
        W_f(prefix + ".W_f", {hidden_size, hidden_size + input_size}),
        W_i(prefix + ".W_i", {hidden_size, hidden_size + input_size}),
        W_C(prefix + ".W_C", {hidden_size, hidden_size + input_size}),
        W_o(prefix + ".W_o", {hidden_size, hidden_size + input_size}),
        b_f(prefix + ".b_f", {hidden_size}),
        b_i(prefix + ".b_i", {hidden_size}),
        b_C(prefix + ".b_C", {hidden_size}),
        b_o(prefix + ".b_o", {hidden_size}) {}

  /// U(+-1/sqrt(hidden)) weights, zero biases except forget bias +1.
  void init(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (auto* w : {&W_f, &W_i, &W_C, &W_o}) uniform_init(*w, bound, rng);
    for (auto* b : {&b_i, &b_C, &b_o}) constant_init(*b, T(0));
    constant_init(b_f, T(1));
  }

  std::vector<Parameter<T>*> parameters() { return {&W_f, &W_i, &W_C, &W_o, &b_f, &b_i, &b_C, &b_o}; }
};

template <typename T>
struct LstmState {
  Var<T> h;
  Var<T> cell_state;
};

/// One step built from primitive ops: x [B, D], h_prev / C_prev [B, H].
template <typename T>
LstmState<T> lstm_cell(Var<T> x, Var<T> h_prev, Var<T> c_prev, LstmParams<T>& p) {
  auto& g = *x.graph;
  detail::shape_check(x.shape().size() == 2 && x.dim(1) == p.input, "lstm_cell", "input " + shape_string(x.shape()));
  detail::shape_check(h_prev.shape() == Shape{x.dim(0), p.hidden} && c_prev.shape() == h_prev.shape(), "lstm_cell",
                      "state " + shape_string(h_prev.shape()));
  const auto z = concat_last<T>({h_prev, x});
  const auto f = sigmoid(dense(z, g.param(p.W_f), g.param(p.b_f)));
  const auto i = sigmoid(dense(z, g.param(p.W_i), g.param(p.b_i)));
  const auto cand = tanh(dense(z, g.param(p.W_C), g.param(p.b_C)));
  const auto o = sigmoid(dense(z, g.param(p.W_o), g.param(p.b_o)));
  const auto c = add(mul(f, c_prev), mul(i, cand));
  return {mul(o, tanh(c)), c};
}

/// Whole-sequence LSTM as one fused node with hand-written BPTT.
/// seq [B, T, D] -> hidden states [B, T, H]; `reverse` runs t = T..1.
template <typename T>
Var<T> lstm_sequence(Var<T> seq, LstmParams<T>& p, bool reverse = false) {
  using detail::CMapR;
  using detail::MapR;
  using detail::MatR;
  using Strided = Eigen::Map<MatR<T>, 0, Eigen::OuterStride<>>;
  using CStrided = Eigen::Map<const MatR<T>, 0, Eigen::OuterStride<>>;
  detail::require_rank(seq, 3, "lstm_sequence");
  const std::size_t B = seq.dim(0), n = seq.dim(1), D = seq.dim(2), H = p.hidden;
  if (n == 0) throw std::invalid_argument("lstm_sequence: empty sequence");
  detail::shape_check(D == p.input, "lstm_sequence", "input " + shape_string(seq.shape()) + " for LSTM input size " + std::to_string(p.input));
  auto& g = *seq.graph;

  // Stacked gate weights, gate order f, i, C, o.
  MatR<T> Wh(4 * H, H), Wx(4 * H, D);
  Eigen::Matrix<T, 1, Eigen::Dynamic> bias(4 * H);
  Parameter<T>* gates_w[4] = {&p.W_f, &p.W_i, &p.W_C, &p.W_o};
  Parameter<T>* gates_b[4] = {&p.b_f, &p.b_i, &p.b_C, &p.b_o};
  for (std::size_t k = 0; k < 4; ++k) {
    CMapR<T> Wk(gates_w[k]->value.ptr(), H, H + D);
    Wh.middleRows(k * H, H) = Wk.leftCols(H);
    Wx.middleRows(k * H, H) = Wk.rightCols(D);
    for (std::size_t j = 0; j < H; ++j) bias(k * H + j) = gates_b[k]->value[j];
  }

  struct Saved {
    MatR<T> gates;  // [B*T, 4H] post-activation
    Tensor<T> cells;
  };
  auto saved = std::make_shared<Saved>();
  saved->gates.resize(B * n, 4 * H);
  saved->gates.noalias() = CMapR<T>(seq.value().ptr(), B * n, D) * Wx.transpose();
  saved->gates.rowwise() += bias;
  saved->cells = Tensor<T>({B, n, H});
  Tensor<T> out({B, n, H});

  const Eigen::OuterStride<> gstride(static_cast<Eigen::Index>(n * 4 * H)), hstride(static_cast<Eigen::Index>(n * H));
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t t = reverse ? n - 1 - s : s;
    Strided A(saved->gates.data() + t * 4 * H, B, 4 * H, gstride);
    if (s > 0) {
      const std::size_t tp = reverse ? t + 1 : t - 1;
      A.noalias() += CStrided(out.ptr() + tp * H, B, H, hstride) * Wh.transpose();
    }
    for (std::size_t b = 0; b < B; ++b) {
      T* a = &A(b, 0);
      const T* c_prev = s > 0 ? saved->cells.ptr() + (b * n + (reverse ? t + 1 : t - 1)) * H : nullptr;
      T* c = saved->cells.ptr() + (b * n + t) * H;
      T* h = out.ptr() + (b * n + t) * H;
      for (std::size_t j = 0; j < H; ++j) {
        const T f = detail::stable_sigmoid(a[j]);
        const T i = detail::stable_sigmoid(a[H + j]);
        const T cand = std::tanh(a[2 * H + j]);
        const T o = detail::stable_sigmoid(a[3 * H + j]);
        a[j] = f, a[H + j] = i, a[2 * H + j] = cand, a[3 * H + j] = o;
        c[j] = f * (c_prev ? c_prev[j] : T(0)) + i * cand;
        h[j] = o * std::tanh(c[j]);
      }
    }
  }

  std::vector<std::size_t> parents{seq.id};
  for (auto* w : gates_w) parents.push_back(g.param(*w).id);
  for (auto* b : gates_b) parents.push_back(g.param(*b).id);
  return g.make(std::move(out), parents, [parents, saved, Wh, Wx, B, n, D, H, reverse](Graph<T>& g, std::size_t self) {
    const auto& go = g.grad(self);
    const auto& hs = g.value(self);
    const auto& cs = saved->cells;
    const auto& gates = saved->gates;
    MatR<T> dA(B * n, 4 * H);
    MatR<T> dh_next = MatR<T>::Zero(B, H), dc_next = MatR<T>::Zero(B, H);
    MatR<T> dWh = MatR<T>::Zero(4 * H, H);
    const Eigen::OuterStride<> gstride(static_cast<Eigen::Index>(n * 4 * H)), hstride(static_cast<Eigen::Index>(n * H));
    for (std::size_t s = n; s-- > 0;) {
      const std::size_t t = reverse ? n - 1 - s : s;
      const std::size_t tp = reverse ? t + 1 : t - 1;
      for (std::size_t b = 0; b < B; ++b) {
        const T* a = gates.data() + (b * n + t) * 4 * H;
        T* da = dA.data() + (b * n + t) * 4 * H;
        const T* c = cs.ptr() + (b * n + t) * H;
        const T* c_prev = s > 0 ? cs.ptr() + (b * n + tp) * H : nullptr;
        for (std::size_t j = 0; j < H; ++j) {
          const T f = a[j], i = a[H + j], cand = a[2 * H + j], o = a[3 * H + j];
          const T dh = go[(b * n + t) * H + j] + dh_next(b, j);
          const T tc = std::tanh(c[j]);
          const T dc = dh * o * (T(1) - tc * tc) + dc_next(b, j);
          da[j] = dc * (c_prev ? c_prev[j] : T(0)) * f * (T(1) - f);
          da[H + j] = dc * cand * i * (T(1) - i);
          da[2 * H + j] = dc * i * (T(1) - cand * cand);
          da[3 * H + j] = dh * tc * o * (T(1) - o);
          dc_next(b, j) = dc * f;
        }
      }
      CStrided dAt(dA.data() + t * 4 * H, B, 4 * H, gstride);
      if (s > 0) {
        dh_next.noalias() = dAt * Wh;
        dWh.noalias() += dAt.transpose() * CStrided(hs.ptr() + tp * H, B, H, hstride);
      }
    }
    const std::size_t sq = parents[0];
    detail::accumulate(g, sq, [&](Tensor<T>& gx) { MapR<T>(gx.ptr(), B * n, D).noalias() += dA * Wx; });
    const MatR<T> dWx = dA.transpose() * CMapR<T>(g.value(sq).ptr(), B * n, D);
    const auto db = dA.colwise().sum();
    for (std::size_t k = 0; k < 4; ++k) {
      detail::accumulate(g, parents[1 + k], [&](Tensor<T>& gw) {
        MapR<T> G(gw.ptr(), H, H + D);
        G.leftCols(H) += dWh.middleRows(k * H, H);
        G.rightCols(D) += dWx.middleRows(k * H, H);
      });
      detail::accumulate(g, parents[5 + k], [&](Tensor<T>& gb) {
        for (std::size_t j = 0; j < H; ++j) gb[j] += db(k * H + j);
      });
    }
  });
}

enum class BlstmMerge { product, concat };

inline std::string to_string(BlstmMerge m) { return m == BlstmMerge::product ? "product" : "concat"; }
inline BlstmMerge blstm_merge_from_string(const std::string& s) {
  if (s == "product") return BlstmMerge::product;
  if (s == "concat") return BlstmMerge::concat;
  throw std::invalid_argument("unknown BLSTM merge '" + s + "'");
}

/// Forward and backward passes over seq [B, T, D], merged per time step.
template <typename T>
Var<T> blstm_layer(Var<T> seq, LstmParams<T>& fwd, LstmParams<T>& bwd, BlstmMerge merge = BlstmMerge::product) {
  const auto hf = lstm_sequence(seq, fwd, false);
  const auto hb = lstm_sequence(seq, bwd, true);
  return merge == BlstmMerge::product ? mul(hf, hb) : concat_last<T>({hf, hb});
}

}  // namespace fluentnet::nn
