#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "fluentnet/nn/graph.hpp"

namespace fluentnet::nn {

namespace detail {

template <typename T>
using MatR = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapR = Eigen::Map<MatR<T>>;
template <typename T>
using CMapR = Eigen::Map<const MatR<T>>;

inline void shape_check(bool ok, const std::string& op, const std::string& detail) {
  if (!ok) throw std::invalid_argument(op + ": shape mismatch " + detail);
}

template <typename T>
void require_same_shape(const Var<T>& a, const Var<T>& b, const std::string& op) {
  shape_check(a.shape() == b.shape(), op, shape_string(a.shape()) + " vs " + shape_string(b.shape()));
}

template <typename T>
void require_rank(const Var<T>& a, std::size_t rank, const std::string& op) {
  shape_check(a.shape().size() == rank, op, "expected rank " + std::to_string(rank) + ", got " + shape_string(a.shape()));
}

template <typename T>
T stable_sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

/// Adds `src` into the gradient of node `id` when it needs one.
template <typename T, typename Fn>
void accumulate(Graph<T>& g, std::size_t id, Fn&& fn) {
  if (!g.needs_grad(id)) return;
  fn(g.grad(id));
}

}  // namespace detail

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  detail::require_same_shape(a, b, "add");
  Tensor<T> out = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return a.graph->make(std::move(out), {a.id, b.id}, [a = a.id, b = b.id](Graph<T>& g, std::size_t self) {
    const auto& go = g.grad(self);
    for (auto p : {a, b})
      detail::accumulate(g, p, [&](Tensor<T>& gp) {
        for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += go[i];
      });
  });
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
  detail::require_same_shape(a, b, "mul");
  Tensor<T> out = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return a.graph->make(std::move(out), {a.id, b.id}, [a = a.id, b = b.id](Graph<T>& g, std::size_t self) {
    const auto& go = g.grad(self);
    const auto& av = g.value(a);
    const auto& bv = g.value(b);
    detail::accumulate(g, a, [&](Tensor<T>& ga) {
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += go[i] * bv[i];
    });
    detail::accumulate(g, b, [&](Tensor<T>& gb) {
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += go[i] * av[i];
    });
  });
}

template <typename T>
Var<T> scale(Var<T> a, T s) {
  Tensor<T> out = a.value();
  for (auto& v : out.data) v *= s;
  return a.graph->make(std::move(out), {a.id}, [a = a.id, s](Graph<T>& g, std::size_t self) {
    const auto& go = g.grad(self);
    detail::accumulate(g, a, [&](Tensor<T>& ga) {
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += s * go[i];
    });
  });
}

template <typename T>
Var<T> relu(Var<T> a) {
  Tensor<T> out = a.value();
  for (auto& v : out.data) v = v > T(0) ? v : T(0);
  auto* graph = a.graph;
  if (graph->track_kinks) {
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      word = (word << 1) | (out[i] > T(0) ? 1u : 0u);
      if (i % 64 == 63) graph->mix_kinks(word), word = 0;
    }
    graph->mix_kinks(word);
  }
  return graph->make(std::move(out), {a.id}, [a = a.id](Graph<T>& g, std::size_t self) {
    const auto& go = g.grad(self);
    const auto& y = g.value(self);
    detail::accumulate(g, a, [&](Tensor<T>& ga) {
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += y[i] > T(0) ? go[i] : T(0);
    });
  });
}

template <typename T>
Var<T> sigmoid(Var<T> a) {
  Tensor<T> out = a.value();
  for (auto& v : out.data) v = detail::stable_sigmoid(v);
  return a.graph->make(std::move(out), {a.id}, [a = a.id](Graph<T>& g, std::size_t self) {
    const auto& go = g.grad(self);
    const auto& y = g.value(self);
    detail::accumulate(g, a, [&](Tensor<T>& ga) {
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += go[i] * y[i] * (T(1) - y[i]);
    });
  });
}

template <typename T>
Var<T> tanh(Var<T> a) {
  Tensor<T> out = a.value();
  for (auto& v : out.data) v = std::tanh(v);
  return a.graph->make(std::move(out), {a.id}, [a = a.id](Graph<T>& g, std::size_t self) {
    const auto& go = g.grad(self);
    const auto& y = g.value(self);
    detail::accumulate(g, a, [&](Tensor<T>& ga) {
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += go[i] * (T(1) - y[i] * y[i]);
    });
  });
}

template <typename T>
Var<T> reshape(Var<T> a, Shape shape) {
  detail::shape_check(shape_size(shape) == a.value().size(), "reshape", shape_string(a.shape()) + " -> " + shape_string(shape));
  Tensor<T> out(std::move(shape), a.value().data);
  return a.graph->make(std::move(out), {a.id}, [a = a.id](Graph<T>& g, std::size_t self) {
    const auto& go = g.grad(self);
    detail::accumulate(g, a, [&](Tensor<T>& ga) {
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += go[i];
    });
  });
}

/// Sum of all elements, shape [1].
template <typename T>
Var<T> sum(Var<T> a) {
  T s = 0;
  for (T v : a.value().data) s += v;
  return a.graph->make(Tensor<T>({1}, s), {a.id}, [a = a.id](Graph<T>& g, std::size_t self) {
    const T go = g.grad(self)[0];
    detail::accumulate(g, a, [&](Tensor<T>& ga) {
      for (auto& v : ga.data) v += go;
    });
  });
}

template <typename T>
Var<T> mean(Var<T> a) {
  return scale(sum(a), T(1) / static_cast<T>(a.value().size()));
}

/// Inner product of two equally shaped tensors, shape [1].
template <typename T>
Var<T> dot(Var<T> a, Var<T> b) {
  detail::require_same_shape(a, b, "dot");
  return sum(mul(a, b));
}

/// y = x W^T + b for x [B, in], W [out, in], b [out] (b may be omitted).
template <typename T>
Var<T> dense(Var<T> x, Var<T> w, const Var<T>* b = nullptr) {
  detail::require_rank(x, 2, "dense");
  detail::require_rank(w, 2, "dense");
  const std::size_t batch = x.dim(0), in = x.dim(1), out_dim = w.dim(0);
  detail::shape_check(w.dim(1) == in, "dense", "input " + shape_string(x.shape()) + " weights " + shape_string(w.shape()));
  if (b) detail::shape_check(b->shape() == Shape{out_dim}, "dense", "bias " + shape_string(b->shape()));
  Tensor<T> out({batch, out_dim});
  detail::MapR<T> Y(out.ptr(), batch, out_dim);
  Y.noalias() = detail::CMapR<T>(x.value().ptr(), batch, in) * detail::CMapR<T>(w.value().ptr(), out_dim, in).transpose();
  if (b)
    for (std::size_t r = 0; r < batch; ++r)
      for (std::size_t c = 0; c < out_dim; ++c) Y(r, c) += b->value()[c];
  std::vector<std::size_t> parents{x.id, w.id};
  if (b) parents.push_back(b->id);
  const bool has_bias = b != nullptr;
  return x.graph->make(std::move(out), parents, [x = x.id, w = w.id, bid = b ? b->id : 0, has_bias, batch, in, out_dim](Graph<T>& g, std::size_t self) {
    detail::CMapR<T> dY(g.grad(self).ptr(), batch, out_dim);
    detail::accumulate(g, x, [&](Tensor<T>& gx) {
      detail::MapR<T>(gx.ptr(), batch, in).noalias() += dY * detail::CMapR<T>(g.value(w).ptr(), out_dim, in);
    });
    detail::accumulate(g, w, [&](Tensor<T>& gw) {
      detail::MapR<T>(gw.ptr(), out_dim, in).noalias() += dY.transpose() * detail::CMapR<T>(g.value(x).ptr(), batch, in);
    });
    if (has_bias)
      detail::accumulate(g, bid, [&](Tensor<T>& gb) {
        for (std::size_t r = 0; r < batch; ++r)
          for (std::size_t c = 0; c < out_dim; ++c) gb[c] += dY(r, c);
      });
  });
}

template <typename T>
Var<T> dense(Var<T> x, Var<T> w, Var<T> b) {
  return dense(x, w, &b);
}

/// Concatenates along the last axis; all leading dimensions must match.
template <typename T>
Var<T> concat_last(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_last: no inputs");
  Shape lead = parts[0].shape();
  lead.pop_back();
  std::vector<std::size_t> widths, ids;
  std::size_t total = 0;
  for (const auto& p : parts) {
    Shape l = p.shape();
    const std::size_t w = l.back();
    l.pop_back();
    detail::shape_check(l == lead, "concat_last", shape_string(p.shape()) + " vs " + shape_string(parts[0].shape()));
    widths.push_back(w);
    ids.push_back(p.id);
    total += w;
  }
  const std::size_t rows = shape_size(lead);
  Shape shape = lead;
  shape.push_back(total);
  Tensor<T> out(shape);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& v = parts[k].value();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(v.ptr() + r * widths[k], widths[k], out.ptr() + r * total + offset);
    offset += widths[k];
  }
  return parts[0].graph->make(std::move(out), ids, [ids, widths, rows, total](Graph<T>& g, std::size_t self) {
    const auto& go = g.grad(self);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      detail::accumulate(g, ids[k], [&](Tensor<T>& gp) {
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < widths[k]; ++c) gp[r * widths[k] + c] += go[r * total + offset + c];
      });
      offset += widths[k];
    }
  });
}

/// seq [B, T, H] -> [B, H] at time index t.
template <typename T>
Var<T> time_step(Var<T> seq, std::size_t t) {
  detail::require_rank(seq, 3, "time_step");
  const std::size_t B = seq.dim(0), steps = seq.dim(1), H = seq.dim(2);
  detail::shape_check(t < steps, "time_step", "index " + std::to_string(t) + " of " + shape_string(seq.shape()));
  Tensor<T> out({B, H});
  for (std::size_t b = 0; b < B; ++b) std::copy_n(seq.value().ptr() + (b * steps + t) * H, H, out.ptr() + b * H);
  return seq.graph->make(std::move(out), {seq.id}, [s = seq.id, B, steps, H, t](Graph<T>& g, std::size_t self) {
    const auto& go = g.grad(self);
    detail::accumulate(g, s, [&](Tensor<T>& gs) {
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t h = 0; h < H; ++h) gs[(b * steps + t) * H + h] += go[b * H + h];
    });
  });
}

/// T tensors of shape [B, H] -> [B, T, H].
template <typename T>
Var<T> stack_time(const std::vector<Var<T>>& steps) {
  if (steps.empty()) throw std::invalid_argument("stack_time: empty sequence");
  detail::require_rank(steps[0], 2, "stack_time");
  const std::size_t B = steps[0].dim(0), H = steps[0].dim(1), n = steps.size();
  Tensor<T> out({B, n, H});
  std::vector<std::size_t> ids;
  for (std::size_t t = 0; t < n; ++t) {
    detail::require_same_shape(steps[t], steps[0], "stack_time");
    ids.push_back(steps[t].id);
    for (std::size_t b = 0; b < B; ++b) std::copy_n(steps[t].value().ptr() + b * H, H, out.ptr() + (b * n + t) * H);
  }
  return steps[0].graph->make(std::move(out), ids, [ids, B, H, n](Graph<T>& g, std::size_t self) {
    const auto& go = g.grad(self);
    for (std::size_t t = 0; t < n; ++t)
      detail::accumulate(g, ids[t], [&](Tensor<T>& gp) {
        for (std::size_t b = 0; b < B; ++b)
          for (std::size_t h = 0; h < H; ++h) gp[b * H + h] += go[(b * n + t) * H + h];
      });
  });
}

/// Per-channel spatial mean: [B, C, H, W] -> [B, C].
template <typename T>
Var<T> global_avg_pool(Var<T> x) {
  detail::require_rank(x, 4, "global_avg_pool");
  const std::size_t B = x.dim(0), C = x.dim(1), HW = x.dim(2) * x.dim(3);
  if (HW == 0) throw std::invalid_argument("global_avg_pool: empty spatial dimensions");
  Tensor<T> out({B, C});
  const auto& v = x.value();
  for (std::size_t bc = 0; bc < B * C; ++bc) {
    T s = 0;
    for (std::size_t i = 0; i < HW; ++i) s += v[bc * HW + i];
    out[bc] = s / static_cast<T>(HW);
  }
  return x.graph->make(std::move(out), {x.id}, [x = x.id, B, C, HW](Graph<T>& g, std::size_t self) {
    const auto& go = g.grad(self);
    detail::accumulate(g, x, [&](Tensor<T>& gx) {
      for (std::size_t bc = 0; bc < B * C; ++bc) {
        const T d = go[bc] / static_cast<T>(HW);
        for (std::size_t i = 0; i < HW; ++i) gx[bc * HW + i] += d;
      }
    });
  });
}

/// x [B, C, H, W] scaled by s [B, C] broadcast over space.
template <typename T>
Var<T> channel_scale(Var<T> x, Var<T> s) {
  detail::require_rank(x, 4, "channel_scale");
  const std::size_t B = x.dim(0), C = x.dim(1), HW = x.dim(2) * x.dim(3);
  detail::shape_check(s.shape() == Shape{B, C}, "channel_scale", shape_string(x.shape()) + " by " + shape_string(s.shape()));
  Tensor<T> out = x.value();
  for (std::size_t bc = 0; bc < B * C; ++bc)
    for (std::size_t i = 0; i < HW; ++i) out[bc * HW + i] *= s.value()[bc];
  return x.graph->make(std::move(out), {x.id, s.id}, [x = x.id, s = s.id, B, C, HW](Graph<T>& g, std::size_t self) {
    const auto& go = g.grad(self);
    const auto& xv = g.value(x);
    const auto& sv = g.value(s);
    detail::accumulate(g, x, [&](Tensor<T>& gx) {
      for (std::size_t bc = 0; bc < B * C; ++bc)
        for (std::size_t i = 0; i < HW; ++i) gx[bc * HW + i] += go[bc * HW + i] * sv[bc];
    });
    detail::accumulate(g, s, [&](Tensor<T>& gs) {
      for (std::size_t bc = 0; bc < B * C; ++bc) {
        T acc = 0;
        for (std::size_t i = 0; i < HW; ++i) acc += go[bc * HW + i] * xv[bc * HW + i];
        gs[bc] += acc;
      }
    });
  });
}

/// CNN output [B, C, H(time), W(freq)] -> sequence [B, H, C] by averaging over W.
template <typename T>
Var<T> freq_mean_sequence(Var<T> x) {
  detail::require_rank(x, 4, "freq_mean_sequence");
  const std::size_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  if (W == 0 || H == 0) throw std::invalid_argument("freq_mean_sequence: empty spatial dimensions");
  Tensor<T> out({B, H, C});
  const auto& v = x.value();
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t h = 0; h < H; ++h) {
        T s = 0;
        const T* row = v.ptr() + ((b * C + c) * H + h) * W;
        for (std::size_t w = 0; w < W; ++w) s += row[w];
        out[(b * H + h) * C + c] = s / static_cast<T>(W);
      }
  return x.graph->make(std::move(out), {x.id}, [x = x.id, B, C, H, W](Graph<T>& g, std::size_t self) {
    const auto& go = g.grad(self);
    detail::accumulate(g, x, [&](Tensor<T>& gx) {
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t h = 0; h < H; ++h) {
            const T d = go[(b * H + h) * C + c] / static_cast<T>(W);
            T* row = gx.ptr() + ((b * C + c) * H + h) * W;
            for (std::size_t w = 0; w < W; ++w) row[w] += d;
          }
    });
  });
}

/// Inverted dropout; identity in eval mode or at rate 0.
template <typename T>
Var<T> dropout(Var<T> x, double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout: rate must be in [0, 1)");
  auto& graph = *x.graph;
  if (graph.mode == Mode::eval || rate == 0.0) return x;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  Tensor<T> mask(x.shape());
  for (auto& m : mask.data) m = graph.rng.uniform() < rate ? T(0) : keep_scale;
  Tensor<T> out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return graph.make(std::move(out), {x.id}, [x = x.id, mask = std::move(mask)](Graph<T>& g, std::size_t self) {
    const auto& go = g.grad(self);
    detail::accumulate(g, x, [&](Tensor<T>& gx) {
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += go[i] * mask[i];
    });
  });
}

/// Dot-product alignment scores: seq [B, T, H], query [B, H] -> [B, T].
template <typename T>
Var<T> attention_scores(Var<T> seq, Var<T> query) {
  detail::require_rank(seq, 3, "attention_scores");
  const std::size_t B = seq.dim(0), n = seq.dim(1), H = seq.dim(2);
  if (n == 0) throw std::invalid_argument("attention_scores: empty state list");
  detail::shape_check(query.shape() == Shape{B, H}, "attention_scores", shape_string(seq.shape()) + " query " + shape_string(query.shape()));
  Tensor<T> out({B, n});
  const auto& sv = seq.value();
  const auto& qv = query.value();
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t t = 0; t < n; ++t) {
      T s = 0;
      for (std::size_t h = 0; h < H; ++h) s += qv[b * H + h] * sv[(b * n + t) * H + h];
      out[b * n + t] = s;
    }
  return seq.graph->make(std::move(out), {seq.id, query.id}, [s = seq.id, q = query.id, B, n, H](Graph<T>& g, std::size_t self) {
    const auto& go = g.grad(self);
    const auto& sv = g.value(s);
    const auto& qv = g.value(q);
    detail::accumulate(g, s, [&](Tensor<T>& gs) {
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < n; ++t)
          for (std::size_t h = 0; h < H; ++h) gs[(b * n + t) * H + h] += go[b * n + t] * qv[b * H + h];
    });
    detail::accumulate(g, q, [&](Tensor<T>& gq) {
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < n; ++t)
          for (std::size_t h = 0; h < H; ++h) gq[b * H + h] += go[b * n + t] * sv[(b * n + t) * H + h];
    });
  });
}

/// Row-wise softmax of a [B, T] tensor.
template <typename T>
Var<T> softmax_rows(Var<T> x) {
  detail::require_rank(x, 2, "softmax_rows");
  const std::size_t B = x.dim(0), n = x.dim(1);
  if (n == 0) throw std::invalid_argument("softmax_rows: empty rows");
  Tensor<T> out = x.value();
  for (std::size_t b = 0; b < B; ++b) {
    T* row = out.ptr() + b * n;
    const T mx = *std::max_element(row, row + n);
    T z = 0;
    for (std::size_t t = 0; t < n; ++t) z += (row[t] = std::exp(row[t] - mx));
    for (std::size_t t = 0; t < n; ++t) row[t] /= z;
  }
  return x.graph->make(std::move(out), {x.id}, [x = x.id, B, n](Graph<T>& g, std::size_t self) {
    const auto& go = g.grad(self);
    const auto& y = g.value(self);
    detail::accumulate(g, x, [&](Tensor<T>& gx) {
      for (std::size_t b = 0; b < B; ++b) {
        T inner = 0;
        for (std::size_t t = 0; t < n; ++t) inner += go[b * n + t] * y[b * n + t];
        for (std::size_t t = 0; t < n; ++t) gx[b * n + t] += y[b * n + t] * (go[b * n + t] - inner);
      }
    });
  });
}

/// Weighted sum over time: seq [B, T, H], alpha [B, T] -> [B, H].
template <typename T>
Var<T> attend(Var<T> seq, Var<T> alpha) {
  detail::require_rank(seq, 3, "attend");
  const std::size_t B = seq.dim(0), n = seq.dim(1), H = seq.dim(2);
  detail::shape_check(alpha.shape() == Shape{B, n}, "attend", shape_string(seq.shape()) + " weights " + shape_string(alpha.shape()));
  Tensor<T> out({B, H});
  const auto& sv = seq.value();
  const auto& av = alpha.value();
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t t = 0; t < n; ++t)
      for (std::size_t h = 0; h < H; ++h) out[b * H + h] += av[b * n + t] * sv[(b * n + t) * H + h];
  return seq.graph->make(std::move(out), {seq.id, alpha.id}, [s = seq.id, a = alpha.id, B, n, H](Graph<T>& g, std::size_t self) {
    const auto& go = g.grad(self);
    const auto& sv = g.value(s);
    const auto& av = g.value(a);
    detail::accumulate(g, s, [&](Tensor<T>& gs) {
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < n; ++t)
          for (std::size_t h = 0; h < H; ++h) gs[(b * n + t) * H + h] += av[b * n + t] * go[b * H + h];
    });
    detail::accumulate(g, a, [&](Tensor<T>& ga) {
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < n; ++t) {
          T acc = 0;
          for (std::size_t h = 0; h < H; ++h) acc += go[b * H + h] * sv[(b * n + t) * H + h];
          ga[b * n + t] += acc;
        }
    });
  });
}

inline constexpr double kBceClamp = 1e-7;

/// Mean binary cross-entropy of probabilities against 0/1 targets, shape [1].
/// Probabilities are clamped to [1e-7, 1 - 1e-7]; the clamp has zero gradient.
template <typename T>
Var<T> bce(Var<T> p, const std::vector<T>& targets) {
  const auto& pv = p.value();
  detail::shape_check(pv.size() == targets.size() && !targets.empty(), "bce",
                      shape_string(p.shape()) + " vs " + std::to_string(targets.size()) + " targets");
  const T lo = static_cast<T>(kBceClamp), hi = T(1) - static_cast<T>(kBceClamp);
  double total = 0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double q = std::clamp(pv[i], lo, hi);
    total += targets[i] * std::log(q) + (1.0 - targets[i]) * std::log(1.0 - q);
  }
  const T loss = static_cast<T>(-total / static_cast<double>(pv.size()));
  return p.graph->make(Tensor<T>({1}, loss), {p.id}, [p = p.id, targets, lo, hi](Graph<T>& g, std::size_t self) {
    const T go = g.grad(self)[0];
    const auto& pv = g.value(p);
    const T n = static_cast<T>(pv.size());
    detail::accumulate(g, p, [&](Tensor<T>& gp) {
      for (std::size_t i = 0; i < pv.size(); ++i) {
        if (pv[i] < lo || pv[i] > hi) continue;
        const T y = targets[i], q = pv[i];
        gp[i] += go * (-(y / q) + (T(1) - y) / (T(1) - q)) / n;
      }
    });
  });
}

}  // namespace fluentnet::nn
