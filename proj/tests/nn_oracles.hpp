#pragma once

// Naive scalar re-implementations used as independent oracles.

#include <cmath>
#include <vector>

namespace fluentnet::testing {

using Vec = std::vector<double>;

inline double sigm(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// x [B,C,H,W], w [O,C,k,k] -> [B,O,Ho,Wo] by direct summation.
inline Vec conv_naive(const Vec& x, std::size_t B, std::size_t C, std::size_t H, std::size_t W, const Vec& w, std::size_t O,
                      std::size_t k, std::size_t sh, std::size_t sw, std::size_t pad, std::size_t& Ho, std::size_t& Wo) {
  Ho = (H + 2 * pad - k) / sh + 1;
  Wo = (W + 2 * pad - k) / sw + 1;
  Vec out(B * O * Ho * Wo, 0.0);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t o = 0; o < O; ++o)
      for (std::size_t i = 0; i < Ho; ++i)
        for (std::size_t j = 0; j < Wo; ++j) {
          double s = 0;
          for (std::size_t c = 0; c < C; ++c)
            for (std::size_t a = 0; a < k; ++a)
              for (std::size_t d = 0; d < k; ++d) {
                const long r = static_cast<long>(i * sh + a) - static_cast<long>(pad);
                const long q = static_cast<long>(j * sw + d) - static_cast<long>(pad);
                if (r < 0 || q < 0 || r >= static_cast<long>(H) || q >= static_cast<long>(W)) continue;
                s += x[((b * C + c) * H + r) * W + q] * w[((o * C + c) * k + a) * k + d];
              }
          out[((b * O + o) * Ho + i) * Wo + j] = s;
        }
  return out;
}

/// Training-mode batch norm over axis 1 of [B, C, inner].
inline Vec bn_naive(const Vec& x, std::size_t B, std::size_t C, std::size_t inner, const Vec& gamma, const Vec& beta) {
  Vec out(x.size());
  for (std::size_t c = 0; c < C; ++c) {
    double m = 0, v = 0;
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t i = 0; i < inner; ++i) m += x[(b * C + c) * inner + i];
    m /= static_cast<double>(B * inner);
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t i = 0; i < inner; ++i) v += std::pow(x[(b * C + c) * inner + i] - m, 2);
    v /= static_cast<double>(B * inner);
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t i = 0; i < inner; ++i)
        out[(b * C + c) * inner + i] = gamma[c] * (x[(b * C + c) * inner + i] - m) / std::sqrt(v + 1e-5) + beta[c];
  }
  return out;
}

/// SE unit on [B, C, HW] with W1 [r, C], W2 [C, r].
inline Vec se_naive(const Vec& x, std::size_t B, std::size_t C, std::size_t HW, const Vec& W1, const Vec& b1, const Vec& W2,
                    const Vec& b2, std::size_t r) {
  Vec out(x.size());
  for (std::size_t b = 0; b < B; ++b) {
    Vec z(C), hdn(r), s(C);
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t i = 0; i < HW; ++i) z[c] += x[(b * C + c) * HW + i];
      z[c] /= static_cast<double>(HW);
    }
    for (std::size_t j = 0; j < r; ++j) {
      double a = b1[j];
      for (std::size_t c = 0; c < C; ++c) a += W1[j * C + c] * z[c];
      hdn[j] = std::max(0.0, a);
    }
    for (std::size_t c = 0; c < C; ++c) {
      double a = b2[c];
      for (std::size_t j = 0; j < r; ++j) a += W2[c * r + j] * hdn[j];
      s[c] = sigm(a);
    }
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t i = 0; i < HW; ++i) out[(b * C + c) * HW + i] = x[(b * C + c) * HW + i] * s[c];
  }
  return out;
}

/// One LSTM step for a single example, gate weights [H, H+D] on [h, x].
struct ScalarLstm {
  std::size_t H, D;
  Vec Wf, Wi, Wc, Wo, bf, bi, bc, bo;

  void step(const Vec& x, Vec& h, Vec& c) const {
    Vec z(h);
    z.insert(z.end(), x.begin(), x.end());
    Vec hn(H), cn(H);
    for (std::size_t j = 0; j < H; ++j) {
      double af = bf[j], ai = bi[j], ac = bc[j], ao = bo[j];
      for (std::size_t k = 0; k < H + D; ++k) {
        af += Wf[j * (H + D) + k] * z[k];
        ai += Wi[j * (H + D) + k] * z[k];
        ac += Wc[j * (H + D) + k] * z[k];
        ao += Wo[j * (H + D) + k] * z[k];
      }
      const double f = sigm(af), i = sigm(ai), cand = std::tanh(ac), o = sigm(ao);
      cn[j] = f * c[j] + i * cand;
      hn[j] = o * std::tanh(cn[j]);
    }
    h = hn;
    c = cn;
  }

  /// Hidden states for a [T][D] sequence, optionally reversed in time.
  std::vector<Vec> run(const std::vector<Vec>& xs, bool reverse) const {
    std::vector<Vec> out(xs.size());
    Vec h(H, 0.0), c(H, 0.0);
    for (std::size_t s = 0; s < xs.size(); ++s) {
      const std::size_t t = reverse ? xs.size() - 1 - s : s;
      step(xs[t], h, c);
      out[t] = h;
    }
    return out;
  }
};

/// Dot-product global attention for one example; returns alpha and fills context.
inline Vec attention_naive(const std::vector<Vec>& states, Vec& context) {
  const auto& q = states.back();
  Vec scores(states.size());
  double mx = -1e300;
  for (std::size_t t = 0; t < states.size(); ++t) {
    double s = 0;
    for (std::size_t h = 0; h < q.size(); ++h) s += q[h] * states[t][h];
    scores[t] = s;
    mx = std::max(mx, s);
  }
  double z = 0;
  for (auto& s : scores) z += (s = std::exp(s - mx));
  for (auto& s : scores) s /= z;
  context.assign(q.size(), 0.0);
  for (std::size_t t = 0; t < states.size(); ++t)
    for (std::size_t h = 0; h < q.size(); ++h) context[h] += scores[t] * states[t][h];
  return scores;
}

}  // namespace fluentnet::testing
