#include <gtest/gtest.h>

#include "fluentnet/nn/gradcheck_suite.hpp"
#include "nn_oracles.hpp"

using namespace fluentnet;
using namespace fluentnet::nn;
namespace oracle = fluentnet::testing;

namespace {

Tensor<double> random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor<double> t(std::move(shape));
  for (auto& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

void fill_random(Parameter<double>& p, Rng& rng, double lo = -1.0, double hi = 1.0) {
  for (auto& v : p.value.data) v = rng.uniform(lo, hi);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  EXPECT_EQ(a.size(), b.size());
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

oracle::ScalarLstm scalar_copy(const LstmParams<double>& p) {
  return {p.hidden, p.input, p.W_f.value.data, p.W_i.value.data, p.W_C.value.data, p.W_o.value.data,
          p.b_f.value.data, p.b_i.value.data, p.b_C.value.data, p.b_o.value.data};
}

}  // namespace

TEST(Tensor, ShapeChecks) {
  EXPECT_THROW(Tensor<double>({2, 3}, std::vector<double>(5)), std::invalid_argument);
  Graph<double> g;
  const auto a = g.constant(Tensor<double>({2, 3}));
  const auto b = g.constant(Tensor<double>({3, 2}));
  EXPECT_THROW(add(a, b), std::invalid_argument);
  EXPECT_THROW(dense(a, b), std::invalid_argument);
  EXPECT_THROW(conv2d(g.constant(Tensor<double>({1, 2, 3, 3})), g.constant(Tensor<double>({1, 3, 3, 3}))), std::invalid_argument);
}

TEST(Conv2d, ZeroAndOnes) {
  Graph<double> g;
  const auto zero = conv2d(g.constant(Tensor<double>({1, 2, 4, 4})), g.constant(Tensor<double>({3, 2, 3, 3}, 0.7)), {1, 1, 1, 1});
  for (double v : zero.value().data) EXPECT_EQ(v, 0.0);
  const auto nine = conv2d(g.constant(Tensor<double>({1, 1, 3, 3}, 1.0)), g.constant(Tensor<double>({1, 1, 3, 3}, 1.0)));
  ASSERT_EQ(nine.shape(), (Shape{1, 1, 1, 1}));
  EXPECT_EQ(nine.value()[0], 9.0);
}

TEST(Conv2d, MatchesDirectSum) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const std::size_t B = 2, C = 1 + seed % 3, H = 5 + seed % 4, W = 4 + seed % 5, O = 2 + seed % 2, k = seed % 2 ? 3 : 1;
    const std::size_t sh = 1 + seed % 2, sw = 1 + (seed / 2) % 2, pad = k == 3 ? 1 : 0;
    const auto x = random_tensor({B, C, H, W}, rng), w = random_tensor({O, C, k, k}, rng);
    Graph<double> g;
    const auto y = conv2d(g.constant(x), g.constant(w), {sh, sw, pad, pad});
    std::size_t Ho, Wo;
    const auto ref = oracle::conv_naive(x.data, B, C, H, W, w.data, O, k, sh, sw, pad, Ho, Wo);
    ASSERT_EQ(y.shape(), (Shape{B, O, Ho, Wo}));
    EXPECT_LT(max_abs_diff(y.value().data, ref), 1e-12) << seed;
  }
}

TEST(BatchNorm, NormalizedBatchIsNearlyUnchanged) {
  Graph<double> g(Mode::train);
  // Per channel: values with mean 0 and variance 1.
  const auto x = Tensor<double>({4, 1, 1, 1}, {1.0, -1.0, 1.0, -1.0});
  BatchNormState<double> state(1);
  const auto y = batch_norm(g.constant(x), g.constant(Tensor<double>({1}, 1.0)), g.constant(Tensor<double>({1}, 0.0)), state);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(y.value()[i], x[i], 1e-5);
  EXPECT_NEAR(state.running_mean[0], 0.0, 1e-15);
  EXPECT_NEAR(state.running_var[0], 0.9 * 1.0 + 0.1 * 1.0, 1e-15);
}

TEST(BatchNorm, TrainMatchesOracleAndUpdatesRunningStats) {
  Rng rng(3);
  const auto x = random_tensor({3, 2, 2, 3}, rng, -2, 3);
  Graph<double> g(Mode::train);
  BatchNormState<double> state(2);
  const auto y = batch_norm(g.constant(x), g.constant(Tensor<double>({2}, {1.5, 0.5})), g.constant(Tensor<double>({2}, {0.1, -0.3})), state);
  EXPECT_LT(max_abs_diff(y.value().data, oracle::bn_naive(x.data, 3, 2, 6, {1.5, 0.5}, {0.1, -0.3})), 1e-12);
  double m0 = 0;
  for (std::size_t b = 0; b < 3; ++b)
    for (std::size_t i = 0; i < 6; ++i) m0 += x[(b * 2) * 6 + i];
  EXPECT_NEAR(state.running_mean[0], 0.1 * m0 / 18.0, 1e-12);
}

TEST(BatchNorm, EvalIsAffineAndZeroVarianceIsFinite) {
  BatchNormState<double> state(1);
  state.running_mean[0] = 2.0;
  state.running_var[0] = 4.0;
  Graph<double> g(Mode::eval);
  const auto gamma = g.constant(Tensor<double>({1}, 3.0)), beta = g.constant(Tensor<double>({1}, 1.0));
  const auto y = batch_norm(g.constant(Tensor<double>({2, 1}, {2.0, 4.0})), gamma, beta, state);
  const double a = 3.0 / std::sqrt(4.0 + 1e-5);
  EXPECT_NEAR(y.value()[0], 1.0, 1e-12);
  EXPECT_NEAR(y.value()[1], 1.0 + 2.0 * a, 1e-12);
  Graph<double> t(Mode::train);
  BatchNormState<double> s1(1);
  const auto single = batch_norm(t.constant(Tensor<double>({1, 1, 2, 2}, 5.0)), t.constant(Tensor<double>({1}, 1.0)),
                                 t.constant(Tensor<double>({1}, 0.25)), s1);
  for (double v : single.value().data) EXPECT_EQ(v, 0.25);
}

TEST(Activations, Values) {
  Graph<double> g;
  const auto x = g.constant(Tensor<double>({3}, {-1.0, 0.0, 2.0}));
  EXPECT_EQ(relu(x).value().data, (std::vector<double>{0.0, 0.0, 2.0}));
  EXPECT_EQ(sigmoid(x).value()[1], 0.5);
  EXPECT_EQ(nn::tanh(x).value()[1], 0.0);
  EXPECT_NEAR(sigmoid(x).value()[0], 1.0 / (1.0 + std::exp(1.0)), 1e-15);
  const auto big = sigmoid(g.constant(Tensor<double>({2}, {-800.0, 800.0})));
  EXPECT_EQ(big.value()[0], 0.0);
  EXPECT_EQ(big.value()[1], 1.0);
}

TEST(GlobalAvgPool, ConstantCheckerboardAndGradient) {
  Graph<double> g;
  Tensor<double> x({1, 2, 2, 4});
  for (std::size_t i = 0; i < 8; ++i) x[i] = 3.5;
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 4; ++c) x[8 + r * 4 + c] = (r + c) % 2 ? 1.0 : -1.0;
  const auto in = g.input(x);
  const auto y = global_avg_pool(in);
  EXPECT_EQ(y.value()[0], 3.5);
  EXPECT_EQ(y.value()[1], 0.0);
  g.backward(sum(y));
  for (double v : g.grad(in).data) EXPECT_EQ(v, 1.0 / 8.0);
  EXPECT_THROW(global_avg_pool(g.constant(Tensor<double>({1, 1, 0, 2}))), std::invalid_argument);
}

TEST(Dense, IdentityAndZeroWeights) {
  Graph<double> g;
  const auto x = g.constant(Tensor<double>({2, 3}, {1, 2, 3, 4, 5, 6}));
  Tensor<double> eye({3, 3});
  for (std::size_t i = 0; i < 3; ++i) eye[i * 3 + i] = 1.0;
  EXPECT_EQ(dense(x, g.constant(eye), g.constant(Tensor<double>({3}))).value(), x.value());
  const auto y = dense(x, g.constant(Tensor<double>({2, 3})), g.constant(Tensor<double>({2}, {0.5, -1.0})));
  EXPECT_EQ(y.value().data, (std::vector<double>{0.5, -1.0, 0.5, -1.0}));
}

TEST(Dropout, IdentityCasesAndRate) {
  Graph<double> eval(Mode::eval);
  const auto x = eval.constant(Tensor<double>({100}, 1.0));
  EXPECT_EQ(dropout(x, 0.2).value(), x.value());
  Graph<double> train(Mode::train, 42);
  const auto same = train.constant(Tensor<double>({100}, 1.0));
  EXPECT_EQ(dropout(same, 0.0).value(), same.value());
  const auto big = dropout(train.constant(Tensor<double>({100000}, 1.0)), 0.2);
  std::size_t zeros = 0;
  for (double v : big.value().data) {
    if (v == 0.0) ++zeros;
    else EXPECT_DOUBLE_EQ(v, 1.25);
  }
  EXPECT_NEAR(static_cast<double>(zeros) / 1e5, 0.2, 0.01);
  EXPECT_THROW(dropout(same, 1.0), std::invalid_argument);
}

TEST(SeUnit, SaturationAndRange) {
  Rng rng(4);
  SeUnitParams<double> se("se", 20);
  se.init(rng);
  Graph<double> g;
  const auto x = g.constant(random_tensor({2, 20, 3, 3}, rng));
  constant_init(se.b2, 1000.0);
  EXPECT_LT(max_abs_diff(se_unit(x, se).value().data, x.value().data), 1e-12);
  constant_init(se.b2, -1000.0);
  for (double v : se_unit(x, se).value().data) EXPECT_LT(std::abs(v), 1e-12);
  EXPECT_EQ(se.W1.value.dim(0), 2u);  // ceil(20 / 16)
}

TEST(SeUnit, MatchesCompositionOracleAndScalesInUnitInterval) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const std::size_t C = 4 + seed % 30;
    SeUnitParams<double> se("se", C);
    se.init(rng);
    fill_random(se.b1, rng);
    fill_random(se.b2, rng);
    const auto x = random_tensor({2, C, 3, 2}, rng);
    Graph<double> g;
    const auto xv = g.constant(x);
    const auto y = se_unit(xv, se);
    const auto ref = oracle::se_naive(x.data, 2, C, 6, se.W1.value.data, se.b1.value.data, se.W2.value.data, se.b2.value.data,
                                      se_reduced_width(C));
    EXPECT_LT(max_abs_diff(y.value().data, ref), 1e-12);
    for (double s : se_scales(xv, se).value().data) {
      EXPECT_GT(s, 0.0);
      EXPECT_LT(s, 1.0);
    }
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_LE(std::abs(y.value()[i]), std::abs(x[i]));
  }
}

TEST(SeResnetBlock, ZeroParametersGiveZero) {
  Rng rng(5);
  SeBlockParams<double> block("b", 2, 4, 2, 2);
  block.init(rng);
  for (auto* p : block.parameters()) constant_init(*p, 0.0);
  Graph<double> g(Mode::train);
  const auto y = se_resnet_block(g.constant(random_tensor({2, 2, 6, 8}, rng)), block);
  EXPECT_EQ(y.shape(), (Shape{2, 4, 3, 4}));
  for (double v : y.value().data) EXPECT_EQ(v, 0.0);
}

TEST(SeResnetBlock, ZeroShortcutMatchesComposedReference) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    SeBlockParams<double> block("b", 2, 3, 1, 2);
    block.init(rng);
    constant_init(block.shortcut.weight, 0.0);
    const auto x = random_tensor({2, 2, 5, 6}, rng);
    Graph<double> g(Mode::train);
    const auto y = se_resnet_block(g.constant(x), block);

    std::size_t Ho, Wo;
    auto stage = [&](const std::vector<double>& in, std::size_t C, std::size_t H, std::size_t W, ConvBn<double>& cb,
                     std::size_t sh, std::size_t sw, bool act) {
      auto conv = oracle::conv_naive(in, 2, C, H, W, cb.weight.value.data, 3, 3, sh, sw, 1, Ho, Wo);
      auto out = oracle::bn_naive(conv, 2, 3, Ho * Wo, cb.gamma.value.data, cb.beta.value.data);
      if (act)
        for (auto& v : out) v = std::max(0.0, v);
      return out;
    };
    auto a = stage(x.data, 2, 5, 6, block.conv1, 1, 2, true);
    auto b = stage(a, 3, Ho, Wo, block.conv2, 1, 1, true);
    auto c = stage(b, 3, Ho, Wo, block.conv3, 1, 1, false);
    auto s = oracle::se_naive(c, 2, 3, Ho * Wo, block.se.W1.value.data, block.se.b1.value.data, block.se.W2.value.data,
                              block.se.b2.value.data, 1);
    for (auto& v : s) v = std::max(0.0, v);
    EXPECT_LT(max_abs_diff(y.value().data, s), 1e-10) << seed;
  }
}

TEST(LstmCell, ZeroWeightsAndPerfectMemory) {
  LstmParams<double> p("l", 3, 2);
  Graph<double> g;
  const auto x = g.constant(Tensor<double>({1, 3}, {0.3, -0.2, 0.9}));
  const auto s = lstm_cell(x, g.constant(Tensor<double>({1, 2})), g.constant(Tensor<double>({1, 2})), p);
  for (double v : s.h.value().data) EXPECT_EQ(v, 0.0);
  for (double v : s.cell_state.value().data) EXPECT_EQ(v, 0.0);
  constant_init(p.b_f, 50.0);
  const auto m = lstm_cell(x, g.constant(Tensor<double>({1, 2})), g.constant(Tensor<double>({1, 2}, {0.7, -0.4})), p);
  EXPECT_EQ(m.cell_state.value().data, (std::vector<double>{0.7, -0.4}));
}

TEST(LstmCell, MatchesScalarOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const std::size_t D = 1 + seed % 4, H = 1 + seed % 5;
    LstmParams<double> p("l", D, H);
    p.init(rng);
    for (auto* q : p.parameters()) fill_random(*q, rng);
    const auto x = random_tensor({1, D}, rng), h = random_tensor({1, H}, rng), c = random_tensor({1, H}, rng, -3, 3);
    Graph<double> g;
    const auto s = lstm_cell(g.constant(x), g.constant(h), g.constant(c), p);
    auto hv = h.data, cv = c.data;
    scalar_copy(p).step(x.data, hv, cv);
    EXPECT_LT(max_abs_diff(s.h.value().data, hv), 1e-12);
    EXPECT_LT(max_abs_diff(s.cell_state.value().data, cv), 1e-12);
    for (double v : s.h.value().data) EXPECT_LE(std::abs(v), 1.0);
  }
}

TEST(LstmSequence, FusedMatchesCellsAndGradients) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    LstmParams<double> p("l", 3, 4);
    p.init(rng);
    const bool reverse = seed % 2;
    const auto x = random_tensor({2, 4, 3}, rng);
    Graph<double> g;
    const auto xin = g.input(x);
    const auto fused = lstm_sequence(xin, p, reverse);
    auto h = g.constant(Tensor<double>({2, 4})), c = h;
    std::vector<Var<double>> hs(4);
    for (std::size_t s = 0; s < 4; ++s) {
      const std::size_t t = reverse ? 3 - s : s;
      auto st = lstm_cell(time_step(xin, t), h, c, p);
      h = st.h;
      c = st.cell_state;
      hs[t] = h;
    }
    const auto cells = stack_time(hs);
    EXPECT_LT(max_abs_diff(fused.value().data, cells.value().data), 1e-12);

    // Same gradients through both routes.
    Rng wr(seed + 100);
    const auto r = g.constant(random_tensor({2, 4, 4}, wr));
    for (auto* q : p.parameters()) q->zero_grad();
    {
      Graph<double> ga;
      const auto xa = ga.input(x);
      ga.backward(dot(lstm_sequence(xa, p, reverse), ga.constant(r.value())));
    }
    std::vector<Tensor<double>> fused_grads;
    for (auto* q : p.parameters()) fused_grads.push_back(q->grad), q->zero_grad();
    {
      Graph<double> gb;
      const auto xb = gb.input(x);
      auto hb = gb.constant(Tensor<double>({2, 4})), cb = hb;
      std::vector<Var<double>> out(4);
      for (std::size_t s = 0; s < 4; ++s) {
        const std::size_t t = reverse ? 3 - s : s;
        auto st = lstm_cell(time_step(xb, t), hb, cb, p);
        hb = st.h;
        cb = st.cell_state;
        out[t] = hb;
      }
      gb.backward(dot(stack_time(out), gb.constant(r.value())));
    }
    const auto params = p.parameters();
    for (std::size_t k = 0; k < params.size(); ++k)
      EXPECT_LT(max_abs_diff(fused_grads[k].data, params[k]->grad.data), 1e-12) << params[k]->name;
  }
}

TEST(Blstm, SingleStepMergeIsProduct) {
  Rng rng(7);
  LstmParams<double> f("f", 3, 4), b("b", 3, 4);
  f.init(rng);
  b.init(rng);
  Graph<double> g;
  const auto x = g.constant(random_tensor({1, 1, 3}, rng));
  const auto y = blstm_layer(x, f, b);
  const auto hf = lstm_sequence(x, f), hb = lstm_sequence(x, b, true);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(y.value()[j], hf.value()[j] * hb.value()[j]);
  EXPECT_THROW(blstm_layer(g.constant(Tensor<double>({1, 0, 3})), f, b), std::invalid_argument);
}

TEST(Blstm, PalindromeWithTiedParameters) {
  Rng rng(8);
  LstmParams<double> f("f", 2, 3);
  f.init(rng);
  const std::size_t T = 5;
  Tensor<double> x({1, T, 2});
  for (std::size_t t = 0; t <= T / 2; ++t)
    for (std::size_t d = 0; d < 2; ++d) x[t * 2 + d] = x[(T - 1 - t) * 2 + d] = rng.uniform(-1, 1);
  Graph<double> g;
  const auto y = blstm_layer(g.constant(x), f, f);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t h = 0; h < 3; ++h) EXPECT_NEAR(y.value()[t * 3 + h], y.value()[(T - 1 - t) * 3 + h], 1e-15);
}

TEST(Blstm, MatchesUnrolledOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    LstmParams<double> f("f", 2, 3), b("b", 2, 3);
    f.init(rng);
    b.init(rng);
    for (auto* q : f.parameters()) fill_random(*q, rng);
    for (auto* q : b.parameters()) fill_random(*q, rng);
    const auto x = random_tensor({1, 3, 2}, rng);
    std::vector<oracle::Vec> xs{{x[0], x[1]}, {x[2], x[3]}, {x[4], x[5]}};
    const auto hf = scalar_copy(f).run(xs, false), hb = scalar_copy(b).run(xs, true);
    for (const auto merge : {BlstmMerge::product, BlstmMerge::concat}) {
      Graph<double> g;
      const auto y = blstm_layer(g.constant(x), f, b, merge);
      std::vector<double> ref;
      for (std::size_t t = 0; t < 3; ++t) {
        if (merge == BlstmMerge::product)
          for (std::size_t h = 0; h < 3; ++h) ref.push_back(hf[t][h] * hb[t][h]);
        else {
          ref.insert(ref.end(), hf[t].begin(), hf[t].end());
          ref.insert(ref.end(), hb[t].begin(), hb[t].end());
        }
      }
      EXPECT_LT(max_abs_diff(y.value().data, ref), 1e-12);
    }
  }
}

TEST(Attention, SingleStateAndSymmetry) {
  AttentionParams<double> p("a", 3, 3);
  Rng rng(1);
  p.init(rng);
  Graph<double> g;
  const auto one = global_attention(g.constant(Tensor<double>({1, 1, 3}, {0.2, -0.5, 0.9})), p);
  EXPECT_EQ(one.alpha.value()[0], 1.0);
  EXPECT_EQ(one.context.value().data, (std::vector<double>{0.2, -0.5, 0.9}));
  const auto two = global_attention(g.constant(Tensor<double>({1, 2, 3}, {0.2, -0.5, 0.9, 0.2, -0.5, 0.9})), p);
  EXPECT_EQ(two.alpha.value().data, (std::vector<double>{0.5, 0.5}));
  EXPECT_THROW(global_attention(g.constant(Tensor<double>({1, 0, 3})), p), std::invalid_argument);
}

TEST(Attention, MatchesExplicitOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const std::size_t H = 2 + seed % 4;
    AttentionParams<double> p("a", H, 3);
    p.init(rng);
    const auto x = random_tensor({1, 5, H}, rng, -2, 2);
    std::vector<oracle::Vec> states(5);
    for (std::size_t t = 0; t < 5; ++t) states[t].assign(x.ptr() + t * H, x.ptr() + (t + 1) * H);
    oracle::Vec context;
    const auto alpha = oracle::attention_naive(states, context);
    oracle::Vec z = context;
    z.insert(z.end(), states.back().begin(), states.back().end());
    oracle::Vec out(3);
    for (std::size_t a = 0; a < 3; ++a) {
      double s = 0;
      for (std::size_t k = 0; k < 2 * H; ++k) s += p.W_c.value[a * 2 * H + k] * z[k];
      out[a] = std::tanh(s);
    }
    Graph<double> g;
    const auto r = global_attention(g.constant(x), p);
    EXPECT_LT(max_abs_diff(r.alpha.value().data, alpha), 1e-12);
    EXPECT_LT(max_abs_diff(r.context.value().data, context), 1e-12);
    EXPECT_LT(max_abs_diff(r.output.value().data, out), 1e-12);
  }
}

TEST(Attention, WeightsNormalizedAndRankPreserving) {
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t T = 1 + rng.index(12), H = 1 + rng.index(6);
    const double spread = rng.uniform(0.1, 20.0);
    const auto x = random_tensor({1, T, H}, rng, -spread, spread);
    Graph<double> g;
    const auto states = g.constant(x);
    const auto q = time_step(states, T - 1);
    const auto alpha = softmax_rows(attention_scores(states, q)).value();
    double total = 0;
    for (double a : alpha.data) {
      EXPECT_GE(a, 0.0);
      total += a;
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
    if (T == 1) {
      EXPECT_EQ(alpha[0], 1.0);
    }
    const auto scaled = softmax_rows(attention_scores(states, scale(q, rng.uniform(0.1, 3.0)))).value();
    for (std::size_t i = 0; i < T; ++i)
      for (std::size_t j = 0; j < T; ++j)
        if (alpha[i] > alpha[j] * (1 + 1e-12) && scaled[i] > 0 && scaled[j] > 0) {
          EXPECT_GE(scaled[i], scaled[j]);
        }
  }
}

TEST(Backward, BasicContracts) {
  Graph<double> g;
  const auto x = g.input(Tensor<double>({1}, 3.0));
  g.backward(mul(x, x));
  EXPECT_EQ(g.grad(x)[0], 6.0);
  Graph<double> h;
  const auto v = h.input(Tensor<double>({2}, {1.0, 2.0}));
  EXPECT_THROW(h.backward(mul(v, v)), std::invalid_argument);
  const auto zero = scale(sum(v), 0.0);
  h.backward(zero);
  EXPECT_EQ(h.grad(v).data, (std::vector<double>{0.0, 0.0}));
  Parameter<double> p("p", {2});
  p.value = Tensor<double>({2}, {1.0, 2.0});
  Graph<double> k;
  EXPECT_THROW(k.make(Tensor<double>({1}, std::nan("")), {}, nullptr), NumericalError);
  k.backward(sum(k.constant(Tensor<double>({3}, 1.0))));
  p.zero_grad();
  k.backward(sum(scale(k.param(p), 0.0)));
  EXPECT_EQ(p.grad.data, (std::vector<double>{0.0, 0.0}));
}

TEST(Gradcheck, LinearMapIsExactAndKinkIsSkipped) {
  Parameter<double> x("x", {3});
  x.value = Tensor<double>({3}, {0.5, -1.0, 2.0});
  const auto lin = gradcheck("linear", {&x}, [&](Graph<double>& g) {
    return dot(g.param(x), g.constant(Tensor<double>({3}, {1.0, 2.0, -3.0})));
  });
  EXPECT_TRUE(lin.passed);
  EXPECT_LT(lin.max_rel_error, 1e-9);
  Parameter<double> k("k", {2});
  k.value = Tensor<double>({2}, {0.0, 1.0});
  const auto kink = gradcheck("relu", {&k}, [&](Graph<double>& g) { return sum(relu(g.param(k))); });
  EXPECT_EQ(kink.skipped_kinks, 1u);
  EXPECT_EQ(kink.checked, 1u);
  EXPECT_TRUE(kink.passed);
}

TEST(Gradcheck, EveryOpOverTwentySeeds) {
  for (const auto& c : op_gradcheck_cases())
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto r = c.run(seed);
      EXPECT_TRUE(r.passed) << c.name << " seed " << seed << " max rel err " << r.max_rel_error << " checked " << r.checked;
    }
}

TEST(Gradcheck, CatchesInjectedConvSignError) {
  const auto cases = op_gradcheck_cases();
  const auto conv = std::find_if(cases.begin(), cases.end(), [](const GradcheckCase& c) { return c.name == "conv2d"; });
  ASSERT_NE(conv, cases.end());
  conv_weight_grad_fault() = true;
  const auto r = conv->run(3);
  conv_weight_grad_fault() = false;
  EXPECT_FALSE(r.passed);
  EXPECT_GT(r.max_rel_error, 0.5);
  EXPECT_TRUE(conv->run(3).passed);
}

TEST(Graph, ReleaseAfterBackwardKeepsParameterGradients) {
  Rng rng(2);
  Parameter<double> w("w", {2, 3});
  fill_random(w, rng);
  w.zero_grad();
  Graph<double> g(Mode::train);
  const auto y = dense(g.constant(random_tensor({4, 3}, rng)), g.param(w));
  g.backward(sum(nn::tanh(y)), true);
  double norm = 0;
  for (double v : w.grad.data) norm += v * v;
  EXPECT_GT(norm, 0.0);
}
