#pragma once

#include <functional>

#include "fluentnet/nn/attention.hpp"
#include "fluentnet/nn/blocks.hpp"
#include "fluentnet/nn/gradcheck.hpp"
#include "fluentnet/nn/recurrent.hpp"

namespace fluentnet::nn {

struct GradcheckCase {
  std::string name;
  double tolerance;
  std::function<GradcheckReport(std::uint64_t seed)> run;
};

namespace detail {

inline Parameter<double> random_param(const std::string& name, Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Parameter<double> p(name, std::move(shape));
  for (auto& v : p.value.data) v = rng.uniform(lo, hi);
  return p;
}

/// Random projection so the loss touches every output coordinate.
inline Var<double> project(Var<double> out, std::uint64_t seed) {
  Rng rng(seed ^ 0xabcdefULL);
  Tensor<double> r(out.shape());
  for (auto& v : r.data) v = rng.uniform(-1.0, 1.0);
  return dot(out, out.graph->constant(std::move(r)));
}

/// Pushes values away from zero so relu kinks are not sampled.
inline void away_from_zero(Parameter<double>& p, double margin) {
  for (auto& v : p.value.data)
    if (std::abs(v) < margin) v = v < 0 ? v - margin : v + margin;
}

}  // namespace detail

/// Finite-difference cases for every differentiable op, on small random shapes.
inline std::vector<GradcheckCase> op_gradcheck_cases() {
  using detail::project;
  using detail::random_param;
  std::vector<GradcheckCase> cases;
  auto opts = [](double tol, std::uint64_t seed, Mode mode = Mode::train) {
    GradcheckOptions o;
    o.tolerance = tol;
    o.seed = seed;
    o.mode = mode;
    return o;
  };

  cases.push_back({"conv2d", 1e-5, [=](std::uint64_t seed) {
                     Rng rng(seed);
                     auto x = random_param("x", {2, 3, 5, 5}, rng);
                     auto w = random_param("w", {4, 3, 3, 3}, rng);
                     const Conv2dSpec spec{1 + seed % 2, 1 + (seed / 2) % 2, 1, 1};
                     return gradcheck("conv2d", {&x, &w}, [&](Graph<double>& g) {
                       return project(conv2d(g.param(x), g.param(w), spec), seed);
                     }, opts(1e-5, seed));
                   }});
  cases.push_back({"conv2d_pointwise", 1e-5, [=](std::uint64_t seed) {
                     Rng rng(seed);
                     auto x = random_param("x", {2, 3, 4, 6}, rng);
                     auto w = random_param("w", {5, 3, 1, 1}, rng);
                     return gradcheck("conv2d_pointwise", {&x, &w}, [&](Graph<double>& g) {
                       return project(conv2d(g.param(x), g.param(w)), seed);
                     }, opts(1e-5, seed));
                   }});
  for (const Mode mode : {Mode::train, Mode::eval}) {
    const std::string name = mode == Mode::train ? "batch_norm_train" : "batch_norm_eval";
    cases.push_back({name, 1e-5, [=](std::uint64_t seed) {
                       Rng rng(seed);
                       auto x = random_param("x", {3, 2, 3, 4}, rng, -2.0, 2.0);
                       auto gamma = random_param("gamma", {2}, rng, 0.5, 1.5);
                       auto beta = random_param("beta", {2}, rng);
                       BatchNormState<double> state(2);
                       state.running_mean = Tensor<double>({2}, {0.1, -0.2});
                       state.running_var = Tensor<double>({2}, {0.8, 1.3});
                       return gradcheck(name, {&x, &gamma, &beta}, [&](Graph<double>& g) {
                         return project(batch_norm(g.param(x), g.param(gamma), g.param(beta), state), seed);
                       }, opts(1e-5, seed, mode));
                     }});
  }
  cases.push_back({"relu", 1e-6, [=](std::uint64_t seed) {
                     Rng rng(seed);
                     auto x = random_param("x", {4, 7}, rng);
                     detail::away_from_zero(x, 1e-3);
                     return gradcheck("relu", {&x}, [&](Graph<double>& g) { return project(relu(g.param(x)), seed); },
                                      opts(1e-6, seed));
                   }});
  cases.push_back({"sigmoid", 1e-6, [=](std::uint64_t seed) {
                     Rng rng(seed);
                     auto x = random_param("x", {4, 7}, rng, -4.0, 4.0);
                     return gradcheck("sigmoid", {&x}, [&](Graph<double>& g) { return project(sigmoid(g.param(x)), seed); },
                                      opts(1e-6, seed));
                   }});
  cases.push_back({"tanh", 1e-6, [=](std::uint64_t seed) {
                     Rng rng(seed);
                     auto x = random_param("x", {4, 7}, rng, -3.0, 3.0);
                     return gradcheck("tanh", {&x}, [&](Graph<double>& g) { return project(tanh(g.param(x)), seed); },
                                      opts(1e-6, seed));
                   }});
  cases.push_back({"global_avg_pool", 1e-6, [=](std::uint64_t seed) {
                     Rng rng(seed);
                     auto x = random_param("x", {2, 3, 4, 5}, rng);
                     return gradcheck("global_avg_pool", {&x},
                                      [&](Graph<double>& g) { return project(global_avg_pool(g.param(x)), seed); }, opts(1e-6, seed));
                   }});
  cases.push_back({"dense", 1e-6, [=](std::uint64_t seed) {
                     Rng rng(seed);
                     auto x = random_param("x", {3, 5}, rng);
                     auto w = random_param("w", {4, 5}, rng);
                     auto b = random_param("b", {4}, rng);
                     return gradcheck("dense", {&x, &w, &b}, [&](Graph<double>& g) {
                       return project(dense(g.param(x), g.param(w), g.param(b)), seed);
                     }, opts(1e-6, seed));
                   }});
  cases.push_back({"channel_scale", 1e-6, [=](std::uint64_t seed) {
                     Rng rng(seed);
                     auto x = random_param("x", {2, 3, 2, 4}, rng);
                     auto s = random_param("s", {2, 3}, rng);
                     return gradcheck("channel_scale", {&x, &s}, [&](Graph<double>& g) {
                       return project(channel_scale(g.param(x), g.param(s)), seed);
                     }, opts(1e-6, seed));
                   }});
  cases.push_back({"freq_mean_sequence", 1e-6, [=](std::uint64_t seed) {
                     Rng rng(seed);
                     auto x = random_param("x", {2, 3, 4, 5}, rng);
                     return gradcheck("freq_mean_sequence", {&x},
                                      [&](Graph<double>& g) { return project(freq_mean_sequence(g.param(x)), seed); }, opts(1e-6, seed));
                   }});
  cases.push_back({"mul_add_concat", 1e-6, [=](std::uint64_t seed) {
                     Rng rng(seed);
                     auto a = random_param("a", {3, 4}, rng);
                     auto b = random_param("b", {3, 4}, rng);
                     return gradcheck("mul_add_concat", {&a, &b}, [&](Graph<double>& g) {
                       const auto va = g.param(a), vb = g.param(b);
                       return project(concat_last<double>({mul(va, vb), add(va, scale(vb, 0.5))}), seed);
                     }, opts(1e-6, seed));
                   }});
  cases.push_back({"softmax_attend", 1e-6, [=](std::uint64_t seed) {
                     Rng rng(seed);
                     auto seq = random_param("seq", {2, 5, 3}, rng);
                     auto q = random_param("q", {2, 3}, rng);
                     return gradcheck("softmax_attend", {&seq, &q}, [&](Graph<double>& g) {
                       const auto s = g.param(seq);
                       return project(attend(s, softmax_rows(attention_scores(s, g.param(q)))), seed);
                     }, opts(1e-6, seed));
                   }});
  cases.push_back({"dropout", 1e-6, [=](std::uint64_t seed) {
                     Rng rng(seed);
                     auto x = random_param("x", {4, 6}, rng);
                     return gradcheck("dropout", {&x}, [&](Graph<double>& g) { return project(dropout(g.param(x), 0.3), seed); },
                                      opts(1e-6, seed));
                   }});
  cases.push_back({"bce", 1e-6, [=](std::uint64_t seed) {
                     Rng rng(seed);
                     auto p = random_param("p", {6}, rng, 0.05, 0.95);
                     std::vector<double> y(6);
                     for (auto& v : y) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
                     return gradcheck("bce", {&p}, [&](Graph<double>& g) { return bce(g.param(p), y); }, opts(1e-6, seed));
                   }});
  cases.push_back({"se_unit", 1e-5, [=](std::uint64_t seed) {
                     Rng rng(seed);
                     auto x = random_param("x", {2, 20, 3, 3}, rng);
                     SeUnitParams<double> se("se", 20);
                     se.init(rng);
                     auto params = se.parameters();
                     params.push_back(&x);
                     return gradcheck("se_unit", params, [&](Graph<double>& g) { return project(se_unit(g.param(x), se), seed); },
                                      opts(1e-5, seed));
                   }});
  cases.push_back({"se_resnet_block", 1e-4, [=](std::uint64_t seed) {
                     Rng rng(seed);
                     auto x = random_param("x", {2, 2, 6, 6}, rng);
                     SeBlockParams<double> block("block", 2, 3, 1 + seed % 2, 2);
                     block.init(rng);
                     auto params = block.parameters();
                     params.push_back(&x);
                     GradcheckOptions o = opts(1e-4, seed);
                     o.max_coords = 12;
                     return gradcheck("se_resnet_block", params,
                                      [&](Graph<double>& g) { return project(se_resnet_block(g.param(x), block), seed); }, o);
                   }});
  cases.push_back({"lstm_cell", 1e-5, [=](std::uint64_t seed) {
                     Rng rng(seed);
                     LstmParams<double> p("lstm", 3, 4);
                     p.init(rng);
                     auto x = random_param("x", {2, 3}, rng);
                     auto h = random_param("h", {2, 4}, rng);
                     auto c = random_param("c", {2, 4}, rng);
                     auto params = p.parameters();
                     for (auto* q : {&x, &h, &c}) params.push_back(q);
                     return gradcheck("lstm_cell", params, [&](Graph<double>& g) {
                       const auto s = lstm_cell(g.param(x), g.param(h), g.param(c), p);
                       return add(project(s.h, seed), project(s.cell_state, seed + 1));
                     }, opts(1e-5, seed));
                   }});
  for (const bool reverse : {false, true}) {
    const std::string name = reverse ? "lstm_sequence_reverse" : "lstm_sequence";
    cases.push_back({name, 1e-5, [=](std::uint64_t seed) {
                       Rng rng(seed);
                       LstmParams<double> p("lstm", 3, 4);
                       p.init(rng);
                       auto x = random_param("x", {2, 5, 3}, rng);
                       auto params = p.parameters();
                       params.push_back(&x);
                       return gradcheck(name, params, [&](Graph<double>& g) { return project(lstm_sequence(g.param(x), p, reverse), seed); },
                                        opts(1e-5, seed));
                     }});
  }
  for (const auto merge : {BlstmMerge::product, BlstmMerge::concat}) {
    const std::string name = "blstm_" + to_string(merge);
    cases.push_back({name, 1e-5, [=](std::uint64_t seed) {
                       Rng rng(seed);
                       LstmParams<double> f("f", 3, 4), b("b", 3, 4);
                       f.init(rng);
                       b.init(rng);
                       auto x = random_param("x", {2, 4, 3}, rng);
                       auto params = f.parameters();
                       for (auto* q : b.parameters()) params.push_back(q);
                       params.push_back(&x);
                       return gradcheck(name, params, [&](Graph<double>& g) { return project(blstm_layer(g.param(x), f, b, merge), seed); },
                                        opts(1e-5, seed));
                     }});
  }
  cases.push_back({"global_attention", 1e-5, [=](std::uint64_t seed) {
                     Rng rng(seed);
                     AttentionParams<double> p("att", 3, 4);
                     p.init(rng);
                     auto seq = random_param("seq", {2, 5, 3}, rng);
                     auto params = p.parameters();
                     params.push_back(&seq);
                     return gradcheck("global_attention", params,
                                      [&](Graph<double>& g) { return project(global_attention(g.param(seq), p).output, seed); }, opts(1e-5, seed));
                   }});
  return cases;
}

}  // namespace fluentnet::nn
