#pragma once

#include "fluentnet/model/fluentnet.hpp"
#include "fluentnet/nn/gradcheck_suite.hpp"

namespace fluentnet::model {

struct ModelGradcheckOptions {
  double width_scale = 0.25;
  std::size_t frames = 32;
  std::size_t bins = 32;
  std::size_t batch = 2;
  std::size_t coords_per_tensor = 2;
};

/// Finite-difference check of the whole detector in float64, w.r.t. every
/// parameter tensor and the input. Smaller input than training clips; the
/// architecture is otherwise identical.
inline nn::GradcheckCase model_gradcheck_case(const ModelGradcheckOptions& o = {}, double tolerance = 1e-4) {
  return {"fluentnet_full", tolerance, [=](std::uint64_t seed) {
            FluentNetConfig cfg;
            cfg.width_scale = o.width_scale;
            cfg.input_frames = o.frames;
            cfg.input_bins = o.bins;
            cfg.seed = seed;
            auto m = build_fluentnet<double>(cfg);
            Rng rng(Rng::derive_seed(seed, "gradcheck.input"));
            auto x = nn::detail::random_param("input", {o.batch, 1, o.frames, o.bins}, rng);
            std::vector<double> targets(o.batch);
            for (std::size_t i = 0; i < o.batch; ++i) targets[i] = static_cast<double>(i % 2);
            auto wrt = m.parameters();
            wrt.push_back(&x);
            nn::GradcheckOptions opt;
            opt.tolerance = tolerance;
            opt.seed = seed;
            opt.max_coords = o.coords_per_tensor;
            return nn::gradcheck("fluentnet_full", wrt, [&](nn::Graph<double>& g) {
              return nn::bce(forward(m, g.param(x)), targets);
            }, opt);
          }};
}

/// Every op case plus the full model, as run by the gradcheck command.
inline std::vector<nn::GradcheckCase> all_gradcheck_cases() {
  auto cases = nn::op_gradcheck_cases();
  cases.push_back(model_gradcheck_case());
  return cases;
}

}  // namespace fluentnet::model
