#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fluentnet/nn/graph.hpp"

namespace fluentnet::nn {

struct GradcheckOptions {
  double step = 1e-5;
  double tolerance = 1e-5;
  std::size_t max_coords = 40;  // per tensor; larger tensors are sampled
  double denominator_floor = 1e-4;  // below this gradient magnitude the error is measured against the floor
  std::uint64_t seed = 1;
  Mode mode = Mode::train;
};

struct GradcheckReport {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Central-difference check of d loss / d tensor for every tensor in `wrt`.
///
/// `build(graph)` must construct the scalar loss from scratch. Each evaluation
/// gets a fresh graph seeded identically, so dropout masks repeat. Coordinates
/// whose perturbation flips any relu mask are skipped (kink rule).
template <typename Build>
GradcheckReport gradcheck(const std::string& name, const std::vector<Parameter<double>*>& wrt, Build&& build,
                          const GradcheckOptions& opt = {}) {
  auto evaluate = [&](bool with_backward, std::uint64_t* signature) {
    Graph<double> g(opt.mode, opt.seed);
    g.track_kinks = true;
    g.update_running_stats = false;
    const Var<double> loss = build(g);
    if (loss.value().size() != 1) throw std::invalid_argument("gradcheck: loss must be scalar");
    if (signature) *signature = g.kink_signature;
    const double value = loss.value()[0];
    if (with_backward) g.backward(loss);
    return value;
  };

  for (auto* p : wrt) p->zero_grad();
  std::uint64_t base_signature = 0;
  evaluate(true, &base_signature);
  std::vector<Tensor<double>> analytic;
  for (auto* p : wrt) analytic.push_back(p->grad);

  GradcheckReport report;
  report.name = name;
  report.tolerance = opt.tolerance;
  Rng rng(opt.seed ^ 0x5bd1e995ULL);
  for (std::size_t k = 0; k < wrt.size(); ++k) {
    auto& values = wrt[k]->value.data;
    std::vector<std::size_t> coords(values.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (coords.size() > opt.max_coords) rng.shuffle(coords.begin(), coords.end());
    std::size_t used = 0;
    for (std::size_t c : coords) {
      if (used >= opt.max_coords) break;
      const double saved = values[c];
      std::uint64_t sig_plus = 0, sig_minus = 0;
      values[c] = saved + opt.step;
      const double f_plus = evaluate(false, &sig_plus);
      values[c] = saved - opt.step;
      const double f_minus = evaluate(false, &sig_minus);
      values[c] = saved;
      if (sig_plus != base_signature || sig_minus != base_signature) {
        ++report.skipped_kinks;
        continue;
      }
      const double numeric = (f_plus - f_minus) / (2.0 * opt.step);
      const double a = analytic[k][c];
      const double denom = std::max({std::abs(a), std::abs(numeric), opt.denominator_floor});
      report.max_rel_error = std::max(report.max_rel_error, std::abs(a - numeric) / denom);
      ++report.checked;
      ++used;
    }
  }
  for (auto* p : wrt) p->zero_grad();
  report.passed = report.checked > 0 && report.max_rel_error < opt.tolerance;
  return report;
}

}  // namespace fluentnet::nn
