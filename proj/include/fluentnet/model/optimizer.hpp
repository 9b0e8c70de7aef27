#pragma once

#include <cmath>
#include <vector>

#include "fluentnet/nn/tensor.hpp"

namespace fluentnet::model {

/// v <- rho v + (1 - rho) g^2;  theta <- theta - lr g / (sqrt(v) + eps).
template <typename T>
struct RmsProp {
  double lr = 1e-4;
  double rho = 0.9;
  double eps = 1e-7;
  std::vector<nn::Tensor<T>> v;

  void step(const std::vector<nn::Parameter<T>*>& params) {
    if (v.empty())
      for (auto* p : params) v.emplace_back(p->value.shape);
    if (v.size() != params.size()) throw std::invalid_argument("RmsProp::step: parameter list changed");
    for (std::size_t k = 0; k < params.size(); ++k) {
      auto& p = *params[k];
      if (p.grad.size() != p.value.size()) continue;  // never received a gradient
      auto& vk = v[k];
      for (std::size_t i = 0; i < p.value.size(); ++i) {
        const double g = p.grad[i];
        const double vi = rho * vk[i] + (1.0 - rho) * g * g;
        vk[i] = static_cast<T>(vi);
        p.value[i] = static_cast<T>(p.value[i] - lr * g / (std::sqrt(vi) + eps));
      }
    }
  }
};

}  // namespace fluentnet::model
