#pragma once

#include <cmath>

#include "fluentnet/core/rng.hpp"
#include "fluentnet/nn/tensor.hpp"

namespace fluentnet::nn {

template <typename T>
void uniform_init(Parameter<T>& p, double bound, Rng& rng) {
  for (auto& v : p.value.data) v = static_cast<T>(rng.uniform(-bound, bound));
  p.zero_grad();
}

/// He-uniform: U(-sqrt(6 / fan_in), +sqrt(6 / fan_in)).
template <typename T>
void he_uniform(Parameter<T>& p, std::size_t fan_in, Rng& rng) {
  uniform_init(p, std::sqrt(6.0 / static_cast<double>(fan_in)), rng);
}

template <typename T>
void constant_init(Parameter<T>& p, T value) {
  p.value.fill(value);
  p.zero_grad();
}

}  // namespace fluentnet::nn
