#pragma once

#include "fluentnet/nn/init.hpp"
#include "fluentnet/nn/ops.hpp"

namespace fluentnet::nn {

/// W_c projects [context; h_T] (width 2H) to the attentional state (width A).
template <typename T>
struct AttentionParams {
  std::size_t state = 0, output = 0;
  Parameter<T> W_c;

  AttentionParams() = default;
  AttentionParams(const std::string& prefix, std::size_t state_size, std::size_t output_size)
      : state(state_size), output(output_size), W_c(prefix + ".W_c", {output_size, 2 * state_size}) {}

  void init(Rng& rng) { he_uniform(W_c, 2 * state, rng); }
  std::vector<Parameter<T>*> parameters() { return {&W_c}; }
};

template <typename T>
struct AttentionResult {
  Var<T> output;   // tanh(W_c [context; h_T]), [B, A]
  Var<T> alpha;    // alignment weights, [B, T]
  Var<T> context;  // weighted state sum, [B, H]
};

/// Global attention over encoder states [B, T, H] with the last state as query.
template <typename T>
AttentionResult<T> global_attention(Var<T> states, AttentionParams<T>& p) {
  detail::require_rank(states, 3, "global_attention");
  if (states.dim(1) == 0) throw std::invalid_argument("global_attention: empty state list");
  detail::shape_check(states.dim(2) == p.state, "global_attention", "states " + shape_string(states.shape()));
  const auto query = time_step(states, states.dim(1) - 1);
  const auto alpha = softmax_rows(attention_scores(states, query));
  const auto context = attend(states, alpha);
  const auto out = tanh(dense(concat_last<T>({context, query}), states.graph->param(p.W_c)));
  return {out, alpha, context};
}

}  // namespace fluentnet::nn
