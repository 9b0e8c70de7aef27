#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <stdexcept>

#include "fluentnet/core/error.hpp"
#include "fluentnet/core/rng.hpp"
#include "fluentnet/nn/tensor.hpp"

namespace fluentnet::nn {

enum class Mode { train, eval };

template <typename T>
class Graph;

/// Handle to a node of a Graph.
template <typename T>
struct Var {
  Graph<T>* graph = nullptr;
  std::size_t id = 0;

  const Tensor<T>& value() const { return graph->value(id); }
  const Shape& shape() const { return value().shape; }
  std::size_t dim(std::size_t i) const { return value().dim(i); }
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so reverse
/// creation order is a valid topological order and cycles cannot be formed.
template <typename T>
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, std::size_t)>;

  Mode mode = Mode::eval;
  Rng rng{0};
  bool update_running_stats = true;
  bool check_finite = true;
  bool track_kinks = false;  // hash relu masks so gradcheck can skip kink crossings
  std::uint64_t kink_signature = 0x9e3779b97f4a7c15ULL;

  explicit Graph(Mode m = Mode::eval, std::uint64_t seed = 0) : mode(m), rng(seed) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var<T> constant(Tensor<T> value) { return push(std::move(value), nullptr, false, {}, nullptr); }

  /// Leaf whose gradient is kept on the node (retrieve with grad()).
  Var<T> input(Tensor<T> value) { return push(std::move(value), nullptr, true, {}, nullptr); }

  /// Leaf bound to a parameter; backward() adds into param.grad.
  Var<T> param(Parameter<T>& p) { return push({}, &p, true, {}, nullptr); }

  Var<T> make(Tensor<T> value, std::vector<std::size_t> parents, BackwardFn backward) {
    bool needs = false;
    for (auto p : parents) {
      if (p >= nodes_.size()) throw std::logic_error("Graph::make: parent created after child");
      needs = needs || nodes_[p].needs_grad;
    }
    if (check_finite && !value.all_finite()) throw NumericalError("non-finite activation in graph node " + std::to_string(nodes_.size()));
    return push(std::move(value), nullptr, needs, std::move(parents), needs ? std::move(backward) : nullptr);
  }

  const Tensor<T>& value(std::size_t id) const {
    const auto& n = nodes_.at(id);
    return n.param ? n.param->value : n.value;
  }
  bool needs_grad(std::size_t id) const { return nodes_.at(id).needs_grad; }

  /// Gradient buffer of a node, zero-allocated on first use.
  Tensor<T>& grad(std::size_t id) {
    auto& n = nodes_.at(id);
    if (!n.grad_ready) {
      n.grad = Tensor<T>(value(id).shape);
      n.grad_ready = true;
    }
    return n.grad;
  }
  const Tensor<T>& grad(Var<T> v) { return grad(v.id); }

  std::size_t size() const { return nodes_.size(); }

  /// With `release` set, each node's value and gradient are freed once its
  /// backward step has run (training); read outputs before calling.
  void backward(Var<T> loss, bool release = false) {
    if (loss.graph != this) throw std::invalid_argument("backward: variable from another graph");
    if (value(loss.id).size() != 1) throw std::invalid_argument("backward: loss must be scalar, got shape " + shape_string(value(loss.id).shape));
    if (!nodes_[loss.id].needs_grad) return;
    grad(loss.id).data[0] = T(1);
    for (std::size_t k = loss.id + 1; k-- > 0;) {
      auto& n = nodes_[k];
      if (!n.needs_grad || !n.grad_ready) continue;
      if (n.backward) n.backward(*this, k);
      if (n.param) {
        auto& g = n.param->grad;
        if (g.shape != n.param->value.shape || g.size() != n.param->value.size()) g = Tensor<T>(n.param->value.shape);
        for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += n.grad.data[i];
      }
      if (release) {
        n.value = {};
        n.grad = {};
        n.backward = nullptr;
      }
    }
  }

  void mix_kinks(std::uint64_t bits) {
    kink_signature ^= bits + 0x9e3779b97f4a7c15ULL + (kink_signature << 6) + (kink_signature >> 2);
  }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    Parameter<T>* param = nullptr;
    bool needs_grad = false;
    bool grad_ready = false;
    std::vector<std::size_t> parents;
    BackwardFn backward;
  };

  Var<T> push(Tensor<T> value, Parameter<T>* p, bool needs, std::vector<std::size_t> parents, BackwardFn fn) {
    nodes_.push_back(Node{std::move(value), {}, p, needs, false, std::move(parents), std::move(fn)});
    return Var<T>{this, nodes_.size() - 1};
  }

  std::deque<Node> nodes_;
};

}  // namespace fluentnet::nn
