#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "absa/param_store.hpp"
#include "absa/tensor.hpp"

namespace absa {

// Handle to a node on a Graph's tape.
struct Var {
  std::size_t id = static_cast<std::size_t>(-1);
};

enum class GradMode { kOn, kOff };

// Reverse-mode tape. Nodes are appended in evaluation order; backward() walks
// them in reverse. Parameter leaves push their gradients into the owning
// ParamStore when backward() finishes.
class Graph {
 public:
  using Backward = std::function<void(Graph&, const Tensor& out_grad)>;

  explicit Graph(ParamStore* store = nullptr, GradMode mode = GradMode::kOn);
  // Inference-only graph reading parameters from `store`.
  explicit Graph(const ParamStore& store);

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  // Leaf bound to a store entry. Repeated calls with one name share the node.
  Var param(const std::string& name);

  const Tensor& value(Var v) const;
  // Gradient accumulated during backward(); zeros if the node got none.
  Tensor grad(Var v) const;
  bool requires_grad(Var v) const;
  GradMode mode() const noexcept { return mode_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  void backward(Var loss);

  // For primitive implementations: appends a node whose backward closure is
  // kept only when some input requires a gradient.
  Var record(Tensor value, std::initializer_list<Var> inputs, Backward backward);
  Var record(Tensor value, const std::vector<Var>& inputs, Backward backward);
  // Gradient slot of `v`, allocated on first use. Only valid inside backward().
  Tensor& grad_slot(Var v);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    Backward backward;
    const std::string* param_name = nullptr;
  };

  const Node& node(Var v) const;

  ParamStore* store_;
  const ParamStore* view_;
  GradMode mode_;
  std::vector<Node> nodes_;
  std::unordered_map<std::string, std::size_t> param_nodes_;
  bool backward_done_ = false;
};

// Differentiable primitives. Shape mismatches throw ShapeError naming the
// primitive and the offending shapes.
namespace ops {

Var add(Graph& g, Var a, Var b);
Var sub(Graph& g, Var a, Var b);
Var mul(Graph& g, Var a, Var b);
Var scale(Graph& g, Var a, double c);
Var one_minus(Graph& g, Var a);
Var sigmoid(Graph& g, Var a);
Var tanh(Graph& g, Var a);
Var square(Graph& g, Var a);

// W [m x n] times x [n] -> [m].
Var matvec(Graph& g, Var w, Var x);
// W x + b.
Var affine(Graph& g, Var w, Var x, Var b);
Var dot(Graph& g, Var a, Var b);
Var sum(Graph& g, Var a);

// Vector plumbing.
Var concat(Graph& g, const std::vector<Var>& parts);
Var stack(Graph& g, const std::vector<Var>& rows);
Var row(Graph& g, Var m, std::size_t i);
std::vector<Var> unstack(Graph& g, Var m);
Var gather_rows(Graph& g, Var table, const std::vector<std::size_t>& ids);

// Pooling over the rows of an n x k matrix.
Var max_rows(Graph& g, Var m);
Var mean_rows(Graph& g, Var m);
// sum_i alpha[i] * m[i, :].
Var weighted_rows(Graph& g, Var alpha, Var m);

Var softmax(Graph& g, Var logits);
// -log softmax(logits)[label], as a [1] tensor.
Var softmax_cross_entropy(Graph& g, Var logits, std::size_t label);

}  // namespace ops
}  // namespace absa
