#pragma once

#include <functional>
#include <string>
#include <vector>

#include "taaco/tensor.hpp"

namespace taaco {

/// A named learnable tensor with its gradient accumulator.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string name, Tensor value_in)
      : name(std::move(name)), value(std::move(value_in)), grad(value.shape()) {}

  void zero_grad() { grad.zero(); }
};

/// Eager reverse-mode tape over 2-D tensors. A graph is built per forward
/// pass; backward() runs the recorded closures in reverse and accumulates
/// leaf gradients into their bound Parameters.
class Graph {
 public:
  using Var = int;

  Var constant(Tensor v);
  Var leaf(Parameter& p);

  Var matmul(Var a, Var b);     // A[m,k] * B[k,n]
  Var matmul_nt(Var a, Var b);  // A[m,k] * B[n,k]^T
  Var add(Var a, Var b);        // same shape
  Var add_row(Var a, Var bias); // [n,d] + [1,d], broadcast over rows
  Var scale(Var a, double s);
  Var relu(Var a);
  Var softmax_rows(Var a);
  Var layer_norm_rows(Var x, Var gamma, Var beta, double eps = 1e-5);
  Var slice_cols(Var a, int64_t begin, int64_t count);
  Var concat_cols(const std::vector<Var>& parts);
  Var stack_rows(const std::vector<Var>& rows);  // each [1,d] -> [n,d]
  Var pick_row(Var a, int64_t row);              // -> [1,d]
  Var average(const std::vector<Var>& vars);     // elementwise mean

  // -log softmax(logits)[label]; logits [1,k] -> [1,1]
  Var cross_entropy_logits(Var logits, int label);

  // Mean binary cross entropy of p = 1 - exp(-w) against targets, with p
  // clamped to [1e-7, 1-1e-7]; w [1,n] -> [1,1]
  Var bce_explanation(Var attention, std::vector<double> targets);

  const Tensor& value(Var v) const;
  // Gradient of the last backward() w.r.t. v (zeros if it never received one).
  const Tensor& grad(Var v);

  // Seeds d(root)/d(root) = seed and propagates. root must be [1,1].
  void backward(Var root, double seed = 1.0);

  void clear();
  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor owned_value;
    Parameter* bound = nullptr;
    Tensor grad;
    bool wants_grad = false;
    std::function<void(Graph&)> back;
  };

  const Tensor& val(Var v) const {
    const Node& n = nodes_[static_cast<size_t>(v)];
    return n.bound ? n.bound->value : n.owned_value;
  }
  Tensor& grad_buf(Var v);  // allocates zeros on first touch
  bool wants(Var v) const { return nodes_[static_cast<size_t>(v)].wants_grad; }
  Var push(Tensor value, bool wants_grad, std::function<void(Graph&)> back);

  std::vector<Node> nodes_;
};

}  // namespace taaco
