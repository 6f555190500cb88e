#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "prb/nn/parameters.hpp"
#include "prb/nn/tensor.hpp"

namespace prb::nn {

// Handle to a node on a Graph.
struct Var {
  std::size_t id = 0;
};

// Backward rule of a node: given d(loss)/d(output), add d(loss)/d(input_i) into
// *input_grads[i]. Entries are null for inputs that do not need a gradient.
using BackwardFn = std::function<void(const Tensor& out_grad, std::span<Tensor* const> input_grads)>;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Eager tape: every op computes its value immediately and, when recording,
// appends a node with its backward rule. Nodes are in creation order, which
// is a topological order. One Graph per thread.
class Graph {
 public:
  explicit Graph(bool record = true) : record_(record) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }
  void clear();

  Var constant(Tensor value);
  Var parameter(ParameterSet& params, ParamId id);
  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }

  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  // Broadcast a 1 x C row over every row of a.
  Var add_row(Var a, Var row);
  Var mul_row(Var a, Var row);
  Var scale(Var a, double factor);
  Var add_scalar(Var a, double offset);
  Var concat_cols(std::span<const Var> parts);
  Var concat_rows(std::span<const Var> parts);
  Var slice_cols(Var a, std::size_t begin, std::size_t count);
  Var slice_rows(Var a, std::size_t begin, std::size_t count);

  Var tanh(Var a);
  Var sigmoid(Var a);
  Var relu(Var a);
  Var softplus(Var a);
  Var exp(Var a);
  Var log(Var a);
  // Row-wise softmax. With causal set, entry (i, j) with j > i is masked to zero.
  Var softmax_rows(Var a, bool causal = false);
  // (x - mean) / sqrt(var + eps) per row.
  Var normalize_rows(Var a, double eps = 1e-5);
  Var sum(Var a);

  // softmax(q k^T / sqrt(d)) v, optionally causal.
  Var attention(Var q, Var k, Var v, bool causal);

  // Escape hatch for fused ops with hand-written gradients.
  Var custom(std::vector<Var> inputs, Tensor value, BackwardFn backward);

  // Reverse sweep from a scalar node. Zeroes every gradient in params first, then
  // accumulates into the gradients of parameters reachable from loss.
  void backward(Var loss, ParameterSet& params);
  // Gradient of the last backward pass with respect to an arbitrary node.
  const Tensor* grad(Var v) const;

 private:
  struct Node {
    Tensor value;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool needs_grad = false;
  };

  Var push(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward);
  const Node& node(Var v) const { return nodes_.at(v.id); }

  bool record_;
  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
};

// Numerical kernels shared by ops and by inference-only code paths.
namespace kernels {
double softplus(double x);
double sigmoid(double x);
// out (+)= op(a) * op(b)
void matmul(const Tensor& a, bool trans_a, const Tensor& b, bool trans_b, Tensor& out,
            bool accumulate);
}  // namespace kernels

}  // namespace prb::nn
