// Copyright 2026 The PIFM Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PIFM_NN_AUTODIFF_H_
#define PIFM_NN_AUTODIFF_H_

#include <cstddef>
#include <functional>
#include <vector>

#include "pifm/matrix.h"
#include "pifm/nn/tensor.h"
#include "pifm/random.h"

namespace pifm::nn {

class Tape;

// Handle to a node on a Tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  const Matrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Define-by-run reverse-mode tape over dense matrices. One tape per forward
// pass; tapes are not shared between threads.
class Tape {
 public:
  Tape() = default;
  // With record_grads off, parameter leaves are plain constants and no
  // backward closures are kept (inference).
  explicit Tape(bool record_grads) : record_grads_(record_grads) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Constant(Matrix value);
  // Leaf bound to parameter `index` of `params`; its value is copied.
  Var Param(const ParameterSet& params, std::size_t index);

  const Matrix& value(Var v) const { return nodes_[v.id()].value; }
  // Gradient of the last Backward() loss w.r.t. v (zeros if unreached).
  Matrix grad(Var v) const;

  // Reverse sweep from a 1x1 node. Returns the loss value.
  double Backward(Var loss);

  // Adds the gradients of all parameter leaves into `buffer`.
  void AccumulateParamGrads(GradientBuffer& buffer) const;

  std::size_t size() const { return nodes_.size(); }

  // Used by op implementations.
  using BackwardFn = std::function<void(Tape&, int self)>;
  Var Push(Matrix value, std::vector<int> inputs, BackwardFn backward);
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }
  const Matrix& node_value(int id) const { return nodes_[id].value; }
  const Matrix& node_grad(int id) const { return nodes_[id].grad; }
  // Zero-initialized on first use.
  Matrix& grad_ref(int id);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::vector<int> inputs;
    BackwardFn backward;
    bool needs_grad = false;
    long param_index = -1;
  };
  std::vector<Node> nodes_;
  bool record_grads_ = true;
};

// One tape leaf per parameter, in parameter order.
std::vector<Var> BindParams(Tape& tape, const ParameterSet& params);

// Runs the reverse sweep of `loss` on its tape and returns the loss value.
double ForwardBackward(Var loss);

// --- primitives -------------------------------------------------------------
// Every op throws DimensionError naming itself on a shape mismatch.

Var MatMul(Var a, Var b);
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);  // elementwise
Var Scale(Var a, double c);
Var AddScalar(Var a, double c);
// a (m x n) plus / times a 1 x n row broadcast over rows.
Var AddRow(Var a, Var row);
Var MulRow(Var a, Var row);
Var Silu(Var a);
Var Sigmoid(Var a);
Var Transpose(Var a);
Var Reshape(Var a, std::size_t rows, std::size_t cols);
Var ConcatCols(const std::vector<Var>& parts);
Var SliceCols(Var a, std::size_t begin, std::size_t end);
Var GatherRows(Var a, const std::vector<std::size_t>& rows);
// N x F -> N^2 x F with row i*N+j equal to h_i (.) h_j.
Var PairHadamard(Var h);
// Row-wise x / sqrt(mean(x^2) + eps), times a learned 1 x F scale.
Var RmsNorm(Var a, Var scale, double eps = 1e-6);
// Inverted dropout; identity when rate == 0.
Var Dropout(Var a, double rate, Rng& rng);
// mean(a^2) as a 1x1 node.
Var MeanSquare(Var a);
// sum_k w_k * (softplus(x_k) - y_k x_k), numerically stable; 1x1 node.
Var BceWithLogits(Var logits, const Matrix& labels, const Matrix& weights);

// x W + b.
inline Var Linear(Var x, Var w, Var b) { return AddRow(MatMul(x, w), b); }

}  // namespace pifm::nn

#endif  // PIFM_NN_AUTODIFF_H_
