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

#ifndef PIFM_NN_TENSOR_H_
#define PIFM_NN_TENSOR_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "pifm/matrix.h"
#include "pifm/random.h"

namespace pifm::nn {

// Named trainable array. `grad` is empty until a backward pass populates it.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;
  std::vector<double> grad;

  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  bool has_grad() const { return grad.size() == data.size(); }
  Matrix AsMatrix() const { return Matrix(rows(), cols(), data); }
};

// Per-parameter gradient accumulator, index-aligned with a ParameterSet.
using GradientBuffer = std::vector<std::vector<double>>;

// Ordered collection of named tensors. Iteration order is insertion order, which
// keeps checkpoints and optimizer updates deterministic.
class ParameterSet {
 public:
  // 2-D parameter initialized to `fill`.
  Tensor& Add(std::string name, std::size_t rows, std::size_t cols, double fill = 0.0);
  // 2-D parameter with Glorot-uniform initialization.
  Tensor& AddGlorot(std::string name, std::size_t rows, std::size_t cols, Rng& rng);

  std::size_t size() const { return tensors_.size(); }
  Tensor& at(std::size_t i) { return tensors_[i]; }
  const Tensor& at(std::size_t i) const { return tensors_[i]; }
  const std::string& name(std::size_t i) const { return names_[i]; }
  std::size_t IndexOf(std::string_view name) const;  // throws StateError
  Tensor& operator[](std::string_view name) { return tensors_[IndexOf(name)]; }
  const Tensor& operator[](std::string_view name) const { return tensors_[IndexOf(name)]; }

  std::size_t ScalarCount() const;
  GradientBuffer ZeroGradients() const;
  // Overwrites every tensor's grad with the buffer contents.
  void SetGradients(const GradientBuffer& grads);
  void ClearGradients();

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
};

}  // namespace pifm::nn

#endif  // PIFM_NN_TENSOR_H_
