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

#include "pifm/nn/tensor.h"

#include <cmath>
#include <utility>

#include "pifm/error.h"

namespace pifm::nn {

Tensor& ParameterSet::Add(std::string name, std::size_t rows, std::size_t cols,
                          double fill) {
  for (const auto& n : names_) {
    if (n == name) throw ConfigError("ParameterSet: duplicate parameter '" + name + "'");
  }
  names_.push_back(std::move(name));
  Tensor t;
  t.shape = {rows, cols};
  t.data.assign(rows * cols, fill);
  tensors_.push_back(std::move(t));
  return tensors_.back();
}

Tensor& ParameterSet::AddGlorot(std::string name, std::size_t rows, std::size_t cols,
                                Rng& rng) {
  Tensor& t = Add(std::move(name), rows, cols);
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& v : t.data) v = dist(rng);
  return t;
}

std::size_t ParameterSet::IndexOf(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  throw StateError("ParameterSet: no parameter named '" + std::string(name) + "'");
}

std::size_t ParameterSet::ScalarCount() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.data.size();
  return n;
}

GradientBuffer ParameterSet::ZeroGradients() const {
  GradientBuffer g(tensors_.size());
  for (std::size_t i = 0; i < tensors_.size(); ++i) g[i].assign(tensors_[i].data.size(), 0.0);
  return g;
}

void ParameterSet::SetGradients(const GradientBuffer& grads) {
  if (grads.size() != tensors_.size()) throw DimensionError("SetGradients: size mismatch");
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    if (grads[i].size() != tensors_[i].data.size()) {
      throw DimensionError("SetGradients: shape mismatch for '" + names_[i] + "'");
    }
    tensors_[i].grad = grads[i];
  }
}

void ParameterSet::ClearGradients() {
  for (auto& t : tensors_) t.grad.clear();
}

}  // namespace pifm::nn
