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

#include "pifm/nn/adam.h"

#include <cmath>

#include "pifm/error.h"

namespace pifm::nn {

AdamState AdamState::For(const ParameterSet& params, double lr) {
  AdamState s;
  s.lr = lr;
  s.m.resize(params.size());
  s.v.resize(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.m[i].assign(params.at(i).data.size(), 0.0);
    s.v[i].assign(params.at(i).data.size(), 0.0);
  }
  return s;
}

void AdamStep(ParameterSet& params, AdamState& state) {
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw StateError("AdamStep: optimizer state does not match the parameter set");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params.at(i).has_grad()) {
      throw StateError("AdamStep: parameter '" + params.name(i) + "' has no gradient");
    }
    if (state.m[i].size() != params.at(i).data.size()) {
      throw StateError("AdamStep: moment shape mismatch for '" + params.name(i) + "'");
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params.at(i);
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t k = 0; k < p.data.size(); ++k) {
      const double g = p.grad[k];
      m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g;
      v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g * g;
      const double mhat = m[k] / c1;
      const double vhat = v[k] / c2;
      p.data[k] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
  params.ClearGradients();
}

}  // namespace pifm::nn
