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

#ifndef PIFM_NN_ADAM_H_
#define PIFM_NN_ADAM_H_

#include <cstdint>
#include <vector>

#include "pifm/nn/tensor.h"

namespace pifm::nn {

struct AdamState {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  // Moments shaped after `params`, all zero.
  static AdamState For(const ParameterSet& params, double lr = 2e-4);
};

// One bias-corrected Adam update. Every parameter must carry a gradient
// (StateError otherwise); gradients are cleared afterwards.
void AdamStep(ParameterSet& params, AdamState& state);

}  // namespace pifm::nn

#endif  // PIFM_NN_ADAM_H_
