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

#include "pifm/nn/time_embedding.h"

#include <cmath>
#include <string>

#include "pifm/error.h"

namespace pifm::nn {

Matrix TimeEmbedding(double t, std::size_t dim) {
  if (dim == 0 || dim % 2 != 0) {
    throw ConfigError("TimeEmbedding: dim must be positive and even, got " +
                      std::to_string(dim));
  }
  const std::size_t half = dim / 2;
  Matrix e(1, dim);
  for (std::size_t k = 0; k < half; ++k) {
    const double freq =
        std::exp(-std::log(10000.0) * static_cast<double>(k) / static_cast<double>(half));
    const double arg = kTimeScale * t * freq;
    e(0, k) = std::sin(arg);
    e(0, half + k) = std::cos(arg);
  }
  return e;
}

}  // namespace pifm::nn
