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

#ifndef PIFM_NN_TIME_EMBEDDING_H_
#define PIFM_NN_TIME_EMBEDDING_H_

#include <cstddef>

#include "pifm/matrix.h"

namespace pifm::nn {

// Sinusoidal encoding of t as a 1 x dim row: [sin(w_k s t) | cos(w_k s t)] with
// log-spaced w_k = 10000^(-k/(dim/2)) and s = kTimeScale. dim must be even.
inline constexpr double kTimeScale = 100.0;
Matrix TimeEmbedding(double t, std::size_t dim);

}  // namespace pifm::nn

#endif  // PIFM_NN_TIME_EMBEDDING_H_
