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

#ifndef PIFM_NN_CHECKPOINT_H_
#define PIFM_NN_CHECKPOINT_H_

#include <filesystem>
#include <optional>
#include <string>

#include "pifm/nn/adam.h"
#include "pifm/nn/tensor.h"

namespace pifm::nn {

// Binary checkpoint, little-endian:
//
//   char[8]  magic "PIFMCKPT"
//   u32      format version (kCheckpointVersion)
//   u32 n, n bytes   model tag ("velocity", "sage", "graphon", ...)
//   u32 n, n bytes   metadata (JSON text: architecture, config, seed)
//   u64      record count R
//   R x { u32 n, n bytes name; u32 ndim; u64 dims[ndim]; f64 values[prod(dims)] }
//   u8       optimizer present
//   if present: u64 step; f64 lr, beta1, beta2, eps;
//               R x { f64 m[len]; f64 v[len] }   (record order)
inline constexpr unsigned kCheckpointVersion = 1;

struct Checkpoint {
  std::string tag;
  std::string metadata;
  ParameterSet params;
  std::optional<AdamState> optimizer;
};

std::string EncodeCheckpoint(const Checkpoint& ckpt);
Checkpoint DecodeCheckpoint(const std::string& bytes);  // throws ParseError

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace pifm::nn

#endif  // PIFM_NN_CHECKPOINT_H_
