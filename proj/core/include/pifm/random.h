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

#ifndef PIFM_RANDOM_H_
#define PIFM_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace pifm {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t MixSeed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic seed for a (base seed, stream tags...) tuple. Every unit of
// parallel work gets its own stream so results do not depend on scheduling.
inline std::uint64_t DeriveSeed(std::uint64_t base,
                                std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = MixSeed(base);
  for (std::uint64_t t : tags) s = MixSeed(s ^ MixSeed(t + 0x632be59bd9b4e019ULL));
  return s;
}

inline Rng MakeRng(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
  return Rng(DeriveSeed(base, tags));
}

inline double Uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double StandardNormal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace pifm

#endif  // PIFM_RANDOM_H_
