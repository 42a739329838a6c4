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

#include <benchmark/benchmark.h>

#include "pifm/data.h"
#include "pifm/metrics.h"

namespace pifm {
namespace {

void BM_Auc(benchmark::State& state) {
  Rng rng(1);
  const std::size_t m = static_cast<std::size_t>(state.range(0));
  std::vector<double> scores(m), labels(m);
  for (std::size_t k = 0; k < m; ++k) {
    scores[k] = Uniform01(rng);
    labels[k] = k % 3 == 0 ? 1.0 : 0.0;
  }
  for (auto _ : state) benchmark::DoNotOptimize(Auc(scores, labels));
}
BENCHMARK(BM_Auc)->Arg(435)->Arg(1 << 16);

void BM_Mmd2Degree(benchmark::State& state) {
  const std::size_t g = static_cast<std::size_t>(state.range(0));
  std::vector<AdjacencyState> a, b;
  for (const auto& r : SampleGraphonDataset(NamedGraphon("dc_sbm"), g, 30, 1)) a.push_back(r.adjacency);
  for (const auto& r : SampleGraphonDataset(NamedGraphon("dc_sbm"), g, 30, 2)) b.push_back(r.adjacency);
  for (auto _ : state) benchmark::DoNotOptimize(Mmd2(a, b, GraphStatistic::kDegree));
}
BENCHMARK(BM_Mmd2Degree)->Arg(30)->Arg(300)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace pifm
