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
#include "pifm/priors.h"

namespace pifm {
namespace {

struct Observation {
  AdjacencyState a;
  TaskInput input;
};

Observation MakeObservation(std::size_t n) {
  Rng rng(11);
  Observation o;
  o.a = SampleGraphonGraph(NamedGraphon("dc_sbm"), n, rng).adjacency;
  o.input = MakeTaskInput(o.a, TaskSpec{TaskKind::kLinkPrediction, 0.5, 0}, rng);
  return o;
}

void BM_Node2VecPrior(benchmark::State& state) {
  const Observation o = MakeObservation(static_cast<std::size_t>(state.range(0)));
  const PriorModel prior = Node2VecPrior{Node2VecParams{}, 3};
  for (auto _ : state) {
    benchmark::DoNotOptimize(PriorPredict(prior, o.input.observed, o.input.mask));
  }
}
BENCHMARK(BM_Node2VecPrior)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_SagePrior(benchmark::State& state) {
  const Observation o = MakeObservation(static_cast<std::size_t>(state.range(0)));
  const PriorModel prior = SagePrior{SageModel(SageParams{}, 5)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(PriorPredict(prior, o.input.observed, o.input.mask));
  }
}
BENCHMARK(BM_SagePrior)->Arg(30)->Arg(125)->Unit(benchmark::kMicrosecond);

void BM_HistogramGraphon(benchmark::State& state) {
  std::vector<AdjacencyState> graphs;
  for (const GraphRecord& r : SampleGraphonDataset(NamedGraphon("dc_sbm"), 200, 30, 1))
    graphs.push_back(r.adjacency);
  for (auto _ : state) benchmark::DoNotOptimize(EstimateHistogramGraphon(graphs));
}
BENCHMARK(BM_HistogramGraphon)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace pifm
