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
#include "pifm/flow.h"

namespace pifm {
namespace {

AdjacencyState RandomGraph(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return SampleGraphonGraph(NamedGraphon("dc_sbm"), n, rng).adjacency;
}

// A trained net has a nonzero output layer; fill it so the whole graph runs.
VelocityNet BenchNet() {
  VelocityNet net(VelocityNetConfig{}, 7);
  for (double& w : net.params()["out2.weight"].data) w = 0.1;
  return net;
}

void BM_VelocityForward(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const VelocityNet net = BenchNet();
  const AdjacencyState a = RandomGraph(n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(VelocityForward(net, a, 0.3));
}
BENCHMARK(BM_VelocityForward)->Arg(8)->Arg(30)->Arg(60)->Arg(125)->Unit(benchmark::kMicrosecond);

void BM_VelocityForwardBackward(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const VelocityNet net = BenchNet();
  const AdjacencyState a = RandomGraph(n, 2);
  Rng rng(3);
  for (auto _ : state) {
    nn::Tape tape;
    nn::Var v = net.Forward(tape, a.values(), 0.3, &rng);
    nn::Var loss = nn::MeanSquare(v);
    benchmark::DoNotOptimize(tape.Backward(loss));
    nn::GradientBuffer g = net.params().ZeroGradients();
    tape.AccumulateParamGrads(g);
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_VelocityForwardBackward)->Arg(8)->Arg(30)->Arg(60)->Unit(benchmark::kMicrosecond);

void BM_EulerSampleK(benchmark::State& state) {
  const std::size_t k = static_cast<std::size_t>(state.range(0));
  const VelocityNet net = BenchNet();
  const AdjacencyState a = RandomGraph(30, 4);
  Rng rng(5);
  const TaskInput in = MakeTaskInput(a, TaskSpec{TaskKind::kLinkPrediction, 0.5, 0}, rng);
  AdjacencyState prior = in.observed;
  for (const PairValue& pv : HiddenEntries(a, in.mask)) prior.SetPair(pv.i, pv.j, 0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(EulerSample(net, in.observed, in.mask, prior,
                                         TaskKind::kLinkPrediction, k, 0.1, 9));
  }
}
BENCHMARK(BM_EulerSampleK)->Arg(1)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace pifm
