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

#include "pifm/flow.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gradcheck.h"
#include "pifm/error.h"
#include "pifm/priors.h"
#include "test_util.h"

namespace pifm {
namespace {

using testing::RandomGraph;
using testing::RandomMask;
using testing::RandomRelaxed;

// A net whose output layer is no longer zero.
VelocityNet RandomNet(std::uint64_t seed, double scale = 0.5) {
  VelocityNetConfig cfg;
  cfg.dropout = 0.0;
  VelocityNet net(cfg, seed);
  Rng rng(seed + 1);
  testing::FillNormal(net.params()["out2.weight"], rng, scale);
  return net;
}

struct Scene {
  AdjacencyState a1, observed, prior;
  ObservationMask xi;
};

Scene RandomScene(std::size_t n, Rng& rng) {
  Scene s;
  s.a1 = RandomGraph(n, 0.4, rng);
  s.xi = RandomMask(n, 0.5, rng);
  s.observed = s.a1;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!s.xi.observed(i, j)) s.observed.SetPair(i, j, 0.0);
  s.prior = RandomRelaxed(n, rng);
  return s;
}

TEST(BuildA0, LiteralFormulasWithoutNoise) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = testing::UniformIndex(2, 10, rng);
    const Scene s = RandomScene(n, rng);
    for (TaskKind task : {TaskKind::kLinkPrediction, TaskKind::kExpansion, TaskKind::kDenoising}) {
      const AdjacencyState a0 = BuildA0(s.observed, s.xi, s.prior, 0.0, task, rng);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) {
            EXPECT_EQ(a0(i, j), 0.0);
            continue;
          }
          const double x = s.xi.observed(i, j) ? 1.0 : 0.0, ao = s.observed(i, j), f = s.prior(i, j);
          double expect = 0.0;
          switch (task) {
            case TaskKind::kLinkPrediction: expect = x * ao + (1 - x) * f; break;
            case TaskKind::kExpansion: expect = ao + (1 - ao) * f; break;
            case TaskKind::kDenoising: expect = ao * f; break;
          }
          ASSERT_EQ(a0(i, j), expect);
        }
    }
  }
}

TEST(BuildA0, NoiseOnlyOnHiddenEntries) {
  Rng rng(2);
  const std::size_t n = 40;
  const Scene s = RandomScene(n, rng);
  const AdjacencyState a0 = BuildA0(s.observed, s.xi, s.prior, 0.3, TaskKind::kLinkPrediction, rng);
  double sum = 0, sq = 0, count = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      EXPECT_EQ(a0(i, j), a0(j, i));
      if (s.xi.observed(i, j)) {
        EXPECT_EQ(a0(i, j), s.observed(i, j));
      } else {
        const double e = a0(i, j) - s.prior(i, j);
        sum += e, sq += e * e, count += 1;
      }
    }
  const double mean = sum / count;
  EXPECT_NEAR(mean, 0.0, 4 * 0.3 / std::sqrt(count));
  EXPECT_NEAR(std::sqrt(sq / count - mean * mean), 0.3, 0.03);
  EXPECT_THROW(BuildA0(s.observed, s.xi, s.prior, -1.0, TaskKind::kLinkPrediction, rng), ConfigError);
}

TEST(Interpolate, EndpointsAreExact) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = testing::UniformIndex(2, 12, rng);
    const AdjacencyState a0 = RandomRelaxed(n, rng), a1 = RandomGraph(n, 0.5, rng);
    EXPECT_EQ(Interpolate(a0, a1, 0.0), a0);
    EXPECT_EQ(Interpolate(a0, a1, 1.0), a1);
    const AdjacencyState mid = Interpolate(a0, a1, 0.25);
    EXPECT_NEAR(mid(0, 1), 0.75 * a0(0, 1) + 0.25 * a1(0, 1), 1e-15);
  }
  EXPECT_THROW(Interpolate(AdjacencyState(2), AdjacencyState(2), 1.5), RangeError);
}

TEST(VelocityNet, UntrainedNetIsZeroField) {
  VelocityNet net(VelocityNetConfig{}, 4);
  Rng rng(4);
  const AdjacencyState v = VelocityForward(net, RandomRelaxed(9, rng), 0.3);
  for (double x : v.values().data()) EXPECT_EQ(x, 0.0);
}

TEST(VelocityNet, OutputIsSymmetricWithZeroDiagonal) {
  const VelocityNet net = RandomNet(5);
  Rng rng(5);
  const AdjacencyState v = VelocityForward(net, RandomRelaxed(11, rng), 0.7);
  bool nonzero = false;
  for (std::size_t i = 0; i < 11; ++i) {
    EXPECT_EQ(v(i, i), 0.0);
    for (std::size_t j = 0; j < 11; ++j) {
      EXPECT_EQ(v(i, j), v(j, i));
      nonzero = nonzero || v(i, j) != 0.0;
    }
  }
  EXPECT_TRUE(nonzero);
}

TEST(VelocityNet, CapacityAndShapeErrors) {
  VelocityNetConfig cfg;
  cfg.max_nodes = 6;
  VelocityNet net(cfg, 1);
  EXPECT_THROW(VelocityForward(net, AdjacencyState(7), 0.0), CapacityError);
  EXPECT_THROW(VelocityForward(VelocityNet(), AdjacencyState(3), 0.0), StateError);
}

TEST(VelocityNet, DropoutOnlyInTrainMode) {
  VelocityNetConfig cfg;
  cfg.dropout = 0.5;
  VelocityNet net(cfg, 6);
  Rng init(1);
  testing::FillNormal(net.params()["out2.weight"], init, 0.5);
  Rng rng(6);
  const AdjacencyState a = RandomRelaxed(8, rng);
  EXPECT_EQ(VelocityForward(net, a, 0.5), VelocityForward(net, a, 0.5));
  Rng r1(7), r2(8);
  EXPECT_NE(VelocityForward(net, a, 0.5, true, &r1), VelocityForward(net, a, 0.5, true, &r2));
}

TEST(VelocityNet, CheckpointRoundTrip) {
  const VelocityNet net = RandomNet(8);
  const VelocityNet back = VelocityNet::FromCheckpoint(
      nn::DecodeCheckpoint(nn::EncodeCheckpoint(net.ToCheckpoint())));
  Rng rng(8);
  const AdjacencyState a = RandomRelaxed(7, rng);
  EXPECT_EQ(VelocityForward(back, a, 0.4), VelocityForward(net, a, 0.4));
  nn::Checkpoint wrong = net.ToCheckpoint();
  wrong.tag = "sage";
  EXPECT_THROW(VelocityNet::FromCheckpoint(wrong), ParseError);
}

// Relabelling nodes commutes with the velocity field, the source state and the
// sampler.
TEST(Equivariance, VelocityBuildA0AndSampler) {
  Rng rng(9);
  const VelocityNet net = RandomNet(9);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = testing::UniformIndex(2, 12, rng);
    const Scene s = RandomScene(n, rng);
    const AdjacencyState a = RandomRelaxed(n, rng);
    const double t = Uniform01(rng);
    const NodePermutation p = NodePermutation::Random(n, rng);
    EXPECT_LE(MaxAbsDiff(VelocityForward(net, Permute(a, p), t).values(),
                         Permute(VelocityForward(net, a, t), p).values()),
              1e-8);
    const AdjacencyState ob = Permute(s.observed, p), pr = Permute(s.prior, p);
    const ObservationMask xi = Permute(s.xi, p);
    EXPECT_EQ(BuildA0(ob, xi, pr, 0.0, TaskKind::kExpansion, rng),
              Permute(BuildA0(s.observed, s.xi, s.prior, 0.0, TaskKind::kExpansion, rng), p));
    const FlowSample lhs = EulerSample(net, ob, xi, pr, TaskKind::kLinkPrediction, 5, 0.0, 1);
    const FlowSample rhs =
        EulerSample(net, s.observed, s.xi, s.prior, TaskKind::kLinkPrediction, 5, 0.0, 1);
    EXPECT_LE(MaxAbsDiff(lhs.final_state.values(), Permute(rhs.final_state, p).values()), 1e-8);
  }
}

TEST(EulerSample, OneStepIsSourcePlusVelocity) {
  Rng rng(10);
  const VelocityNet net = RandomNet(10);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = testing::UniformIndex(2, 10, rng);
    const Scene s = RandomScene(n, rng);
    SampleOptions opts;
    opts.keep_trajectory = true;
    const FlowSample f =
        EulerSample(net, s.observed, s.xi, s.prior, TaskKind::kLinkPrediction, 1, 0.1, rng(), opts);
    ASSERT_EQ(f.trajectory.size(), 2u);
    const AdjacencyState& a0 = f.trajectory[0];
    const AdjacencyState v = VelocityForward(net, a0, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) ASSERT_EQ(f.final_state(i, j), a0(i, j) + v(i, j));
    EXPECT_EQ(f.final_state, f.trajectory[1]);
  }
}

TEST(EulerSample, ZeroVelocityReturnsSource) {
  VelocityNet net(VelocityNetConfig{}, 11);
  Rng rng(11);
  const Scene s = RandomScene(9, rng);
  for (std::size_t k : {1u, 7u, 50u}) {
    SampleOptions opts;
    opts.keep_trajectory = true;
    const FlowSample f =
        EulerSample(net, s.observed, s.xi, s.prior, TaskKind::kDenoising, k, 0.2, 3, opts);
    EXPECT_EQ(f.final_state, f.trajectory.front());
    EXPECT_EQ(f.trajectory.size(), k + 1);
  }
  EXPECT_THROW(EulerSample(net, s.observed, s.xi, s.prior, TaskKind::kDenoising, 0, 0.2, 3),
               ConfigError);
}

TEST(EulerSample, ClampKeepsObservedEntriesAndSeedIsReproducible) {
  const VelocityNet net = RandomNet(12);
  Rng rng(12);
  const Scene s = RandomScene(10, rng);
  SampleOptions opts;
  opts.clamp_observed = true;
  const FlowSample f =
      EulerSample(net, s.observed, s.xi, s.prior, TaskKind::kLinkPrediction, 4, 0.1, 77, opts);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = i + 1; j < 10; ++j)
      if (s.xi.observed(i, j)) EXPECT_EQ(f.final_state(i, j), s.observed(i, j));
  const FlowSample g =
      EulerSample(net, s.observed, s.xi, s.prior, TaskKind::kLinkPrediction, 4, 0.1, 77, opts);
  EXPECT_EQ(f.final_state, g.final_state);
}

// With the zero field the flow is the identity, so the density is the
// Gaussian source density of the hidden entries.
TEST(LogDensity, ZeroFieldIsGaussianSourceDensity) {
  VelocityNet net(VelocityNetConfig{}, 13);
  Rng rng(13);
  const Scene s = RandomScene(6, rng);
  const double sigma = 0.2;
  const AdjacencyState a0 = BuildA0(s.observed, s.xi, s.prior, sigma, TaskKind::kLinkPrediction, rng);
  double expect = 0.0;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = i + 1; j < 6; ++j)
      if (!s.xi.observed(i, j)) {
        const double d = (a0(i, j) - s.prior(i, j)) / sigma;
        expect += -0.5 * d * d - 0.5 * std::log(2 * std::numbers::pi * sigma * sigma);
      }
  EXPECT_NEAR(LogDensity(net, a0, a0, s.xi, s.prior, 4, sigma), expect, 1e-9);
  EXPECT_THROW(LogDensity(net, a0, a0, s.xi, s.prior, 4, 0.0), ConfigError);
}

TEST(LogDensity, InvariantUnderRelabelling) {
  const VelocityNet net = RandomNet(14, 0.2);
  Rng rng(14);
  for (int trial = 0; trial < 3; ++trial) {
    const std::size_t n = testing::UniformIndex(3, 8, rng);
    const Scene s = RandomScene(n, rng);
    const AdjacencyState a0 = BuildA0(s.observed, s.xi, s.prior, 0.1, TaskKind::kLinkPrediction, rng);
    const NodePermutation p = NodePermutation::Random(n, rng);
    const double lhs = LogDensity(net, s.a1, a0, s.xi, s.prior, 8, 0.1);
    const double rhs = LogDensity(net, Permute(s.a1, p), Permute(a0, p), Permute(s.xi, p),
                                  Permute(s.prior, p), 8, 0.1);
    EXPECT_NEAR(lhs, rhs, 1e-4);
  }
}

TEST(MseDistortion, HiddenRegionOnly) {
  AdjacencyState a1 = AdjacencyState::FromEdges(3, {{0, 1}});
  AdjacencyState hat(3);
  hat.SetPair(0, 1, 0.5);
  hat.SetPair(0, 2, 0.25);
  hat.SetPair(1, 2, 0.9);
  ObservationMask xi = ObservationMask::AllObserved(3);
  xi.SetPair(0, 1, false);
  xi.SetPair(0, 2, false);
  EXPECT_DOUBLE_EQ(MseDistortion(hat, a1, xi), (0.25 + 0.0625) / 2);
  EXPECT_THROW(MseDistortion(hat, a1, ObservationMask::AllObserved(3)), MetricError);
}

TEST(FlowConfig, ValidateRejectsBadValues) {
  FlowConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.k = 0;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = FlowConfig{};
  c.sigma_s_train = -0.1;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = FlowConfig{};
  c.lr_final_fraction = 0.0;
  EXPECT_THROW(c.Validate(), ConfigError);
}

TEST(TrainFlow, ReducesLossAndIsDeterministic) {
  std::vector<AdjacencyState> graphs;
  for (const auto& r : SampleGraphonDataset(NamedGraphon("two_block"), 16, 8, 1)) graphs.push_back(r.adjacency);
  auto prior = std::make_shared<const PriorModel>(GaussianPrior{});
  const ExampleSampler sampler = MakeTaskSampler(graphs, prior, {TaskKind::kLinkPrediction, 0.5, 3});
  FlowConfig cfg;
  cfg.epochs = 15;
  cfg.batch_size = 8;
  cfg.lr = 3e-3;
  cfg.net.dropout = 0.0;
  cfg.seed = 5;
  const FlowTrainResult a = TrainFlow(12, sampler, 4, sampler, TaskKind::kLinkPrediction, cfg);
  const FlowTrainResult b = TrainFlow(12, sampler, 4, sampler, TaskKind::kLinkPrediction, cfg);
  EXPECT_EQ(a.steps, 30u);
  ASSERT_EQ(a.val_loss.size(), 15u);
  EXPECT_LT(*std::min_element(a.val_loss.begin(), a.val_loss.end()), a.val_loss.front());
  EXPECT_EQ(a.train_loss, b.train_loss);
  EXPECT_EQ(a.val_loss, b.val_loss);
  EXPECT_EQ(a.net.params().at(0).data, b.net.params().at(0).data);
  EXPECT_EQ(a.val_loss[a.best_epoch], *std::min_element(a.val_loss.begin(), a.val_loss.end()));
}

TEST(TrainFlow, MaxStepsBoundsTraining) {
  std::vector<AdjacencyState> graphs{AdjacencyState::FromEdges(4, {{0, 1}, {2, 3}})};
  auto prior = std::make_shared<const PriorModel>(GaussianPrior{});
  const ExampleSampler sampler = MakeTaskSampler(graphs, prior, {TaskKind::kLinkPrediction, 0.5, 0});
  FlowConfig cfg;
  cfg.epochs = 100;
  cfg.max_steps = 7;
  cfg.batch_size = 1;
  EXPECT_EQ(TrainFlow(1, sampler, 0, {}, TaskKind::kLinkPrediction, cfg).steps, 7u);
  EXPECT_THROW(TrainFlow(0, sampler, 0, {}, TaskKind::kLinkPrediction, cfg), ConfigError);
}

TEST(MakeTaskSampler, SameIndexAndSeedGiveSameExample) {
  std::vector<AdjacencyState> graphs;
  for (const auto& r : SampleGraphonDataset(NamedGraphon("product"), 3, 10, 1)) graphs.push_back(r.adjacency);
  auto prior = std::make_shared<const PriorModel>(Node2VecPrior{Node2VecParams{}, 1});
  const ExampleSampler sampler = MakeTaskSampler(graphs, prior, {TaskKind::kLinkPrediction, 0.5, 2}, 2);
  Rng r1(4), r2(4);
  const FlowExample a = sampler(1, r1), b = sampler(1, r2);
  EXPECT_EQ(a.a1, graphs[1]);
  EXPECT_EQ(a.mask, b.mask);
  EXPECT_EQ(a.prior_probs, b.prior_probs);
  EXPECT_THROW(MakeTaskSampler(graphs, nullptr, {}), StateError);
}

}  // namespace
}  // namespace pifm
