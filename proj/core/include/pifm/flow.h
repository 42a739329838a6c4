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

#ifndef PIFM_FLOW_H_
#define PIFM_FLOW_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pifm/data.h"
#include "pifm/error.h"
#include "pifm/graph.h"
#include "pifm/matrix.h"
#include "pifm/nn/autodiff.h"
#include "pifm/nn/checkpoint.h"
#include "pifm/nn/tensor.h"
#include "pifm/priors.h"
#include "pifm/random.h"

namespace pifm {

struct VelocityNetConfig {
  std::size_t num_layers = 5;
  std::size_t hidden_dim = 32;
  std::size_t c_init = 2;
  std::size_t c_hid = 8;
  std::size_t c_final = 4;
  std::size_t time_dim = 32;
  std::size_t max_nodes = 125;
  double dropout = 0.2;
};

// Permutation-equivariant velocity field v(A, t).
//
// Edge channels start as [A, A^2/N, ...] (c_init of them) and node features
// as their row means. Each layer aggregates node features through every edge
// channel, applies a shared linear map, RMS-norm with a time-dependent FiLM
// scale, SiLU and dropout, then updates the edge channels from the pair
// products h_i (.) h_j with a shared two-layer MLP. The output MLP reads all
// edge channels of all layers; its last layer starts at zero so an untrained
// net is the zero field. Output is symmetrized with a zero diagonal.
class VelocityNet {
 public:
  VelocityNet() = default;
  VelocityNet(const VelocityNetConfig& config, std::uint64_t seed);

  const VelocityNetConfig& config() const { return config_; }
  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }

  // Builds the forward pass on `tape`. Dropout is active only when `rng` is
  // non-null.
  nn::Var Forward(nn::Tape& tape, const Matrix& a_t, double t, Rng* dropout_rng) const;

  nn::Checkpoint ToCheckpoint() const;
  static VelocityNet FromCheckpoint(const nn::Checkpoint& ckpt);

 private:
  VelocityNetConfig config_;
  nn::ParameterSet params_;
};

// Eval mode is deterministic; train mode applies dropout from `rng`.
AdjacencyState VelocityForward(const VelocityNet& net, const AdjacencyState& a_t, double t,
                               bool train_mode = false, Rng* rng = nullptr);

struct FlowConfig {
  double sigma_s_train = 0.1;
  double sigma_s_sample = 0.1;
  std::size_t k = 1;
  double lr = 2e-4;
  // Learning rate at the last step as a fraction of lr; linear in between.
  double lr_final_fraction = 1.0;
  std::size_t batch_size = 64;
  std::size_t epochs = 100;
  bool clamp_observed = false;
  // Additional stopping bound on optimizer steps (0 = epochs only).
  std::size_t max_steps = 0;
  // Validation examples drawn per validation graph, each at a fixed t.
  std::size_t val_draws = 4;
  VelocityNetConfig net;
  std::uint64_t seed = 0;

  void Validate() const;  // ConfigError on sigma < 0, K == 0, ...
};

// Source state. Link prediction:  xi (.) A1 + (1 - xi) (.) (f + eps);
// expansion: A^O + (1 - A^O) (.) (f + eps); denoising: A^O (.) (f + eps).
// `observed` is A^O (for link prediction xi (.) A1, which is all the formula
// reads of A1). eps ~ N(0, sigma^2) on hidden upper entries, mirrored; the
// diagonal is zero.
AdjacencyState BuildA0(const AdjacencyState& observed, const ObservationMask& xi,
                       const AdjacencyState& prior_probs, double sigma_s, TaskKind task, Rng& rng);

// (1 - t) a0 + t a1; RangeError for t outside [0,1].
AdjacencyState Interpolate(const AdjacencyState& a0, const AdjacencyState& a1, double t);

// One training or validation example before the time draw.
struct FlowExample {
  AdjacencyState a1;
  AdjacencyState observed;
  ObservationMask mask;
  AdjacencyState prior_probs;
};

// Produces example `index` for an rng; called concurrently for distinct
// indices, so implementations must not share mutable state.
using ExampleSampler = std::function<FlowExample(std::size_t index, Rng& rng)>;

struct FlowTrainResult {
  VelocityNet net;  // best validation checkpoint (last one without validation data)
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_loss;    // per epoch, empty without validation data
  std::size_t best_epoch = 0;
  std::size_t steps = 0;
};

// Training failed on a non-finite loss; carries the last good weights.
class FlowDivergedError : public TrainingError {
 public:
  FlowDivergedError(const std::string& what, std::shared_ptr<const VelocityNet> last_good)
      : TrainingError(what), last_good_(std::move(last_good)) {}
  const VelocityNet& last_good() const { return *last_good_; }

 private:
  std::shared_ptr<const VelocityNet> last_good_;
};

// Flow matching: each step draws a batch of examples, t ~ U[0,1] per example,
// builds A0 with sigma_s_train, and regresses v(A_t, t) onto A1 - A0 with the
// mean squared error over upper-triangle entries. Batch members run in
// parallel; gradients are summed in index order.
FlowTrainResult TrainFlow(std::size_t num_train, const ExampleSampler& train,
                          std::size_t num_val, const ExampleSampler& val, TaskKind task,
                          const FlowConfig& cfg);

// Fresh masks per draw (TaskSpec rate, seeds from the rng) and priors from
// `prior`. Transductive priors are fitted once per (graph, mask) for a bank of
// `mask_bank` masks per graph, reused across epochs.
ExampleSampler MakeTaskSampler(const std::vector<AdjacencyState>& graphs,
                               std::shared_ptr<const PriorModel> prior, const TaskSpec& task,
                               std::size_t mask_bank = 0);

struct FlowSample {
  std::vector<AdjacencyState> trajectory;  // A0 and the state after every step
  AdjacencyState final_state;
  std::size_t k = 0;
  std::uint64_t seed = 0;
};

struct SampleOptions {
  bool clamp_observed = false;
  bool keep_trajectory = false;
};

// A0 from BuildA0 with sigma_s, then K Euler steps A += v(A, i/K)/K.
FlowSample EulerSample(const VelocityNet& net, const AdjacencyState& observed,
                       const ObservationMask& xi, const AdjacencyState& prior_probs,
                       TaskKind task, std::size_t k, double sigma_s, std::uint64_t seed,
                       const SampleOptions& options = {});

// log p(A1) = log N(A0 | prior, sigma^2) over hidden upper entries
//             - int_0^1 tr dv(A_t, t)/dA_t dt
// along A_t = (1-t) A0 + t A1, midpoint rule with quad_steps nodes; traces by
// central differences (step 1e-5) over all upper-triangle coordinates.
double LogDensity(const VelocityNet& net, const AdjacencyState& a1, const AdjacencyState& a0,
                  const ObservationMask& xi, const AdjacencyState& prior_probs,
                  std::size_t quad_steps, double sigma_s);

// Mean squared error over hidden upper-triangle entries; MetricError if none.
double MseDistortion(const AdjacencyState& a_hat, const AdjacencyState& a1,
                     const ObservationMask& xi);

// Flow-matching loss of one example at time t (eval mode, no noise draw).
double FlowMatchingLoss(const VelocityNet& net, const AdjacencyState& a0,
                        const AdjacencyState& a1, double t);

}  // namespace pifm

#endif  // PIFM_FLOW_H_
