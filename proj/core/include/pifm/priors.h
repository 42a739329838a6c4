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

#ifndef PIFM_PRIORS_H_
#define PIFM_PRIORS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pifm/data.h"
#include "pifm/graph.h"
#include "pifm/matrix.h"
#include "pifm/nn/autodiff.h"
#include "pifm/nn/tensor.h"
#include "pifm/random.h"

namespace pifm {

// n x d, row i is node i.
struct NodeEmbeddings {
  Matrix z;
  std::size_t n() const { return z.rows(); }
  std::size_t dim() const { return z.cols(); }
};

// --- node2vec ---------------------------------------------------------------

using Walk = std::vector<std::size_t>;

// `walks_per_node` rounds over all start nodes (in index order). After the
// first (uniform) step, the next node x of a walk at `cur` coming from `prev`
// is drawn with weight 1/p if x == prev, 1 if x is adjacent to prev, 1/q
// otherwise. Walks stop early at isolated nodes.
std::vector<Walk> RandomWalks(const AdjacencyState& a_obs, std::size_t walks_per_node,
                              std::size_t length, double p, double q, Rng& rng);

struct SgnsParams {
  std::size_t window = 5;
  std::size_t dim = 64;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;
};

// Skip-gram with negative sampling; negatives from unigram^0.75. Throws
// TrainingError when the corpus has no (center, context) pair. Nodes are
// numbered 0..num_nodes-1.
NodeEmbeddings TrainSgns(const std::vector<Walk>& walks, std::size_t num_nodes,
                         const SgnsParams& params, Rng& rng);

// --- logistic edge classifier ----------------------------------------------

struct EdgeLogisticModel {
  std::vector<double> weight;
  double bias = 0.0;
  double l2 = 1e-4;
  // Set when no observed positive or negative pair exists and the model fell
  // back to the observed edge density.
  bool fallback = false;

  double Logit(std::span<const double> features) const;
  double Probability(std::span<const double> features) const;
};

struct LogisticFitOptions {
  double l2 = 1e-4;
  bool class_balanced = true;
  double tolerance = 1e-6;
  std::size_t max_iterations = 200;
};

// Minimizes  sum_k c_k [softplus(w.x_k + b) - y_k (w.x_k + b)] / sum_k c_k
//            + (l2 / 2) |w|^2
// where c_k equalizes the two classes' total weight when class_balanced.
// Newton iterations with backtracking, until |grad|_inf < tolerance.
EdgeLogisticModel FitLogistic(const Matrix& features, const std::vector<double>& labels,
                              const LogisticFitOptions& options = {});

// Hadamard features z_i (.) z_j for each pair.
Matrix HadamardFeatures(const NodeEmbeddings& emb,
                        const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

// Observed positives plus up to neg_ratio observed negatives per positive
// (sampled without replacement), fitted with FitLogistic.
EdgeLogisticModel FitEdgeClassifier(const NodeEmbeddings& emb, const AdjacencyState& a_obs,
                                    const ObservationMask& xi, std::size_t neg_ratio,
                                    Rng& rng, const LogisticFitOptions& options = {});

struct Node2VecParams {
  std::size_t walks_per_node = 10;
  std::size_t walk_length = 20;
  double p = 1.0;
  double q = 1.0;
  SgnsParams sgns;
  std::size_t neg_ratio = 1;
  LogisticFitOptions logistic;
};

// --- inductive encoder ------------------------------------------------------

struct SageParams {
  std::size_t depth = 2;
  std::size_t hidden_dim = 32;
  std::size_t embed_dim = 32;
  std::size_t epochs = 30;
  double learning_rate = 1e-2;
  std::size_t neg_ratio = 1;
};

// Mean-aggregator message passing over the observed graph with degree input
// features [deg/(n-1), deg], followed by a linear projection to embed_dim.
// Shared logistic head on Hadamard pair features.
class SageModel {
 public:
  SageModel() = default;
  SageModel(const SageParams& params, std::uint64_t seed);

  const SageParams& params() const { return params_; }
  nn::ParameterSet& weights() { return weights_; }
  const nn::ParameterSet& weights() const { return weights_; }

  // Builds node embeddings on `tape` (n x embed_dim).
  nn::Var Encode(nn::Tape& tape, const AdjacencyState& a_obs) const;
  NodeEmbeddings Embed(const AdjacencyState& a_obs) const;
  // Head logits for pairs of a tape embedding.
  nn::Var PairLogits(nn::Tape& tape, nn::Var z,
                     const std::vector<std::pair<std::size_t, std::size_t>>& pairs) const;
  double PairProbability(const NodeEmbeddings& emb, std::size_t i, std::size_t j) const;

  static Matrix DegreeFeatures(const AdjacencyState& a_obs);

 private:
  SageParams params_;
  nn::ParameterSet weights_;
};

struct SageTrainingExample {
  AdjacencyState a1;  // ground truth of a training graph
  TaskInput input;    // its observation
};

struct SageTrainingResult {
  SageModel model;
  std::vector<NodeEmbeddings> embeddings;  // one per training example
  std::vector<double> epoch_loss;
  std::size_t skipped = 0;  // examples without both classes
};

// Trains encoder and head end to end with the class-balanced logistic loss.
// Link prediction supervises observed pairs (labels from A^O). The blind
// tasks observe a single class only, so they supervise the hidden pairs with
// the training graph's ground truth instead.
SageTrainingResult SageEmbed(const std::vector<SageTrainingExample>& examples,
                             TaskKind task, const SageParams& params, std::uint64_t seed);

// --- histogram graphon -------------------------------------------------------

// z_i = (midrank_i + 0.5)/n of node degrees in `a`; tied degrees share their
// mid-rank so that the map commutes with node relabelling.
std::vector<double> DegreeQuantiles(const AdjacencyState& a);

// Degree-sorted histogram estimator: nodes sorted by degree (ties by index)
// sit at z = (rank + 0.5)/n; every off-diagonal node pair is averaged into the
// grid cell it covers and the grid is smoothed with a count-weighted box filter
// (radius grows until a cell sees data).
GraphonGrid EstimateHistogramGraphon(const std::vector<AdjacencyState>& graphs,
                                     std::size_t resolution = 64,
                                     std::size_t smoothing_radius = 1);

// --- prior models -------------------------------------------------------------

struct Node2VecPrior {
  Node2VecParams params;
  std::uint64_t seed = 0;
};

struct SagePrior {
  SageModel model;
};

struct GraphonPrior {
  GraphonGrid w;
};

// Ablation baseline: hidden entries start at 0.5 and the flow adds N(0, 1).
struct GaussianPrior {
  double mean = 0.5;
};

using PriorModel = std::variant<Node2VecPrior, SagePrior, GraphonPrior, GaussianPrior>;

std::string_view PriorName(const PriorModel& prior);  // node2vec|sage|graphon|gaussian
bool IsTransductive(const PriorModel& prior);

// Edge probabilities: observed entries copied from a_obs, hidden entries from
// the model; symmetric, zero diagonal, within [0,1]. node2vec fits its
// embeddings and classifier on a_obs in canonical node order.
AdjacencyState PriorPredict(const PriorModel& prior, const AdjacencyState& a_obs,
                            const ObservationMask& xi);

// Permutation-equivariant structural features used to canonicalize the
// node2vec input: normalized degree, walk counts and hidden-pair counts.
NodeEmbeddings StructuralEmbedding(const AdjacencyState& a_obs, const ObservationMask& xi);

// Canonical node order: projection on the first principal component (sign
// fixed by positive third moment), ties by degree then index. Returns p with
// p(i) = canonical position of node i. Zero-variance embeddings fall back to
// degree-then-index.
NodePermutation Canonicalize(const NodeEmbeddings& emb,
                             const std::vector<std::size_t>& degrees = {});

// Checkpoint round trip for trainable priors (tag "prior:<variant>").
std::string EncodePrior(const PriorModel& prior);
PriorModel DecodePrior(const std::string& bytes);

}  // namespace pifm

#endif  // PIFM_PRIORS_H_
