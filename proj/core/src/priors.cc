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

#include "pifm/priors.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "json.hpp"
#include "pifm/error.h"
#include "pifm/nn/adam.h"
#include "pifm/nn/checkpoint.h"

namespace pifm {
namespace {

using Pairs = std::vector<std::pair<std::size_t, std::size_t>>;
using Json = nlohmann::json;

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double Softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

std::vector<std::vector<std::size_t>> Neighbors(const AdjacencyState& a) {
  std::vector<std::vector<std::size_t>> nb(a.n());
  for (std::size_t i = 0; i < a.n(); ++i)
    for (std::size_t j = 0; j < a.n(); ++j)
      if (a(i, j) == 1.0) nb[i].push_back(j);
  return nb;
}

void RequireBinary(const AdjacencyState& a, const char* op) {
  if (!a.is_binary()) throw ConfigError(std::string(op) + ": observed graph must be binary");
}

void RequireSameSize(const AdjacencyState& a, const ObservationMask& xi, const char* op) {
  if (a.n() != xi.n()) {
    throw DimensionError(std::string(op) + ": graph has " + std::to_string(a.n()) +
                         " nodes, mask has " + std::to_string(xi.n()));
  }
}

// Degree-then-index order as a permutation (node -> position).
NodePermutation DegreeIndexOrder(const std::vector<std::size_t>& degrees, std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const std::size_t dx = degrees.empty() ? 0 : degrees[x];
    const std::size_t dy = degrees.empty() ? 0 : degrees[y];
    return dx < dy;
  });
  std::vector<std::size_t> pos(n);
  for (std::size_t r = 0; r < n; ++r) pos[order[r]] = r;
  return NodePermutation(std::move(pos));
}

double ConstantDensityLogit(std::size_t pos, std::size_t neg) {
  const double density =
      pos + neg == 0 ? 0.5 : static_cast<double>(pos) / static_cast<double>(pos + neg);
  const double d = std::clamp(density, 1e-6, 1.0 - 1e-6);
  return std::log(d / (1.0 - d));
}

}  // namespace

// --- node2vec ---------------------------------------------------------------

std::vector<Walk> RandomWalks(const AdjacencyState& a_obs, std::size_t walks_per_node,
                              std::size_t length, double p, double q, Rng& rng) {
  RequireBinary(a_obs, "RandomWalks");
  if (!(p > 0.0) || !(q > 0.0)) throw ConfigError("RandomWalks: p and q must be positive");
  const auto nb = Neighbors(a_obs);
  const std::size_t n = a_obs.n();
  std::vector<Walk> walks;
  walks.reserve(walks_per_node * n);
  std::vector<double> weights;
  for (std::size_t r = 0; r < walks_per_node; ++r) {
    for (std::size_t s = 0; s < n; ++s) {
      Walk w{s};
      while (w.size() < length) {
        const std::size_t cur = w.back();
        const auto& cand = nb[cur];
        if (cand.empty()) break;
        if (w.size() == 1) {
          w.push_back(cand[std::uniform_int_distribution<std::size_t>(0, cand.size() - 1)(rng)]);
          continue;
        }
        const std::size_t prev = w[w.size() - 2];
        weights.resize(cand.size());
        double total = 0.0;
        for (std::size_t k = 0; k < cand.size(); ++k) {
          const std::size_t x = cand[k];
          weights[k] = x == prev ? 1.0 / p : (a_obs(prev, x) == 1.0 ? 1.0 : 1.0 / q);
          total += weights[k];
        }
        double u = Uniform01(rng) * total;
        std::size_t pick = cand.size() - 1;
        for (std::size_t k = 0; k < cand.size(); ++k) {
          if (u < weights[k]) {
            pick = k;
            break;
          }
          u -= weights[k];
        }
        w.push_back(cand[pick]);
      }
      walks.push_back(std::move(w));
    }
  }
  return walks;
}

NodeEmbeddings TrainSgns(const std::vector<Walk>& walks, std::size_t num_nodes,
                         const SgnsParams& params, Rng& rng) {
  if (params.dim == 0) throw ConfigError("TrainSgns: dim must be positive");
  std::vector<double> counts(num_nodes, 0.0);
  std::size_t pairs_per_epoch = 0;
  for (const Walk& w : walks) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] >= num_nodes) throw DimensionError("TrainSgns: node id out of range");
      counts[w[i]] += 1.0;
      const std::size_t lo = i >= params.window ? i - params.window : 0;
      const std::size_t hi = std::min(w.size() - 1, i + params.window);
      pairs_per_epoch += hi - lo;
    }
  }
  if (pairs_per_epoch == 0 || params.window == 0) {
    throw TrainingError("TrainSgns: corpus has no (center, context) pairs");
  }

  const std::size_t d = params.dim;
  Matrix in(num_nodes, d);
  Matrix out(num_nodes, d);
  std::uniform_real_distribution<double> init(-0.5 / static_cast<double>(d),
                                              0.5 / static_cast<double>(d));
  for (double& v : in.data()) v = init(rng);

  std::vector<double> noise(num_nodes);
  for (std::size_t v = 0; v < num_nodes; ++v) noise[v] = std::pow(counts[v], 0.75);
  std::discrete_distribution<std::size_t> negative(noise.begin(), noise.end());

  const double total = static_cast<double>(pairs_per_epoch * params.epochs);
  double done = 0.0;
  std::vector<double> grad(d);
  auto update = [&](std::size_t center, std::size_t target, double label, double lr) {
    double* h = in.raw() + center * d;
    double* o = out.raw() + target * d;
    double dot = 0.0;
    for (std::size_t k = 0; k < d; ++k) dot += h[k] * o[k];
    const double g = lr * (label - Sigmoid(dot));
    for (std::size_t k = 0; k < d; ++k) {
      grad[k] += g * o[k];
      o[k] += g * h[k];
    }
  };
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    for (const Walk& w : walks) {
      for (std::size_t i = 0; i < w.size(); ++i) {
        const std::size_t lo = i >= params.window ? i - params.window : 0;
        const std::size_t hi = std::min(w.size() - 1, i + params.window);
        for (std::size_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          const double lr = params.learning_rate * std::max(1e-4, 1.0 - done / total);
          done += 1.0;
          std::fill(grad.begin(), grad.end(), 0.0);
          update(w[i], w[j], 1.0, lr);
          for (std::size_t k = 0; k < params.negatives; ++k) {
            const std::size_t neg = negative(rng);
            if (neg == w[j]) continue;
            update(w[i], neg, 0.0, lr);
          }
          double* h = in.raw() + w[i] * d;
          for (std::size_t k = 0; k < d; ++k) h[k] += grad[k];
        }
      }
    }
  }
  return NodeEmbeddings{std::move(in)};
}

// --- logistic edge classifier ----------------------------------------------

double EdgeLogisticModel::Logit(std::span<const double> features) const {
  if (features.size() != weight.size()) {
    throw DimensionError("EdgeLogisticModel: feature length " + std::to_string(features.size()) +
                         " != weight length " + std::to_string(weight.size()));
  }
  double z = bias;
  for (std::size_t k = 0; k < weight.size(); ++k) z += weight[k] * features[k];
  return z;
}

double EdgeLogisticModel::Probability(std::span<const double> features) const {
  return Sigmoid(Logit(features));
}

EdgeLogisticModel FitLogistic(const Matrix& features, const std::vector<double>& labels,
                              const LogisticFitOptions& options) {
  const std::size_t m = features.rows();
  const std::size_t d = features.cols();
  if (labels.size() != m) throw DimensionError("FitLogistic: label count != feature rows");
  if (m == 0) throw ConfigError("FitLogistic: no training examples");
  if (options.l2 < 0) throw ConfigError("FitLogistic: l2 must be non-negative");

  std::size_t pos = 0;
  for (double y : labels) {
    if (y != 0.0 && y != 1.0) throw ConfigError("FitLogistic: labels must be 0 or 1");
    pos += y == 1.0;
  }
  const std::size_t neg = m - pos;
  Eigen::VectorXd c(m);
  for (std::size_t k = 0; k < m; ++k) {
    if (options.class_balanced && pos > 0 && neg > 0) {
      c[k] = labels[k] == 1.0 ? 0.5 / static_cast<double>(pos) : 0.5 / static_cast<double>(neg);
    } else {
      c[k] = 1.0 / static_cast<double>(m);
    }
  }

  // Design matrix with a trailing bias column.
  Eigen::MatrixXd x(m, d + 1);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t j = 0; j < d; ++j) x(k, j) = features(k, j);
    x(k, d) = 1.0;
  }
  Eigen::VectorXd y(m);
  for (std::size_t k = 0; k < m; ++k) y[k] = labels[k];
  Eigen::VectorXd reg = Eigen::VectorXd::Constant(d + 1, options.l2);
  reg[d] = 0.0;

  auto objective = [&](const Eigen::VectorXd& theta) {
    const Eigen::VectorXd z = x * theta;
    double f = 0.0;
    for (std::size_t k = 0; k < m; ++k) f += c[k] * (Softplus(z[k]) - y[k] * z[k]);
    return f + 0.5 * (reg.array() * theta.array().square()).sum();
  };

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);
  double f = objective(theta);
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    const Eigen::VectorXd z = x * theta;
    Eigen::VectorXd r(m), s(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double p = Sigmoid(z[k]);
      r[k] = c[k] * (p - y[k]);
      s[k] = c[k] * p * (1.0 - p);
    }
    const Eigen::VectorXd g = x.transpose() * r + reg.cwiseProduct(theta);
    if (g.lpNorm<Eigen::Infinity>() < options.tolerance) break;
    Eigen::MatrixXd h = x.transpose() * s.asDiagonal() * x;
    h.diagonal() += reg;
    h.diagonal().array() += 1e-12;
    Eigen::VectorXd step = h.ldlt().solve(g);
    if (!step.allFinite()) step = g;
    // Armijo backtracking; falls back to a tiny gradient step if Newton stalls.
    double alpha = 1.0;
    const double slope = g.dot(step);
    bool moved = false;
    for (int k = 0; k < 60; ++k) {
      const Eigen::VectorXd cand = theta - alpha * step;
      const double fc = objective(cand);
      if (fc <= f - 1e-4 * alpha * slope) {
        theta = cand;
        f = fc;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) break;
  }

  EdgeLogisticModel model;
  model.weight.assign(theta.data(), theta.data() + d);
  model.bias = theta[d];
  model.l2 = options.l2;
  return model;
}

Matrix HadamardFeatures(const NodeEmbeddings& emb, const Pairs& pairs) {
  const std::size_t d = emb.dim();
  Matrix x(pairs.size(), d);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    if (i >= emb.n() || j >= emb.n()) throw DimensionError("HadamardFeatures: node out of range");
    for (std::size_t c = 0; c < d; ++c) x(k, c) = emb.z(i, c) * emb.z(j, c);
  }
  return x;
}

EdgeLogisticModel FitEdgeClassifier(const NodeEmbeddings& emb, const AdjacencyState& a_obs,
                                    const ObservationMask& xi, std::size_t neg_ratio, Rng& rng,
                                    const LogisticFitOptions& options) {
  RequireSameSize(a_obs, xi, "FitEdgeClassifier");
  if (emb.n() != a_obs.n()) throw DimensionError("FitEdgeClassifier: embedding rows != n");
  Pairs positives, negatives;
  for (std::size_t i = 0; i < a_obs.n(); ++i)
    for (std::size_t j = i + 1; j < a_obs.n(); ++j)
      if (xi.observed(i, j)) (a_obs(i, j) == 1.0 ? positives : negatives).emplace_back(i, j);

  if (positives.empty() || negatives.empty()) {
    EdgeLogisticModel model;
    model.weight.assign(emb.dim(), 0.0);
    model.bias = ConstantDensityLogit(positives.size(), negatives.size());
    model.l2 = options.l2;
    model.fallback = true;
    return model;
  }
  std::shuffle(negatives.begin(), negatives.end(), rng);
  negatives.resize(std::min(negatives.size(), std::max<std::size_t>(1, neg_ratio) * positives.size()));

  Pairs pairs = positives;
  pairs.insert(pairs.end(), negatives.begin(), negatives.end());
  std::vector<double> labels(pairs.size(), 0.0);
  std::fill(labels.begin(), labels.begin() + static_cast<long>(positives.size()), 1.0);
  return FitLogistic(HadamardFeatures(emb, pairs), labels, options);
}

// --- inductive encoder ------------------------------------------------------

SageModel::SageModel(const SageParams& params, std::uint64_t seed) : params_(params) {
  if (params.embed_dim == 0 || (params.depth > 0 && params.hidden_dim == 0)) {
    throw ConfigError("SageModel: dimensions must be positive");
  }
  Rng rng = MakeRng(seed, {0x5A6E});
  std::size_t in = 2;
  for (std::size_t l = 0; l < params.depth; ++l) {
    const std::string s = std::to_string(l);
    weights_.AddGlorot("layer" + s + ".self", in, params.hidden_dim, rng);
    weights_.AddGlorot("layer" + s + ".neighbor", in, params.hidden_dim, rng);
    weights_.Add("layer" + s + ".bias", 1, params.hidden_dim);
    in = params.hidden_dim;
  }
  weights_.AddGlorot("out.weight", in, params.embed_dim, rng);
  weights_.Add("out.bias", 1, params.embed_dim);
  weights_.AddGlorot("head.weight", params.embed_dim, 1, rng);
  weights_.Add("head.bias", 1, 1);
}

Matrix SageModel::DegreeFeatures(const AdjacencyState& a_obs) {
  const std::size_t n = a_obs.n();
  Matrix x(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < n; ++j) deg += a_obs(i, j);
    x(i, 0) = n > 1 ? deg / static_cast<double>(n - 1) : 0.0;
    x(i, 1) = deg;
  }
  return x;
}

nn::Var SageModel::Encode(nn::Tape& tape, const AdjacencyState& a_obs) const {
  if (weights_.size() == 0) throw StateError("SageModel: model is untrained");
  const std::size_t n = a_obs.n();
  // Row-normalized adjacency; isolated nodes aggregate to zero.
  Matrix mean_op(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < n; ++j) deg += a_obs(i, j);
    if (deg > 0)
      for (std::size_t j = 0; j < n; ++j) mean_op(i, j) = a_obs(i, j) / deg;
  }
  nn::Var agg = tape.Constant(std::move(mean_op));
  nn::Var h = tape.Constant(DegreeFeatures(a_obs));
  std::size_t p = 0;
  for (std::size_t l = 0; l < params_.depth; ++l) {
    nn::Var w_self = tape.Param(weights_, p++);
    nn::Var w_nbr = tape.Param(weights_, p++);
    nn::Var b = tape.Param(weights_, p++);
    h = nn::Silu(nn::AddRow(nn::Add(nn::MatMul(h, w_self), nn::MatMul(nn::MatMul(agg, h), w_nbr)), b));
  }
  nn::Var w_out = tape.Param(weights_, p++);
  nn::Var b_out = tape.Param(weights_, p++);
  return nn::Linear(h, w_out, b_out);
}

NodeEmbeddings SageModel::Embed(const AdjacencyState& a_obs) const {
  nn::Tape tape(false);
  return NodeEmbeddings{Encode(tape, a_obs).value()};
}

nn::Var SageModel::PairLogits(nn::Tape& tape, nn::Var z, const Pairs& pairs) const {
  std::vector<std::size_t> is, js;
  is.reserve(pairs.size());
  js.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    is.push_back(i);
    js.push_back(j);
  }
  nn::Var w = tape.Param(weights_, weights_.IndexOf("head.weight"));
  nn::Var b = tape.Param(weights_, weights_.IndexOf("head.bias"));
  return nn::Linear(nn::Mul(nn::GatherRows(z, is), nn::GatherRows(z, js)), w, b);
}

double SageModel::PairProbability(const NodeEmbeddings& emb, std::size_t i, std::size_t j) const {
  const nn::Tensor& w = weights_["head.weight"];
  double z = weights_["head.bias"].data[0];
  for (std::size_t c = 0; c < emb.dim(); ++c) z += w.data[c] * emb.z(i, c) * emb.z(j, c);
  return Sigmoid(z);
}

SageTrainingResult SageEmbed(const std::vector<SageTrainingExample>& examples, TaskKind task,
                             const SageParams& params, std::uint64_t seed) {
  if (examples.empty()) throw ConfigError("SageEmbed: empty training set");
  SageTrainingResult result;
  result.model = SageModel(params, seed);
  nn::ParameterSet& weights = result.model.weights();
  nn::AdamState adam = nn::AdamState::For(weights, params.learning_rate);
  Rng rng = MakeRng(seed, {0x5A6F});

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<bool> usable(examples.size(), true);
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t steps = 0;
    for (std::size_t idx : order) {
      const SageTrainingExample& ex = examples[idx];
      const AdjacencyState& a_obs = ex.input.observed;
      const ObservationMask& xi = ex.input.mask;
      Pairs pos, neg;
      for (std::size_t i = 0; i < a_obs.n(); ++i) {
        for (std::size_t j = i + 1; j < a_obs.n(); ++j) {
          if (task == TaskKind::kLinkPrediction) {
            if (xi.observed(i, j)) (a_obs(i, j) == 1.0 ? pos : neg).emplace_back(i, j);
          } else if (!xi.observed(i, j)) {
            (ex.a1(i, j) == 1.0 ? pos : neg).emplace_back(i, j);
          }
        }
      }
      if (pos.empty() || neg.empty()) {
        if (usable[idx]) ++result.skipped;
        usable[idx] = false;
        continue;
      }
      if (task == TaskKind::kLinkPrediction) {
        std::shuffle(neg.begin(), neg.end(), rng);
        neg.resize(std::min(neg.size(), std::max<std::size_t>(1, params.neg_ratio) * pos.size()));
      }
      Pairs pairs = pos;
      pairs.insert(pairs.end(), neg.begin(), neg.end());
      Matrix labels(pairs.size(), 1), cw(pairs.size(), 1);
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        const bool is_pos = k < pos.size();
        labels(k, 0) = is_pos ? 1.0 : 0.0;
        cw(k, 0) = 0.5 / static_cast<double>(is_pos ? pos.size() : neg.size());
      }
      nn::Tape tape;
      nn::Var z = result.model.Encode(tape, a_obs);
      nn::Var loss = nn::BceWithLogits(result.model.PairLogits(tape, z, pairs), labels, cw);
      const double value = tape.Backward(loss);
      if (!std::isfinite(value)) throw TrainingError("SageEmbed: loss is not finite");
      nn::GradientBuffer grads = weights.ZeroGradients();
      tape.AccumulateParamGrads(grads);
      weights.SetGradients(grads);
      nn::AdamStep(weights, adam);
      loss_sum += value;
      ++steps;
    }
    result.epoch_loss.push_back(steps > 0 ? loss_sum / static_cast<double>(steps) : 0.0);
  }
  result.embeddings.reserve(examples.size());
  for (const auto& ex : examples) result.embeddings.push_back(result.model.Embed(ex.input.observed));
  return result;
}

// --- histogram graphon -------------------------------------------------------

std::vector<double> DegreeQuantiles(const AdjacencyState& a) {
  const std::size_t n = a.n();
  std::vector<double> deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) deg[i] += a(i, j);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return deg[x] < deg[y]; });
  std::vector<double> z(n);
  for (std::size_t s = 0; s < n;) {
    std::size_t e = s + 1;
    while (e < n && deg[order[e]] == deg[order[s]]) ++e;
    const double mid = 0.5 * static_cast<double>(s + e - 1);
    for (std::size_t k = s; k < e; ++k) z[order[k]] = (mid + 0.5) / static_cast<double>(n);
    s = e;
  }
  return z;
}

GraphonGrid EstimateHistogramGraphon(const std::vector<AdjacencyState>& graphs,
                                     std::size_t resolution, std::size_t smoothing_radius) {
  if (graphs.empty()) throw ConfigError("EstimateHistogramGraphon: no training graphs");
  if (resolution == 0) throw ConfigError("EstimateHistogramGraphon: resolution must be positive");
  const std::size_t r = resolution;
  Matrix sum(r, r), count(r, r);
  for (const AdjacencyState& a : graphs) {
    const std::size_t n = a.n();
    if (n < 2) continue;
    const auto deg = a.Degrees();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return deg[x] < deg[y]; });
    // Cell centre x_c covers the node of rank floor(x_c * n).
    std::vector<std::size_t> rank_of_cell(r);
    for (std::size_t c = 0; c < r; ++c) {
      const double x = (static_cast<double>(c) + 0.5) / static_cast<double>(r);
      rank_of_cell[c] = std::min(n - 1, static_cast<std::size_t>(x * static_cast<double>(n)));
    }
    for (std::size_t c1 = 0; c1 < r; ++c1) {
      for (std::size_t c2 = 0; c2 < r; ++c2) {
        const std::size_t u = rank_of_cell[c1];
        const std::size_t v = rank_of_cell[c2];
        if (u == v) continue;
        sum(c1, c2) += a(order[u], order[v]);
        count(c1, c2) += 1.0;
      }
    }
  }
  Matrix w(r, r);
  for (std::size_t c1 = 0; c1 < r; ++c1) {
    for (std::size_t c2 = 0; c2 < r; ++c2) {
      double s = 0.0, k = 0.0;
      for (std::size_t rad = smoothing_radius; k == 0.0 && rad <= r; ++rad) {
        const std::size_t lo1 = c1 >= rad ? c1 - rad : 0, hi1 = std::min(r - 1, c1 + rad);
        const std::size_t lo2 = c2 >= rad ? c2 - rad : 0, hi2 = std::min(r - 1, c2 + rad);
        for (std::size_t x = lo1; x <= hi1; ++x)
          for (std::size_t y = lo2; y <= hi2; ++y) {
            s += sum(x, y);
            k += count(x, y);
          }
      }
      w(c1, c2) = k > 0 ? std::clamp(s / k, 0.0, 1.0) : 0.0;
    }
  }
  // The box filter is symmetric, but summation order is not; restore exact symmetry.
  for (std::size_t c1 = 0; c1 < r; ++c1)
    for (std::size_t c2 = c1 + 1; c2 < r; ++c2) {
      const double m = 0.5 * (w(c1, c2) + w(c2, c1));
      w(c1, c2) = w(c2, c1) = m;
    }
  return GraphonGrid(std::move(w));
}

// --- canonical order -----------------------------------------------------------

NodeEmbeddings StructuralEmbedding(const AdjacencyState& a_obs, const ObservationMask& xi) {
  RequireSameSize(a_obs, xi, "StructuralEmbedding");
  const std::size_t n = a_obs.n();
  const double scale = n > 1 ? 1.0 / static_cast<double>(n - 1) : 1.0;
  std::vector<double> deg(n, 0.0), hid(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      deg[i] += a_obs(i, j);
      if (i != j && !xi.observed(i, j)) hid[i] += 1.0;
    }
  Matrix z(n, 5);
  std::vector<double> w1(n, 0.0), w2(n, 0.0), h1(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      w1[i] += a_obs(i, j) * deg[j];
      if (i != j && !xi.observed(i, j)) h1[i] += deg[j];
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) w2[i] += a_obs(i, j) * w1[j];
  for (std::size_t i = 0; i < n; ++i) {
    z(i, 0) = deg[i] * scale;
    z(i, 1) = w1[i] * scale * scale;
    z(i, 2) = w2[i] * scale * scale * scale;
    z(i, 3) = hid[i] * scale;
    z(i, 4) = h1[i] * scale * scale;
  }
  return NodeEmbeddings{std::move(z)};
}

NodePermutation Canonicalize(const NodeEmbeddings& emb, const std::vector<std::size_t>& degrees) {
  const std::size_t n = emb.n();
  const std::size_t d = emb.dim();
  if (!degrees.empty() && degrees.size() != n) {
    throw DimensionError("Canonicalize: degree count != embedding rows");
  }
  for (double v : emb.z.data())
    if (!std::isfinite(v)) throw ConfigError("Canonicalize: non-finite embedding");
  if (n <= 1 || d == 0) return DegreeIndexOrder(degrees, n);

  Eigen::MatrixXd z(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c) z(i, c) = emb.z(i, c);
  const Eigen::RowVectorXd mean = z.colwise().mean();
  z.rowwise() -= mean;
  const Eigen::MatrixXd cov = z.transpose() * z / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const double top = eig.eigenvalues()[d - 1];
  const double scale = std::max(1.0, cov.diagonal().maxCoeff());
  if (!(top > 1e-14 * scale)) return DegreeIndexOrder(degrees, n);

  Eigen::VectorXd proj = z * eig.eigenvectors().col(d - 1);
  const double spread = proj.cwiseAbs().maxCoeff();
  double m3 = 0.0;
  for (std::size_t i = 0; i < n; ++i) m3 += proj[i] * proj[i] * proj[i];
  double sign = 1.0;
  if (std::abs(m3) > 1e-9 * spread * spread * spread * static_cast<double>(n)) {
    sign = m3 > 0 ? 1.0 : -1.0;
  } else {
    // Symmetric projection: orient by the sum of positive parts in a stable way.
    double pos = 0.0, neg = 0.0;
    for (std::size_t i = 0; i < n; ++i) (proj[i] > 0 ? pos : neg) += std::abs(proj[i]);
    sign = pos >= neg ? 1.0 : -1.0;
  }
  // Quantized keys keep near-ties (rounding noise) on the tie-break path.
  const double quantum = 1e-9 * spread;
  std::vector<long long> key(n);
  for (std::size_t i = 0; i < n; ++i) key[i] = std::llround(sign * proj[i] / quantum);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (key[x] != key[y]) return key[x] < key[y];
    const std::size_t dx = degrees.empty() ? 0 : degrees[x];
    const std::size_t dy = degrees.empty() ? 0 : degrees[y];
    if (dx != dy) return dx < dy;
    return x < y;
  });
  std::vector<std::size_t> pos(n);
  for (std::size_t r = 0; r < n; ++r) pos[order[r]] = r;
  return NodePermutation(std::move(pos));
}

// --- prior models -------------------------------------------------------------

std::string_view PriorName(const PriorModel& prior) {
  switch (prior.index()) {
    case 0: return "node2vec";
    case 1: return "sage";
    case 2: return "graphon";
    default: return "gaussian";
  }
}

bool IsTransductive(const PriorModel& prior) {
  return std::holds_alternative<Node2VecPrior>(prior);
}

namespace {

// Fills hidden upper pairs with prob(i, j) and mirrors them.
template <typename F>
AdjacencyState FillHidden(const AdjacencyState& a_obs, const ObservationMask& xi, F&& prob) {
  AdjacencyState out = a_obs;
  const std::size_t n = a_obs.n();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!xi.observed(i, j)) out.SetPair(i, j, std::clamp(prob(i, j), 0.0, 1.0));
  return out;
}

AdjacencyState Node2VecPredict(const Node2VecPrior& prior, const AdjacencyState& a_obs,
                               const ObservationMask& xi) {
  const std::size_t n = a_obs.n();
  if (xi.HiddenPairCount() == 0) return a_obs;
  const auto degrees = a_obs.Degrees();
  const NodePermutation perm = Canonicalize(StructuralEmbedding(a_obs, xi), degrees);
  const AdjacencyState a_c = Permute(a_obs, perm);
  const ObservationMask xi_c = Permute(xi, perm);

  Rng rng = MakeRng(prior.seed, {0x2F5});
  const Node2VecParams& p = prior.params;
  const auto walks = RandomWalks(a_c, p.walks_per_node, p.walk_length, p.p, p.q, rng);
  bool has_pairs = false;
  for (const Walk& w : walks) has_pairs = has_pairs || w.size() >= 2;
  if (!has_pairs || p.sgns.window == 0) {
    std::size_t pos = 0, neg = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (xi.observed(i, j)) (a_obs(i, j) == 1.0 ? pos : neg)++;
    const double density = Sigmoid(ConstantDensityLogit(pos, neg));
    return FillHidden(a_obs, xi, [&](std::size_t, std::size_t) { return density; });
  }
  const NodeEmbeddings emb = TrainSgns(walks, n, p.sgns, rng);
  const EdgeLogisticModel clf = FitEdgeClassifier(emb, a_c, xi_c, p.neg_ratio, rng, p.logistic);
  std::vector<double> feat(emb.dim());
  return FillHidden(a_obs, xi, [&](std::size_t i, std::size_t j) {
    const std::size_t ci = perm(i), cj = perm(j);
    for (std::size_t c = 0; c < emb.dim(); ++c) feat[c] = emb.z(ci, c) * emb.z(cj, c);
    return clf.Probability(feat);
  });
}

}  // namespace

AdjacencyState PriorPredict(const PriorModel& prior, const AdjacencyState& a_obs,
                            const ObservationMask& xi) {
  RequireSameSize(a_obs, xi, "PriorPredict");
  if (const auto* p = std::get_if<Node2VecPrior>(&prior)) return Node2VecPredict(*p, a_obs, xi);
  if (const auto* p = std::get_if<SagePrior>(&prior)) {
    const NodeEmbeddings emb = p->model.Embed(a_obs);
    return FillHidden(a_obs, xi, [&](std::size_t i, std::size_t j) {
      return p->model.PairProbability(emb, i, j);
    });
  }
  if (const auto* p = std::get_if<GraphonPrior>(&prior)) {
    if (p->w.resolution() == 0) throw StateError("PriorPredict: graphon prior is untrained");
    const auto z = DegreeQuantiles(a_obs);
    return FillHidden(a_obs, xi, [&](std::size_t i, std::size_t j) { return p->w(z[i], z[j]); });
  }
  const double mean = std::get<GaussianPrior>(prior).mean;
  return FillHidden(a_obs, xi, [&](std::size_t, std::size_t) { return mean; });
}

// --- serialization --------------------------------------------------------------

namespace {

Json Node2VecToJson(const Node2VecParams& p) {
  return Json{{"walks_per_node", p.walks_per_node}, {"walk_length", p.walk_length},
              {"p", p.p}, {"q", p.q}, {"window", p.sgns.window}, {"dim", p.sgns.dim},
              {"negatives", p.sgns.negatives}, {"epochs", p.sgns.epochs},
              {"learning_rate", p.sgns.learning_rate}, {"neg_ratio", p.neg_ratio},
              {"l2", p.logistic.l2}, {"class_balanced", p.logistic.class_balanced},
              {"tolerance", p.logistic.tolerance},
              {"max_iterations", p.logistic.max_iterations}};
}

Node2VecParams Node2VecFromJson(const Json& j) {
  Node2VecParams p;
  p.walks_per_node = j.at("walks_per_node");
  p.walk_length = j.at("walk_length");
  p.p = j.at("p");
  p.q = j.at("q");
  p.sgns.window = j.at("window");
  p.sgns.dim = j.at("dim");
  p.sgns.negatives = j.at("negatives");
  p.sgns.epochs = j.at("epochs");
  p.sgns.learning_rate = j.at("learning_rate");
  p.neg_ratio = j.at("neg_ratio");
  p.logistic.l2 = j.at("l2");
  p.logistic.class_balanced = j.at("class_balanced");
  p.logistic.tolerance = j.at("tolerance");
  p.logistic.max_iterations = j.at("max_iterations");
  return p;
}

}  // namespace

std::string EncodePrior(const PriorModel& prior) {
  nn::Checkpoint ckpt;
  ckpt.tag = "prior:" + std::string(PriorName(prior));
  Json meta;
  if (const auto* p = std::get_if<Node2VecPrior>(&prior)) {
    meta = Node2VecToJson(p->params);
    meta["seed"] = p->seed;
  } else if (const auto* p = std::get_if<SagePrior>(&prior)) {
    const SageParams& s = p->model.params();
    meta = Json{{"depth", s.depth}, {"hidden_dim", s.hidden_dim}, {"embed_dim", s.embed_dim},
                {"epochs", s.epochs}, {"learning_rate", s.learning_rate},
                {"neg_ratio", s.neg_ratio}};
    ckpt.params = p->model.weights();
  } else if (const auto* p = std::get_if<GraphonPrior>(&prior)) {
    const std::size_t r = p->w.resolution();
    meta = Json{{"resolution", r}};
    nn::Tensor& t = ckpt.params.Add("w", r, r);
    t.data = p->w.values().vec();
  } else {
    meta = Json{{"mean", std::get<GaussianPrior>(prior).mean}};
  }
  ckpt.metadata = meta.dump();
  return nn::EncodeCheckpoint(ckpt);
}

PriorModel DecodePrior(const std::string& bytes) {
  const nn::Checkpoint ckpt = nn::DecodeCheckpoint(bytes);
  Json meta;
  try {
    meta = Json::parse(ckpt.metadata);
    if (ckpt.tag == "prior:node2vec") {
      return Node2VecPrior{Node2VecFromJson(meta), meta.at("seed").get<std::uint64_t>()};
    }
    if (ckpt.tag == "prior:sage") {
      SageParams s;
      s.depth = meta.at("depth");
      s.hidden_dim = meta.at("hidden_dim");
      s.embed_dim = meta.at("embed_dim");
      s.epochs = meta.at("epochs");
      s.learning_rate = meta.at("learning_rate");
      s.neg_ratio = meta.at("neg_ratio");
      SagePrior prior{SageModel(s, 0)};
      nn::ParameterSet& w = prior.model.weights();
      if (w.size() != ckpt.params.size()) throw ParseError("prior", 0, "sage record count mismatch");
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (w.name(i) != ckpt.params.name(i) || w.at(i).shape != ckpt.params.at(i).shape) {
          throw ParseError("prior", 0, "sage record '" + ckpt.params.name(i) + "' mismatch");
        }
        w.at(i).data = ckpt.params.at(i).data;
      }
      return prior;
    }
    if (ckpt.tag == "prior:graphon") {
      const nn::Tensor& t = ckpt.params["w"];
      return GraphonPrior{GraphonGrid(t.AsMatrix())};
    }
    if (ckpt.tag == "prior:gaussian") return GaussianPrior{meta.at("mean").get<double>()};
  } catch (const Json::exception& e) {
    throw ParseError("prior", 0, std::string("bad metadata: ") + e.what());
  }
  throw ParseError("prior", 0, "unknown prior tag '" + ckpt.tag + "'");
}

}  // namespace pifm
