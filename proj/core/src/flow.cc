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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <utility>

#include "json.hpp"
#include "pifm/error.h"
#include "pifm/nn/adam.h"
#include "pifm/nn/time_embedding.h"
#include "pifm/parallel.h"

namespace pifm {
namespace {

using nn::Var;
using Json = nlohmann::json;

Json NetConfigToJson(const VelocityNetConfig& c) {
  return Json{{"num_layers", c.num_layers}, {"hidden_dim", c.hidden_dim}, {"c_init", c.c_init},
              {"c_hid", c.c_hid},           {"c_final", c.c_final},       {"time_dim", c.time_dim},
              {"max_nodes", c.max_nodes},   {"dropout", c.dropout}};
}

VelocityNetConfig NetConfigFromJson(const Json& j) {
  VelocityNetConfig c;
  c.num_layers = j.at("num_layers");
  c.hidden_dim = j.at("hidden_dim");
  c.c_init = j.at("c_init");
  c.c_hid = j.at("c_hid");
  c.c_final = j.at("c_final");
  c.time_dim = j.at("time_dim");
  c.max_nodes = j.at("max_nodes");
  c.dropout = j.at("dropout");
  return c;
}

std::size_t LayerChannels(const VelocityNetConfig& c, std::size_t layer) {
  return layer + 1 == c.num_layers ? c.c_final : c.c_hid;
}

void RequireSameN(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw DimensionError(std::string(op) + ": size mismatch (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
  }
}

Matrix OffDiagonalMask(std::size_t n) {
  Matrix m(n, n, 1.0);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 0.0;
  return m;
}

}  // namespace

// --- network --------------------------------------------------------------------

VelocityNet::VelocityNet(const VelocityNetConfig& c, std::uint64_t seed) : config_(c) {
  if (c.num_layers == 0 || c.hidden_dim == 0 || c.c_init == 0 || c.c_hid == 0 ||
      c.c_final == 0) {
    throw ConfigError("VelocityNet: layer counts and widths must be positive");
  }
  if (c.time_dim == 0 || c.time_dim % 2 != 0) {
    throw ConfigError("VelocityNet: time_dim must be positive and even");
  }
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw ConfigError("VelocityNet: dropout in [0,1)");
  Rng rng = MakeRng(seed, {0xF10});
  const std::size_t f = c.hidden_dim;
  std::size_t c_in = c.c_init;
  std::size_t f_in = c.c_init;
  std::size_t c_total = c.c_init;
  for (std::size_t l = 0; l < c.num_layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    const std::size_t c_out = LayerChannels(c, l);
    params_.AddGlorot(p + "node.weight", f_in * (1 + c_in), f, rng);
    params_.Add(p + "node.bias", 1, f);
    params_.Add(p + "norm.scale", 1, f, 1.0);
    params_.AddGlorot(p + "time1.weight", c.time_dim, f, rng);
    params_.Add(p + "time1.bias", 1, f);
    params_.AddGlorot(p + "time2.weight", f, f, rng);
    params_.Add(p + "time2.bias", 1, f);
    params_.AddGlorot(p + "pair.weight", f, c_out, rng);
    params_.Add(p + "pair.bias", 1, c_out);
    params_.AddGlorot(p + "edge1.weight", c_in + c_out, c_out, rng);
    params_.Add(p + "edge1.bias", 1, c_out);
    params_.AddGlorot(p + "edge2.weight", c_out, c_out, rng);
    params_.Add(p + "edge2.bias", 1, c_out);
    c_in = c_out;
    f_in = f;
    c_total += c_out;
  }
  params_.AddGlorot("out1.weight", c_total, f, rng);
  params_.Add("out1.bias", 1, f);
  params_.Add("out2.weight", f, 1);
  params_.Add("out2.bias", 1, 1);
}

Var VelocityNet::Forward(nn::Tape& tape, const Matrix& a_t, double t, Rng* dropout_rng) const {
  if (params_.size() == 0) throw StateError("VelocityNet: network has no parameters");
  if (!a_t.is_square()) throw DimensionError("VelocityNet: input must be square");
  const std::size_t n = a_t.rows();
  if (n > config_.max_nodes) {
    throw CapacityError("VelocityNet: graph with " + std::to_string(n) +
                        " nodes exceeds the maximum of " + std::to_string(config_.max_nodes));
  }
  if (n == 0) throw DimensionError("VelocityNet: empty graph");
  const double inv_n = 1.0 / static_cast<double>(n);
  const std::vector<Var> w = nn::BindParams(tape, params_);
  std::size_t next = 0;
  auto take = [&]() { return w[next++]; };

  // Initial edge channels A^k / N^(k-1) and their row means.
  Var a = tape.Constant(a_t);
  std::vector<Var> chan{a};
  for (std::size_t k = 1; k < config_.c_init; ++k)
    chan.push_back(nn::Scale(nn::MatMul(chan.back(), a), inv_n));
  Var ones = tape.Constant(Matrix(n, 1, 1.0));
  std::vector<Var> flat, means;
  for (Var c : chan) {
    flat.push_back(nn::Reshape(c, n * n, 1));
    means.push_back(nn::Scale(nn::MatMul(c, ones), inv_n));
  }
  Var e = nn::ConcatCols(flat);
  Var x = nn::ConcatCols(means);
  std::vector<Var> edge_outputs{e};
  Var temb = tape.Constant(nn::TimeEmbedding(t, config_.time_dim));

  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    const std::size_t c_in = e.cols();
    std::vector<Var> parts{x};
    for (std::size_t c = 0; c < c_in; ++c) {
      Var ec = nn::Reshape(nn::SliceCols(e, c, c + 1), n, n);
      parts.push_back(nn::Scale(nn::MatMul(ec, x), inv_n));
    }
    Var node_w = take(), node_b = take(), norm = take();
    Var t1w = take(), t1b = take(), t2w = take(), t2b = take();
    Var pw = take(), pb = take(), e1w = take(), e1b = take(), e2w = take(), e2b = take();

    Var h = nn::Linear(nn::ConcatCols(parts), node_w, node_b);
    h = nn::RmsNorm(h, norm);
    Var film = nn::AddScalar(nn::Linear(nn::Silu(nn::Linear(temb, t1w, t1b)), t2w, t2b), 1.0);
    h = nn::Silu(nn::MulRow(h, film));
    if (dropout_rng != nullptr) h = nn::Dropout(h, config_.dropout, *dropout_rng);

    Var pair = nn::Linear(nn::PairHadamard(h), pw, pb);
    e = nn::Linear(nn::Silu(nn::Linear(nn::ConcatCols({e, pair}), e1w, e1b)), e2w, e2b);
    x = h;
    edge_outputs.push_back(e);
  }
  Var o1w = take(), o1b = take(), o2w = take(), o2b = take();
  Var out = nn::Linear(nn::Silu(nn::Linear(nn::ConcatCols(edge_outputs), o1w, o1b)), o2w, o2b);
  Var v = nn::Reshape(out, n, n);
  v = nn::Scale(nn::Add(v, nn::Transpose(v)), 0.5);
  return nn::Mul(v, tape.Constant(OffDiagonalMask(n)));
}

nn::Checkpoint VelocityNet::ToCheckpoint() const {
  nn::Checkpoint ckpt;
  ckpt.tag = "velocity";
  ckpt.metadata = Json{{"net", NetConfigToJson(config_)}}.dump();
  ckpt.params = params_;
  return ckpt;
}

VelocityNet VelocityNet::FromCheckpoint(const nn::Checkpoint& ckpt) {
  if (ckpt.tag != "velocity") throw ParseError("checkpoint", 0, "expected tag 'velocity'");
  VelocityNetConfig c;
  try {
    c = NetConfigFromJson(Json::parse(ckpt.metadata).at("net"));
  } catch (const Json::exception& e) {
    throw ParseError("checkpoint", 0, std::string("bad velocity metadata: ") + e.what());
  }
  VelocityNet net(c, 0);
  if (net.params_.size() != ckpt.params.size()) {
    throw ParseError("checkpoint", 0, "velocity record count mismatch");
  }
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    if (net.params_.name(i) != ckpt.params.name(i) ||
        net.params_.at(i).shape != ckpt.params.at(i).shape) {
      throw ParseError("checkpoint", 0, "velocity record '" + ckpt.params.name(i) + "' mismatch");
    }
    net.params_.at(i).data = ckpt.params.at(i).data;
  }
  return net;
}

AdjacencyState VelocityForward(const VelocityNet& net, const AdjacencyState& a_t, double t,
                               bool train_mode, Rng* rng) {
  if (train_mode && rng == nullptr) throw ConfigError("VelocityForward: train mode needs an rng");
  nn::Tape tape(false);
  Var v = net.Forward(tape, a_t.values(), t, train_mode ? rng : nullptr);
  return SymmetrizeClip(v.value());
}

// --- flow pieces ------------------------------------------------------------------

void FlowConfig::Validate() const {
  if (!(sigma_s_train >= 0.0) || !(sigma_s_sample >= 0.0)) {
    throw ConfigError("FlowConfig: sigma_s must be non-negative");
  }
  if (k == 0) throw ConfigError("FlowConfig: K must be at least 1");
  if (!(lr > 0.0)) throw ConfigError("FlowConfig: lr must be positive");
  if (!(lr_final_fraction > 0.0 && lr_final_fraction <= 1.0))
    throw ConfigError("FlowConfig: lr_final_fraction must lie in (0,1]");
  if (batch_size == 0) throw ConfigError("FlowConfig: batch_size must be positive");
}

AdjacencyState BuildA0(const AdjacencyState& observed, const ObservationMask& xi,
                       const AdjacencyState& prior_probs, double sigma_s, TaskKind task,
                       Rng& rng) {
  if (!(sigma_s >= 0.0)) throw ConfigError("BuildA0: sigma_s must be non-negative");
  const std::size_t n = observed.n();
  RequireSameN(n, xi.n(), "BuildA0");
  RequireSameN(n, prior_probs.n(), "BuildA0");
  AdjacencyState a0(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double f = prior_probs(i, j);
      if (!(f >= 0.0 && f <= 1.0)) throw RangeError("BuildA0: prior probability outside [0,1]");
      const double hidden = xi.observed(i, j) ? 0.0 : 1.0;
      const double eps = hidden != 0.0 && sigma_s > 0.0 ? sigma_s * StandardNormal(rng) : 0.0;
      const double ao = observed(i, j);
      double v = 0.0;
      switch (task) {
        case TaskKind::kLinkPrediction:
          v = (1.0 - hidden) * ao + hidden * (f + eps);
          break;
        case TaskKind::kExpansion:
          v = ao + (1.0 - ao) * (f + eps);
          break;
        case TaskKind::kDenoising:
          v = ao * (f + eps);
          break;
      }
      a0.SetPair(i, j, v);
    }
  }
  return a0;
}

AdjacencyState Interpolate(const AdjacencyState& a0, const AdjacencyState& a1, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw RangeError("Interpolate: t must lie in [0,1]");
  const std::size_t n = a0.n();
  RequireSameN(n, a1.n(), "Interpolate");
  AdjacencyState out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out.SetPair(i, j, (1.0 - t) * a0(i, j) + t * a1(i, j));
  return out;
}

double MseDistortion(const AdjacencyState& a_hat, const AdjacencyState& a1,
                     const ObservationMask& xi) {
  RequireSameN(a_hat.n(), a1.n(), "MseDistortion");
  RequireSameN(a_hat.n(), xi.n(), "MseDistortion");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < a1.n(); ++i)
    for (std::size_t j = i + 1; j < a1.n(); ++j)
      if (!xi.observed(i, j)) {
        const double d = a_hat(i, j) - a1(i, j);
        sum += d * d;
        ++count;
      }
  if (count == 0) throw MetricError("MseDistortion: empty hidden region");
  return sum / static_cast<double>(count);
}

double FlowMatchingLoss(const VelocityNet& net, const AdjacencyState& a0, const AdjacencyState& a1,
                        double t) {
  const AdjacencyState v = VelocityForward(net, Interpolate(a0, a1, t), t);
  const std::size_t n = a0.n();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = v(i, j) - (a1(i, j) - a0(i, j));
      sum += d * d;
    }
  return n < 2 ? 0.0 : sum / static_cast<double>(n * (n - 1) / 2);
}

// --- training ------------------------------------------------------------------------

FlowTrainResult TrainFlow(std::size_t num_train, const ExampleSampler& train, std::size_t num_val,
                          const ExampleSampler& val, TaskKind task, const FlowConfig& cfg) {
  cfg.Validate();
  if (num_train == 0) throw ConfigError("TrainFlow: empty training set");
  FlowTrainResult result;
  result.net = VelocityNet(cfg.net, DeriveSeed(cfg.seed, {0xF11}));
  nn::ParameterSet& params = result.net.params();
  nn::AdamState adam = nn::AdamState::For(params, cfg.lr);
  const bool use_dropout = cfg.net.dropout > 0.0;

  // Validation draws are fixed for the whole run.
  struct ValItem {
    AdjacencyState a0, a1;
    double t;
  };
  std::vector<ValItem> val_items;
  if (num_val > 0 && val) {
    const std::size_t draws = std::max<std::size_t>(1, cfg.val_draws);
    val_items.resize(num_val * draws);
    ParallelFor(val_items.size(), [&](std::size_t k) {
      const std::size_t i = k / draws, d = k % draws;
      Rng rng = MakeRng(cfg.seed, {0x7A1, i, d});
      FlowExample ex = val(i, rng);
      AdjacencyState a0 =
          BuildA0(ex.observed, ex.mask, ex.prior_probs, cfg.sigma_s_train, task, rng);
      val_items[k] = {std::move(a0), std::move(ex.a1),
                      (static_cast<double>(d) + 0.5) / static_cast<double>(draws)};
    });
  }
  auto validation_loss = [&]() {
    std::vector<double> losses(val_items.size());
    ParallelFor(val_items.size(), [&](std::size_t k) {
      losses[k] = FlowMatchingLoss(result.net, val_items[k].a0, val_items[k].a1, val_items[k].t);
    });
    return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
  };

  nn::ParameterSet best = params;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> order(num_train);
  std::iota(order.begin(), order.end(), 0);
  std::size_t total_steps = cfg.epochs * ((num_train + cfg.batch_size - 1) / cfg.batch_size);
  if (cfg.max_steps > 0) total_steps = std::min(total_steps, cfg.max_steps);
  const double lr_slope =
      total_steps > 1 ? (1.0 - cfg.lr_final_fraction) / static_cast<double>(total_steps - 1) : 0.0;
  bool stop = false;
  for (std::size_t epoch = 0; epoch < cfg.epochs && !stop; ++epoch) {
    Rng shuffle_rng = MakeRng(cfg.seed, {0xE90, epoch});
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    std::size_t epoch_count = 0;
    for (std::size_t start = 0; start < num_train && !stop; start += cfg.batch_size) {
      const std::size_t b = std::min(cfg.batch_size, num_train - start);
      std::vector<nn::GradientBuffer> grads(b);
      std::vector<double> losses(b);
      const std::size_t step = result.steps;
      ParallelFor(b, [&](std::size_t m) {
        Rng rng = MakeRng(cfg.seed, {0xB47, step, m});
        FlowExample ex = train(order[start + m], rng);
        const std::size_t n = ex.a1.n();
        if (n < 2) throw DimensionError("TrainFlow: graphs need at least two nodes");
        const double t = Uniform01(rng);
        const AdjacencyState a0 =
            BuildA0(ex.observed, ex.mask, ex.prior_probs, cfg.sigma_s_train, task, rng);
        const AdjacencyState at = Interpolate(a0, ex.a1, t);
        Matrix target(n, n);
        for (std::size_t k = 0; k < target.size(); ++k)
          target.raw()[k] = ex.a1.values().raw()[k] - a0.values().raw()[k];
        nn::Tape tape;
        Var v = result.net.Forward(tape, at.values(), t, use_dropout ? &rng : nullptr);
        Var loss = nn::Scale(nn::MeanSquare(nn::Sub(v, tape.Constant(std::move(target)))),
                             static_cast<double>(n) / static_cast<double>(n - 1));
        losses[m] = tape.Backward(loss);
        grads[m] = params.ZeroGradients();
        tape.AccumulateParamGrads(grads[m]);
      });
      nn::GradientBuffer total = std::move(grads[0]);
      for (std::size_t m = 1; m < b; ++m)
        for (std::size_t p = 0; p < total.size(); ++p)
          for (std::size_t k = 0; k < total[p].size(); ++k) total[p][k] += grads[m][p][k];
      const double inv_b = 1.0 / static_cast<double>(b);
      double batch_loss = 0.0;
      for (double l : losses) batch_loss += l;
      bool finite = std::isfinite(batch_loss);
      for (auto& g : total)
        for (double& x : g) {
          x *= inv_b;
          finite = finite && std::isfinite(x);
        }
      if (!finite) {
        auto last_good = std::make_shared<VelocityNet>(result.net);
        throw FlowDivergedError("TrainFlow: non-finite loss at step " + std::to_string(step),
                                std::move(last_good));
      }
      params.SetGradients(total);
      adam.lr = cfg.lr * (1.0 - lr_slope * static_cast<double>(step));
      nn::AdamStep(params, adam);
      ++result.steps;
      epoch_loss += batch_loss;
      epoch_count += b;
      if (cfg.max_steps > 0 && result.steps >= cfg.max_steps) stop = true;
    }
    result.train_loss.push_back(epoch_loss / static_cast<double>(std::max<std::size_t>(1, epoch_count)));
    if (!val_items.empty()) {
      const double vl = validation_loss();
      result.val_loss.push_back(vl);
      if (vl < best_val) {
        best_val = vl;
        best = params;
        result.best_epoch = epoch;
      }
    } else {
      result.best_epoch = epoch;
    }
  }
  if (!val_items.empty()) params = best;
  return result;
}

ExampleSampler MakeTaskSampler(const std::vector<AdjacencyState>& graphs,
                               std::shared_ptr<const PriorModel> prior, const TaskSpec& task,
                               std::size_t mask_bank) {
  if (!prior) throw StateError("MakeTaskSampler: no prior model");
  auto shared = std::make_shared<const std::vector<AdjacencyState>>(graphs);
  if (mask_bank == 0 && IsTransductive(*prior)) mask_bank = 4;
  if (mask_bank == 0) {
    return [shared, prior, task](std::size_t index, Rng& rng) {
      const AdjacencyState& a1 = shared->at(index);
      TaskInput in = MakeTaskInput(a1, task, rng);
      AdjacencyState probs = PriorPredict(*prior, in.observed, in.mask);
      return FlowExample{a1, std::move(in.observed), std::move(in.mask), std::move(probs)};
    };
  }
  auto bank = std::make_shared<std::vector<FlowExample>>(shared->size() * mask_bank);
  ParallelFor(bank->size(), [&](std::size_t k) {
    const std::size_t g = k / mask_bank;
    Rng rng = MakeRng(task.seed, {0xBA4, g, k % mask_bank});
    const AdjacencyState& a1 = (*shared)[g];
    TaskInput in = MakeTaskInput(a1, task, rng);
    AdjacencyState probs = PriorPredict(*prior, in.observed, in.mask);
    (*bank)[k] = FlowExample{a1, std::move(in.observed), std::move(in.mask), std::move(probs)};
  });
  return [bank, mask_bank](std::size_t index, Rng& rng) {
    const std::size_t pick = std::uniform_int_distribution<std::size_t>(0, mask_bank - 1)(rng);
    return bank->at(index * mask_bank + pick);
  };
}

// --- sampling ----------------------------------------------------------------------

FlowSample EulerSample(const VelocityNet& net, const AdjacencyState& observed,
                       const ObservationMask& xi, const AdjacencyState& prior_probs,
                       TaskKind task, std::size_t k, double sigma_s, std::uint64_t seed,
                       const SampleOptions& options) {
  if (k == 0) throw ConfigError("EulerSample: K must be at least 1");
  Rng rng = MakeRng(seed, {0x5A3});
  AdjacencyState a = BuildA0(observed, xi, prior_probs, sigma_s, task, rng);
  FlowSample sample;
  sample.k = k;
  sample.seed = seed;
  if (options.keep_trajectory) sample.trajectory.push_back(a);
  const std::size_t n = a.n();
  const double dt = 1.0 / static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(k);
    const AdjacencyState v = VelocityForward(net, a, t);
    Matrix next = a.values();
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = 0; q < n; ++q) {
        if (p == q) continue;
        next(p, q) += dt * v(p, q);
        if (options.clamp_observed && xi.observed(p, q)) next(p, q) = observed(p, q);
      }
    a = SymmetrizeClip(next);
    if (options.keep_trajectory) sample.trajectory.push_back(a);
  }
  sample.final_state = std::move(a);
  return sample;
}

double LogDensity(const VelocityNet& net, const AdjacencyState& a1, const AdjacencyState& a0,
                  const ObservationMask& xi, const AdjacencyState& prior_probs,
                  std::size_t quad_steps, double sigma_s) {
  if (!(sigma_s > 0.0)) throw ConfigError("LogDensity: degenerate base (sigma_s must be > 0)");
  if (quad_steps == 0) throw ConfigError("LogDensity: quad_steps must be positive");
  const std::size_t n = a1.n();
  RequireSameN(n, a0.n(), "LogDensity");
  RequireSameN(n, xi.n(), "LogDensity");
  RequireSameN(n, prior_probs.n(), "LogDensity");

  double base = 0.0;
  const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi * sigma_s * sigma_s);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!xi.observed(i, j)) {
        const double d = (a0(i, j) - prior_probs(i, j)) / sigma_s;
        base += log_norm - 0.5 * d * d;
      }

  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) coords.emplace_back(i, j);
  constexpr double kStep = 1e-5;
  std::vector<double> traces(quad_steps * coords.size());
  ParallelFor(traces.size(), [&](std::size_t idx) {
    const std::size_t m = idx / coords.size();
    const auto [i, j] = coords[idx % coords.size()];
    const double t = (static_cast<double>(m) + 0.5) / static_cast<double>(quad_steps);
    AdjacencyState at = Interpolate(a0, a1, t);
    const double centre = at(i, j);
    at.SetPair(i, j, centre + kStep);
    const double plus = VelocityForward(net, at, t)(i, j);
    at.SetPair(i, j, centre - kStep);
    const double minus = VelocityForward(net, at, t)(i, j);
    traces[idx] = (plus - minus) / (2.0 * kStep);
  });
  double integral = 0.0;
  for (double tr : traces) integral += tr;
  return base - integral / static_cast<double>(quad_steps);
}

}  // namespace pifm
