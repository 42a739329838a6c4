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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails. Pass criterion numbers as arguments to run
// a subset, e.g. `pifm_acceptance 2 5`.
//
// PIFM_ENZYMES_DIR points at an ENZYMES TU directory for the ingest check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck.h"
#include "pifm/data.h"
#include "pifm/experiment.h"
#include "pifm/flow.h"
#include "pifm/metrics.h"
#include "pifm/priors.h"
#include "test_util.h"

namespace pifm {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

VelocityNet RandomNet(std::uint64_t seed, double scale) {
  VelocityNetConfig cfg;
  cfg.dropout = 0.0;
  VelocityNet net(cfg, seed);
  Rng rng(seed ^ 0x5eed);
  testing::FillNormal(net.params()["out2.weight"], rng, scale);
  return net;
}

AdjacencyState MaskedCopy(const AdjacencyState& a, const ObservationMask& xi) {
  AdjacencyState out = a;
  for (std::size_t i = 0; i < a.n(); ++i)
    for (std::size_t j = i + 1; j < a.n(); ++j)
      if (!xi.observed(i, j)) out.SetPair(i, j, 0.0);
  return out;
}

// --- 1: toy coupling ----------------------------------------------------------------

Outcome ToyCoupling() {
  const auto start = Clock::now();
  const ToyReport r = RunToy(ToyConfig::Default());
  const double secs = Seconds(start);
  const double valid = 1.0 - r.flow_invalid;
  const bool pass = secs <= 300.0 && valid >= 0.90 && std::abs(r.flow_11 - 0.6) <= 0.1 &&
                    std::abs(r.baseline_invalid - 0.48) <= 0.07;
  return {pass, Format("valid %.3f (>= 0.90), mode[1,1] %.3f (0.6 +- 0.1), baseline invalid "
                       "%.3f (0.48 +- 0.07), prior %.3f, %.0f s (<= 300 s)",
                       valid, r.flow_11, r.baseline_invalid, r.prior_02, secs)};
}

// --- 2: equivariance -----------------------------------------------------------------

Outcome Equivariance() {
  const auto start = Clock::now();
  Rng rng(0xE0);
  const VelocityNet net = RandomNet(2, 0.5);
  std::vector<AdjacencyState> train;
  for (const auto& r : SampleGraphonDataset(NamedGraphon("two_block"), 60, 12, 2))
    train.push_back(r.adjacency);
  std::vector<SageTrainingExample> sage_ex;
  for (const auto& a : train)
    sage_ex.push_back({a, MakeTaskInput(a, {TaskKind::kLinkPrediction, 0.5, 0}, rng)});
  SageParams sp;
  sp.epochs = 5;
  const std::vector<PriorModel> priors{GraphonPrior{EstimateHistogramGraphon(train, 16, 1)},
                                       SagePrior{SageEmbed(sage_ex, TaskKind::kLinkPrediction, sp, 3).model}};

  double dev_v = 0, dev_a0 = 0, dev_euler = 0, dev_prior = 0, dev_logp = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = testing::UniformIndex(2, 12, rng);
    const AdjacencyState a1 = testing::RandomGraph(n, 0.4, rng);
    const ObservationMask xi = testing::RandomMask(n, 0.5, rng);
    const AdjacencyState obs = MaskedCopy(a1, xi);
    const AdjacencyState f = testing::RandomRelaxed(n, rng);
    const AdjacencyState at = testing::RandomRelaxed(n, rng);
    const double t = Uniform01(rng);
    const NodePermutation p = NodePermutation::Random(n, rng);
    const AdjacencyState pobs = Permute(obs, p), pf = Permute(f, p);
    const ObservationMask pxi = Permute(xi, p);

    dev_v = std::max(dev_v, MaxAbsDiff(VelocityForward(net, Permute(at, p), t).values(),
                                       Permute(VelocityForward(net, at, t), p).values()));
    for (TaskKind task : {TaskKind::kLinkPrediction, TaskKind::kExpansion, TaskKind::kDenoising}) {
      dev_a0 = std::max(dev_a0, MaxAbsDiff(BuildA0(pobs, pxi, pf, 0.0, task, rng).values(),
                                           Permute(BuildA0(obs, xi, f, 0.0, task, rng), p).values()));
    }
    const FlowSample lhs = EulerSample(net, pobs, pxi, pf, TaskKind::kLinkPrediction, 10, 0.0, 1);
    const FlowSample rhs = EulerSample(net, obs, xi, f, TaskKind::kLinkPrediction, 10, 0.0, 1);
    dev_euler = std::max(dev_euler, MaxAbsDiff(lhs.final_state.values(),
                                               Permute(rhs.final_state, p).values()));
    for (const PriorModel& prior : priors) {
      dev_prior = std::max(dev_prior, MaxAbsDiff(PriorPredict(prior, pobs, pxi).values(),
                                                 Permute(PriorPredict(prior, obs, xi), p).values()));
    }
    if (trial < 10 && n >= 2 && n <= 8 && xi.HiddenPairCount() > 0) {
      const VelocityNet small = RandomNet(7, 0.2);
      const AdjacencyState a0 = BuildA0(obs, xi, f, 0.1, TaskKind::kLinkPrediction, rng);
      const double l = LogDensity(small, a1, a0, xi, f, 8, 0.1);
      const double r = LogDensity(small, Permute(a1, p), Permute(a0, p), pxi, pf, 8, 0.1);
      dev_logp = std::max(dev_logp, std::abs(l - r));
    }
  }
  const double secs = Seconds(start);
  const bool pass = dev_v <= 1e-8 && dev_a0 <= 1e-8 && dev_euler <= 1e-8 && dev_prior <= 1e-8 &&
                    dev_logp <= 1e-4 && secs < 120.0;
  return {pass, Format("max dev velocity %.2e, A0 %.2e, euler %.2e, prior %.2e (<= 1e-8); "
                       "log-density %.2e (<= 1e-4); %.1f s (< 120 s)",
                       dev_v, dev_a0, dev_euler, dev_prior, dev_logp, secs)};
}

// --- 3: gradients ----------------------------------------------------------------------

Outcome Gradients() {
  Rng rng(0x3);
  double worst = 0.0;
  std::string worst_name = "-";
  std::size_t checked = 0;
  for (int instance = 0; instance < 100; ++instance) {
    for (auto& pc : testing::PrimitiveCases(rng)) {
      const auto r = testing::CheckGradients(pc.params, pc.build, 1e-4, 0, rng);
      checked += r.checked;
      if (r.max_rel > worst) worst = r.max_rel, worst_name = pc.name;
    }
    auto vc = testing::MakeVelocityLossCase(testing::UniformIndex(2, 6, rng), rng);
    const auto r = testing::CheckGradients(vc.net.params(), vc.Builder(), 1e-4, 20, rng);
    checked += r.checked;
    if (r.max_rel > worst) worst = r.max_rel, worst_name = "velocity loss";
  }
  return {worst <= 1e-4, Format("max relative error %.2e (%s) over %zu coordinates, 100 instances "
                                "per primitive and of the velocity loss (<= 1e-4)",
                                worst, worst_name.c_str(), checked)};
}

// --- 4: metric oracles ------------------------------------------------------------------

Outcome MetricOracles() {
  Rng rng(0x4);
  std::size_t auc_bad = 0, ap_bad = 0, conf_bad = 0, stat_bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = testing::UniformIndex(2, 50, rng);
    const double levels = static_cast<double>(testing::UniformIndex(2, 12, rng));
    std::vector<double> s(m), y(m);
    for (std::size_t k = 0; k < m; ++k) {
      s[k] = std::floor(Uniform01(rng) * levels) / levels;
      y[k] = Uniform01(rng) < 0.4 ? 1.0 : 0.0;
    }
    y[0] = 1.0;
    y[1] = 0.0;
    // AUC by pair enumeration.
    double wins2 = 0, pos = 0, neg = 0;
    for (std::size_t a = 0; a < m; ++a) {
      (y[a] == 1.0 ? pos : neg) += 1;
      if (y[a] != 1.0) continue;
      for (std::size_t b = 0; b < m; ++b)
        if (y[b] == 0.0) wins2 += s[a] > s[b] ? 2 : (s[a] == s[b] ? 1 : 0);
    }
    auc_bad += Auc(s, y) != wins2 / (2 * pos * neg);
    // AP by walking the precision-recall curve.
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return s[a] != s[b] ? s[a] > s[b] : a < b; });
    double ap = 0, prev = 0, tp = 0;
    for (std::size_t k = 0; k < m; ++k) {
      tp += y[order[k]];
      ap += (tp / pos - prev) * (tp / static_cast<double>(k + 1));
      prev = tp / pos;
    }
    ap_bad += std::abs(AveragePrecision(s, y) - ap) > 1e-12;
    // Confusion rates by counting.
    const double thr = Uniform01(rng);
    double fp = 0, tn = 0, fn = 0, tpc = 0;
    for (std::size_t k = 0; k < m; ++k) {
      const bool pred = s[k] >= thr;
      if (y[k] == 1.0) (pred ? tpc : fn) += 1;
      else (pred ? fp : tn) += 1;
    }
    const ConfusionRates cr = ComputeConfusionRates(s, y, thr);
    conf_bad += cr.fpr != 100.0 * fp / (fp + tn) || cr.fnr != 100.0 * fn / (fn + tpc);
    // Graph statistics by triple enumeration.
    const std::size_t n = testing::UniformIndex(1, 8, rng);
    const AdjacencyState g = testing::RandomGraph(n, Uniform01(rng), rng);
    double tri = 0, deg = 0, clu = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k) tri += g(i, j) * g(j, k) * g(i, k);
    for (std::size_t v = 0; v < n; ++v) {
      double d = 0, links = 0;
      for (std::size_t i = 0; i < n; ++i) d += g(v, i);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) links += g(v, i) * g(v, j) * g(i, j);
      deg += d;
      if (d >= 2) clu += links / (d * (d - 1) / 2);
    }
    const GraphStatistics st = ComputeGraphStatistics(g);
    stat_bad += st.triangles != tri || st.avg_degree != deg / static_cast<double>(n) ||
                std::abs(st.avg_clustering - clu / static_cast<double>(n)) > 1e-12;
  }
  const bool pass = auc_bad + ap_bad + conf_bad + stat_bad == 0;
  return {pass, Format("mismatches over 1000 instances: auc %zu, ap %zu, confusion %zu, "
                       "graph statistics %zu",
                       auc_bad, ap_bad, conf_bad, stat_bad)};
}

// --- 5: rectified-flow identities ----------------------------------------------------

Outcome FlowIdentities() {
  Rng rng(0x5);
  const VelocityNet net = RandomNet(5, 0.5);
  const VelocityNet zero(VelocityNetConfig{}, 6);
  std::size_t bad_interp = 0, bad_k1 = 0, bad_zero = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = testing::UniformIndex(2, 12, rng);
    const AdjacencyState a1 = testing::RandomGraph(n, 0.4, rng);
    const ObservationMask xi = testing::RandomMask(n, 0.5, rng);
    const AdjacencyState obs = MaskedCopy(a1, xi), f = testing::RandomRelaxed(n, rng);
    const AdjacencyState a0 = BuildA0(obs, xi, f, 0.1, TaskKind::kLinkPrediction, rng);
    bad_interp += !(Interpolate(a0, a1, 0.0) == a0) || !(Interpolate(a0, a1, 1.0) == a1);

    SampleOptions keep;
    keep.keep_trajectory = true;
    const FlowSample one = EulerSample(net, obs, xi, f, TaskKind::kLinkPrediction, 1, 0.1, rng(), keep);
    const AdjacencyState& s0 = one.trajectory.front();
    const AdjacencyState v = VelocityForward(net, s0, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && one.final_state(i, j) != s0(i, j) + v(i, j)) {
          ++bad_k1;
          i = n;
          break;
        }
    const std::size_t k = testing::UniformIndex(1, 20, rng);
    const FlowSample still = EulerSample(zero, obs, xi, f, TaskKind::kLinkPrediction, k, 0.1, rng(), keep);
    bad_zero += !(still.final_state == still.trajectory.front());
  }
  const bool pass = bad_interp + bad_k1 + bad_zero == 0;
  return {pass, Format("inexact cases over 100 instances: endpoints %zu, K=1 step %zu, "
                       "zero field %zu",
                       bad_interp, bad_k1, bad_zero)};
}

// --- 6 and 7: desk-scale reconstruction ---------------------------------------------

ExperimentConfig DeskConfig(const std::string& prior, std::uint64_t seed) {
  ExperimentConfig c = ExperimentConfig::FromJson(R"({
    "dataset": {"graphon": "two_block", "num_graphs": 260, "num_nodes": 30,
                "train": 200, "val": 30, "test": 30},
    "task": {"kind": "linkpred", "rate": 0.5},
    "flow": {"epochs": 200, "lr": 1e-3, "lr_final_fraction": 0.1, "k": 1}
  })");
  c.prior = prior;
  c.seed = seed;
  return c;
}

std::vector<Pipeline> g_sage_pipelines;  // handed from criterion 6 to 7

Outcome ReconstructionGain() {
  const auto start = Clock::now();
  std::string detail;
  bool pass = true;
  for (const std::string prior : {"graphon", "sage"}) {
    double gain = 0.0;
    std::string per_seed;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      ExperimentResult r = RunExperiment(DeskConfig(prior, seed));
      const double g = r.reconstruction.report.auc - r.prior_report.auc;
      gain += g / 3.0;
      per_seed += Format("%s%.1f->%.1f", per_seed.empty() ? "" : ", ", r.prior_report.auc,
                         r.reconstruction.report.auc);
      if (prior == "sage") g_sage_pipelines.push_back(std::move(r.pipeline));
    }
    pass = pass && gain >= 2.0;
    detail += Format("%s: mean gain %+.2f AUC points (%s); ", prior.c_str(), gain, per_seed.c_str());
  }
  const double secs = Seconds(start);
  pass = pass && secs <= 3600.0;
  return {pass, detail + Format("needs >= 2.0 each; %.0f s (<= 3600 s)", secs)};
}

Outcome DistortionPerception() {
  if (g_sage_pipelines.empty()) {
    for (std::uint64_t seed : {1u, 2u, 3u}) g_sage_pipelines.push_back(PreparePipeline(DeskConfig("sage", seed)));
  }
  const std::vector<std::size_t> ks{1, 10, 100};
  std::vector<double> auc(3, 0.0), mse(3, 0.0), mmd(3, 0.0);
  for (const Pipeline& p : g_sage_pipelines) {
    for (std::size_t i = 0; i < ks.size(); ++i) {
      const Reconstruction r = Reconstruct(p, ks[i], p.config.flow.sigma_s_sample, 4);
      const double scale = 1.0 / static_cast<double>(g_sage_pipelines.size());
      auc[i] += r.report.auc * scale;
      mse[i] += r.report.mse * scale;
      mmd[i] += r.report.mmd2_degree->value * scale;
    }
  }
  const bool auc_max = auc[0] > auc[1] && auc[0] > auc[2];
  const bool mse_min = mse[0] < mse[1] && mse[0] < mse[2];
  const bool mmd_down = mmd[2] < mmd[0];
  return {auc_max && mse_min && mmd_down,
          Format("mean over %zu seeds, K=1/10/100: AUC %.2f/%.2f/%.2f, MSE %.4f/%.4f/%.4f, "
                 "MMD2 degree %.4f/%.4f/%.4f",
                 g_sage_pipelines.size(), auc[0], auc[1], auc[2], mse[0], mse[1], mse[2], mmd[0],
                 mmd[1], mmd[2])};
}

// --- 8: overfit oracle ---------------------------------------------------------------------

Outcome Overfit() {
  const auto start = Clock::now();
  const AdjacencyState a1 = SampleGraphonDataset(NamedGraphon("two_block"), 1, 12, 8)[0].adjacency;
  Rng rng(8);
  const TaskInput in = MakeTaskInput(a1, {TaskKind::kLinkPrediction, 0.5, 0}, rng);
  const AdjacencyState prior = PriorPredict(GaussianPrior{}, in.observed, in.mask);
  const FlowExample example{a1, in.observed, in.mask, prior};
  const ExampleSampler sampler = [&](std::size_t, Rng&) { return example; };

  FlowConfig cfg;
  cfg.sigma_s_train = cfg.sigma_s_sample = 0.0;
  cfg.net.dropout = 0.0;
  cfg.lr = 3e-3;
  cfg.lr_final_fraction = 0.05;
  cfg.batch_size = 8;
  cfg.epochs = 5000;  // one step per epoch
  cfg.val_draws = 16;  // loss on a fixed grid of t, evaluated after every step
  cfg.seed = 8;
  const FlowTrainResult r = TrainFlow(cfg.batch_size, sampler, 1, sampler, TaskKind::kLinkPrediction, cfg);
  std::size_t first = 0;
  while (first < r.val_loss.size() && r.val_loss[first] >= 1e-3) ++first;
  const double best = *std::min_element(r.val_loss.begin(), r.val_loss.end());
  const bool pass = first < r.val_loss.size();
  return {pass, Format("loss on a 16-point t grid: %.2e after %zu steps, best %.2e; "
                       "first below 1e-3 at step %s (<= 5000); %.0f s",
                       r.val_loss.back(), r.steps, best,
                       pass ? std::to_string(first + 1).c_str() : "never", Seconds(start))};
}

// --- 9: data plumbing -------------------------------------------------------------------------

std::string Slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome DataPlumbing() {
  const fs::path root = fs::temp_directory_path() / "pifm_acceptance_tu";
  fs::remove_all(root);
  std::size_t bad = 0, datasets = 0;
  for (const char* name : {"product", "two_block", "dc_sbm"}) {
    for (std::size_t n : {8u, 30u}) {
      const auto graphs = SampleGraphonDataset(NamedGraphon(name), 50, n, n);
      const fs::path a = root / (std::string(name) + std::to_string(n)), b = a / "again";
      WriteTuDataset(a, "SYN", graphs);
      const auto parsed = ParseTuDataset(a, "SYN");
      WriteTuDataset(b, "SYN", parsed);
      bool same = parsed.size() == graphs.size();
      for (std::size_t g = 0; same && g < graphs.size(); ++g) same = parsed[g].adjacency == graphs[g].adjacency;
      for (const char* f : {"SYN_A.txt", "SYN_graph_indicator.txt"}) same = same && Slurp(a / f) == Slurp(b / f);
      bad += !same;
      ++datasets;
    }
  }
  fs::remove_all(root);
  std::string detail = Format("round trip: %zu of %zu synthetic datasets differ", bad, datasets);
  bool pass = bad == 0;
  if (const char* dir = std::getenv("PIFM_ENZYMES_DIR")) {
    const auto graphs = ParseTuDataset(dir, "ENZYMES");
    double nodes = 0;
    for (const auto& g : graphs) nodes += static_cast<double>(g.adjacency.n());
    const double mean = graphs.empty() ? 0.0 : nodes / static_cast<double>(graphs.size());
    pass = pass && graphs.size() == 600 && std::abs(mean - 32.63) <= 0.5;
    detail += Format("; ENZYMES %zu graphs (600), mean n %.2f (32.63 +- 0.5)", graphs.size(), mean);
  } else {
    detail += "; ENZYMES not supplied (set PIFM_ENZYMES_DIR), ingest check not run";
  }
  return {pass, detail};
}

// --- 10: determinism ----------------------------------------------------------------------------

Outcome Determinism() {
  ExperimentConfig c = ExperimentConfig::FromJson(R"({
    "dataset": {"graphon": "two_block", "num_graphs": 40, "num_nodes": 14,
                "train": 24, "val": 8, "test": 8},
    "prior": "node2vec",
    "flow": {"epochs": 3, "batch_size": 8, "k": 5},
    "evaluation": {"samples_per_graph": 2},
    "seed": 10
  })");
  ::setenv("PIFM_THREADS", "1", 1);
  const std::string a = RunExperiment(c).MetricsJson();
  ::setenv("PIFM_THREADS", "3", 1);
  const std::string b = RunExperiment(c).MetricsJson();
  ::unsetenv("PIFM_THREADS");
  return {a == b, Format("metrics JSON of two runs (1 and 3 worker threads): %zu vs %zu bytes, %s",
                         a.size(), b.size(), a == b ? "identical" : "different")};
}

}  // namespace
}  // namespace pifm

int main(int argc, char** argv) {
  using namespace pifm;
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, ToyCoupling},      {2, Equivariance},         {3, Gradients}, {4, MetricOracles},
      {5, FlowIdentities},   {6, ReconstructionGain},   {7, DistortionPerception},
      {8, Overfit},          {9, DataPlumbing},         {10, Determinism}};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& [id, run] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %2d: %s  %s [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                Seconds(start));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
