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

#ifndef PIFM_EXPERIMENT_H_
#define PIFM_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pifm/data.h"
#include "pifm/flow.h"
#include "pifm/graph.h"
#include "pifm/metrics.h"
#include "pifm/priors.h"

namespace pifm {

// A pipeline stage failed; what() starts with the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct DatasetConfig {
  // TU directory; when empty a synthetic graphon dataset is sampled.
  std::string path;
  std::string name;
  std::string graphon = "two_block";
  std::size_t num_graphs = 260;
  std::size_t num_nodes = 30;
  // Explicit split sizes; all zero selects the 85/10/5 ratio split.
  std::size_t train = 200;
  std::size_t val = 30;
  std::size_t test = 30;
};

struct ReportChecks {
  std::optional<double> min_auc;             // percent
  std::optional<double> min_gain_over_prior;  // AUC points
};

// Every key of the JSON form is optional; missing keys keep these defaults.
// See README.md for the schema.
struct ExperimentConfig {
  DatasetConfig dataset;
  TaskSpec task;
  std::string prior = "graphon";  // node2vec | sage | graphon | gaussian
  Node2VecParams node2vec;
  SageParams sage;
  std::size_t sage_masks_per_graph = 2;
  std::size_t graphon_resolution = 64;
  std::size_t mask_bank = 0;  // 0 = fresh masks (inductive) / 4 per graph (node2vec)
  FlowConfig flow;
  std::size_t samples_per_graph = 1;
  double threshold = 0.5;
  bool strict = false;
  ReportChecks checks;
  std::string out_dir;
  std::uint64_t seed = 0;

  static ExperimentConfig FromJson(const std::string& text);
  static ExperimentConfig Load(const std::filesystem::path& path);
  std::string ToJson() const;  // fully resolved, stable key order
  // Checks ranges and paths; throws ConfigError.
  void Validate() const;
  // Applies derived settings (per-stage seeds, the Gaussian baseline's
  // sigma = 1) and returns the configuration actually run.
  ExperimentConfig Resolved() const;
};

struct SweepSpec {
  std::vector<std::size_t> ks{1, 10, 100};
  std::vector<double> sigmas;  // empty: the config's sigma_s_sample only
  std::size_t samples_per_graph = 10;
  // Sigmas are sampling noise levels by default; set to retrain per sigma
  // with sigma_s_train = sigma_s_sample.
  bool retrain_per_sigma = false;
};

// Everything needed to reconstruct the test split.
struct Pipeline {
  ExperimentConfig config;  // resolved
  std::vector<GraphRecord> dataset;
  DatasetSplit split;
  std::shared_ptr<const PriorModel> prior;
  FlowTrainResult flow;
  std::vector<std::size_t> test_ids;  // dataset indices actually evaluated
  std::vector<AdjacencyState> truths;
  std::vector<TaskInput> inputs;
  std::vector<AdjacencyState> prior_probs;
  std::size_t skipped_graphs = 0;  // test graphs where the task is undefined
};

std::vector<GraphRecord> LoadDataset(const ExperimentConfig& cfg);
DatasetSplit SplitFor(const ExperimentConfig& cfg, std::size_t n_graphs);
PriorModel TrainPrior(const ExperimentConfig& cfg, const std::vector<AdjacencyState>& train);

// Models loaded from checkpoints; present entries skip their training stage.
struct PretrainedModels {
  std::shared_ptr<const PriorModel> prior;
  std::optional<VelocityNet> net;
};

// ingest, split, train prior, train flow, build test observations.
Pipeline PreparePipeline(const ExperimentConfig& config, const PretrainedModels& pretrained = {});

struct Reconstruction {
  std::size_t k = 1;
  double sigma_s = 0.0;
  std::size_t samples_per_graph = 1;
  // samples[g][s] for test graph g.
  std::vector<std::vector<AdjacencyState>> samples;
  MetricsReport report;
};

Reconstruction Reconstruct(const Pipeline& pipeline, std::size_t k, double sigma_s,
                           std::size_t samples_per_graph);

struct ExperimentResult {
  Pipeline pipeline;
  MetricsReport prior_report;
  Reconstruction reconstruction;

  // Deterministic JSON: resolved config plus both reports; no timestamps.
  std::string MetricsJson() const;
};

ExperimentResult RunExperiment(const ExperimentConfig& config,
                               const PretrainedModels& pretrained = {});

struct SweepRow {
  std::size_t k;
  double sigma_s;
  MetricsReport report;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::string ToCsv() const;
};

SweepResult RunSweep(const ExperimentConfig& config, const SweepSpec& sweep);

// --- toy coupling experiment ---------------------------------------------------

struct ToyConfig {
  std::size_t train_samples = 1000;
  std::size_t draws = 200;
  std::size_t k = 100;
  double mode_probability = 0.6;  // P(both hidden edges present)
  Node2VecParams node2vec;
  FlowConfig flow;
  std::uint64_t seed = 0;

  static ToyConfig Default();
};

struct ToyReport {
  double prior_02 = 0.0;  // node2vec prior on the two hidden pairs
  double prior_13 = 0.0;
  std::size_t draws = 0;
  double flow_11 = 0.0;  // fraction of draws per mode after thresholding
  double flow_00 = 0.0;
  double flow_invalid = 0.0;
  double baseline_11 = 0.0;  // independent Bernoulli draws from the prior
  double baseline_00 = 0.0;
  double baseline_invalid = 0.0;
  double final_train_loss = 0.0;
  std::size_t steps = 0;

  std::string ToJson() const;
};

ToyReport RunToy(const ToyConfig& config);

// --- artifacts ---------------------------------------------------------------------

struct EmitOptions {
  bool force = false;
  bool write_predictions = true;
};

// Writes metrics.json, manifest.json, summary.txt and per-graph CSV matrices
// into out_dir. Refuses an existing directory unless force (IoError). Returns
// the process exit code: nonzero when an enabled check fails, or when strict
// and a metric is NaN.
int EmitReport(const ExperimentResult& result, const std::filesystem::path& out_dir,
               const EmitOptions& options = {});

std::string MatrixCsv(const Matrix& m);

}  // namespace pifm

#endif  // PIFM_EXPERIMENT_H_
