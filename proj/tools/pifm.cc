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

// pifm: command-line front end for graph reconstruction experiments.
//
//   pifm ingest      --input DIR [--name DS] --out DIR
//   pifm split       --config FILE --out DIR
//   pifm mask        --config FILE --out DIR
//   pifm train-prior --config FILE --out DIR
//   pifm train-flow  --config FILE --out DIR [--from DIR]
//   pifm reconstruct --config FILE --out DIR [--from DIR]
//   pifm evaluate    --config FILE --out DIR
//   pifm toy         --out DIR
//   pifm sweep       --config FILE --out DIR [--ks 1,10,100] [--sigmas ...]
//
// Shared overrides: --seed --k --sigma-s --prior --task --rate --threshold
// --clamp-observed --force. PIFM_THREADS caps worker threads.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pifm/data.h"
#include "pifm/error.h"
#include "pifm/experiment.h"
#include "pifm/flow.h"
#include "pifm/nn/checkpoint.h"
#include "pifm/priors.h"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> k;
  std::optional<double> sigma_s;
  std::optional<std::string> prior;
  std::optional<std::string> task;
  std::optional<double> rate;
  std::optional<double> threshold;
  bool clamp_observed = false;
  bool force = false;
};

void AddCommon(CLI::App* cmd, Overrides& o, bool needs_config) {
  auto* c = cmd->add_option("--config", o.config, "experiment config (JSON)");
  if (needs_config) c->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "output directory")->required();
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--k", o.k, "Euler steps K")->check(CLI::PositiveNumber);
  cmd->add_option("--sigma-s", o.sigma_s, "source noise std-dev (train and sample)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--prior", o.prior, "prior variant")
      ->check(CLI::IsMember({"node2vec", "sage", "graphon", "gaussian"}));
  cmd->add_option("--task", o.task, "reconstruction task")
      ->check(CLI::IsMember({"linkpred", "expansion", "denoise"}));
  cmd->add_option("--rate", o.rate, "drop / flip rate in (0,1)");
  cmd->add_option("--threshold", o.threshold, "binarization cutoff (default 0.5)");
  cmd->add_flag("--clamp-observed", o.clamp_observed, "re-impose observed entries each step");
  cmd->add_flag("--force", o.force, "overwrite an existing output directory");
}

pifm::ExperimentConfig LoadConfig(const Overrides& o) {
  pifm::ExperimentConfig cfg =
      o.config.empty() ? pifm::ExperimentConfig{} : pifm::ExperimentConfig::Load(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.k) cfg.flow.k = *o.k;
  if (o.sigma_s) cfg.flow.sigma_s_train = cfg.flow.sigma_s_sample = *o.sigma_s;
  if (o.prior) cfg.prior = *o.prior;
  if (o.task) cfg.task.kind = pifm::ParseTaskKind(*o.task);
  if (o.rate) cfg.task.rate = *o.rate;
  if (o.threshold) cfg.threshold = *o.threshold;
  if (o.clamp_observed) cfg.flow.clamp_observed = true;
  cfg.out_dir = o.out;
  cfg.Validate();
  return cfg;
}

void PrepareOut(const fs::path& out, bool force) {
  if (fs::exists(out) && !force) {
    throw pifm::IoError("output directory " + out.string() + " exists; pass --force to overwrite");
  }
  fs::create_directories(out);
}

void Write(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text)) throw pifm::IoError("cannot write " + path.string());
}

pifm::PretrainedModels LoadPretrained(const std::string& from, bool want_net) {
  pifm::PretrainedModels m;
  if (from.empty()) return m;
  const fs::path prior_path = fs::path(from) / "prior.ckpt";
  if (fs::exists(prior_path)) {
    std::ifstream in(prior_path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    m.prior = std::make_shared<const pifm::PriorModel>(pifm::DecodePrior(bytes));
  }
  const fs::path flow_path = fs::path(from) / "flow.ckpt";
  if (want_net && fs::exists(flow_path)) {
    m.net = pifm::VelocityNet::FromCheckpoint(pifm::nn::LoadCheckpoint(flow_path));
  }
  return m;
}

void SavePrior(const fs::path& out, const pifm::PriorModel& prior) {
  Write(out / "prior.ckpt", pifm::EncodePrior(prior));
  if (const auto* g = std::get_if<pifm::GraphonPrior>(&prior)) {
    Write(out / "graphon.csv", g->w.ToCsv());
  }
}

std::vector<pifm::AdjacencyState> Adjacencies(const std::vector<pifm::GraphRecord>& records,
                                              const std::vector<std::size_t>& ids) {
  std::vector<pifm::AdjacencyState> out;
  for (std::size_t id : ids) out.push_back(records[id].adjacency);
  return out;
}

int RunIngest(const std::string& input, const std::string& name, const Overrides& o) {
  const auto graphs = pifm::ParseTuDataset(input, name);
  PrepareOut(o.out, o.force);
  double nodes = 0, edges = 0;
  std::size_t max_n = 0;
  for (const auto& g : graphs) {
    nodes += static_cast<double>(g.adjacency.n());
    edges += static_cast<double>(g.adjacency.EdgeCount());
    max_n = std::max(max_n, g.adjacency.n());
  }
  const double count = graphs.empty() ? 1.0 : static_cast<double>(graphs.size());
  Json j{{"input", input},
         {"graphs", graphs.size()},
         {"mean_nodes", nodes / count},
         {"mean_edges", edges / count},
         {"max_nodes", max_n}};
  Write(fs::path(o.out) / "dataset.json", j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return 0;
}

int RunSplit(const Overrides& o) {
  const auto cfg = LoadConfig(o).Resolved();
  const auto graphs = pifm::LoadDataset(cfg);
  const auto split = pifm::SplitFor(cfg, graphs.size());
  PrepareOut(o.out, o.force);
  Json j{{"config", Json::parse(cfg.ToJson())},
         {"train", split.train_ids},
         {"val", split.val_ids},
         {"test", split.test_ids}};
  Write(fs::path(o.out) / "split.json", j.dump(2) + "\n");
  return 0;
}

int RunMask(const Overrides& o) {
  const auto cfg = LoadConfig(o).Resolved();
  const auto graphs = pifm::LoadDataset(cfg);
  const auto split = pifm::SplitFor(cfg, graphs.size());
  PrepareOut(o.out, o.force);
  Json entries = Json::array();
  for (std::size_t id : split.test_ids) {
    const auto& a = graphs[id].adjacency;
    pifm::Rng rng = pifm::MakeRng(cfg.task.seed, {0x7E5, id});
    pifm::TaskInput in;
    try {
      in = pifm::MakeTaskInput(a, cfg.task, rng);
    } catch (const pifm::ConfigError& e) {
      std::cerr << "skipping graph " << id << ": " << e.what() << "\n";
      continue;
    }
    const std::string stem = "graph_" + std::to_string(id);
    Write(fs::path(o.out) / (stem + "_observed.csv"), pifm::MatrixCsv(in.observed.values()));
    Write(fs::path(o.out) / (stem + "_mask.csv"), pifm::MatrixCsv(in.mask.values()));
    entries.push_back({{"dataset_index", id},
                       {"hidden_pairs", in.mask.HiddenPairCount()},
                       {"observed", stem + "_observed.csv"},
                       {"mask", stem + "_mask.csv"}});
  }
  Json j{{"config", Json::parse(cfg.ToJson())}, {"graphs", entries}};
  Write(fs::path(o.out) / "manifest.json", j.dump(2) + "\n");
  return 0;
}

int RunTrainPrior(const Overrides& o) {
  const auto cfg = LoadConfig(o).Resolved();
  const auto graphs = pifm::LoadDataset(cfg);
  const auto split = pifm::SplitFor(cfg, graphs.size());
  const auto prior = pifm::TrainPrior(cfg, Adjacencies(graphs, split.train_ids));
  PrepareOut(o.out, o.force);
  SavePrior(o.out, prior);
  Write(fs::path(o.out) / "config.json", cfg.ToJson() + "\n");
  return 0;
}

int RunTrainFlow(const Overrides& o, const std::string& from) {
  const auto cfg = LoadConfig(o);
  PrepareOut(o.out, o.force);
  const pifm::Pipeline p = pifm::PreparePipeline(cfg, LoadPretrained(from, false));
  SavePrior(o.out, *p.prior);
  pifm::nn::SaveCheckpoint(fs::path(o.out) / "flow.ckpt", p.flow.net.ToCheckpoint());
  Json j{{"config", Json::parse(p.config.ToJson())},
         {"steps", p.flow.steps},
         {"best_epoch", p.flow.best_epoch},
         {"train_loss", p.flow.train_loss},
         {"val_loss", p.flow.val_loss}};
  Write(fs::path(o.out) / "training.json", j.dump(2) + "\n");
  return 0;
}

int RunReconstruct(const Overrides& o, const std::string& from, bool evaluate_only) {
  const auto cfg = LoadConfig(o);
  if (fs::exists(o.out) && !o.force) {
    throw pifm::IoError("output directory " + o.out + " exists; pass --force to overwrite");
  }
  const auto result = pifm::RunExperiment(cfg, LoadPretrained(from, true));
  pifm::EmitOptions opts;
  opts.force = o.force;
  opts.write_predictions = !evaluate_only;
  const int code = pifm::EmitReport(result, o.out, opts);
  std::ifstream summary(fs::path(o.out) / "summary.txt");
  std::cout << summary.rdbuf();
  return code;
}

int RunToy(const Overrides& o) {
  pifm::ToyConfig cfg = pifm::ToyConfig::Default();
  if (o.seed) cfg.seed = *o.seed;
  if (o.k) cfg.k = *o.k;
  if (o.sigma_s) cfg.flow.sigma_s_train = cfg.flow.sigma_s_sample = *o.sigma_s;
  PrepareOut(o.out, o.force);
  const pifm::ToyReport report = pifm::RunToy(cfg);
  Write(fs::path(o.out) / "toy.json", report.ToJson());
  std::cout << report.ToJson();
  return 0;
}

int RunSweepCmd(const Overrides& o, const pifm::SweepSpec& sweep) {
  const auto cfg = LoadConfig(o);
  PrepareOut(o.out, o.force);
  const auto result = pifm::RunSweep(cfg, sweep);
  Write(fs::path(o.out) / "sweep.csv", result.ToCsv());
  Write(fs::path(o.out) / "config.json", cfg.Resolved().ToJson() + "\n");
  std::cout << result.ToCsv();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prior-informed flow matching for graph reconstruction"};
  app.require_subcommand(1);

  Overrides o;
  std::string input, name, from;
  pifm::SweepSpec sweep;

  auto* ingest = app.add_subcommand("ingest", "parse a TU dataset and summarize it");
  ingest->add_option("--input", input, "TU dataset directory")->required()->check(CLI::ExistingDirectory);
  ingest->add_option("--name", name, "dataset name (inferred when omitted)");
  ingest->add_option("--out", o.out, "output directory")->required();
  ingest->add_flag("--force", o.force, "overwrite an existing output directory");

  auto* split = app.add_subcommand("split", "write the train/val/test split");
  auto* mask = app.add_subcommand("mask", "write observed graphs and masks of the test split");
  auto* train_prior = app.add_subcommand("train-prior", "train the prior and save a checkpoint");
  auto* train_flow = app.add_subcommand("train-flow", "train prior and flow, save checkpoints");
  auto* reconstruct = app.add_subcommand("reconstruct", "reconstruct the test split");
  auto* evaluate = app.add_subcommand("evaluate", "run the full experiment and report metrics");
  auto* toy = app.add_subcommand("toy", "four-node coupled-edge experiment");
  auto* sweep_cmd = app.add_subcommand("sweep", "grid over K and sigma_s");
  for (auto* cmd : {split, mask, train_prior, train_flow, reconstruct, evaluate, sweep_cmd}) {
    AddCommon(cmd, o, true);
  }
  AddCommon(toy, o, false);
  train_flow->add_option("--from", from, "directory with prior.ckpt to reuse")
      ->check(CLI::ExistingDirectory);
  reconstruct->add_option("--from", from, "directory with prior.ckpt / flow.ckpt to reuse")
      ->check(CLI::ExistingDirectory);
  sweep_cmd->add_option("--ks", sweep.ks, "K values")->delimiter(',');
  sweep_cmd->add_option("--sigmas", sweep.sigmas, "sigma_s values")->delimiter(',');
  sweep_cmd->add_option("--samples", sweep.samples_per_graph, "samples per test graph");
  sweep_cmd->add_flag("--retrain-per-sigma", sweep.retrain_per_sigma,
                      "retrain the flow for every sigma");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) return RunIngest(input, name, o);
    if (*split) return RunSplit(o);
    if (*mask) return RunMask(o);
    if (*train_prior) return RunTrainPrior(o);
    if (*train_flow) return RunTrainFlow(o, from);
    if (*reconstruct) return RunReconstruct(o, from, false);
    if (*evaluate) return RunReconstruct(o, "", false);
    if (*toy) return RunToy(o);
    if (*sweep_cmd) return RunSweepCmd(o, sweep);
  } catch (const pifm::StageError& e) {
    std::cerr << "pifm: stage " << e.stage() << " failed: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "pifm: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
