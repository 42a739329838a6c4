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

#include "pifm/experiment.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "pifm/error.h"
#include "pifm/nn/checkpoint.h"
#include "pifm/parallel.h"

namespace pifm {
namespace {

using Json = nlohmann::json;

// Copies j[key] into out when present; rejects keys outside `allowed`.
template <typename T>
void Read(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

void RejectUnknown(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError("config: unknown key '" + where + "." + key + "'");
  }
}

Json Section(const Json& j, const char* key) {
  return j.contains(key) ? j.at(key) : Json::object();
}

std::string FormatNumber(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

Json NumberOrNull(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json MmdJson(const std::optional<MmdResult>& m) {
  if (!m) return nullptr;
  return Json{{"value", m->value}, {"raw", m->raw}, {"bandwidth", m->bandwidth},
              {"biased", m->biased}};
}

Json ReportJson(const MetricsReport& r) {
  auto stat = [](const StatSummary& s) { return Json{{"mean", s.mean}, {"std", s.stddev}}; };
  return Json{{"auc", NumberOrNull(r.auc)},
              {"ap", NumberOrNull(r.ap)},
              {"fpr", NumberOrNull(r.fpr)},
              {"fnr", NumberOrNull(r.fnr)},
              {"auc_pooled", NumberOrNull(r.auc_pooled)},
              {"ap_pooled", NumberOrNull(r.ap_pooled)},
              {"mse", NumberOrNull(r.mse)},
              {"graphs", r.graphs},
              {"auc_graphs", r.auc_graphs},
              {"fpr_graphs", r.fpr_graphs},
              {"fnr_graphs", r.fnr_graphs},
              {"mmd2", {{"degree", MmdJson(r.mmd2_degree)},
                        {"clustering", MmdJson(r.mmd2_clustering)},
                        {"triangles", MmdJson(r.mmd2_triangles)},
                        {"kernel", "gaussian over normalized histograms, median bandwidth"}}},
              {"statistics",
               {{"degree", stat(r.degree)},
                {"triangles", stat(r.triangles)},
                {"clustering", stat(r.clustering)}}}};
}

bool TaskApplicable(const AdjacencyState& a, TaskKind kind) {
  if (a.n() < 2) return false;
  const std::size_t pairs = a.n() * (a.n() - 1) / 2;
  switch (kind) {
    case TaskKind::kLinkPrediction: return true;
    case TaskKind::kExpansion: return a.EdgeCount() > 0;
    case TaskKind::kDenoising: return a.EdgeCount() < pairs;
  }
  return false;
}

template <typename F>
auto Stage(const char* name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::uint64_t SampleSeed(const ExperimentConfig& cfg, std::size_t graph_id, std::size_t s) {
  return DeriveSeed(cfg.seed, {0x5E, graph_id, s});
}

}  // namespace

// --- configuration -----------------------------------------------------------------

ExperimentConfig ExperimentConfig::FromJson(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  RejectUnknown(j,
                {"dataset", "task", "prior", "node2vec", "sage", "graphon", "flow", "evaluation",
                 "checks", "out_dir", "seed"},
                "config");
  ExperimentConfig c;
  Read(j, "seed", c.seed);
  Read(j, "out_dir", c.out_dir);

  const Json d = Section(j, "dataset");
  RejectUnknown(d, {"path", "name", "graphon", "num_graphs", "num_nodes", "train", "val", "test"},
                "dataset");
  Read(d, "path", c.dataset.path);
  Read(d, "name", c.dataset.name);
  Read(d, "graphon", c.dataset.graphon);
  Read(d, "num_graphs", c.dataset.num_graphs);
  Read(d, "num_nodes", c.dataset.num_nodes);
  Read(d, "train", c.dataset.train);
  Read(d, "val", c.dataset.val);
  Read(d, "test", c.dataset.test);

  const Json t = Section(j, "task");
  RejectUnknown(t, {"kind", "rate", "seed"}, "task");
  std::string kind(TaskKindName(c.task.kind));
  Read(t, "kind", kind);
  c.task.kind = ParseTaskKind(kind);
  Read(t, "rate", c.task.rate);

  if (j.contains("prior")) {
    const Json& p = j.at("prior");
    if (p.is_string()) {
      c.prior = p.get<std::string>();
    } else {
      RejectUnknown(p, {"kind", "mask_bank"}, "prior");
      Read(p, "kind", c.prior);
      Read(p, "mask_bank", c.mask_bank);
    }
  }
  const Json n2v = Section(j, "node2vec");
  RejectUnknown(n2v,
                {"walks_per_node", "walk_length", "p", "q", "window", "dim", "negatives", "epochs",
                 "learning_rate", "neg_ratio", "l2"},
                "node2vec");
  Read(n2v, "walks_per_node", c.node2vec.walks_per_node);
  Read(n2v, "walk_length", c.node2vec.walk_length);
  Read(n2v, "p", c.node2vec.p);
  Read(n2v, "q", c.node2vec.q);
  Read(n2v, "window", c.node2vec.sgns.window);
  Read(n2v, "dim", c.node2vec.sgns.dim);
  Read(n2v, "negatives", c.node2vec.sgns.negatives);
  Read(n2v, "epochs", c.node2vec.sgns.epochs);
  Read(n2v, "learning_rate", c.node2vec.sgns.learning_rate);
  Read(n2v, "neg_ratio", c.node2vec.neg_ratio);
  Read(n2v, "l2", c.node2vec.logistic.l2);

  const Json sg = Section(j, "sage");
  RejectUnknown(sg,
                {"depth", "hidden_dim", "embed_dim", "epochs", "learning_rate", "neg_ratio",
                 "masks_per_graph"},
                "sage");
  Read(sg, "depth", c.sage.depth);
  Read(sg, "hidden_dim", c.sage.hidden_dim);
  Read(sg, "embed_dim", c.sage.embed_dim);
  Read(sg, "epochs", c.sage.epochs);
  Read(sg, "learning_rate", c.sage.learning_rate);
  Read(sg, "neg_ratio", c.sage.neg_ratio);
  Read(sg, "masks_per_graph", c.sage_masks_per_graph);

  const Json gr = Section(j, "graphon");
  RejectUnknown(gr, {"resolution"}, "graphon");
  Read(gr, "resolution", c.graphon_resolution);

  const Json f = Section(j, "flow");
  RejectUnknown(f,
                {"sigma_s_train", "sigma_s_sample", "k", "lr", "lr_final_fraction", "batch_size", "epochs",
                 "clamp_observed", "max_steps", "val_draws", "num_layers", "hidden_dim", "c_init",
                 "c_hid", "c_final", "time_dim", "max_nodes", "dropout", "seed"},
                "flow");
  Read(f, "sigma_s_train", c.flow.sigma_s_train);
  Read(f, "sigma_s_sample", c.flow.sigma_s_sample);
  Read(f, "k", c.flow.k);
  Read(f, "lr", c.flow.lr);
  Read(f, "lr_final_fraction", c.flow.lr_final_fraction);
  Read(f, "batch_size", c.flow.batch_size);
  Read(f, "epochs", c.flow.epochs);
  Read(f, "clamp_observed", c.flow.clamp_observed);
  Read(f, "max_steps", c.flow.max_steps);
  Read(f, "val_draws", c.flow.val_draws);
  Read(f, "num_layers", c.flow.net.num_layers);
  Read(f, "hidden_dim", c.flow.net.hidden_dim);
  Read(f, "c_init", c.flow.net.c_init);
  Read(f, "c_hid", c.flow.net.c_hid);
  Read(f, "c_final", c.flow.net.c_final);
  Read(f, "time_dim", c.flow.net.time_dim);
  Read(f, "max_nodes", c.flow.net.max_nodes);
  Read(f, "dropout", c.flow.net.dropout);

  const Json ev = Section(j, "evaluation");
  RejectUnknown(ev, {"samples_per_graph", "threshold", "strict"}, "evaluation");
  Read(ev, "samples_per_graph", c.samples_per_graph);
  Read(ev, "threshold", c.threshold);
  Read(ev, "strict", c.strict);

  const Json ch = Section(j, "checks");
  RejectUnknown(ch, {"min_auc", "min_gain_over_prior"}, "checks");
  if (ch.contains("min_auc")) c.checks.min_auc = ch.at("min_auc").get<double>();
  if (ch.contains("min_gain_over_prior")) {
    c.checks.min_gain_over_prior = ch.at("min_gain_over_prior").get<double>();
  }
  return c;
}

ExperimentConfig ExperimentConfig::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return FromJson(ss.str());
}

std::string ExperimentConfig::ToJson() const {
  Json j;
  j["seed"] = seed;
  j["out_dir"] = out_dir;
  j["dataset"] = {{"path", dataset.path},           {"name", dataset.name},
                  {"graphon", dataset.graphon},     {"num_graphs", dataset.num_graphs},
                  {"num_nodes", dataset.num_nodes}, {"train", dataset.train},
                  {"val", dataset.val},             {"test", dataset.test}};
  j["task"] = {{"kind", std::string(TaskKindName(task.kind))}, {"rate", task.rate},
               {"seed", task.seed}};
  j["prior"] = {{"kind", prior}, {"mask_bank", mask_bank}};
  j["node2vec"] = {{"walks_per_node", node2vec.walks_per_node},
                   {"walk_length", node2vec.walk_length},
                   {"p", node2vec.p},
                   {"q", node2vec.q},
                   {"window", node2vec.sgns.window},
                   {"dim", node2vec.sgns.dim},
                   {"negatives", node2vec.sgns.negatives},
                   {"epochs", node2vec.sgns.epochs},
                   {"learning_rate", node2vec.sgns.learning_rate},
                   {"neg_ratio", node2vec.neg_ratio},
                   {"l2", node2vec.logistic.l2}};
  j["sage"] = {{"depth", sage.depth},
               {"hidden_dim", sage.hidden_dim},
               {"embed_dim", sage.embed_dim},
               {"epochs", sage.epochs},
               {"learning_rate", sage.learning_rate},
               {"neg_ratio", sage.neg_ratio},
               {"masks_per_graph", sage_masks_per_graph}};
  j["graphon"] = {{"resolution", graphon_resolution}};
  j["flow"] = {{"sigma_s_train", flow.sigma_s_train},
               {"sigma_s_sample", flow.sigma_s_sample},
               {"k", flow.k},
               {"lr", flow.lr},
               {"lr_final_fraction", flow.lr_final_fraction},
               {"batch_size", flow.batch_size},
               {"epochs", flow.epochs},
               {"clamp_observed", flow.clamp_observed},
               {"max_steps", flow.max_steps},
               {"val_draws", flow.val_draws},
               {"num_layers", flow.net.num_layers},
               {"hidden_dim", flow.net.hidden_dim},
               {"c_init", flow.net.c_init},
               {"c_hid", flow.net.c_hid},
               {"c_final", flow.net.c_final},
               {"time_dim", flow.net.time_dim},
               {"max_nodes", flow.net.max_nodes},
               {"dropout", flow.net.dropout},
               {"seed", flow.seed}};
  j["evaluation"] = {{"samples_per_graph", samples_per_graph},
                     {"threshold", threshold},
                     {"strict", strict}};
  Json checks_json = Json::object();
  if (checks.min_auc) checks_json["min_auc"] = *checks.min_auc;
  if (checks.min_gain_over_prior) checks_json["min_gain_over_prior"] = *checks.min_gain_over_prior;
  j["checks"] = checks_json;
  return j.dump(2);
}

void ExperimentConfig::Validate() const {
  if (!dataset.path.empty() && !std::filesystem::is_directory(dataset.path)) {
    throw ConfigError("config: dataset.path '" + dataset.path + "' is not a directory");
  }
  if (dataset.path.empty() && (dataset.num_graphs == 0 || dataset.num_nodes < 2)) {
    throw ConfigError("config: synthetic dataset needs num_graphs > 0 and num_nodes >= 2");
  }
  if (!(task.rate > 0.0 && task.rate < 1.0)) throw ConfigError("config: task.rate must lie in (0,1)");
  if (prior != "node2vec" && prior != "sage" && prior != "graphon" && prior != "gaussian") {
    throw ConfigError("config: unknown prior '" + prior + "'");
  }
  if (prior == "node2vec" && task.kind != TaskKind::kLinkPrediction) {
    throw ConfigError("config: the node2vec prior is transductive and needs observed pairs of "
                      "both classes; use sage or graphon for expansion/denoising");
  }
  flow.Validate();
  if (samples_per_graph == 0) throw ConfigError("config: samples_per_graph must be positive");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("config: threshold in (0,1)");
  if (graphon_resolution == 0) throw ConfigError("config: graphon.resolution must be positive");
}

ExperimentConfig ExperimentConfig::Resolved() const {
  ExperimentConfig c = *this;
  c.task.seed = DeriveSeed(seed, {0x7A5});
  c.flow.seed = DeriveSeed(seed, {0xF1});
  if (c.prior == "gaussian") {
    c.flow.sigma_s_train = 1.0;
    c.flow.sigma_s_sample = 1.0;
  }
  return c;
}

// --- pipeline ----------------------------------------------------------------------

std::vector<GraphRecord> LoadDataset(const ExperimentConfig& cfg) {
  if (!cfg.dataset.path.empty()) return ParseTuDataset(cfg.dataset.path, cfg.dataset.name);
  return SampleGraphonDataset(NamedGraphon(cfg.dataset.graphon), cfg.dataset.num_graphs,
                              cfg.dataset.num_nodes, DeriveSeed(cfg.seed, {0xDA7}));
}

DatasetSplit SplitFor(const ExperimentConfig& cfg, std::size_t n_graphs) {
  const DatasetConfig& d = cfg.dataset;
  const std::uint64_t seed = DeriveSeed(cfg.seed, {0x5B});
  if (d.train == 0 && d.val == 0 && d.test == 0) return SplitDataset(n_graphs, seed);
  return SplitDatasetCounts(n_graphs, d.train, d.val, d.test, seed);
}

PriorModel TrainPrior(const ExperimentConfig& cfg, const std::vector<AdjacencyState>& train) {
  if (cfg.prior == "node2vec") return Node2VecPrior{cfg.node2vec, DeriveSeed(cfg.seed, {0x2E})};
  if (cfg.prior == "gaussian") return GaussianPrior{};
  if (train.empty()) throw ConfigError("TrainPrior: empty training split");
  if (cfg.prior == "graphon") return GraphonPrior{EstimateHistogramGraphon(train, cfg.graphon_resolution)};
  std::vector<SageTrainingExample> examples;
  const std::size_t masks = std::max<std::size_t>(1, cfg.sage_masks_per_graph);
  for (std::size_t g = 0; g < train.size(); ++g) {
    for (std::size_t m = 0; m < masks; ++m) {
      Rng rng = MakeRng(cfg.task.seed, {0x5A9, g, m});
      examples.push_back({train[g], MakeTaskInput(train[g], cfg.task, rng)});
    }
  }
  return SagePrior{SageEmbed(examples, cfg.task.kind, cfg.sage, DeriveSeed(cfg.seed, {0x5A})).model};
}

Pipeline PreparePipeline(const ExperimentConfig& config, const PretrainedModels& pretrained) {
  Pipeline p;
  p.config = config.Resolved();
  p.config.Validate();
  const ExperimentConfig& cfg = p.config;
  p.dataset = Stage("ingest", [&] { return LoadDataset(cfg); });
  p.split = Stage("split", [&] { return SplitFor(cfg, p.dataset.size()); });

  auto collect = [&](const std::vector<std::size_t>& ids, std::vector<std::size_t>* kept) {
    std::vector<AdjacencyState> out;
    for (std::size_t id : ids) {
      if (!TaskApplicable(p.dataset[id].adjacency, cfg.task.kind)) continue;
      out.push_back(p.dataset[id].adjacency);
      if (kept) kept->push_back(id);
    }
    return out;
  };
  const auto train = collect(p.split.train_ids, nullptr);
  const auto val = collect(p.split.val_ids, nullptr);
  p.truths = collect(p.split.test_ids, &p.test_ids);
  p.skipped_graphs = p.split.test_ids.size() - p.test_ids.size();

  p.prior = pretrained.prior ? pretrained.prior : Stage("train-prior", [&] {
    return std::make_shared<const PriorModel>(TrainPrior(cfg, train));
  });
  if (std::string(PriorName(*p.prior)) != cfg.prior) {
    throw StageError("train-prior", "checkpoint holds a " + std::string(PriorName(*p.prior)) +
                                        " prior but the config asks for " + cfg.prior);
  }
  if (pretrained.net) {
    p.flow.net = *pretrained.net;
  } else {
    p.flow = Stage("train-flow", [&] {
      TaskSpec train_task = cfg.task;
      train_task.seed = DeriveSeed(cfg.task.seed, {1});
      TaskSpec val_task = cfg.task;
      val_task.seed = DeriveSeed(cfg.task.seed, {2});
      const ExampleSampler train_sampler = MakeTaskSampler(train, p.prior, train_task, cfg.mask_bank);
      ExampleSampler val_sampler;
      if (!val.empty()) val_sampler = MakeTaskSampler(val, p.prior, val_task, cfg.mask_bank);
      return TrainFlow(train.size(), train_sampler, val.size(), val_sampler, cfg.task.kind,
                       cfg.flow);
    });
  }
  Stage("observe", [&] {
    p.inputs.resize(p.truths.size());
    p.prior_probs.resize(p.truths.size());
    ParallelFor(p.truths.size(), [&](std::size_t g) {
      Rng rng = MakeRng(cfg.task.seed, {0x7E5, p.test_ids[g]});
      p.inputs[g] = MakeTaskInput(p.truths[g], cfg.task, rng);
      p.prior_probs[g] = PriorPredict(*p.prior, p.inputs[g].observed, p.inputs[g].mask);
    });
    return 0;
  });
  return p;
}

Reconstruction Reconstruct(const Pipeline& p, std::size_t k, double sigma_s,
                           std::size_t samples_per_graph) {
  return Stage("reconstruct", [&] {
    if (samples_per_graph == 0) throw ConfigError("samples_per_graph must be positive");
    Reconstruction r;
    r.k = k;
    r.sigma_s = sigma_s;
    r.samples_per_graph = samples_per_graph;
    const std::size_t g_count = p.truths.size();
    r.samples.assign(g_count, std::vector<AdjacencyState>(samples_per_graph));
    SampleOptions opts;
    opts.clamp_observed = p.config.flow.clamp_observed;
    ParallelFor(g_count * samples_per_graph, [&](std::size_t idx) {
      const std::size_t g = idx / samples_per_graph, s = idx % samples_per_graph;
      r.samples[g][s] = EulerSample(p.flow.net, p.inputs[g].observed, p.inputs[g].mask,
                                    p.prior_probs[g], p.config.task.kind, k, sigma_s,
                                    SampleSeed(p.config, p.test_ids[g], s), opts)
                            .final_state;
    });
    if (g_count == 0) return r;
    std::vector<AdjacencyState> preds, truths;
    std::vector<ObservationMask> masks;
    for (std::size_t g = 0; g < g_count; ++g)
      for (std::size_t s = 0; s < samples_per_graph; ++s) {
        preds.push_back(r.samples[g][s]);
        truths.push_back(p.truths[g]);
        masks.push_back(p.inputs[g].mask);
      }
    EvaluationOptions eo;
    eo.threshold = p.config.threshold;
    eo.mmd_reference = &p.truths;
    r.report = Evaluate(preds, truths, masks, eo);
    return r;
  });
}

ExperimentResult RunExperiment(const ExperimentConfig& config,
                               const PretrainedModels& pretrained) {
  ExperimentResult result;
  result.pipeline = PreparePipeline(config, pretrained);
  const Pipeline& p = result.pipeline;
  if (!p.truths.empty()) {
    std::vector<ObservationMask> masks;
    for (const auto& in : p.inputs) masks.push_back(in.mask);
    EvaluationOptions eo;
    eo.threshold = p.config.threshold;
    result.prior_report =
        Stage("evaluate", [&] { return Evaluate(p.prior_probs, p.truths, masks, eo); });
  }
  result.reconstruction =
      Reconstruct(p, p.config.flow.k, p.config.flow.sigma_s_sample, p.config.samples_per_graph);
  return result;
}

std::string ExperimentResult::MetricsJson() const {
  const Pipeline& p = pipeline;
  Json j;
  j["config"] = Json::parse(p.config.ToJson());
  j["prior"] = {{"kind", std::string(PriorName(*p.prior))}, {"report", ReportJson(prior_report)}};
  j["flow"] = {{"k", reconstruction.k},
               {"sigma_s", reconstruction.sigma_s},
               {"samples_per_graph", reconstruction.samples_per_graph},
               {"report", ReportJson(reconstruction.report)}};
  Json train_loss = Json::array(), val_loss = Json::array();
  for (double v : p.flow.train_loss) train_loss.push_back(NumberOrNull(v));
  for (double v : p.flow.val_loss) val_loss.push_back(NumberOrNull(v));
  j["training"] = {{"steps", p.flow.steps},
                   {"best_epoch", p.flow.best_epoch},
                   {"train_loss", train_loss},
                   {"val_loss", val_loss}};
  j["data"] = {{"graphs", p.dataset.size()},
               {"train", p.split.train_ids.size()},
               {"val", p.split.val_ids.size()},
               {"test", p.split.test_ids.size()},
               {"test_evaluated", p.test_ids.size()},
               {"test_skipped", p.skipped_graphs}};
  return j.dump(2) + "\n";
}

SweepResult RunSweep(const ExperimentConfig& config, const SweepSpec& sweep) {
  if (sweep.ks.empty()) throw ConfigError("sweep: K list is empty");
  for (std::size_t k : sweep.ks)
    if (k == 0) throw ConfigError("sweep: K values must be positive");
  SweepResult out;
  auto run_grid = [&](const Pipeline& p, const std::vector<double>& sigmas) {
    for (double sigma : sigmas)
      for (std::size_t k : sweep.ks) {
        Reconstruction r = Reconstruct(p, k, sigma, sweep.samples_per_graph);
        out.rows.push_back({k, sigma, std::move(r.report)});
      }
  };
  if (!sweep.retrain_per_sigma) {
    const Pipeline p = PreparePipeline(config);
    run_grid(p, sweep.sigmas.empty() ? std::vector<double>{p.config.flow.sigma_s_sample}
                                     : sweep.sigmas);
    return out;
  }
  if (sweep.sigmas.empty()) throw ConfigError("sweep: retrain_per_sigma needs a sigma list");
  for (double sigma : sweep.sigmas) {
    ExperimentConfig c = config;
    c.flow.sigma_s_train = sigma;
    c.flow.sigma_s_sample = sigma;
    run_grid(PreparePipeline(c), {sigma});
  }
  return out;
}

std::string SweepResult::ToCsv() const {
  std::ostringstream os;
  os << "k,sigma_s,auc,ap,fpr,fnr,mse,mmd2_degree,mmd2_clustering,mmd2_triangles\n";
  auto mmd = [](const std::optional<MmdResult>& m) {
    return m ? FormatNumber(m->value) : std::string("nan");
  };
  for (const SweepRow& r : rows) {
    os << r.k << ',' << FormatNumber(r.sigma_s) << ',' << FormatNumber(r.report.auc) << ','
       << FormatNumber(r.report.ap) << ',' << FormatNumber(r.report.fpr) << ','
       << FormatNumber(r.report.fnr) << ',' << FormatNumber(r.report.mse) << ','
       << mmd(r.report.mmd2_degree) << ',' << mmd(r.report.mmd2_clustering) << ','
       << mmd(r.report.mmd2_triangles) << '\n';
  }
  return os.str();
}

// --- toy ---------------------------------------------------------------------------------

ToyConfig ToyConfig::Default() {
  ToyConfig c;
  c.flow.sigma_s_train = 0.1;
  c.flow.sigma_s_sample = 0.1;
  c.flow.k = 100;
  c.flow.lr = 1e-3;
  c.flow.lr_final_fraction = 0.05;
  c.flow.batch_size = 64;
  c.flow.epochs = 200;
  c.flow.net.dropout = 0.0;
  return c;
}

std::string ToyReport::ToJson() const {
  Json j{{"prior", {{"e02", prior_02}, {"e13", prior_13}}},
         {"draws", draws},
         {"flow", {{"mode_11", flow_11}, {"mode_00", flow_00}, {"invalid", flow_invalid}}},
         {"baseline",
          {{"mode_11", baseline_11}, {"mode_00", baseline_00}, {"invalid", baseline_invalid}}},
         {"training", {{"steps", steps}, {"final_loss", final_train_loss}}}};
  return j.dump(2) + "\n";
}

ToyReport RunToy(const ToyConfig& config) {
  constexpr std::size_t kN = 4;
  const AdjacencyState cycle = AdjacencyState::FromEdges(kN, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  ObservationMask xi = ObservationMask::AllObserved(kN);
  xi.SetPair(0, 2, false);
  xi.SetPair(1, 3, false);
  const AdjacencyState full = AdjacencyState::FromEdges(
      kN, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}, {1, 3}});

  if (config.train_samples == 0 || config.draws == 0) {
    throw ConfigError("toy: train_samples and draws must be positive");
  }
  Rng rng = MakeRng(config.seed, {0x70});
  std::vector<bool> both(config.train_samples);
  for (std::size_t i = 0; i < both.size(); ++i) both[i] = Uniform01(rng) < config.mode_probability;

  // node2vec prior: embeddings of the observed cycle; one logistic classifier
  // over the hidden pairs of all training samples.
  ToyReport report;
  AdjacencyState prior_probs = cycle;
  Stage("toy-prior", [&] {
    Rng prior_rng = MakeRng(config.seed, {0x71});
    const Node2VecParams& p = config.node2vec;
    const auto walks = RandomWalks(cycle, p.walks_per_node, p.walk_length, p.p, p.q, prior_rng);
    const NodeEmbeddings emb = TrainSgns(walks, kN, p.sgns, prior_rng);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<double> labels;
    for (bool b : both) {
      pairs.insert(pairs.end(), {{0, 2}, {1, 3}});
      labels.insert(labels.end(), {b ? 1.0 : 0.0, b ? 1.0 : 0.0});
    }
    LogisticFitOptions opts = p.logistic;
    opts.class_balanced = false;
    opts.l2 = 1e-6;
    const EdgeLogisticModel clf = FitLogistic(HadamardFeatures(emb, pairs), labels, opts);
    const Matrix f = HadamardFeatures(emb, {{0, 2}, {1, 3}});
    report.prior_02 = clf.Probability(std::span<const double>(f.raw(), f.cols()));
    report.prior_13 = clf.Probability(std::span<const double>(f.raw() + f.cols(), f.cols()));
    prior_probs.SetPair(0, 2, report.prior_02);
    prior_probs.SetPair(1, 3, report.prior_13);
    return 0;
  });

  const ExampleSampler sampler = [&](std::size_t i, Rng&) {
    return FlowExample{both[i] ? full : cycle, cycle, xi, prior_probs};
  };
  const FlowTrainResult trained = Stage("toy-flow", [&] {
    return TrainFlow(both.size(), sampler, 0, {}, TaskKind::kLinkPrediction, config.flow);
  });
  report.steps = trained.steps;
  report.final_train_loss = trained.train_loss.empty() ? 0.0 : trained.train_loss.back();

  enum Mode { k11, k00, kInvalid };
  auto classify = [](bool e02, bool e13) { return e02 && e13 ? k11 : (!e02 && !e13 ? k00 : kInvalid); };
  std::vector<int> flow_modes(config.draws);
  ParallelFor(config.draws, [&](std::size_t d) {
    const FlowSample s = EulerSample(trained.net, cycle, xi, prior_probs,
                                     TaskKind::kLinkPrediction, config.k,
                                     config.flow.sigma_s_sample,
                                     DeriveSeed(config.seed, {0x72, d}));
    const AdjacencyState b = Threshold(s.final_state, 0.5);
    flow_modes[d] = classify(b(0, 2) == 1.0, b(1, 3) == 1.0);
  });
  Rng base_rng = MakeRng(config.seed, {0x73});
  std::vector<int> base_modes(config.draws);
  for (std::size_t d = 0; d < config.draws; ++d) {
    const bool e02 = Uniform01(base_rng) < report.prior_02;
    const bool e13 = Uniform01(base_rng) < report.prior_13;
    base_modes[d] = classify(e02, e13);
  }
  const double inv = 1.0 / static_cast<double>(config.draws);
  auto frac = [&](const std::vector<int>& modes, int m) {
    return static_cast<double>(std::count(modes.begin(), modes.end(), m)) * inv;
  };
  report.draws = config.draws;
  report.flow_11 = frac(flow_modes, k11);
  report.flow_00 = frac(flow_modes, k00);
  report.flow_invalid = frac(flow_modes, kInvalid);
  report.baseline_11 = frac(base_modes, k11);
  report.baseline_00 = frac(base_modes, k00);
  report.baseline_invalid = frac(base_modes, kInvalid);
  return report;
}

// --- artifacts -----------------------------------------------------------------------------

std::string MatrixCsv(const Matrix& m) {
  std::string out;
  char buf[32];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
      if (c > 0) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

int EmitReport(const ExperimentResult& result, const std::filesystem::path& out_dir,
               const EmitOptions& options) {
  namespace fs = std::filesystem;
  if (fs::exists(out_dir) && !options.force) {
    throw IoError("output directory " + out_dir.string() + " exists; pass --force to overwrite");
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  const Pipeline& p = result.pipeline;
  const Reconstruction& rec = result.reconstruction;
  const ExperimentConfig& cfg = p.config;
  WriteFile(out_dir / "metrics.json", result.MetricsJson());

  Json manifest;
  manifest["config"] = Json::parse(cfg.ToJson());
  Json entries = Json::array();
  if (options.write_predictions && !p.truths.empty()) {
    fs::create_directories(out_dir / "predictions", ec);
    if (ec) throw IoError("cannot create predictions directory: " + ec.message());
  }
  for (std::size_t g = 0; g < rec.samples.size(); ++g) {
    const std::size_t id = p.test_ids[g];
    const std::string stem = "graph_" + std::to_string(id);
    if (options.write_predictions) {
      WriteFile(out_dir / "predictions" / (stem + "_prior.csv"), MatrixCsv(p.prior_probs[g].values()));
    }
    for (std::size_t s = 0; s < rec.samples[g].size(); ++s) {
      const std::string file = stem + "_k" + std::to_string(rec.k) + "_s" + std::to_string(s) + ".csv";
      if (options.write_predictions) {
        WriteFile(out_dir / "predictions" / file, MatrixCsv(rec.samples[g][s].values()));
      }
      entries.push_back({{"graph_id", p.dataset[id].graph_id},
                         {"dataset_index", id},
                         {"task", std::string(TaskKindName(cfg.task.kind))},
                         {"k", rec.k},
                         {"sigma_s", rec.sigma_s},
                         {"seed", SampleSeed(cfg, id, s)},
                         {"file", "predictions/" + file},
                         {"prior_file", "predictions/" + stem + "_prior.csv"}});
    }
  }
  manifest["reconstructions"] = entries;
  WriteFile(out_dir / "manifest.json", manifest.dump(2) + "\n");

  const MetricsReport& fr = rec.report;
  const MetricsReport& pr = result.prior_report;
  std::vector<std::string> nan_fields;
  for (auto [name, v] : {std::pair{"auc", fr.auc}, {"ap", fr.ap}, {"fpr", fr.fpr},
                         {"fnr", fr.fnr}, {"mse", fr.mse}}) {
    if (std::isnan(v)) nan_fields.push_back(name);
  }
  std::vector<std::string> failed;
  if (cfg.checks.min_auc && !(fr.auc >= *cfg.checks.min_auc)) failed.push_back("min_auc");
  if (cfg.checks.min_gain_over_prior && !(fr.auc - pr.auc >= *cfg.checks.min_gain_over_prior)) {
    failed.push_back("min_gain_over_prior");
  }

  std::ostringstream sum;
  sum << "task        " << TaskKindName(cfg.task.kind) << " (rate " << FormatNumber(cfg.task.rate)
      << ")\n"
      << "prior       " << cfg.prior << "\n"
      << "K / sigma   " << rec.k << " / " << FormatNumber(rec.sigma_s) << "\n"
      << "test graphs " << p.truths.size() << " (skipped " << p.skipped_graphs << ")\n\n"
      << "            auc        ap         fpr        fnr        mse\n";
  auto row = [&](const char* label, const MetricsReport& r) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-11s %-10.4f %-10.4f %-10.4f %-10.4f %-10.6f\n", label,
                  r.auc, r.ap, r.fpr, r.fnr, r.mse);
    sum << buf;
  };
  if (!p.truths.empty()) {
    row("prior", pr);
    row("flow", fr);
    if (fr.mmd2_degree) {
      sum << "\nmmd2 degree " << FormatNumber(fr.mmd2_degree->value) << "  clustering "
          << FormatNumber(fr.mmd2_clustering->value) << "  triangles "
          << FormatNumber(fr.mmd2_triangles->value) << "\n";
    }
  }
  if (!nan_fields.empty()) {
    sum << "\n[NaN metrics]";
    for (const auto& f : nan_fields) sum << ' ' << f;
    sum << "\n";
  }
  if (!failed.empty()) {
    sum << "\n[failed checks]";
    for (const auto& f : failed) sum << ' ' << f;
    sum << "\n";
  }
  WriteFile(out_dir / "summary.txt", sum.str());
  if (!failed.empty()) return 2;
  if (cfg.strict && !nan_fields.empty() && !p.truths.empty()) return 3;
  return 0;
}

}  // namespace pifm
