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

#include "pifm/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <utility>

#include "pifm/error.h"

namespace pifm {
namespace {

namespace fs = std::filesystem;

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

long ParseIndex(std::string_view token, const std::string& file, long line) {
  token = Trim(token);
  long value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(file, line, "expected an integer, got '" + std::string(token) + "'");
  }
  return value;
}

std::string InferName(const fs::path& root) {
  static constexpr std::string_view kSuffix = "_graph_indicator.txt";
  if (!fs::is_directory(root)) {
    throw ParseError(root.string(), 0, "not a directory");
  }
  for (const auto& entry : fs::directory_iterator(root)) {
    std::string f = entry.path().filename().string();
    if (f.size() > kSuffix.size() && f.ends_with(kSuffix)) {
      return f.substr(0, f.size() - kSuffix.size());
    }
  }
  throw ParseError(root.string(), 0, "no *_graph_indicator.txt file found");
}

}  // namespace

std::vector<GraphRecord> ParseTuDataset(const fs::path& root, std::string_view name) {
  const std::string ds = name.empty() ? InferName(root) : std::string(name);
  const fs::path indicator_path = root / (ds + "_graph_indicator.txt");
  const fs::path edges_path = root / (ds + "_A.txt");

  std::ifstream indicator(indicator_path);
  if (!indicator) throw ParseError(indicator_path.string(), 0, "cannot open file");
  std::ifstream edges(edges_path);
  if (!edges) throw ParseError(edges_path.string(), 0, "cannot open file");

  // Global node k (1-indexed) -> graph id, and local index within its graph.
  std::vector<long> node_graph;
  std::vector<std::size_t> node_local;
  std::map<long, std::size_t> graph_size;
  std::string line;
  long line_no = 0;
  while (std::getline(indicator, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    long gid = ParseIndex(line, indicator_path.string(), line_no);
    node_graph.push_back(gid);
    node_local.push_back(graph_size[gid]++);
  }

  std::map<long, std::vector<std::pair<std::size_t, std::size_t>>> graph_edges;
  line_no = 0;
  const long num_nodes = static_cast<long>(node_graph.size());
  while (std::getline(edges, line)) {
    ++line_no;
    std::string_view view = Trim(line);
    if (view.empty()) continue;
    auto comma = view.find(',');
    if (comma == std::string_view::npos) {
      throw ParseError(edges_path.string(), line_no, "expected 'i, j'");
    }
    long u = ParseIndex(view.substr(0, comma), edges_path.string(), line_no);
    long v = ParseIndex(view.substr(comma + 1), edges_path.string(), line_no);
    if (u < 1 || v < 1 || u > num_nodes || v > num_nodes) {
      throw ParseError(edges_path.string(), line_no,
                       "node id outside 1.." + std::to_string(num_nodes));
    }
    long gu = node_graph[u - 1];
    long gv = node_graph[v - 1];
    if (gu != gv) {
      throw ParseError(edges_path.string(), line_no,
                       "edge joins nodes of graphs " + std::to_string(gu) + " and " +
                           std::to_string(gv));
    }
    if (u == v) continue;  // self-loops are not modelled
    graph_edges[gu].emplace_back(node_local[u - 1], node_local[v - 1]);
  }

  std::vector<GraphRecord> graphs;
  graphs.reserve(graph_size.size());
  for (const auto& [gid, n] : graph_size) {
    GraphRecord g;
    g.graph_id = static_cast<int>(gid);
    g.adjacency = AdjacencyState::FromEdges(n, graph_edges[gid]);
    graphs.push_back(std::move(g));
  }
  return graphs;
}

void WriteTuDataset(const fs::path& root, std::string_view name,
                    const std::vector<GraphRecord>& graphs) {
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create " + root.string() + ": " + ec.message());
  const std::string ds(name);
  std::ofstream edges(root / (ds + "_A.txt"));
  std::ofstream indicator(root / (ds + "_graph_indicator.txt"));
  if (!edges || !indicator) throw IoError("cannot write TU files under " + root.string());

  std::size_t offset = 0;
  for (std::size_t g = 0; g < graphs.size(); ++g) {
    const AdjacencyState& a = graphs[g].adjacency;
    for (std::size_t i = 0; i < a.n(); ++i) indicator << (g + 1) << '\n';
    for (std::size_t i = 0; i < a.n(); ++i)
      for (std::size_t j = 0; j < a.n(); ++j)
        if (a(i, j) == 1.0) edges << (offset + i + 1) << ", " << (offset + j + 1) << '\n';
    offset += a.n();
  }
  if (!edges || !indicator) throw IoError("write failed under " + root.string());
}

// --- splitting --------------------------------------------------------------

namespace {

std::vector<std::size_t> ShuffledIds(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  Rng rng = MakeRng(seed, {0x5B1u});
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
    std::swap(ids[i - 1], ids[j]);
  }
  return ids;
}

}  // namespace

DatasetSplit SplitDataset(std::size_t n_graphs, std::uint64_t seed) {
  if (n_graphs < 20) {
    throw ConfigError("SplitDataset: need at least 20 graphs, got " +
                      std::to_string(n_graphs));
  }
  const std::size_t n_train = n_graphs * 85 / 100;
  const std::size_t n_val = n_graphs * 10 / 100;
  return SplitDatasetCounts(n_graphs, n_train, n_val, n_graphs - n_train - n_val, seed);
}

DatasetSplit SplitDatasetCounts(std::size_t n_graphs, std::size_t n_train,
                                std::size_t n_val, std::size_t n_test,
                                std::uint64_t seed) {
  if (n_train + n_val + n_test > n_graphs || n_train == 0 || n_test == 0) {
    throw ConfigError("SplitDatasetCounts: cannot take " + std::to_string(n_train) +
                      "/" + std::to_string(n_val) + "/" + std::to_string(n_test) +
                      " from " + std::to_string(n_graphs) + " graphs");
  }
  auto ids = ShuffledIds(n_graphs, seed);
  DatasetSplit s;
  s.train_ids.assign(ids.begin(), ids.begin() + n_train);
  s.val_ids.assign(ids.begin() + n_train, ids.begin() + n_train + n_val);
  s.test_ids.assign(ids.begin() + n_train + n_val,
                    ids.begin() + n_train + n_val + n_test);
  return s;
}

// --- tasks ------------------------------------------------------------------

std::string_view TaskKindName(TaskKind kind) {
  switch (kind) {
    case TaskKind::kLinkPrediction: return "linkpred";
    case TaskKind::kExpansion: return "expansion";
    case TaskKind::kDenoising: return "denoise";
  }
  return "?";
}

TaskKind ParseTaskKind(std::string_view name) {
  if (name == "linkpred" || name == "link_prediction") return TaskKind::kLinkPrediction;
  if (name == "expansion") return TaskKind::kExpansion;
  if (name == "denoise" || name == "denoising") return TaskKind::kDenoising;
  throw ConfigError("unknown task '" + std::string(name) + "'");
}

std::size_t RateCount(double rate, std::size_t count) {
  return static_cast<std::size_t>(std::ceil(rate * static_cast<double>(count) - 1e-9));
}

namespace {

// Uniformly chooses k items out of `items` (partial Fisher-Yates).
template <typename T>
std::vector<T> ChooseK(std::vector<T> items, std::size_t k, Rng& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = std::uniform_int_distribution<std::size_t>(i, items.size() - 1)(rng);
    std::swap(items[i], items[j]);
  }
  items.resize(k);
  return items;
}

using Pair = std::pair<std::size_t, std::size_t>;

std::vector<Pair> UpperPairs(const AdjacencyState& a, int which) {
  // which: -1 all pairs, 0 zero entries, 1 edges.
  std::vector<Pair> out;
  for (std::size_t i = 0; i < a.n(); ++i)
    for (std::size_t j = i + 1; j < a.n(); ++j)
      if (which < 0 || a(i, j) == static_cast<double>(which)) out.emplace_back(i, j);
  return out;
}

}  // namespace

TaskInput MakeTaskInput(const AdjacencyState& a, const TaskSpec& task, Rng& rng) {
  if (!(task.rate > 0.0 && task.rate < 1.0)) {
    throw ConfigError("MakeTaskInput: rate must lie in (0,1), got " +
                      std::to_string(task.rate));
  }
  if (!a.is_binary()) throw ConfigError("MakeTaskInput: graph must be binary");
  const std::size_t n = a.n();
  if (n < 2) throw ConfigError("MakeTaskInput: need at least two nodes");

  TaskInput in;
  switch (task.kind) {
    case TaskKind::kLinkPrediction: {
      auto pairs = UpperPairs(a, -1);
      auto hidden = ChooseK(pairs, RateCount(task.rate, pairs.size()), rng);
      in.mask = ObservationMask::AllObserved(n);
      for (auto [i, j] : hidden) in.mask.SetPair(i, j, false);
      in.observed = a;
      for (auto [i, j] : hidden) in.observed.SetPair(i, j, 0.0);
      break;
    }
    case TaskKind::kExpansion: {
      auto edges = UpperPairs(a, 1);
      if (edges.empty()) throw ConfigError("MakeTaskInput: expansion on an edgeless graph");
      auto dropped = ChooseK(edges, RateCount(task.rate, edges.size()), rng);
      in.observed = a;
      for (auto [i, j] : dropped) in.observed.SetPair(i, j, 0.0);
      Matrix xi = in.observed.values();
      for (std::size_t i = 0; i < n; ++i) xi(i, i) = 1.0;
      in.mask = ObservationMask::FromMatrix(std::move(xi));
      break;
    }
    case TaskKind::kDenoising: {
      auto zeros = UpperPairs(a, 0);
      if (zeros.empty()) throw ConfigError("MakeTaskInput: denoising on a complete graph");
      auto flipped = ChooseK(zeros, RateCount(task.rate, zeros.size()), rng);
      in.observed = a;
      for (auto [i, j] : flipped) in.observed.SetPair(i, j, 1.0);
      Matrix xi(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          xi(i, j) = (i == j || in.observed(i, j) == 0.0) ? 1.0 : 0.0;
      in.mask = ObservationMask::FromMatrix(std::move(xi));
      break;
    }
  }
  return in;
}

// --- graphons ---------------------------------------------------------------

GraphonGrid::GraphonGrid(Matrix values) : values_(std::move(values)) {
  if (!values_.is_square() || values_.rows() == 0) {
    throw DimensionError("GraphonGrid: grid must be square and nonempty");
  }
  for (std::size_t i = 0; i < values_.rows(); ++i) {
    for (std::size_t j = 0; j < values_.cols(); ++j) {
      double v = values_(i, j);
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("GraphonGrid: entry outside [0,1]");
      if (v != values_(j, i)) throw ConfigError("GraphonGrid: grid not symmetric");
    }
  }
}

GraphonGrid GraphonGrid::Constant(std::size_t resolution, double value) {
  return GraphonGrid(Matrix(resolution, resolution, value));
}

GraphonGrid GraphonGrid::FromFunction(std::size_t resolution,
                                      const std::function<double(double, double)>& w) {
  Matrix m(resolution, resolution);
  for (std::size_t a = 0; a < resolution; ++a) {
    for (std::size_t b = a; b < resolution; ++b) {
      double x = (a + 0.5) / resolution;
      double y = (b + 0.5) / resolution;
      double v = std::clamp(0.5 * (w(x, y) + w(y, x)), 0.0, 1.0);
      m(a, b) = v;
      m(b, a) = v;
    }
  }
  return GraphonGrid(std::move(m));
}

std::size_t GraphonGrid::Cell(double z) const {
  const std::size_t r = resolution();
  if (!(z > 0.0)) return 0;
  return std::min(r - 1, static_cast<std::size_t>(z * static_cast<double>(r)));
}

std::string GraphonGrid::ToCsv() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t a = 0; a < resolution(); ++a) {
    for (std::size_t b = 0; b < resolution(); ++b) {
      if (b) os << ',';
      os << values_(a, b);
    }
    os << '\n';
  }
  return os.str();
}

GraphRecord SampleGraphonGraph(const GraphonGrid& w, std::size_t n, Rng& rng,
                               int graph_id) {
  if (n < 2) throw ConfigError("SampleGraphonGraph: need n >= 2");
  std::vector<double> z(n);
  for (double& zi : z) zi = Uniform01(rng);
  GraphRecord g;
  g.graph_id = graph_id;
  g.adjacency = AdjacencyState(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (Uniform01(rng) < w(z[i], z[j])) g.adjacency.SetPair(i, j, 1.0);
  return g;
}

GraphonGrid NamedGraphon(std::string_view name, std::size_t resolution) {
  if (name == "product") {
    return GraphonGrid::FromFunction(resolution, [](double x, double y) { return x * y; });
  }
  if (name == "constant") return GraphonGrid::Constant(resolution, 0.5);
  if (name == "two_block") {
    return GraphonGrid::FromFunction(resolution, [](double x, double y) {
      return (x < 0.5) == (y < 0.5) ? 0.7 : 0.1;
    });
  }
  if (name == "dc_sbm") {
    // Node propensity rises linearly inside each block, so degree reveals the
    // propensity but not the block.
    return GraphonGrid::FromFunction(resolution, [](double x, double y) {
      auto propensity = [](double u) {
        double local = u < 0.5 ? 2.0 * u : 2.0 * u - 1.0;
        return 0.6 + 0.8 * local;
      };
      double block = (x < 0.5) == (y < 0.5) ? 0.6 : 0.08;
      return block * propensity(x) * propensity(y);
    });
  }
  throw ConfigError("unknown graphon '" + std::string(name) + "'");
}

std::vector<GraphRecord> SampleGraphonDataset(const GraphonGrid& w,
                                              std::size_t num_graphs,
                                              std::size_t num_nodes,
                                              std::uint64_t seed) {
  std::vector<GraphRecord> graphs;
  graphs.reserve(num_graphs);
  for (std::size_t g = 0; g < num_graphs; ++g) {
    Rng rng = MakeRng(seed, {0x6A7u, g});
    graphs.push_back(SampleGraphonGraph(w, num_nodes, rng, static_cast<int>(g + 1)));
  }
  return graphs;
}

}  // namespace pifm
