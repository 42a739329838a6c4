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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "pifm/error.h"
#include "test_util.h"

namespace pifm {
namespace {

namespace fs = std::filesystem;

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pifm_data_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string Slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<GraphRecord> RandomDataset(std::size_t count, Rng& rng) {
  std::vector<GraphRecord> graphs;
  for (std::size_t g = 0; g < count; ++g) {
    GraphRecord r;
    r.adjacency = testing::RandomGraph(testing::UniformIndex(2, 15, rng), 0.3, rng);
    r.graph_id = static_cast<int>(g + 1);
    graphs.push_back(std::move(r));
  }
  return graphs;
}

TEST(TuDataset, RoundTripIsBitwise) {
  Rng rng(21);
  const auto graphs = RandomDataset(40, rng);
  const fs::path a = TempDir("rt_a"), b = TempDir("rt_b");
  WriteTuDataset(a, "SYN", graphs);
  const auto parsed = ParseTuDataset(a);
  ASSERT_EQ(parsed.size(), graphs.size());
  for (std::size_t g = 0; g < graphs.size(); ++g) {
    EXPECT_EQ(parsed[g].adjacency, graphs[g].adjacency) << "graph " << g;
  }
  WriteTuDataset(b, "SYN", parsed);
  for (const char* f : {"SYN_A.txt", "SYN_graph_indicator.txt"}) {
    EXPECT_EQ(Slurp(a / f), Slurp(b / f)) << f;
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(TuDataset, SyntheticGraphonDatasetRoundTrips) {
  const auto graphs = SampleGraphonDataset(NamedGraphon("two_block"), 25, 20, 4);
  const fs::path dir = TempDir("graphon");
  WriteTuDataset(dir, "TB", graphs);
  const auto parsed = ParseTuDataset(dir, "TB");
  ASSERT_EQ(parsed.size(), graphs.size());
  for (std::size_t g = 0; g < graphs.size(); ++g) EXPECT_EQ(parsed[g].adjacency, graphs[g].adjacency);
  fs::remove_all(dir);
}

TEST(TuDataset, ParsesHandWrittenFilesAndReportsErrors) {
  const fs::path dir = TempDir("hand");
  fs::create_directories(dir);
  std::ofstream(dir / "T_graph_indicator.txt") << "1\n1\n1\n2\n2\n";
  std::ofstream(dir / "T_A.txt") << "1, 2\n2, 1\n2, 3\n3, 2\n4, 5\n5, 4\n";
  const auto graphs = ParseTuDataset(dir);
  ASSERT_EQ(graphs.size(), 2u);
  EXPECT_EQ(graphs[0].adjacency, AdjacencyState::FromEdges(3, {{0, 1}, {1, 2}}));
  EXPECT_EQ(graphs[1].adjacency, AdjacencyState::FromEdges(2, {{0, 1}}));

  std::ofstream(dir / "T_A.txt") << "1, 2\nnot an edge\n";
  try {
    ParseTuDataset(dir);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("T_A.txt"), std::string::npos);
  }
  std::ofstream(dir / "T_A.txt") << "1, 4\n";  // crosses graphs
  EXPECT_THROW(ParseTuDataset(dir), ParseError);
  EXPECT_THROW(ParseTuDataset(dir / "missing"), ParseError);
  fs::remove_all(dir);
}

TEST(Split, RatioSplitCountsAndDisjointness) {
  const DatasetSplit s = SplitDataset(600, 9);
  EXPECT_EQ(s.train_ids.size(), 510u);
  EXPECT_EQ(s.val_ids.size(), 60u);
  EXPECT_EQ(s.test_ids.size(), 30u);
  std::set<std::size_t> all;
  for (const auto* ids : {&s.train_ids, &s.val_ids, &s.test_ids}) all.insert(ids->begin(), ids->end());
  EXPECT_EQ(all.size(), 600u);
  EXPECT_EQ(*all.rbegin(), 599u);
  const DatasetSplit again = SplitDataset(600, 9);
  EXPECT_EQ(again.test_ids, s.test_ids);
  EXPECT_NE(SplitDataset(600, 10).test_ids, s.test_ids);
  EXPECT_THROW(SplitDataset(19, 0), ConfigError);
}

TEST(Split, ExplicitCounts) {
  const DatasetSplit s = SplitDatasetCounts(260, 200, 30, 30, 1);
  EXPECT_EQ(s.train_ids.size(), 200u);
  EXPECT_EQ(s.val_ids.size(), 30u);
  EXPECT_EQ(s.test_ids.size(), 30u);
  EXPECT_THROW(SplitDatasetCounts(100, 80, 20, 10, 1), ConfigError);
}

TEST(RateCount, CeilingWithoutFloatingNoise) {
  EXPECT_EQ(RateCount(0.5, 45), 23u);
  EXPECT_EQ(RateCount(0.1, 30), 3u);  // 0.1 * 30 = 3.0000000000000004
  EXPECT_EQ(RateCount(0.7, 10), 7u);
  EXPECT_EQ(RateCount(0.01, 1), 1u);
}

TEST(TaskInput, LinkPredictionHidesExactCount) {
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = testing::UniformIndex(3, 20, rng);
    const AdjacencyState a = testing::RandomGraph(n, 0.3, rng);
    const TaskInput in = MakeTaskInput(a, {TaskKind::kLinkPrediction, 0.5, 0}, rng);
    EXPECT_EQ(in.mask.HiddenPairCount(), RateCount(0.5, n * (n - 1) / 2));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        EXPECT_EQ(in.observed(i, j), in.mask.observed(i, j) ? a(i, j) : 0.0);
  }
}

TEST(TaskInput, ExpansionObservesKeptEdgesOnly) {
  Rng rng(4);
  const AdjacencyState a = testing::RandomGraph(15, 0.3, rng);
  const TaskInput in = MakeTaskInput(a, {TaskKind::kExpansion, 0.3, 0}, rng);
  EXPECT_EQ(a.EdgeCount() - in.observed.EdgeCount(), RateCount(0.3, a.EdgeCount()));
  for (std::size_t i = 0; i < 15; ++i)
    for (std::size_t j = i + 1; j < 15; ++j) {
      EXPECT_LE(in.observed(i, j), a(i, j));
      EXPECT_EQ(in.mask.observed(i, j), in.observed(i, j) == 1.0);
    }
  EXPECT_THROW(MakeTaskInput(AdjacencyState(4), {TaskKind::kExpansion, 0.3, 0}, rng), ConfigError);
}

TEST(TaskInput, DenoisingFlipsZerosAndObservesZeros) {
  Rng rng(6);
  const AdjacencyState a = testing::RandomGraph(15, 0.3, rng);
  const std::size_t zeros = 105 - a.EdgeCount();
  const TaskInput in = MakeTaskInput(a, {TaskKind::kDenoising, 0.2, 0}, rng);
  EXPECT_EQ(in.observed.EdgeCount() - a.EdgeCount(), RateCount(0.2, zeros));
  for (std::size_t i = 0; i < 15; ++i)
    for (std::size_t j = i + 1; j < 15; ++j) {
      EXPECT_GE(in.observed(i, j), a(i, j));
      EXPECT_EQ(in.mask.observed(i, j), in.observed(i, j) == 0.0);
    }
}

TEST(TaskInput, RejectsBadRates) {
  Rng rng(0);
  const AdjacencyState a = AdjacencyState::FromEdges(3, {{0, 1}});
  EXPECT_THROW(MakeTaskInput(a, {TaskKind::kLinkPrediction, 0.0, 0}, rng), ConfigError);
  EXPECT_THROW(MakeTaskInput(a, {TaskKind::kLinkPrediction, 1.0, 0}, rng), ConfigError);
  EXPECT_THROW(ParseTaskKind("bogus"), ConfigError);
  EXPECT_EQ(ParseTaskKind(TaskKindName(TaskKind::kDenoising)), TaskKind::kDenoising);
}

TEST(Graphon, GridCellsAndValidation) {
  const GraphonGrid w = GraphonGrid::FromFunction(4, [](double x, double y) { return x * y; });
  EXPECT_EQ(w.Cell(0.0), 0u);
  EXPECT_EQ(w.Cell(0.2499), 0u);
  EXPECT_EQ(w.Cell(0.25), 1u);
  EXPECT_EQ(w.Cell(1.0), 3u);
  EXPECT_THROW(GraphonGrid(Matrix(2, 2, {0.0, 1.0, 0.5, 0.0})), ConfigError);
  EXPECT_THROW(GraphonGrid(Matrix(2, 2, {1.5, 0.0, 0.0, 0.0})), ConfigError);
  EXPECT_THROW(NamedGraphon("nope"), ConfigError);
}

// Monte Carlo: expected density of W = int int W equals the empirical edge
// density over many sampled graphs.
TEST(Graphon, SampledDensityMatchesIntegral) {
  struct Case {
    const char* name;
    double density;
  };
  for (const Case c : {Case{"constant", 0.5}, Case{"product", 0.25}, Case{"two_block", 0.4}}) {
    const auto graphs = SampleGraphonDataset(NamedGraphon(c.name, 256), 400, 20, 8);
    double edges = 0.0;
    for (const auto& g : graphs) edges += static_cast<double>(g.adjacency.EdgeCount());
    const double density = edges / (400.0 * 190.0);
    EXPECT_NEAR(density, c.density, 0.01) << c.name;
  }
}

TEST(Graphon, DatasetIsDeterministicPerSeed) {
  const auto a = SampleGraphonDataset(NamedGraphon("dc_sbm"), 5, 12, 3);
  const auto b = SampleGraphonDataset(NamedGraphon("dc_sbm"), 5, 12, 3);
  const auto c = SampleGraphonDataset(NamedGraphon("dc_sbm"), 5, 12, 4);
  for (std::size_t g = 0; g < 5; ++g) EXPECT_EQ(a[g].adjacency, b[g].adjacency);
  bool differs = false;
  for (std::size_t g = 0; g < 5; ++g) differs = differs || !(a[g].adjacency == c[g].adjacency);
  EXPECT_TRUE(differs);
}

}  // namespace
}  // namespace pifm
