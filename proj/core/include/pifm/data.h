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

#ifndef PIFM_DATA_H_
#define PIFM_DATA_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "pifm/graph.h"
#include "pifm/matrix.h"
#include "pifm/random.h"

namespace pifm {

// --- TU benchmark layout ----------------------------------------------------

// Reads <DS>_A.txt and <DS>_graph_indicator.txt from `root`. The dataset name
// is inferred from the indicator file when `name` is empty. Node and edge
// labels are ignored.
std::vector<GraphRecord> ParseTuDataset(const std::filesystem::path& root,
                                        std::string_view name = {});

// Writes graphs in the same layout; 1-indexed global node ids, each undirected
// edge written in both directions as in the public TU files.
void WriteTuDataset(const std::filesystem::path& root, std::string_view name,
                    const std::vector<GraphRecord>& graphs);

// --- splitting --------------------------------------------------------------

struct DatasetSplit {
  std::vector<std::size_t> train_ids;
  std::vector<std::size_t> val_ids;
  std::vector<std::size_t> test_ids;
};

// 85/10/5 split: floor(0.85n) train, floor(0.10n) validation, remainder test.
// Requires n >= 20.
DatasetSplit SplitDataset(std::size_t n_graphs, std::uint64_t seed);

// Explicit sizes (train + val + test <= n_graphs); used for desk-scale runs.
DatasetSplit SplitDatasetCounts(std::size_t n_graphs, std::size_t n_train,
                                std::size_t n_val, std::size_t n_test,
                                std::uint64_t seed);

// --- reconstruction tasks ---------------------------------------------------

enum class TaskKind { kLinkPrediction, kExpansion, kDenoising };

std::string_view TaskKindName(TaskKind kind);  // "linkpred" | "expansion" | "denoise"
TaskKind ParseTaskKind(std::string_view name);

struct TaskSpec {
  TaskKind kind = TaskKind::kLinkPrediction;
  double rate = 0.5;  // drop rate, or flip rate for denoising
  std::uint64_t seed = 0;
};

struct TaskInput {
  AdjacencyState observed;  // A^O
  ObservationMask mask;     // xi; hidden (xi == 0) pairs are the evaluation region
};

// ceil(rate * count) guarded against floating noise in the product.
std::size_t RateCount(double rate, std::size_t count);

// Builds the observation for one graph:
//  link prediction: ceil(r * n(n-1)/2) uniformly chosen pairs hidden;
//  expansion: ceil(r * |E|) edges dropped, only kept edges observed;
//  denoising: ceil(f * #zero pairs) zero pairs flipped to 1, the 0-entries of
//  the corrupted graph are observed.
TaskInput MakeTaskInput(const AdjacencyState& a, const TaskSpec& task, Rng& rng);

// --- graphons ---------------------------------------------------------------

// R x R symmetric grid with entries in [0,1]; W(x, y) is read from the cell
// containing (x, y).
class GraphonGrid {
 public:
  GraphonGrid() = default;
  explicit GraphonGrid(Matrix values);
  static GraphonGrid Constant(std::size_t resolution, double value);
  static GraphonGrid FromFunction(std::size_t resolution,
                                  const std::function<double(double, double)>& w);

  std::size_t resolution() const { return values_.rows(); }
  const Matrix& values() const { return values_; }
  std::size_t Cell(double z) const;
  double operator()(double x, double y) const { return values_(Cell(x), Cell(y)); }

  std::string ToCsv() const;

 private:
  Matrix values_;
};

// z_i ~ U[0,1], A_ij ~ Bernoulli(W(z_i, z_j)).
GraphRecord SampleGraphonGraph(const GraphonGrid& w, std::size_t n, Rng& rng,
                               int graph_id = 0);

// Named synthetic families for desk-scale experiments:
//   "product"   W(x,y) = x*y
//   "two_block" equal-size assortative blocks (0.7 in, 0.1 across)
//   "dc_sbm"    degree-corrected two-block model
//   "constant"  W = 0.5
GraphonGrid NamedGraphon(std::string_view name, std::size_t resolution = 64);

std::vector<GraphRecord> SampleGraphonDataset(const GraphonGrid& w,
                                              std::size_t num_graphs,
                                              std::size_t num_nodes,
                                              std::uint64_t seed);

}  // namespace pifm

#endif  // PIFM_DATA_H_
