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

#ifndef PIFM_METRICS_H_
#define PIFM_METRICS_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pifm/graph.h"

namespace pifm {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
};

// score >= threshold counts as an edge. Labels must be 0 or 1.
ConfusionCounts CountConfusion(const std::vector<double>& scores,
                               const std::vector<double>& labels, double threshold = 0.5);

// Percentages. A zero denominator yields NaN with the matching flag cleared.
struct ConfusionRates {
  double fpr = 0.0;
  double fnr = 0.0;
  bool fpr_defined = true;
  bool fnr_defined = true;
};
ConfusionRates ComputeConfusionRates(const std::vector<double>& scores,
                                     const std::vector<double>& labels, double threshold = 0.5);

// Probability that a positive outranks a negative, ties counted as 1/2, from
// mid-rank statistics. MetricError unless both classes are present.
double Auc(const std::vector<double>& scores, const std::vector<double>& labels);

// sum_k (R_k - R_{k-1}) P_k over the list sorted by descending score, ties in
// index order. MetricError without positives.
double AveragePrecision(const std::vector<double>& scores, const std::vector<double>& labels);

struct GraphStatistics {
  double avg_degree = 0.0;
  double triangles = 0.0;  // trace(A^3)/6
  double avg_clustering = 0.0;
};
GraphStatistics ComputeGraphStatistics(const AdjacencyState& a);

enum class GraphStatistic { kDegree, kClustering, kTriangles };
std::string_view GraphStatisticName(GraphStatistic s);

struct MmdOptions {
  bool biased = false;
  std::size_t clustering_bins = 100;
};

struct MmdResult {
  double value = 0.0;      // max(raw, 0)
  double raw = 0.0;        // the estimator itself; the unbiased one can dip below 0
  double bandwidth = 1.0;  // median pairwise distance of the pooled sample
  bool biased = false;     // true when requested or forced by a one-element set
};

// MMD^2 between per-graph descriptors (normalized degree histogram,
// normalized clustering histogram over [0,1], or the triangle count) with a
// Gaussian kernel exp(-|x-y|^2 / (2 h^2)). Graphs must be binary.
MmdResult Mmd2(const std::vector<AdjacencyState>& set_a, const std::vector<AdjacencyState>& set_b,
               GraphStatistic statistic, const MmdOptions& options = {});

// The evaluation region of a task: (scores, labels) of hidden upper pairs.
struct ScoredPairs {
  std::vector<double> scores;
  std::vector<double> labels;
};
ScoredPairs HiddenScores(const AdjacencyState& prediction, const AdjacencyState& truth,
                         const ObservationMask& xi);

struct StatSummary {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

struct MetricsReport {
  // Macro averages over graphs, in percent.
  double auc = 0.0;
  double ap = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
  // Pooled over all evaluated entries, in percent.
  double auc_pooled = 0.0;
  double ap_pooled = 0.0;
  double mse = 0.0;  // macro mean of the hidden-region squared error
  std::size_t graphs = 0;
  std::size_t auc_graphs = 0;  // graphs whose hidden region has both classes
  std::size_t fpr_graphs = 0;
  std::size_t fnr_graphs = 0;
  std::optional<MmdResult> mmd2_degree;
  std::optional<MmdResult> mmd2_clustering;
  std::optional<MmdResult> mmd2_triangles;
  StatSummary degree;
  StatSummary triangles;
  StatSummary clustering;
};

struct EvaluationOptions {
  double threshold = 0.5;
  bool with_mmd = true;
  // MMD reference set; defaults to `truths`. Pass the distinct test graphs
  // when predictions hold several samples per graph.
  const std::vector<AdjacencyState>* mmd_reference = nullptr;
};

// Scores predictions against ground truth on each graph's hidden region; MMD
// and statistics use the thresholded predictions against the truths.
MetricsReport Evaluate(const std::vector<AdjacencyState>& predictions,
                       const std::vector<AdjacencyState>& truths,
                       const std::vector<ObservationMask>& masks,
                       const EvaluationOptions& options = {});

}  // namespace pifm

#endif  // PIFM_METRICS_H_
