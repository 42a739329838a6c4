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

#include "pifm/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pifm/error.h"

namespace pifm {
namespace {

void CheckInputs(const std::vector<double>& scores, const std::vector<double>& labels,
                 const char* op) {
  if (scores.size() != labels.size()) {
    throw DimensionError(std::string(op) + ": " + std::to_string(scores.size()) + " scores vs " +
                         std::to_string(labels.size()) + " labels");
  }
  if (scores.empty()) throw MetricError(std::string(op) + ": empty input");
  for (double y : labels)
    if (y != 0.0 && y != 1.0) throw ConfigError(std::string(op) + ": labels must be 0 or 1");
}

StatSummary Summarize(const std::vector<double>& xs) {
  StatSummary s;
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(var / static_cast<double>(xs.size()));
  return s;
}

std::vector<double> Descriptor(const AdjacencyState& a, GraphStatistic statistic,
                               std::size_t bins, std::size_t degree_len) {
  if (!a.is_binary()) throw ConfigError("Mmd2: graphs must be binary");
  const std::size_t n = a.n();
  if (statistic == GraphStatistic::kTriangles) {
    return {ComputeGraphStatistics(a).triangles};
  }
  std::vector<double> h(statistic == GraphStatistic::kDegree ? degree_len : bins, 0.0);
  if (n == 0) return h;
  const auto deg = a.Degrees();
  if (statistic == GraphStatistic::kDegree) {
    for (std::size_t d : deg) h[d] += 1.0;
  } else {
    for (std::size_t v = 0; v < n; ++v) {
      double c = 0.0;
      if (deg[v] >= 2) {
        double tri = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = i + 1; j < n; ++j) tri += a(v, i) * a(v, j) * a(i, j);
        c = 2.0 * tri / static_cast<double>(deg[v] * (deg[v] - 1));
      }
      h[std::min(bins - 1, static_cast<std::size_t>(c * static_cast<double>(bins)))] += 1.0;
    }
  }
  for (double& x : h) x /= static_cast<double>(n);
  return h;
}

double SquaredDistance(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += (x[k] - y[k]) * (x[k] - y[k]);
  return s;
}

}  // namespace

ConfusionCounts CountConfusion(const std::vector<double>& scores,
                               const std::vector<double>& labels, double threshold) {
  CheckInputs(scores, labels, "CountConfusion");
  ConfusionCounts c;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    const bool pred = scores[k] >= threshold;
    const bool pos = labels[k] == 1.0;
    if (pred && pos) ++c.tp;
    else if (pred) ++c.fp;
    else if (pos) ++c.fn;
    else ++c.tn;
  }
  return c;
}

ConfusionRates ComputeConfusionRates(const std::vector<double>& scores,
                                     const std::vector<double>& labels, double threshold) {
  const ConfusionCounts c = CountConfusion(scores, labels, threshold);
  ConfusionRates r;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.fpr_defined = c.fp + c.tn > 0;
  r.fnr_defined = c.fn + c.tp > 0;
  r.fpr = r.fpr_defined ? 100.0 * static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn) : nan;
  r.fnr = r.fnr_defined ? 100.0 * static_cast<double>(c.fn) / static_cast<double>(c.fn + c.tp) : nan;
  return r;
}

double Auc(const std::vector<double>& scores, const std::vector<double>& labels) {
  CheckInputs(scores, labels, "Auc");
  const std::size_t m = scores.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mid-ranks, 1-based; doubled to stay in integers.
  double pos = 0.0, neg = 0.0, rank_sum2 = 0.0;
  for (std::size_t s = 0; s < m;) {
    std::size_t e = s + 1;
    while (e < m && scores[order[e]] == scores[order[s]]) ++e;
    const double mid2 = static_cast<double>(s + 1 + e);  // 2 * midrank
    for (std::size_t k = s; k < e; ++k)
      if (labels[order[k]] == 1.0) rank_sum2 += mid2;
    s = e;
  }
  for (double y : labels) (y == 1.0 ? pos : neg) += 1.0;
  if (pos == 0.0 || neg == 0.0) throw MetricError("Auc: labels contain a single class");
  // U = R_pos - pos (pos + 1) / 2, AUC = U / (pos neg).
  return (rank_sum2 - pos * (pos + 1.0)) / (2.0 * pos * neg);
}

double AveragePrecision(const std::vector<double>& scores, const std::vector<double>& labels) {
  CheckInputs(scores, labels, "AveragePrecision");
  const std::size_t m = scores.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t total_pos = 0;
  for (double y : labels) total_pos += y == 1.0;
  if (total_pos == 0) throw MetricError("AveragePrecision: no positive labels");
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < m; ++k) {
    if (labels[order[k]] != 1.0) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(k + 1);
  }
  return sum / static_cast<double>(total_pos);
}

GraphStatistics ComputeGraphStatistics(const AdjacencyState& a) {
  if (!a.is_binary()) throw ConfigError("ComputeGraphStatistics: graph must be binary");
  const std::size_t n = a.n();
  GraphStatistics s;
  if (n == 0) return s;
  const auto deg = a.Degrees();
  // Per-node triangle counts (A^3)_vv / 2.
  std::vector<double> tri(n, 0.0);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t i = 0; i < n; ++i) {
      if (a(v, i) == 0.0) continue;
      for (std::size_t j = i + 1; j < n; ++j) tri[v] += a(v, j) * a(i, j);
    }
  double deg_sum = 0.0, tri_sum = 0.0, clu_sum = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    deg_sum += static_cast<double>(deg[v]);
    tri_sum += tri[v];
    if (deg[v] >= 2) clu_sum += 2.0 * tri[v] / static_cast<double>(deg[v] * (deg[v] - 1));
  }
  s.avg_degree = deg_sum / static_cast<double>(n);
  s.triangles = tri_sum / 3.0;
  s.avg_clustering = clu_sum / static_cast<double>(n);
  return s;
}

std::string_view GraphStatisticName(GraphStatistic s) {
  switch (s) {
    case GraphStatistic::kDegree: return "degree";
    case GraphStatistic::kClustering: return "clustering";
    case GraphStatistic::kTriangles: return "triangles";
  }
  return "unknown";
}

MmdResult Mmd2(const std::vector<AdjacencyState>& set_a, const std::vector<AdjacencyState>& set_b,
               GraphStatistic statistic, const MmdOptions& options) {
  if (set_a.empty() || set_b.empty()) throw MetricError("Mmd2: both sets must be nonempty");
  if (options.clustering_bins == 0) throw ConfigError("Mmd2: clustering_bins must be positive");
  std::size_t degree_len = 1;
  for (const auto* set : {&set_a, &set_b})
    for (const AdjacencyState& a : *set) degree_len = std::max(degree_len, a.n());

  std::vector<std::vector<double>> x, y;
  for (const auto& a : set_a) x.push_back(Descriptor(a, statistic, options.clustering_bins, degree_len));
  for (const auto& b : set_b) y.push_back(Descriptor(b, statistic, options.clustering_bins, degree_len));

  // Median heuristic over all distinct pairs of the pooled sample.
  std::vector<std::vector<double>> pooled = x;
  pooled.insert(pooled.end(), y.begin(), y.end());
  std::vector<double> dists;
  for (std::size_t i = 0; i < pooled.size(); ++i)
    for (std::size_t j = i + 1; j < pooled.size(); ++j)
      dists.push_back(std::sqrt(SquaredDistance(pooled[i], pooled[j])));
  MmdResult result;
  if (!dists.empty()) {
    const std::size_t mid = dists.size() / 2;
    std::nth_element(dists.begin(), dists.begin() + static_cast<long>(mid), dists.end());
    double med = dists[mid];
    if (dists.size() % 2 == 0) {
      med = 0.5 * (med + *std::max_element(dists.begin(), dists.begin() + static_cast<long>(mid)));
    }
    if (med > 0.0) result.bandwidth = med;
  }
  const double inv = 1.0 / (2.0 * result.bandwidth * result.bandwidth);
  auto k = [&](const std::vector<double>& p, const std::vector<double>& q) {
    return std::exp(-SquaredDistance(p, q) * inv);
  };
  const double m = static_cast<double>(x.size());
  const double n = static_cast<double>(y.size());
  result.biased = options.biased || x.size() < 2 || y.size() < 2;
  double kxx = 0.0, kyy = 0.0, kxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j)
      if (result.biased || i != j) kxx += k(x[i], x[j]);
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j)
      if (result.biased || i != j) kyy += k(y[i], y[j]);
  for (const auto& p : x)
    for (const auto& q : y) kxy += k(p, q);
  if (result.biased) {
    result.raw = kxx / (m * m) + kyy / (n * n) - 2.0 * kxy / (m * n);
  } else {
    result.raw = kxx / (m * (m - 1.0)) + kyy / (n * (n - 1.0)) - 2.0 * kxy / (m * n);
  }
  result.value = std::max(result.raw, 0.0);
  return result;
}

ScoredPairs HiddenScores(const AdjacencyState& prediction, const AdjacencyState& truth,
                         const ObservationMask& xi) {
  if (prediction.n() != truth.n() || truth.n() != xi.n()) {
    throw DimensionError("HiddenScores: prediction, truth and mask sizes differ");
  }
  ScoredPairs out;
  for (std::size_t i = 0; i < truth.n(); ++i)
    for (std::size_t j = i + 1; j < truth.n(); ++j)
      if (!xi.observed(i, j)) {
        out.scores.push_back(prediction(i, j));
        out.labels.push_back(truth(i, j));
      }
  return out;
}

MetricsReport Evaluate(const std::vector<AdjacencyState>& predictions,
                       const std::vector<AdjacencyState>& truths,
                       const std::vector<ObservationMask>& masks,
                       const EvaluationOptions& options) {
  if (predictions.size() != truths.size() || truths.size() != masks.size()) {
    throw DimensionError("Evaluate: predictions, truths and masks differ in count");
  }
  if (truths.empty()) throw MetricError("Evaluate: no graphs");
  MetricsReport r;
  r.graphs = truths.size();
  double auc = 0.0, ap = 0.0, fpr = 0.0, fnr = 0.0, mse = 0.0;
  std::size_t mse_graphs = 0;
  ScoredPairs pooled;
  std::vector<AdjacencyState> binarized;
  std::vector<double> degs, tris, clus;
  for (std::size_t g = 0; g < truths.size(); ++g) {
    const ScoredPairs sp = HiddenScores(predictions[g], truths[g], masks[g]);
    pooled.scores.insert(pooled.scores.end(), sp.scores.begin(), sp.scores.end());
    pooled.labels.insert(pooled.labels.end(), sp.labels.begin(), sp.labels.end());
    if (!sp.scores.empty()) {
      double se = 0.0;
      for (std::size_t k = 0; k < sp.scores.size(); ++k)
        se += (sp.scores[k] - sp.labels[k]) * (sp.scores[k] - sp.labels[k]);
      mse += se / static_cast<double>(sp.scores.size());
      ++mse_graphs;
      const ConfusionRates cr = ComputeConfusionRates(sp.scores, sp.labels, options.threshold);
      if (cr.fpr_defined) fpr += cr.fpr, ++r.fpr_graphs;
      if (cr.fnr_defined) fnr += cr.fnr, ++r.fnr_graphs;
      const std::size_t pos = static_cast<std::size_t>(
          std::count(sp.labels.begin(), sp.labels.end(), 1.0));
      if (pos > 0 && pos < sp.labels.size()) {
        auc += Auc(sp.scores, sp.labels);
        ap += AveragePrecision(sp.scores, sp.labels);
        ++r.auc_graphs;
      }
    }
    binarized.push_back(Threshold(predictions[g], options.threshold));
    const GraphStatistics st = ComputeGraphStatistics(binarized.back());
    degs.push_back(st.avg_degree);
    tris.push_back(st.triangles);
    clus.push_back(st.avg_clustering);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto avg = [&](double s, std::size_t c) { return c > 0 ? s / static_cast<double>(c) : nan; };
  r.auc = 100.0 * avg(auc, r.auc_graphs);
  r.ap = 100.0 * avg(ap, r.auc_graphs);
  r.fpr = avg(fpr, r.fpr_graphs);
  r.fnr = avg(fnr, r.fnr_graphs);
  r.mse = avg(mse, mse_graphs);
  const std::size_t pooled_pos = static_cast<std::size_t>(
      std::count(pooled.labels.begin(), pooled.labels.end(), 1.0));
  if (pooled_pos > 0 && pooled_pos < pooled.labels.size()) {
    r.auc_pooled = 100.0 * Auc(pooled.scores, pooled.labels);
    r.ap_pooled = 100.0 * AveragePrecision(pooled.scores, pooled.labels);
  } else {
    r.auc_pooled = r.ap_pooled = nan;
  }
  r.degree = Summarize(degs);
  r.triangles = Summarize(tris);
  r.clustering = Summarize(clus);
  if (options.with_mmd) {
    const auto& ref = options.mmd_reference != nullptr ? *options.mmd_reference : truths;
    r.mmd2_degree = Mmd2(binarized, ref, GraphStatistic::kDegree);
    r.mmd2_clustering = Mmd2(binarized, ref, GraphStatistic::kClustering);
    r.mmd2_triangles = Mmd2(binarized, ref, GraphStatistic::kTriangles);
  }
  return r;
}

}  // namespace pifm
