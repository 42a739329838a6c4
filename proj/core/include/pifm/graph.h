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

#ifndef PIFM_GRAPH_H_
#define PIFM_GRAPH_H_

#include <cstddef>
#include <optional>
#include <vector>

#include "pifm/matrix.h"
#include "pifm/random.h"

namespace pifm {

// Symmetric, zero-diagonal N x N matrix. Holds ground-truth graphs,
// observations, relaxed flow states and predictions alike; entries are only
// required to be in {0,1} when the state claims to be binary.
class AdjacencyState {
 public:
  AdjacencyState() = default;
  explicit AdjacencyState(std::size_t n) : values_(n, n) {}

  // Validates symmetry (exact) and the zero diagonal; throws DimensionError
  // for a non-square input and ConfigError for a broken invariant.
  static AdjacencyState FromMatrix(Matrix m);

  // Builds a binary graph from an undirected edge list.
  static AdjacencyState FromEdges(
      std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

  std::size_t n() const { return values_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return values_(i, j); }
  const Matrix& values() const { return values_; }

  // Writes both (i,j) and (j,i). i != j.
  void SetPair(std::size_t i, std::size_t j, double v);

  bool is_binary() const;
  std::size_t EdgeCount() const;  // entries equal to 1 in the upper triangle
  std::vector<std::size_t> Degrees() const;  // binary graphs only

  bool operator==(const AdjacencyState& other) const = default;

 private:
  Matrix values_;
};

// Binary symmetric matrix marking observed node pairs. The diagonal is always
// observed.
class ObservationMask {
 public:
  ObservationMask() = default;
  // All pairs observed.
  static ObservationMask AllObserved(std::size_t n);
  // Nothing but the diagonal observed.
  static ObservationMask NoneObserved(std::size_t n);
  static ObservationMask FromMatrix(Matrix m);

  std::size_t n() const { return values_.rows(); }
  bool observed(std::size_t i, std::size_t j) const { return values_(i, j) != 0.0; }
  const Matrix& values() const { return values_; }
  void SetPair(std::size_t i, std::size_t j, bool observed);

  std::size_t HiddenPairCount() const;

  bool operator==(const ObservationMask& other) const = default;

 private:
  Matrix values_;
};

// Bijection on {0..n-1}; node i is relabelled to mapping[i].
class NodePermutation {
 public:
  NodePermutation() = default;
  explicit NodePermutation(std::vector<std::size_t> mapping);

  static NodePermutation Identity(std::size_t n);
  static NodePermutation Random(std::size_t n, Rng& rng);

  std::size_t n() const { return mapping_.size(); }
  std::size_t operator()(std::size_t i) const { return mapping_[i]; }
  const std::vector<std::size_t>& mapping() const { return mapping_; }
  NodePermutation Inverse() const;

  bool operator==(const NodePermutation& other) const = default;

 private:
  std::vector<std::size_t> mapping_;
};

struct GraphRecord {
  AdjacencyState adjacency;  // binary
  std::optional<Matrix> features;
  int graph_id = 0;
};

struct PairValue {
  std::size_t i;
  std::size_t j;
  double value;
  bool operator==(const PairValue&) const = default;
};

// result[p(i)][p(j)] = a[i][j].
AdjacencyState Permute(const AdjacencyState& a, const NodePermutation& p);
ObservationMask Permute(const ObservationMask& xi, const NodePermutation& p);
Matrix PermuteSquare(const Matrix& m, const NodePermutation& p);
// Row permutation: result row p(i) = row i.
Matrix PermuteRows(const Matrix& m, const NodePermutation& p);

// (m + m^T)/2 with zeroed diagonal, optionally clipped to [lo, hi].
struct ClipRange {
  double lo;
  double hi;
};
AdjacencyState SymmetrizeClip(const Matrix& m,
                              std::optional<ClipRange> clip = std::nullopt);

// Upper-triangle pairs (i<j) with xi == 0, in row-major order.
std::vector<PairValue> HiddenEntries(const AdjacencyState& a,
                                     const ObservationMask& xi);
// Upper-triangle pairs with xi == 1.
std::vector<PairValue> ObservedEntries(const AdjacencyState& a,
                                       const ObservationMask& xi);

// Entries >= threshold become edges.
AdjacencyState Threshold(const AdjacencyState& a, double threshold = 0.5);

}  // namespace pifm

#endif  // PIFM_GRAPH_H_
