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

#include "pifm/graph.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "pifm/error.h"

namespace pifm {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("Matrix: data length " + std::to_string(data_.size()) +
                         " does not match shape " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
}

Matrix Matrix::Identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::Transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix Matrix::Reshaped(std::size_t rows, std::size_t cols) const {
  if (rows * cols != size()) {
    throw DimensionError("Matrix::Reshaped: incompatible shape");
  }
  return Matrix(rows, cols, data_);
}

double MaxAbsDiff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("MaxAbsDiff: shape mismatch");
  }
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    m = std::max(m, std::abs(a.raw()[k] - b.raw()[k]));
  }
  return m;
}

// --- AdjacencyState ---------------------------------------------------------

AdjacencyState AdjacencyState::FromMatrix(Matrix m) {
  if (!m.is_square()) throw DimensionError("AdjacencyState: matrix not square");
  const std::size_t n = m.rows();
  for (std::size_t i = 0; i < n; ++i) {
    if (m(i, i) != 0.0) {
      throw ConfigError("AdjacencyState: nonzero diagonal at " + std::to_string(i));
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if (m(i, j) != m(j, i)) {
        throw ConfigError("AdjacencyState: asymmetric entry (" + std::to_string(i) +
                          "," + std::to_string(j) + ")");
      }
    }
  }
  AdjacencyState a;
  a.values_ = std::move(m);
  return a;
}

AdjacencyState AdjacencyState::FromEdges(
    std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  AdjacencyState a(n);
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) throw DimensionError("FromEdges: node out of range");
    if (u == v) throw ConfigError("FromEdges: self-loops are not supported");
    a.SetPair(u, v, 1.0);
  }
  return a;
}

void AdjacencyState::SetPair(std::size_t i, std::size_t j, double v) {
  if (i == j) throw ConfigError("AdjacencyState::SetPair: diagonal entry");
  values_(i, j) = v;
  values_(j, i) = v;
}

bool AdjacencyState::is_binary() const {
  return std::all_of(values_.data().begin(), values_.data().end(),
                     [](double v) { return v == 0.0 || v == 1.0; });
}

std::size_t AdjacencyState::EdgeCount() const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n(); ++i)
    for (std::size_t j = i + 1; j < n(); ++j) count += values_(i, j) == 1.0;
  return count;
}

std::vector<std::size_t> AdjacencyState::Degrees() const {
  std::vector<std::size_t> deg(n(), 0);
  for (std::size_t i = 0; i < n(); ++i)
    for (std::size_t j = 0; j < n(); ++j) deg[i] += values_(i, j) == 1.0;
  return deg;
}

// --- ObservationMask --------------------------------------------------------

ObservationMask ObservationMask::AllObserved(std::size_t n) {
  ObservationMask xi;
  xi.values_ = Matrix(n, n, 1.0);
  return xi;
}

ObservationMask ObservationMask::NoneObserved(std::size_t n) {
  ObservationMask xi;
  xi.values_ = Matrix::Identity(n);
  return xi;
}

ObservationMask ObservationMask::FromMatrix(Matrix m) {
  if (!m.is_square()) throw DimensionError("ObservationMask: matrix not square");
  const std::size_t n = m.rows();
  for (std::size_t i = 0; i < n; ++i) {
    if (m(i, i) != 1.0) throw ConfigError("ObservationMask: diagonal must be 1");
    for (std::size_t j = 0; j < n; ++j) {
      if (m(i, j) != 0.0 && m(i, j) != 1.0)
        throw ConfigError("ObservationMask: entries must be 0 or 1");
      if (m(i, j) != m(j, i)) throw ConfigError("ObservationMask: asymmetric");
    }
  }
  ObservationMask xi;
  xi.values_ = std::move(m);
  return xi;
}

void ObservationMask::SetPair(std::size_t i, std::size_t j, bool observed) {
  if (i == j) throw ConfigError("ObservationMask::SetPair: diagonal entry");
  values_(i, j) = observed ? 1.0 : 0.0;
  values_(j, i) = values_(i, j);
}

std::size_t ObservationMask::HiddenPairCount() const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n(); ++i)
    for (std::size_t j = i + 1; j < n(); ++j) count += !observed(i, j);
  return count;
}

// --- NodePermutation --------------------------------------------------------

NodePermutation::NodePermutation(std::vector<std::size_t> mapping)
    : mapping_(std::move(mapping)) {
  std::vector<char> seen(mapping_.size(), 0);
  for (std::size_t v : mapping_) {
    if (v >= mapping_.size() || seen[v]) {
      throw ConfigError("NodePermutation: mapping is not a bijection");
    }
    seen[v] = 1;
  }
}

NodePermutation NodePermutation::Identity(std::size_t n) {
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), 0);
  return NodePermutation(std::move(m));
}

NodePermutation NodePermutation::Random(std::size_t n, Rng& rng) {
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), 0);
  // Fisher-Yates with explicit draws so the result is library-independent.
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
    std::swap(m[i - 1], m[j]);
  }
  return NodePermutation(std::move(m));
}

NodePermutation NodePermutation::Inverse() const {
  std::vector<std::size_t> inv(mapping_.size());
  for (std::size_t i = 0; i < mapping_.size(); ++i) inv[mapping_[i]] = i;
  return NodePermutation(std::move(inv));
}

// --- free functions ---------------------------------------------------------

Matrix PermuteSquare(const Matrix& m, const NodePermutation& p) {
  if (!m.is_square() || m.rows() != p.n()) {
    throw DimensionError("Permute: matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", permutation has " +
                         std::to_string(p.n()) + " nodes");
  }
  const std::size_t n = m.rows();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(p(i), p(j)) = m(i, j);
  return out;
}

Matrix PermuteRows(const Matrix& m, const NodePermutation& p) {
  if (m.rows() != p.n()) throw DimensionError("PermuteRows: size mismatch");
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t c = 0; c < m.cols(); ++c) out(p(i), c) = m(i, c);
  return out;
}

AdjacencyState Permute(const AdjacencyState& a, const NodePermutation& p) {
  return AdjacencyState::FromMatrix(PermuteSquare(a.values(), p));
}

ObservationMask Permute(const ObservationMask& xi, const NodePermutation& p) {
  return ObservationMask::FromMatrix(PermuteSquare(xi.values(), p));
}

AdjacencyState SymmetrizeClip(const Matrix& m, std::optional<ClipRange> clip) {
  if (!m.is_square()) throw DimensionError("SymmetrizeClip: matrix not square");
  const std::size_t n = m.rows();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = 0.5 * (m(i, j) + m(j, i));
      if (clip) v = std::clamp(v, clip->lo, clip->hi);
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return AdjacencyState::FromMatrix(std::move(out));
}

namespace {

std::vector<PairValue> EntriesWhere(const AdjacencyState& a,
                                    const ObservationMask& xi, bool observed) {
  if (a.n() != xi.n()) {
    throw DimensionError("HiddenEntries: adjacency has " + std::to_string(a.n()) +
                         " nodes, mask has " + std::to_string(xi.n()));
  }
  std::vector<PairValue> out;
  for (std::size_t i = 0; i < a.n(); ++i)
    for (std::size_t j = i + 1; j < a.n(); ++j)
      if (xi.observed(i, j) == observed) out.push_back({i, j, a(i, j)});
  return out;
}

}  // namespace

std::vector<PairValue> HiddenEntries(const AdjacencyState& a,
                                     const ObservationMask& xi) {
  return EntriesWhere(a, xi, false);
}

std::vector<PairValue> ObservedEntries(const AdjacencyState& a,
                                       const ObservationMask& xi) {
  return EntriesWhere(a, xi, true);
}

AdjacencyState Threshold(const AdjacencyState& a, double threshold) {
  AdjacencyState out(a.n());
  for (std::size_t i = 0; i < a.n(); ++i)
    for (std::size_t j = i + 1; j < a.n(); ++j)
      if (a(i, j) >= threshold) out.SetPair(i, j, 1.0);
  return out;
}

}  // namespace pifm
