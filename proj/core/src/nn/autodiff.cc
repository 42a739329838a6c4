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

#include "pifm/nn/autodiff.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "pifm/error.h"

namespace pifm::nn {
namespace {

std::string ShapeOf(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void RequireSameTape(const char* op, Var a, Var b) {
  if (a.tape() == nullptr || a.tape() != b.tape()) {
    throw DimensionError(std::string(op) + ": operands live on different tapes");
  }
}

void RequireSameShape(const char* op, const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + ShapeOf(a) + " vs " +
                         ShapeOf(b));
  }
}

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

ConstMap View(const Matrix& m) { return ConstMap(m.raw(), m.rows(), m.cols()); }
MutMap View(Matrix& m) { return MutMap(m.raw(), m.rows(), m.cols()); }

// c += a * b      (a: m x k, b: k x n)
void GemmNN(const Matrix& a, const Matrix& b, Matrix& c) {
  View(c).noalias() += View(a) * View(b);
}

// c += a * b^T    (a: m x n, b: k x n, c: m x k)
void GemmNT(const Matrix& a, const Matrix& b, Matrix& c) {
  View(c).noalias() += View(a) * View(b).transpose();
}

// c += a^T * b    (a: m x k, b: m x n, c: k x n)
void GemmTN(const Matrix& a, const Matrix& b, Matrix& c) {
  View(c).noalias() += View(a).transpose() * View(b);
}

template <typename F>
Matrix Map(const Matrix& a, F f) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t k = 0; k < a.size(); ++k) out.raw()[k] = f(a.raw()[k]);
  return out;
}

double SigmoidScalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

const Matrix& Var::value() const { return tape_->value(*this); }

Var Tape::Constant(Matrix value) { return Push(std::move(value), {}, nullptr); }

Var Tape::Param(const ParameterSet& params, std::size_t index) {
  const Tensor& t = params.at(index);
  Var v = Push(t.AsMatrix(), {}, nullptr);
  nodes_[v.id()].needs_grad = record_grads_;
  nodes_[v.id()].param_index = static_cast<long>(index);
  return v;
}

Var Tape::Push(Matrix value, std::vector<int> inputs, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  for (int in : inputs) node.needs_grad = node.needs_grad || nodes_[in].needs_grad;
  node.inputs = std::move(inputs);
  if (node.needs_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Matrix& Tape::grad_ref(int id) {
  Node& n = nodes_[id];
  if (n.grad.empty() && !n.value.empty()) n.grad = Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

Matrix Tape::grad(Var v) const {
  const Node& n = nodes_[v.id()];
  if (n.grad.empty()) return Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

double Tape::Backward(Var loss) {
  if (loss.tape() != this) throw DimensionError("Backward: loss on a different tape");
  const Node& l = nodes_[loss.id()];
  if (l.value.rows() != 1 || l.value.cols() != 1) {
    throw DimensionError("Backward: loss must be 1x1, got " + ShapeOf(l.value));
  }
  for (Node& n : nodes_) n.grad = Matrix();
  grad_ref(loss.id()).raw()[0] = 1.0;
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.backward && !n.grad.empty()) n.backward(*this, id);
  }
  return nodes_[loss.id()].value.raw()[0];
}

void Tape::AccumulateParamGrads(GradientBuffer& buffer) const {
  for (const Node& n : nodes_) {
    if (n.param_index < 0 || n.grad.empty()) continue;
    auto& dst = buffer.at(static_cast<std::size_t>(n.param_index));
    if (dst.size() != n.grad.size()) {
      throw DimensionError("AccumulateParamGrads: buffer shape mismatch");
    }
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += n.grad.raw()[k];
  }
}

std::vector<Var> BindParams(Tape& tape, const ParameterSet& params) {
  std::vector<Var> out;
  out.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) out.push_back(tape.Param(params, i));
  return out;
}

double ForwardBackward(Var loss) { return loss.tape()->Backward(loss); }

// --- primitives -------------------------------------------------------------

Var MatMul(Var a, Var b) {
  RequireSameTape("MatMul", a, b);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw DimensionError("MatMul: cannot multiply " + ShapeOf(av) + " by " + ShapeOf(bv));
  }
  Matrix out(av.rows(), bv.cols());
  GemmNN(av, bv, out);
  const int ia = a.id(), ib = b.id();
  return a.tape()->Push(std::move(out), {ia, ib}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.node_grad(self);
    if (t.needs_grad(ia)) GemmNT(g, t.node_value(ib), t.grad_ref(ia));
    if (t.needs_grad(ib)) GemmTN(t.node_value(ia), g, t.grad_ref(ib));
  });
}

namespace {

Var Binary(const char* op, Var a, Var b, double sa, double sb) {
  RequireSameTape(op, a, b);
  RequireSameShape(op, a.value(), b.value());
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  Matrix out(av.rows(), av.cols());
  for (std::size_t k = 0; k < out.size(); ++k)
    out.raw()[k] = sa * av.raw()[k] + sb * bv.raw()[k];
  const int ia = a.id(), ib = b.id();
  return a.tape()->Push(std::move(out), {ia, ib}, [ia, ib, sa, sb](Tape& t, int self) {
    const Matrix& g = t.node_grad(self);
    for (auto [id, s] : {std::pair{ia, sa}, std::pair{ib, sb}}) {
      if (!t.needs_grad(id)) continue;
      Matrix& dst = t.grad_ref(id);
      for (std::size_t k = 0; k < g.size(); ++k) dst.raw()[k] += s * g.raw()[k];
    }
  });
}

}  // namespace

Var Add(Var a, Var b) { return Binary("Add", a, b, 1.0, 1.0); }
Var Sub(Var a, Var b) { return Binary("Sub", a, b, 1.0, -1.0); }

Var Mul(Var a, Var b) {
  RequireSameTape("Mul", a, b);
  RequireSameShape("Mul", a.value(), b.value());
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  Matrix out(av.rows(), av.cols());
  for (std::size_t k = 0; k < out.size(); ++k) out.raw()[k] = av.raw()[k] * bv.raw()[k];
  const int ia = a.id(), ib = b.id();
  return a.tape()->Push(std::move(out), {ia, ib}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.node_grad(self);
    if (t.needs_grad(ia)) {
      Matrix& dst = t.grad_ref(ia);
      const Matrix& other = t.node_value(ib);
      for (std::size_t k = 0; k < g.size(); ++k) dst.raw()[k] += g.raw()[k] * other.raw()[k];
    }
    if (t.needs_grad(ib)) {
      Matrix& dst = t.grad_ref(ib);
      const Matrix& other = t.node_value(ia);
      for (std::size_t k = 0; k < g.size(); ++k) dst.raw()[k] += g.raw()[k] * other.raw()[k];
    }
  });
}

Var Scale(Var a, double c) {
  Matrix out = Map(a.value(), [c](double x) { return c * x; });
  const int ia = a.id();
  return a.tape()->Push(std::move(out), {ia}, [ia, c](Tape& t, int self) {
    const Matrix& g = t.node_grad(self);
    Matrix& dst = t.grad_ref(ia);
    for (std::size_t k = 0; k < g.size(); ++k) dst.raw()[k] += c * g.raw()[k];
  });
}

Var AddScalar(Var a, double c) {
  Matrix out = Map(a.value(), [c](double x) { return x + c; });
  const int ia = a.id();
  return a.tape()->Push(std::move(out), {ia}, [ia](Tape& t, int self) {
    const Matrix& g = t.node_grad(self);
    Matrix& dst = t.grad_ref(ia);
    for (std::size_t k = 0; k < g.size(); ++k) dst.raw()[k] += g.raw()[k];
  });
}

Var AddRow(Var a, Var row) {
  RequireSameTape("AddRow", a, row);
  const Matrix& av = a.value();
  const Matrix& rv = row.value();
  if (rv.rows() != 1 || rv.cols() != av.cols()) {
    throw DimensionError("AddRow: cannot broadcast " + ShapeOf(rv) + " over " + ShapeOf(av));
  }
  Matrix out = av;
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < av.cols(); ++j) out(i, j) += rv.raw()[j];
  const int ia = a.id(), ir = row.id();
  return a.tape()->Push(std::move(out), {ia, ir}, [ia, ir](Tape& t, int self) {
    const Matrix& g = t.node_grad(self);
    if (t.needs_grad(ia)) {
      Matrix& dst = t.grad_ref(ia);
      for (std::size_t k = 0; k < g.size(); ++k) dst.raw()[k] += g.raw()[k];
    }
    if (t.needs_grad(ir)) {
      Matrix& dst = t.grad_ref(ir);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) dst.raw()[j] += g(i, j);
    }
  });
}

Var MulRow(Var a, Var row) {
  RequireSameTape("MulRow", a, row);
  const Matrix& av = a.value();
  const Matrix& rv = row.value();
  if (rv.rows() != 1 || rv.cols() != av.cols()) {
    throw DimensionError("MulRow: cannot broadcast " + ShapeOf(rv) + " over " + ShapeOf(av));
  }
  Matrix out = av;
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < av.cols(); ++j) out(i, j) *= rv.raw()[j];
  const int ia = a.id(), ir = row.id();
  return a.tape()->Push(std::move(out), {ia, ir}, [ia, ir](Tape& t, int self) {
    const Matrix& g = t.node_grad(self);
    const Matrix& x = t.node_value(ia);
    const Matrix& r = t.node_value(ir);
    if (t.needs_grad(ia)) {
      Matrix& dst = t.grad_ref(ia);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) dst(i, j) += g(i, j) * r.raw()[j];
    }
    if (t.needs_grad(ir)) {
      Matrix& dst = t.grad_ref(ir);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) dst.raw()[j] += g(i, j) * x(i, j);
    }
  });
}

Var Silu(Var a) {
  Matrix out = Map(a.value(), [](double x) { return x * SigmoidScalar(x); });
  const int ia = a.id();
  return a.tape()->Push(std::move(out), {ia}, [ia](Tape& t, int self) {
    const Matrix& g = t.node_grad(self);
    const Matrix& x = t.node_value(ia);
    Matrix& dst = t.grad_ref(ia);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double s = SigmoidScalar(x.raw()[k]);
      dst.raw()[k] += g.raw()[k] * s * (1.0 + x.raw()[k] * (1.0 - s));
    }
  });
}

Var Sigmoid(Var a) {
  Matrix out = Map(a.value(), SigmoidScalar);
  const int ia = a.id();
  return a.tape()->Push(std::move(out), {ia}, [ia](Tape& t, int self) {
    const Matrix& g = t.node_grad(self);
    const Matrix& y = t.node_value(self);
    Matrix& dst = t.grad_ref(ia);
    for (std::size_t k = 0; k < g.size(); ++k)
      dst.raw()[k] += g.raw()[k] * y.raw()[k] * (1.0 - y.raw()[k]);
  });
}

Var Transpose(Var a) {
  Matrix out = a.value().Transposed();
  const int ia = a.id();
  return a.tape()->Push(std::move(out), {ia}, [ia](Tape& t, int self) {
    const Matrix& g = t.node_grad(self);
    Matrix& dst = t.grad_ref(ia);
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) dst(j, i) += g(i, j);
  });
}

Var Reshape(Var a, std::size_t rows, std::size_t cols) {
  if (rows * cols != a.value().size()) {
    throw DimensionError("Reshape: cannot view " + ShapeOf(a.value()) + " as " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
  Matrix out = a.value().Reshaped(rows, cols);
  const int ia = a.id();
  return a.tape()->Push(std::move(out), {ia}, [ia](Tape& t, int self) {
    const Matrix& g = t.node_grad(self);
    Matrix& dst = t.grad_ref(ia);
    for (std::size_t k = 0; k < g.size(); ++k) dst.raw()[k] += g.raw()[k];
  });
}

Var ConcatCols(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("ConcatCols: no inputs");
  const std::size_t rows = parts[0].rows();
  std::size_t cols = 0;
  std::vector<int> ids;
  std::vector<std::size_t> widths;
  for (Var p : parts) {
    RequireSameTape("ConcatCols", parts[0], p);
    if (p.rows() != rows) {
      throw DimensionError("ConcatCols: row mismatch " + ShapeOf(parts[0].value()) +
                           " vs " + ShapeOf(p.value()));
    }
    ids.push_back(p.id());
    widths.push_back(p.cols());
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (Var p : parts) {
    const Matrix& v = p.value();
    for (std::size_t i = 0; i < rows; ++i)
      std::copy_n(v.raw() + i * v.cols(), v.cols(), out.raw() + i * cols + offset);
    offset += v.cols();
  }
  return parts[0].tape()->Push(
      std::move(out), ids, [ids, widths, rows, cols](Tape& t, int self) {
        const Matrix& g = t.node_grad(self);
        std::size_t off = 0;
        for (std::size_t p = 0; p < ids.size(); ++p) {
          if (t.needs_grad(ids[p])) {
            Matrix& dst = t.grad_ref(ids[p]);
            for (std::size_t i = 0; i < rows; ++i)
              for (std::size_t j = 0; j < widths[p]; ++j)
                dst(i, j) += g.raw()[i * cols + off + j];
          }
          off += widths[p];
        }
      });
}

Var SliceCols(Var a, std::size_t begin, std::size_t end) {
  const Matrix& av = a.value();
  if (begin >= end || end > av.cols()) {
    throw DimensionError("SliceCols: bad range [" + std::to_string(begin) + "," +
                         std::to_string(end) + ") of " + ShapeOf(av));
  }
  Matrix out(av.rows(), end - begin);
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = begin; j < end; ++j) out(i, j - begin) = av(i, j);
  const int ia = a.id();
  return a.tape()->Push(std::move(out), {ia}, [ia, begin, end](Tape& t, int self) {
    const Matrix& g = t.node_grad(self);
    Matrix& dst = t.grad_ref(ia);
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = begin; j < end; ++j) dst(i, j) += g(i, j - begin);
  });
}

Var GatherRows(Var a, const std::vector<std::size_t>& rows) {
  const Matrix& av = a.value();
  Matrix out(rows.size(), av.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= av.rows()) {
      throw DimensionError("GatherRows: row " + std::to_string(rows[r]) + " of " +
                           ShapeOf(av));
    }
    std::copy_n(av.raw() + rows[r] * av.cols(), av.cols(), out.raw() + r * av.cols());
  }
  const int ia = a.id();
  return a.tape()->Push(std::move(out), {ia}, [ia, rows](Tape& t, int self) {
    const Matrix& g = t.node_grad(self);
    Matrix& dst = t.grad_ref(ia);
    const std::size_t c = g.cols();
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t j = 0; j < c; ++j) dst.raw()[rows[r] * c + j] += g.raw()[r * c + j];
  });
}

Var PairHadamard(Var h) {
  const Matrix& hv = h.value();
  const std::size_t n = hv.rows(), f = hv.cols();
  Matrix out(n * n, f);
  for (std::size_t i = 0; i < n; ++i) {
    const double* hi = hv.raw() + i * f;
    for (std::size_t j = 0; j < n; ++j) {
      const double* hj = hv.raw() + j * f;
      double* o = out.raw() + (i * n + j) * f;
      for (std::size_t k = 0; k < f; ++k) o[k] = hi[k] * hj[k];
    }
  }
  const int ih = h.id();
  return h.tape()->Push(std::move(out), {ih}, [ih, n, f](Tape& t, int self) {
    const Matrix& g = t.node_grad(self);
    const Matrix& hv = t.node_value(ih);
    Matrix& dst = t.grad_ref(ih);
    for (std::size_t i = 0; i < n; ++i) {
      double* di = dst.raw() + i * f;
      for (std::size_t j = 0; j < n; ++j) {
        const double* hj = hv.raw() + j * f;
        const double* gij = g.raw() + (i * n + j) * f;
        const double* gji = g.raw() + (j * n + i) * f;
        for (std::size_t k = 0; k < f; ++k) di[k] += (gij[k] + gji[k]) * hj[k];
      }
    }
  });
}

Var RmsNorm(Var a, Var scale, double eps) {
  RequireSameTape("RmsNorm", a, scale);
  const Matrix& x = a.value();
  const Matrix& s = scale.value();
  if (s.rows() != 1 || s.cols() != x.cols()) {
    throw DimensionError("RmsNorm: scale " + ShapeOf(s) + " does not match " + ShapeOf(x));
  }
  const std::size_t m = x.rows(), f = x.cols();
  Matrix out(m, f);
  std::vector<double> inv_rms(m);
  for (std::size_t i = 0; i < m; ++i) {
    double ms = 0.0;
    for (std::size_t j = 0; j < f; ++j) ms += x(i, j) * x(i, j);
    inv_rms[i] = 1.0 / std::sqrt(ms / static_cast<double>(f) + eps);
    for (std::size_t j = 0; j < f; ++j) out(i, j) = x(i, j) * inv_rms[i] * s.raw()[j];
  }
  const int ia = a.id(), is = scale.id();
  return a.tape()->Push(std::move(out), {ia, is},
                        [ia, is, inv_rms = std::move(inv_rms), m, f](Tape& t, int self) {
    const Matrix& g = t.node_grad(self);
    const Matrix& x = t.node_value(ia);
    const Matrix& s = t.node_value(is);
    if (t.needs_grad(is)) {
      Matrix& ds = t.grad_ref(is);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < f; ++j) ds.raw()[j] += g(i, j) * x(i, j) * inv_rms[i];
    }
    if (t.needs_grad(ia)) {
      Matrix& dx = t.grad_ref(ia);
      for (std::size_t i = 0; i < m; ++i) {
        // y_j = x_j r s_j with r = (mean x^2 + eps)^-1/2; dr/dx_k = -r^3 x_k / f.
        double dot = 0.0;
        for (std::size_t j = 0; j < f; ++j) dot += g(i, j) * s.raw()[j] * x(i, j);
        const double r = inv_rms[i];
        const double c = r * r * r * dot / static_cast<double>(f);
        for (std::size_t k = 0; k < f; ++k)
          dx(i, k) += g(i, k) * s.raw()[k] * r - c * x(i, k);
      }
    }
  });
}

Var Dropout(Var a, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw ConfigError("Dropout: rate must be in [0,1)");
  if (rate == 0.0) return a;
  const Matrix& x = a.value();
  Matrix mask(x.rows(), x.cols());
  const double keep = 1.0 / (1.0 - rate);
  std::bernoulli_distribution drop(rate);
  for (std::size_t k = 0; k < mask.size(); ++k) mask.raw()[k] = drop(rng) ? 0.0 : keep;
  Matrix out(x.rows(), x.cols());
  for (std::size_t k = 0; k < out.size(); ++k) out.raw()[k] = x.raw()[k] * mask.raw()[k];
  const int ia = a.id();
  return a.tape()->Push(std::move(out), {ia}, [ia, mask = std::move(mask)](Tape& t, int self) {
    const Matrix& g = t.node_grad(self);
    Matrix& dst = t.grad_ref(ia);
    for (std::size_t k = 0; k < g.size(); ++k) dst.raw()[k] += g.raw()[k] * mask.raw()[k];
  });
}

Var MeanSquare(Var a) {
  const Matrix& x = a.value();
  if (x.empty()) throw DimensionError("MeanSquare: empty input");
  double s = 0.0;
  for (double v : x.data()) s += v * v;
  const double inv = 1.0 / static_cast<double>(x.size());
  const int ia = a.id();
  return a.tape()->Push(Matrix(1, 1, s * inv), {ia}, [ia, inv](Tape& t, int self) {
    const double g = t.node_grad(self).raw()[0];
    const Matrix& x = t.node_value(ia);
    Matrix& dst = t.grad_ref(ia);
    for (std::size_t k = 0; k < x.size(); ++k) dst.raw()[k] += g * 2.0 * inv * x.raw()[k];
  });
}

Var BceWithLogits(Var logits, const Matrix& labels, const Matrix& weights) {
  const Matrix& x = logits.value();
  RequireSameShape("BceWithLogits", x, labels);
  RequireSameShape("BceWithLogits", x, weights);
  double loss = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double z = x.raw()[k];
    const double softplus = std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
    loss += weights.raw()[k] * (softplus - labels.raw()[k] * z);
  }
  const int ix = logits.id();
  return logits.tape()->Push(Matrix(1, 1, loss), {ix}, [ix, labels, weights](Tape& t, int self) {
    const double g = t.node_grad(self).raw()[0];
    const Matrix& x = t.node_value(ix);
    Matrix& dst = t.grad_ref(ix);
    for (std::size_t k = 0; k < x.size(); ++k)
      dst.raw()[k] += g * weights.raw()[k] * (SigmoidScalar(x.raw()[k]) - labels.raw()[k]);
  });
}

}  // namespace pifm::nn
