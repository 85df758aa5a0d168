// Copyright 2026 The RLGLC Lab Authors
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

#include "rlglc/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "rlglc/error.hpp"

namespace rlglc::ad {

const Tensor& Var::value() const { return tape_->value(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Index make_index(std::vector<std::size_t> idx) {
  return std::make_shared<const std::vector<std::size_t>>(std::move(idx));
}

Var Tape::record(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  return record(std::move(n));
}

Var Tape::variable(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  return record(std::move(n));
}

namespace {

Tape& same_tape(Var a, Var b) {
  if (&a.tape() != &b.tape()) throw ContractError("autodiff: operands on different tapes");
  return a.tape();
}

Var unary(Op op, Var a, Tensor value, double scalar = 0.0, Index index = {}) {
  Tape::Node n;
  n.op = op;
  n.value = std::move(value);
  n.a = a.id();
  n.scalar = scalar;
  n.index = std::move(index);
  n.requires_grad = a.requires_grad();
  return a.tape().record(std::move(n));
}

Var binary(Op op, Var a, Var b, Tensor value) {
  Tape& t = same_tape(a, b);
  Tape::Node n;
  n.op = op;
  n.value = std::move(value);
  n.a = a.id();
  n.b = b.id();
  n.requires_grad = a.requires_grad() || b.requires_grad();
  return t.record(std::move(n));
}

template <typename F>
Tensor map(const Tensor& x, F f) {
  Tensor out(x.rows(), x.cols());
  auto in = x.values();
  auto o = out.values();
  for (std::size_t i = 0; i < in.size(); ++i) o[i] = f(in[i]);
  return out;
}

template <typename F>
Tensor zip(const Tensor& x, const Tensor& y, F f, const char* what) {
  require_same_shape(x, y, what);
  Tensor out(x.rows(), x.cols());
  auto a = x.values();
  auto b = y.values();
  auto o = out.values();
  for (std::size_t i = 0; i < a.size(); ++i) o[i] = f(a[i], b[i]);
  return out;
}

double stable_softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var matmul(Var a, Var b) {
  same_tape(a, b);
  return binary(Op::MatMul, a, b, rlglc::matmul(a.value(), b.value()));
}

Var transpose(Var a) { return unary(Op::Transpose, a, rlglc::transpose(a.value())); }

Var operator+(Var a, Var b) {
  same_tape(a, b);
  return binary(Op::Add, a, b, zip(a.value(), b.value(), std::plus<>{}, "add"));
}

Var operator-(Var a, Var b) {
  same_tape(a, b);
  return binary(Op::Sub, a, b, zip(a.value(), b.value(), std::minus<>{}, "sub"));
}

Var operator*(Var a, Var b) {
  same_tape(a, b);
  return binary(Op::Mul, a, b, zip(a.value(), b.value(), std::multiplies<>{}, "mul"));
}

Var operator*(double s, Var a) {
  return unary(Op::Scale, a, map(a.value(), [s](double x) { return s * x; }), s);
}

Var operator-(Var a) { return -1.0 * a; }

Var mul_const(Var a, std::shared_ptr<const Tensor> c) {
  Tensor v = zip(a.value(), *c, std::multiplies<>{}, "mul_const");
  Tape::Node n;
  n.op = Op::MulConst;
  n.value = std::move(v);
  n.a = a.id();
  n.aux = std::move(c);
  n.requires_grad = a.requires_grad();
  return a.tape().record(std::move(n));
}

Var add_scalar(Var a, double s) {
  return unary(Op::AddScalar, a, map(a.value(), [s](double x) { return x + s; }), s);
}

Var add_row(Var a, Var row) {
  same_tape(a, row);
  const Tensor& x = a.value();
  const Tensor& r = row.value();
  if (r.rows() != 1 || r.cols() != x.cols()) {
    throw DimensionError(fmt::format("add_row: {} + {}", x.shape_string(), r.shape_string()));
  }
  Tensor out = x;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) += r(0, j);
  return binary(Op::AddRow, a, row, std::move(out));
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  return unary(Op::SumAll, a, Tensor::scalar(s));
}

Var mean(Var a) {
  const auto n = static_cast<double>(a.value().size());
  if (n == 0) throw ContractError("mean of empty tensor");
  return (1.0 / n) * sum(a);
}

Var sum_rows(Var a) {
  const Tensor& x = a.value();
  Tensor out(1, x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(0, j) += x(i, j);
  return unary(Op::SumRows, a, std::move(out));
}

Var sum_cols(Var a) {
  const Tensor& x = a.value();
  Tensor out(x.rows(), 1);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) s += x(i, j);
    out(i, 0) = s;
  }
  return unary(Op::SumCols, a, std::move(out));
}

Var expand_all(Var a, std::size_t rows, std::size_t cols) {
  if (a.value().size() != 1) throw DimensionError("expand_all: operand is not a scalar");
  return unary(Op::ExpandAll, a, Tensor(rows, cols, a.value().item()));
}

Var expand_rows(Var a, std::size_t rows) {
  const Tensor& x = a.value();
  if (x.rows() != 1) throw DimensionError("expand_rows: operand is not a row");
  Tensor out(rows, x.cols());
  for (std::size_t i = 0; i < rows; ++i)
    std::copy(x.values().begin(), x.values().end(), out.row_span(i).begin());
  return unary(Op::ExpandRows, a, std::move(out));
}

Var expand_cols(Var a, std::size_t cols) {
  const Tensor& x = a.value();
  if (x.cols() != 1) throw DimensionError("expand_cols: operand is not a column");
  Tensor out(x.rows(), cols);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = x(i, 0);
  return unary(Op::ExpandCols, a, std::move(out));
}

Var leaky_relu(Var a, double slope) {
  return unary(Op::LeakyRelu, a,
               map(a.value(), [slope](double x) { return x > 0.0 ? x : slope * x; }), slope);
}

Var sigmoid(Var a) { return unary(Op::Sigmoid, a, map(a.value(), stable_sigmoid)); }
Var clamp01(Var a) {
  return unary(Op::Clamp01, a, map(a.value(), [](double x) { return std::clamp(x, 0.0, 1.0); }));
}
Var softplus(Var a) { return unary(Op::Softplus, a, map(a.value(), stable_softplus)); }
Var exp(Var a) { return unary(Op::Exp, a, map(a.value(), [](double x) { return std::exp(x); })); }
Var log(Var a) { return unary(Op::Log, a, map(a.value(), [](double x) { return std::log(x); })); }
Var square(Var a) { return unary(Op::Square, a, map(a.value(), [](double x) { return x * x; })); }
Var reciprocal(Var a) {
  return unary(Op::Reciprocal, a, map(a.value(), [](double x) { return 1.0 / x; }));
}

Var logsumexp_rows(Var a) {
  const Tensor& x = a.value();
  Tensor out(x.rows(), 1);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto row = x.row_span(i);
    const double m = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double v : row) s += std::exp(v - m);
    out(i, 0) = m + std::log(s);
  }
  return unary(Op::LogSumExpRows, a, std::move(out));
}

Var pick(Var a, Index cols) {
  const Tensor& x = a.value();
  if (cols->size() != x.rows()) throw DimensionError("pick: one column index per row required");
  Tensor out(x.rows(), 1);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if ((*cols)[i] >= x.cols()) throw DimensionError("pick: column index out of range");
    out(i, 0) = x(i, (*cols)[i]);
  }
  return unary(Op::Pick, a, std::move(out), 0.0, std::move(cols));
}

Var scatter(Var a, Index cols, std::size_t width) {
  const Tensor& x = a.value();
  if (x.cols() != 1 || cols->size() != x.rows()) throw DimensionError("scatter: shape mismatch");
  Tensor out(x.rows(), width);
  for (std::size_t i = 0; i < x.rows(); ++i) out(i, (*cols)[i]) = x(i, 0);
  return unary(Op::Scatter, a, std::move(out), 0.0, std::move(cols));
}

Var gather_rows(Var a, Index rows) {
  Tensor out = select_rows(a.value(), *rows);
  return unary(Op::GatherRows, a, std::move(out), 0.0, std::move(rows));
}

Var scatter_rows(Var a, Index rows, std::size_t n) {
  const Tensor& x = a.value();
  if (rows->size() != x.rows()) throw DimensionError("scatter_rows: shape mismatch");
  Tensor out(n, x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const std::size_t r = (*rows)[i];
    if (r >= n) throw DimensionError("scatter_rows: row index out of range");
    for (std::size_t j = 0; j < x.cols(); ++j) out(r, j) += x(i, j);
  }
  return unary(Op::ScatterRows, a, std::move(out), 0.0, std::move(rows));
}

namespace {

void accumulate(std::vector<Var>& grads, std::size_t id, Var g) {
  grads[id] = grads[id].valid() ? grads[id] + g : g;
}

}  // namespace

void Tape::backward_node(std::size_t id, Var g, std::vector<Var>& grads) {
  const Node& n = nodes_[id];
  const bool ga = nodes_[n.a].requires_grad;
  const Var self(this, id);
  const Var a(this, n.a);
  switch (n.op) {
    case Op::Leaf:
      return;
    case Op::MatMul: {
      const Var b(this, n.b);
      if (ga) accumulate(grads, n.a, ad::matmul(g, ad::transpose(b)));
      if (nodes_[n.b].requires_grad) accumulate(grads, n.b, ad::matmul(ad::transpose(a), g));
      return;
    }
    case Op::Transpose:
      accumulate(grads, n.a, ad::transpose(g));
      return;
    case Op::Add:
      if (ga) accumulate(grads, n.a, g);
      if (nodes_[n.b].requires_grad) accumulate(grads, n.b, g);
      return;
    case Op::Sub:
      if (ga) accumulate(grads, n.a, g);
      if (nodes_[n.b].requires_grad) accumulate(grads, n.b, -g);
      return;
    case Op::Mul: {
      const Var b(this, n.b);
      if (ga) accumulate(grads, n.a, g * b);
      if (nodes_[n.b].requires_grad) accumulate(grads, n.b, g * a);
      return;
    }
    case Op::MulConst:
      accumulate(grads, n.a, mul_const(g, n.aux));
      return;
    case Op::Scale:
      accumulate(grads, n.a, n.scalar * g);
      return;
    case Op::AddScalar:
      accumulate(grads, n.a, g);
      return;
    case Op::AddRow:
      if (ga) accumulate(grads, n.a, g);
      if (nodes_[n.b].requires_grad) accumulate(grads, n.b, sum_rows(g));
      return;
    case Op::SumAll: {
      const Tensor& x = nodes_[n.a].value;
      accumulate(grads, n.a, expand_all(g, x.rows(), x.cols()));
      return;
    }
    case Op::SumRows:
      accumulate(grads, n.a, expand_rows(g, nodes_[n.a].value.rows()));
      return;
    case Op::SumCols:
      accumulate(grads, n.a, expand_cols(g, nodes_[n.a].value.cols()));
      return;
    case Op::ExpandAll:
      accumulate(grads, n.a, sum(g));
      return;
    case Op::ExpandRows:
      accumulate(grads, n.a, sum_rows(g));
      return;
    case Op::ExpandCols:
      accumulate(grads, n.a, sum_cols(g));
      return;
    case Op::LeakyRelu: {
      const double slope = n.scalar;
      auto mask = std::make_shared<const Tensor>(
          map(nodes_[n.a].value, [slope](double x) { return x > 0.0 ? 1.0 : slope; }));
      accumulate(grads, n.a, mul_const(g, std::move(mask)));
      return;
    }
    case Op::Clamp01: {
      auto mask = std::make_shared<const Tensor>(
          map(nodes_[n.a].value, [](double x) { return x > 0.0 && x < 1.0 ? 1.0 : 0.0; }));
      accumulate(grads, n.a, mul_const(g, std::move(mask)));
      return;
    }
    case Op::Sigmoid:
      accumulate(grads, n.a, g * (self * add_scalar(-self, 1.0)));
      return;
    case Op::Softplus:
      accumulate(grads, n.a, g * sigmoid(a));
      return;
    case Op::Exp:
      accumulate(grads, n.a, g * self);
      return;
    case Op::Log:
      accumulate(grads, n.a, g * reciprocal(a));
      return;
    case Op::Square:
      accumulate(grads, n.a, 2.0 * (g * a));
      return;
    case Op::Reciprocal:
      accumulate(grads, n.a, -(g * square(self)));
      return;
    case Op::LogSumExpRows: {
      const std::size_t c = nodes_[n.a].value.cols();
      accumulate(grads, n.a, expand_cols(g, c) * ad::exp(a - expand_cols(self, c)));
      return;
    }
    case Op::Pick:
      accumulate(grads, n.a, scatter(g, n.index, nodes_[n.a].value.cols()));
      return;
    case Op::Scatter:
      accumulate(grads, n.a, pick(g, n.index));
      return;
    case Op::GatherRows:
      accumulate(grads, n.a, scatter_rows(g, n.index, nodes_[n.a].value.rows()));
      return;
    case Op::ScatterRows:
      accumulate(grads, n.a, gather_rows(g, n.index));
      return;
  }
}

std::vector<Var> Tape::grad(Var output, std::span<const Var> wrt) {
  if (&output.tape() != this) throw ContractError("grad: output lives on another tape");
  if (output.value().size() != 1) {
    throw ContractError("grad: seed node must be scalar, got shape " +
                        output.value().shape_string());
  }
  const std::size_t n = nodes_.size();
  std::vector<Var> grads(n);
  if (output.requires_grad()) {
    grads[output.id()] = constant(Tensor::scalar(1.0));
    for (std::size_t id = output.id() + 1; id-- > 0;) {
      if (!grads[id].valid() || !nodes_[id].requires_grad) continue;
      backward_node(id, grads[id], grads);
    }
  }
  std::vector<Var> out;
  out.reserve(wrt.size());
  for (const Var& w : wrt) {
    if (&w.tape() != this) throw ContractError("grad: wrt lives on another tape");
    if (w.id() < n && grads[w.id()].valid()) {
      out.push_back(grads[w.id()]);
    } else {
      const Tensor& v = w.value();
      out.push_back(constant(Tensor(v.rows(), v.cols())));
    }
  }
  return out;
}

std::vector<Tensor> Tape::gradients(Var output, std::span<const Var> wrt) {
  std::vector<Var> g = grad(output, wrt);
  std::vector<Tensor> out;
  out.reserve(g.size());
  for (const Var& v : g) out.push_back(v.value());
  return out;
}

}  // namespace rlglc::ad
