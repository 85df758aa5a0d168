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

#pragma once

// Reverse-mode automatic differentiation over rank-2 tensors.
//
// A Tape records every primitive in creation order. Tape::grad walks the
// records backwards from a scalar output, and expresses each local
// derivative with the same primitives, appending them to the tape. The
// returned gradients are therefore ordinary Vars that can be differentiated
// again, which is what the gradient-penalty term needs (the penalty is a
// function of input gradients and is minimised over the critic weights).

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <span>
#include <vector>

#include "rlglc/tensor.hpp"

namespace rlglc::ad {

class Tape;

class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  std::size_t id() const { return id_; }
  Tape& tape() const { return *tape_; }
  bool valid() const { return tape_ != nullptr; }
  bool requires_grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

enum class Op : std::uint8_t {
  Leaf,
  MatMul,
  Transpose,
  Add,
  Sub,
  Mul,
  MulConst,
  Scale,
  AddScalar,
  AddRow,
  SumAll,
  SumRows,
  SumCols,
  ExpandAll,
  ExpandRows,
  ExpandCols,
  LeakyRelu,
  Sigmoid,
  Clamp01,
  Softplus,
  Exp,
  Log,
  Square,
  Reciprocal,
  LogSumExpRows,
  Pick,
  Scatter,
  GatherRows,
  ScatterRows,
};

using Index = std::shared_ptr<const std::vector<std::size_t>>;

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf that gradients are never taken with respect to.
  Var constant(Tensor value);
  // Leaf that participates in differentiation.
  Var variable(Tensor value);

  std::size_t size() const { return nodes_.size(); }
  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  Op op(std::size_t id) const { return nodes_[id].op; }

  // Gradients of the scalar `output` with respect to each of `wrt`, as Vars
  // on this tape. Vars that `output` does not depend on get exact zeros.
  // Throws ContractError when `output` is not 1x1.
  std::vector<Var> grad(Var output, std::span<const Var> wrt);

  // Same, materialised.
  std::vector<Tensor> gradients(Var output, std::span<const Var> wrt);

  struct Node {
    Op op = Op::Leaf;
    Tensor value;
    std::size_t a = 0;
    std::size_t b = 0;
    double scalar = 0.0;
    Index index;
    std::shared_ptr<const Tensor> aux;
    bool requires_grad = false;
  };

  // Appends a computed node. Used by the primitive ops below.
  Var record(Node node);
  const Node& node(std::size_t id) const { return nodes_[id]; }

 private:
  void backward_node(std::size_t id, Var g, std::vector<Var>& grads);

  std::deque<Node> nodes_;
};

// Primitives. All operands must live on the same tape.
Var matmul(Var a, Var b);
Var transpose(Var a);
Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);  // elementwise
Var operator*(double s, Var a);
Var operator-(Var a);
Var mul_const(Var a, std::shared_ptr<const Tensor> c);
Var add_scalar(Var a, double s);
Var add_row(Var a, Var row);  // broadcast a 1xc row over every row of a
Var sum(Var a);               // -> 1x1
Var mean(Var a);              // -> 1x1
Var sum_rows(Var a);          // rxc -> 1xc
Var sum_cols(Var a);          // rxc -> rx1
Var expand_all(Var a, std::size_t rows, std::size_t cols);  // 1x1 -> rxc
Var expand_rows(Var a, std::size_t rows);                   // 1xc -> rxc
Var expand_cols(Var a, std::size_t cols);                   // rx1 -> rxc
Var leaky_relu(Var a, double slope);
Var sigmoid(Var a);
Var clamp01(Var a);  // min(max(a, 0), 1); gradient 1 strictly inside
Var softplus(Var a);
Var exp(Var a);
Var log(Var a);
Var square(Var a);
Var reciprocal(Var a);
Var logsumexp_rows(Var a);  // rxc -> rx1, max-shifted
Var pick(Var a, Index cols);                                 // rxc -> rx1
Var scatter(Var a, Index cols, std::size_t width);           // rx1 -> rxwidth
Var gather_rows(Var a, Index rows);                          // nxc -> mxc
Var scatter_rows(Var a, Index rows, std::size_t n);          // mxc -> nxc (summing)

Index make_index(std::vector<std::size_t> idx);

}  // namespace rlglc::ad
