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

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rlglc/autodiff.hpp"
#include "rlglc/rng.hpp"
#include "rlglc/tensor.hpp"

namespace rlglc {

inline constexpr double kLeakySlope = 0.01;

// Clamp bounds the output to [0, 1] by hard clipping.
enum class OutputHead { Linear, Sigmoid, Clamp };

struct DenseLayer {
  Tensor weight;  // in x out
  Tensor bias;    // 1 x out
};

// Fully connected perceptron: leaky-ReLU on hidden layers, configurable head.
class Network {
 public:
  Network() = default;
  // widths = {in, hidden..., out}. Weights and biases drawn from
  // U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  Network(std::vector<std::size_t> widths, OutputHead head, Rng& rng);
  Network(std::vector<DenseLayer> layers, OutputHead head);

  std::size_t input_width() const;
  std::size_t output_width() const;
  std::size_t layer_count() const { return layers_.size(); }
  OutputHead head() const { return head_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  // Parameters in a fixed order: layer0.weight, layer0.bias, layer1.weight...
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  std::vector<std::string> parameter_names(const std::string& prefix = "") const;
  // True for weight matrices, false for biases, aligned with parameters().
  std::vector<bool> weight_mask() const;

  // Registers the parameters on `tape` as variables (or constants when
  // frozen) in parameters() order.
  std::vector<ad::Var> bind(ad::Tape& tape, bool trainable = true) const;
  ad::Var apply(std::span<const ad::Var> bound, ad::Var input) const;

  // Value-only evaluation.
  Tensor evaluate(const Tensor& input) const;

 private:
  std::vector<DenseLayer> layers_;
  OutputHead head_ = OutputHead::Linear;
};

struct ForwardPass {
  std::unique_ptr<ad::Tape> tape;
  ad::Var input;
  ad::Var output;
  std::vector<ad::Var> params;
};

// Runs `net` on `input`, recording on a fresh tape. Throws DimensionError on
// an input width mismatch.
ForwardPass forward(const Network& net, const Tensor& input);

// Gradients of the scalar `seed` with respect to the pass parameters.
std::vector<Tensor> backward(ForwardPass& pass, ad::Var seed);

// Builds a scalar loss on `tape` from the bound parameters.
using LossBuilder = std::function<ad::Var(ad::Tape&, std::span<const ad::Var>)>;

// Analytic gradient of `loss` at `params`.
std::vector<Tensor> analytic_gradient(const LossBuilder& loss, std::span<const Tensor> params);

// Max over every parameter entry of
//   |analytic - central_difference| / max(1, |central_difference|).
double finite_diff_check(const LossBuilder& loss, std::span<const Tensor> params,
                         double eps = 1e-5);

// Same check for a loss known only by value, given its analytic gradient.
double finite_diff_check(const std::function<double(std::span<const Tensor>)>& loss,
                         std::span<const Tensor> params, std::span<const Tensor> analytic,
                         double eps = 1e-5);

}  // namespace rlglc
