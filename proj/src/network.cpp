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

#include "rlglc/network.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "rlglc/error.hpp"

namespace rlglc {

Network::Network(std::vector<std::size_t> widths, OutputHead head, Rng& rng) : head_(head) {
  if (widths.size() < 2) throw ContractError("Network: need at least input and output widths");
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t in = widths[l], out = widths[l + 1];
    if (in == 0 || out == 0) throw ContractError("Network: zero layer width");
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    DenseLayer layer{Tensor(in, out), Tensor(1, out)};
    for (double& w : layer.weight.values()) w = rng.uniform(-bound, bound);
    for (double& b : layer.bias.values()) b = rng.uniform(-bound, bound);
    layers_.push_back(std::move(layer));
  }
}

Network::Network(std::vector<DenseLayer> layers, OutputHead head)
    : layers_(std::move(layers)), head_(head) {
  if (layers_.empty()) throw ContractError("Network: no layers");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& L = layers_[l];
    if (L.bias.rows() != 1 || L.bias.cols() != L.weight.cols()) {
      throw DimensionError(fmt::format("Network: layer {} bias shape {}", l, L.bias.shape_string()));
    }
    if (l > 0 && layers_[l - 1].weight.cols() != L.weight.rows()) {
      throw DimensionError(fmt::format("Network: layer {} input width mismatch", l));
    }
  }
}

std::size_t Network::input_width() const { return layers_.front().weight.rows(); }
std::size_t Network::output_width() const { return layers_.back().weight.cols(); }

std::vector<Tensor*> Network::parameters() {
  std::vector<Tensor*> p;
  for (auto& L : layers_) {
    p.push_back(&L.weight);
    p.push_back(&L.bias);
  }
  return p;
}

std::vector<const Tensor*> Network::parameters() const {
  std::vector<const Tensor*> p;
  for (const auto& L : layers_) {
    p.push_back(&L.weight);
    p.push_back(&L.bias);
  }
  return p;
}

std::vector<std::string> Network::parameter_names(const std::string& prefix) const {
  std::vector<std::string> names;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    names.push_back(fmt::format("{}layer{}.weight", prefix, l));
    names.push_back(fmt::format("{}layer{}.bias", prefix, l));
  }
  return names;
}

std::vector<bool> Network::weight_mask() const {
  std::vector<bool> mask;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    mask.push_back(true);
    mask.push_back(false);
  }
  return mask;
}

std::vector<ad::Var> Network::bind(ad::Tape& tape, bool trainable) const {
  std::vector<ad::Var> vars;
  for (const Tensor* p : parameters()) {
    vars.push_back(trainable ? tape.variable(*p) : tape.constant(*p));
  }
  return vars;
}

ad::Var Network::apply(std::span<const ad::Var> bound, ad::Var input) const {
  if (bound.size() != 2 * layers_.size()) throw ContractError("Network::apply: wrong parameter count");
  if (input.cols() != input_width()) {
    throw DimensionError(fmt::format("network expects input width {}, got {}", input_width(),
                                     input.cols()));
  }
  ad::Var h = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    h = ad::add_row(ad::matmul(h, bound[2 * l]), bound[2 * l + 1]);
    if (l + 1 < layers_.size()) h = ad::leaky_relu(h, kLeakySlope);
  }
  if (head_ == OutputHead::Sigmoid) h = ad::sigmoid(h);
  if (head_ == OutputHead::Clamp) h = ad::clamp01(h);
  return h;
}

Tensor Network::evaluate(const Tensor& input) const {
  ad::Tape tape;
  auto params = bind(tape, false);
  return apply(params, tape.constant(input)).value();
}

ForwardPass forward(const Network& net, const Tensor& input) {
  ForwardPass pass;
  pass.tape = std::make_unique<ad::Tape>();
  pass.params = net.bind(*pass.tape, true);
  pass.input = pass.tape->constant(input);
  pass.output = net.apply(pass.params, pass.input);
  return pass;
}

std::vector<Tensor> backward(ForwardPass& pass, ad::Var seed) {
  return pass.tape->gradients(seed, pass.params);
}

std::vector<Tensor> analytic_gradient(const LossBuilder& loss, std::span<const Tensor> params) {
  ad::Tape tape;
  std::vector<ad::Var> vars;
  for (const Tensor& p : params) vars.push_back(tape.variable(p));
  ad::Var out = loss(tape, vars);
  return tape.gradients(out, vars);
}

namespace {

double value_of(const LossBuilder& loss, std::span<const Tensor> params) {
  ad::Tape tape;
  std::vector<ad::Var> vars;
  for (const Tensor& p : params) vars.push_back(tape.constant(p));
  return loss(tape, vars).value().item();
}

}  // namespace

double finite_diff_check(const LossBuilder& loss, std::span<const Tensor> params, double eps) {
  const auto analytic = analytic_gradient(loss, params);
  return finite_diff_check([&](std::span<const Tensor> p) { return value_of(loss, p); }, params,
                           analytic, eps);
}

double finite_diff_check(const std::function<double(std::span<const Tensor>)>& loss,
                         std::span<const Tensor> params, std::span<const Tensor> analytic,
                         double eps) {
  if (analytic.size() != params.size()) throw ContractError("finite_diff_check: size mismatch");
  std::vector<Tensor> probe(params.begin(), params.end());
  double worst = 0.0;
  for (std::size_t k = 0; k < probe.size(); ++k) {
    require_same_shape(probe[k], analytic[k], "finite_diff_check");
    auto values = probe[k].values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + eps;
      const double up = loss(probe);
      values[i] = saved - eps;
      const double down = loss(probe);
      values[i] = saved;
      const double fd = (up - down) / (2.0 * eps);
      const double err = std::abs(analytic[k].values()[i] - fd) / std::max(1.0, std::abs(fd));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace rlglc
