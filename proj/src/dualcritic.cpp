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

#include "rlglc/dualcritic.hpp"

#include <cmath>
#include <memory>

#include <fmt/format.h>

#include "rlglc/error.hpp"

namespace rlglc {

namespace {

ad::Var weight_column(ad::Tape& tape, std::span<const double> w, std::size_t n, const char* what) {
  Tensor col(n, 1, 1.0 / static_cast<double>(n));
  if (!w.empty()) {
    if (w.size() != n) {
      throw DimensionError(fmt::format("dual_objective: {} weights {} for {} samples", what,
                                       w.size(), n));
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!(w[i] >= 0.0)) throw ContractError("dual_objective: negative sample weight");
      col(i, 0) = w[i];
    }
  }
  return tape.constant(std::move(col));
}

void require_nonnegative(const Tensor& z) {
  for (double v : z.values()) {
    if (v < 0.0) {
      throw ContractError(
          fmt::format("gradient_penalty: negative feature entry {} (features must be measures)", v));
    }
  }
}

}  // namespace

Critic Critic::make(std::size_t input_width, const std::vector<std::size_t>& hidden, double lambda,
                    double beta, Rng& rng) {
  std::vector<std::size_t> widths{input_width};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(1);
  Critic c{Network(widths, OutputHead::Sigmoid, rng), lambda, beta};
  c.validate();
  return c;
}

void Critic::validate() const {
  if (net.head() == OutputHead::Linear) throw ContractError("Critic: output head must be bounded");
  if (net.output_width() != 1) throw ContractError("Critic: output must be scalar per sample");
  if (!(lambda >= 0.0)) throw ContractError(fmt::format("Critic: lambda {} < 0", lambda));
  if (!(beta >= 0.0 && beta < 1.0)) throw ContractError(fmt::format("Critic: beta {} not in [0,1)", beta));
}

ad::Var measure_features(ad::Var features, MeasureTransform mode) {
  ad::Var pos;
  switch (mode) {
    case MeasureTransform::SoftplusNormalize: pos = ad::softplus(features); break;
    case MeasureTransform::ReluNormalize: pos = ad::leaky_relu(features, 0.0); break;
    case MeasureTransform::Softmax:
      return ad::exp(features - ad::expand_cols(ad::logsumexp_rows(features), features.cols()));
  }
  return pos * ad::expand_cols(ad::reciprocal(ad::sum_cols(pos)), features.cols());
}

ad::Var dual_objective(const Critic& critic, std::span<const ad::Var> params, ad::Var zs,
                       ad::Var zt, std::span<const double> source_weights,
                       std::span<const double> target_weights) {
  critic.validate();
  if (zs.rows() == 0 || zt.rows() == 0) throw ContractError("dual_objective: empty batch");
  ad::Tape& tape = zs.tape();
  ad::Var fs = critic.net.apply(params, zs);
  ad::Var ft = critic.net.apply(params, zt);
  ad::Var es = ad::sum(fs * weight_column(tape, source_weights, zs.rows(), "source"));
  ad::Var et = ad::sum(ft * weight_column(tape, target_weights, zt.rows(), "target"));
  return es - (1.0 - critic.beta) * et;
}

double dual_objective(const Critic& critic, const Tensor& zs, const Tensor& zt,
                      std::span<const double> source_weights,
                      std::span<const double> target_weights) {
  ad::Tape tape;
  auto params = critic.net.bind(tape, false);
  return dual_objective(critic, params, tape.constant(zs), tape.constant(zt), source_weights,
                        target_weights)
      .value()
      .item();
}

ad::Var gradient_penalty(const Critic& critic, std::span<const ad::Var> params, ad::Var z) {
  critic.validate();
  require_nonnegative(z.value());
  ad::Tape& tape = z.tape();
  // Constant features carry no gradient back; a fresh leaf with the same
  // value still yields the input gradient the penalty needs.
  if (!z.requires_grad()) z = tape.variable(z.value());
  // Each output depends on its own row only, so the gradient of the sum
  // holds every per-sample input gradient.
  ad::Var f = ad::sum(critic.net.apply(params, z));
  ad::Var g = tape.grad(f, std::span<const ad::Var>(&z, 1))[0];
  ad::Var dev = ad::add_scalar(ad::square(g) * z, -1.0);
  const double scale = critic.lambda / (2.0 * static_cast<double>(z.rows() * z.cols()));
  return scale * ad::sum(ad::square(dev));
}

double gradient_penalty(const Critic& critic, const Tensor& z) {
  require_nonnegative(z);
  ad::Tape tape;
  auto params = critic.net.bind(tape, false);
  return gradient_penalty(critic, params, tape.variable(z)).value().item();
}

CriticTrace train_critic(Critic& critic, const Tensor& zs, const Tensor& zt, std::size_t steps,
                         OptimState& optim, std::span<const double> source_weights,
                         std::span<const double> target_weights) {
  critic.validate();
  CriticTrace trace;
  auto names = critic.net.parameter_names("critic.");
  for (std::size_t s = 0; s < steps; ++s) {
    ad::Tape tape;
    auto params = critic.net.bind(tape, true);
    ad::Var vs = tape.variable(zs);
    ad::Var vt = tape.variable(zt);
    ad::Var dual = dual_objective(critic, params, vs, vt, source_weights, target_weights);
    ad::Var objective = dual;
    if (critic.lambda > 0.0) {
      objective = objective - gradient_penalty(critic, params, vs) -
                  gradient_penalty(critic, params, vt);
    }
    const double value = objective.value().item();
    if (!std::isfinite(value)) {
      throw NumericError(fmt::format("train_critic: objective not finite at step {}", s));
    }
    trace.objective.push_back(value);
    trace.dual.push_back(dual.value().item());
    auto grads = tape.gradients(-objective, params);
    try {
      step(critic.net.parameters(), grads, names, optim);
    } catch (const NumericError& e) {
      throw NumericError(fmt::format("train_critic: step {}: {}", s, e.what()));
    }
  }
  return trace;
}

double estimate_alignment_residual(const Critic& critic, const Tensor& zs, const Tensor& zt,
                                   std::span<const double> source_weights,
                                   std::span<const double> target_weights) {
  return dual_objective(critic, zs, zt, source_weights, target_weights) - critic.beta;
}

}  // namespace rlglc
