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

#include <cstddef>
#include <span>
#include <vector>

#include "rlglc/autodiff.hpp"
#include "rlglc/network.hpp"
#include "rlglc/optim.hpp"
#include "rlglc/ot.hpp"

namespace rlglc {

// Bounded critic for the relaxed dual. The output head must keep values in
// [0, 1]: with unequal weights on the two expectations an unbounded critic
// could grow a constant offset forever.
struct Critic {
  Network net;
  double lambda = 10.0;  // gradient-penalty weight
  double beta = 0.4;     // relaxation, in [0, 1)

  // Sigmoid-headed MLP with the given hidden widths.
  static Critic make(std::size_t input_width, const std::vector<std::size_t>& hidden,
                     double lambda, double beta, Rng& rng);
  // Throws ContractError when the head is unbounded or lambda/beta are out
  // of range.
  void validate() const;
};

// Differentiable form of measure_weights: every row becomes a
// non-negative vector summing to one.
ad::Var measure_features(ad::Var features, MeasureTransform mode);

// E_s f - (1 - beta) E_t f. Sample weights default to uniform 1/N; when
// given they are used as-is.
double dual_objective(const Critic& critic, const Tensor& zs, const Tensor& zt,
                      std::span<const double> source_weights = {},
                      std::span<const double> target_weights = {});
ad::Var dual_objective(const Critic& critic, std::span<const ad::Var> params, ad::Var zs,
                       ad::Var zt, std::span<const double> source_weights = {},
                       std::span<const double> target_weights = {});

// lambda/(2NM) * sum_i sum_j ((df/dz_ij)^2 * z_ij - 1)^2 over one batch.
// Throws ContractError on a negative feature entry.
double gradient_penalty(const Critic& critic, const Tensor& z);
ad::Var gradient_penalty(const Critic& critic, std::span<const ad::Var> params, ad::Var z);

struct CriticTrace {
  std::vector<double> objective;  // dual minus both penalties, before each step
  std::vector<double> dual;
};

// Gradient ascent on dual_objective - penalty(zs) - penalty(zt) for `steps`
// updates. Throws NumericError carrying the step index on divergence.
CriticTrace train_critic(Critic& critic, const Tensor& zs, const Tensor& zt, std::size_t steps,
                         OptimState& optim, std::span<const double> source_weights = {},
                         std::span<const double> target_weights = {});

// dual_objective - beta: the dual value minus what the constant critic
// f = 1 contributes. Near zero when the target is contained in the source.
double estimate_alignment_residual(const Critic& critic, const Tensor& zs, const Tensor& zt,
                                   std::span<const double> source_weights = {},
                                   std::span<const double> target_weights = {});

}  // namespace rlglc
