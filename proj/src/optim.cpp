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

#include "rlglc/optim.hpp"

#include <cmath>

#include <fmt/format.h>

#include "rlglc/error.hpp"

namespace rlglc {

OptimState OptimState::adam(double lr, double weight_decay) {
  OptimState s;
  s.kind = OptimKind::Adam;
  s.learning_rate = lr;
  s.weight_decay = weight_decay;
  return s;
}

OptimState OptimState::sgd(double lr, double weight_decay) {
  OptimState s;
  s.kind = OptimKind::Sgd;
  s.learning_rate = lr;
  s.weight_decay = weight_decay;
  return s;
}

void step(std::span<Tensor* const> params, std::span<const Tensor> grads,
          std::span<const std::string> names, OptimState& state) {
  if (params.size() != grads.size() || names.size() != params.size()) {
    throw ContractError("optim step: params/grads/names length mismatch");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    require_same_shape(*params[k], grads[k], "optim step");
    if (!grads[k].all_finite()) {
      throw NumericError(fmt::format("non-finite gradient for parameter '{}'", names[k]));
    }
  }
  if (state.kind == OptimKind::Adam && state.first_moment.empty()) {
    for (Tensor* p : params) {
      state.first_moment.emplace_back(p->rows(), p->cols());
      state.second_moment.emplace_back(p->rows(), p->cols());
    }
  }
  if (state.kind == OptimKind::Adam && state.first_moment.size() != params.size()) {
    throw ContractError("optim step: moment count does not match parameters");
  }
  ++state.steps;
  const double lr = state.learning_rate;
  const double wd = state.weight_decay;
  const double t = static_cast<double>(state.steps);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k]->values();
    auto g = grads[k].values();
    if (state.kind == OptimKind::Sgd) {
      for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * (g[i] + wd * p[i]);
      continue;
    }
    auto m = state.first_moment[k].values();
    auto v = state.second_moment[k].values();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g[i] + wd * p[i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * gi;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * gi * gi;
      p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + state.epsilon);
    }
  }
}

}  // namespace rlglc
