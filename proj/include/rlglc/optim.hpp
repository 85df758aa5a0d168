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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rlglc/tensor.hpp"

namespace rlglc {

enum class OptimKind { Sgd, Adam };

struct OptimState {
  OptimKind kind = OptimKind::Adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;  // L2 coefficient folded into the gradient
  std::uint64_t steps = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;

  static OptimState adam(double lr, double weight_decay = 0.0);
  static OptimState sgd(double lr, double weight_decay = 0.0);
};

// One descent update of `params` along `grads`. Moments are allocated on the
// first call. Throws NumericError naming the offending parameter when a
// gradient is not finite, before anything is modified.
void step(std::span<Tensor* const> params, std::span<const Tensor> grads,
          std::span<const std::string> names, OptimState& state);

}  // namespace rlglc
