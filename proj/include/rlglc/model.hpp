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
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rlglc/autodiff.hpp"
#include "rlglc/network.hpp"
#include "rlglc/rng.hpp"

namespace rlglc {

struct FeatureExtractor {
  Network net;  // d_in -> M, linear output

  static FeatureExtractor make(std::size_t input_width, std::size_t feature_width,
                               const std::vector<std::size_t>& hidden, Rng& rng);
  std::size_t feature_width() const { return net.output_width(); }
};

struct Classifier {
  Network net;  // M -> class logits

  static Classifier make(std::size_t feature_width, std::size_t classes,
                         const std::vector<std::size_t>& hidden, Rng& rng);
  std::size_t classes() const { return net.output_width(); }
};

// N x M features. Throws DimensionError on an input width mismatch.
Tensor extract(const FeatureExtractor& phi, const Tensor& x);

// Mean of -log softmax(logits)[label]. Throws ContractError for labels
// outside [0, classes).
ad::Var cross_entropy_loss(ad::Var logits, std::span<const int> labels);
double cross_entropy_loss(const Classifier& psi, const Tensor& features,
                          std::span<const int> labels);

// alpha * 0.5 * sum of squared weight entries; biases are excluded.
ad::Var regularizer(std::span<const ad::Var> weights, double alpha);
double regularizer(std::span<const Network* const> nets, double alpha);
// The weight matrices among `bound`, using net.weight_mask().
std::vector<ad::Var> weight_vars(const Network& net, std::span<const ad::Var> bound);

struct Prediction {
  std::vector<int> labels;  // argmax, lowest index on ties
  Tensor probabilities;     // row-wise softmax
};

Prediction predict(const Classifier& psi, const FeatureExtractor& phi, const Tensor& x);
// Softmax and argmax of raw logits.
Prediction predict_logits(const Tensor& logits);

// Checkpoint text format, version 1:
//   rlglc-checkpoint 1
//   network <name> <head> <layer count>
//   layer <in> <out>
//   <in*out weight values, row-major, whitespace separated>
//   <out bias values>
// Values are written in shortest round-trip form.
inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(std::ostream& out, const std::map<std::string, const Network*>& nets);
std::map<std::string, Network> load_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const std::map<std::string, const Network*>& nets);
std::map<std::string, Network> load_checkpoint(const std::string& path);

}  // namespace rlglc
