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
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace rlglc {

// Every knob of a training run. The text form is one `key = value` line per
// field, keys spelled exactly as the members below.
struct TrainConfig {
  std::uint64_t seed = 0;

  double beta = 0.4;    // relaxation, (0, 1)
  double alpha = 1.0;   // weight of the L2 term on extractor/classifier weights
  double lambda = 10.0; // gradient-penalty weight

  double lr = 1e-3;         // extractor + classifier (Adam)
  double critic_lr = 1e-3;
  double scorer_lr = 1e-3;

  std::size_t batch_size = 64;
  std::size_t epochs = 50;
  std::size_t critic_steps = 5;
  std::size_t scorer_steps = 5;

  std::size_t feature_dim = 8;    // M
  std::size_t hidden_width = 64;  // two hidden layers in extractor and classifier
  std::size_t critic_width = 32;  // three hidden layers
  std::size_t scorer_width = 0;   // three hidden layers; 0 means feature_dim
  std::string measure = "softplus-normalize";

  std::string dataset = "two_moons";  // two_moons | gaussian | file
  std::size_t data_n = 500;
  double rotation_deg = 30.0;
  double noise_sigma = 0.1;
  double source_ratio = 0.5;
  double target_ratio = 0.3;
  std::string shift = "3,0";  // gaussian target translation
  std::string data_path;      // file dataset

  bool use_cls = true;
  bool use_global = true;
  bool use_local = true;
  bool use_reg = true;
  double global_weight = 1.0;
  double local_weight = 1.0;

  std::string report_path = "report.json";

  // Throws ContractError naming the first field out of range.
  void validate() const;

  // Sets one field from text. Throws ParseError for unknown keys or values
  // that do not parse.
  void set(const std::string& key, const std::string& value);

  // All fields in key order, values in canonical text form.
  std::vector<std::pair<std::string, std::string>> entries() const;

  // FNV-1a 64 over the canonical entries, report_path excluded; 16 hex digits.
  std::string hash() const;
};

TrainConfig parse_config(std::istream& in);
// Throws IoError naming the path when the file cannot be opened.
TrainConfig load_config(const std::string& path);
void write_config(std::ostream& out, const TrainConfig& c);

// Applies `key=value` overrides in order.
void apply_overrides(TrainConfig& c, const std::vector<std::string>& overrides);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace rlglc
