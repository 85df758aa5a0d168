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
#include <vector>

#include "rlglc/tensor.hpp"

namespace rlglc {

enum class DomainTag { Source, Target };

std::string to_string(DomainTag t);
DomainTag parse_domain_tag(const std::string& s);

struct LabeledDomain {
  Tensor features;  // n x d_in
  std::vector<int> labels;
  DomainTag domain = DomainTag::Source;
  std::size_t classes = 2;

  std::size_t size() const { return labels.size(); }
  // Throws ContractError when labels and rows disagree or a label is out
  // of range.
  void validate() const;
  std::vector<std::size_t> class_counts() const;
};

struct DomainPair {
  LabeledDomain source;
  LabeledDomain target;
};

struct TwoMoonsSpec {
  std::size_t n = 500;          // points per domain
  double rotation_deg = 30.0;   // target rotation about the moons' centre
  double noise_sigma = 0.1;
  double source_ratio = 0.5;    // fraction of class 0 in the source
  double target_ratio = 0.3;    // fraction of class 0 in the target
  std::uint64_t seed = 0;
};

// Label of a point in the un-rotated frame: the moon whose centre curve is
// closer. Both domains are labelled by this rule, the target after undoing
// its rotation.
int two_moons_label(double x, double y);
// Maps a target point back to the un-rotated frame.
void unrotate_point(double rotation_deg, double& x, double& y);

// Points are drawn around moon curves with Gaussian noise and kept only
// when the shared rule agrees with the generating class, so class counts
// are exact. Throws ContractError for ratios that leave a class empty,
// n < 4 or rotation outside [0, 90).
DomainPair gen_two_moons_shift(const TwoMoonsSpec& spec);

struct GaussianShiftSpec {
  std::vector<std::vector<double>> means;                     // per class
  std::vector<std::vector<std::vector<double>>> covariances;  // per class, SPD
  std::vector<double> shift;                                  // added to the target
  std::size_t n = 500;                                        // points per domain
  std::uint64_t seed = 0;
};

// Balanced classes in both domains; target class-conditionals are the
// source ones translated by `shift`. Throws ContractError for non-SPD
// covariances or mismatched dimensions.
DomainPair gen_gaussian_shift(const GaussianShiftSpec& spec);

// Delimited text with header `f1,...,fd,label,domain`. Rows whose domain
// column differs from `domain` are skipped. `classes` = 0 infers the class
// count from the largest label. Only the "csv" format exists.
LabeledDomain parse_domain(std::istream& in, DomainTag domain, std::size_t classes = 0);
LabeledDomain load_domain(const std::string& path, DomainTag domain, std::size_t classes = 0,
                          const std::string& format = "csv");
DomainPair load_domain_pair(const std::string& path, std::size_t classes = 0);
void write_domain(std::ostream& out, const LabeledDomain& d);
void write_domain_pair(std::ostream& out, const DomainPair& p);
void write_domain_pair(const std::string& path, const DomainPair& p);

}  // namespace rlglc
