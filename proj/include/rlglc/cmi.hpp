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
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rlglc/autodiff.hpp"
#include "rlglc/network.hpp"
#include "rlglc/rng.hpp"

namespace rlglc {

// Probability table over (x_s, x_t, z) with alphabet sizes a, b, c, stored
// with z fastest.
struct DiscreteJoint {
  std::size_t a = 0, b = 0, c = 0;
  std::vector<double> p;

  // Validates entries >= 0 and a total of 1 within 1e-12.
  static DiscreteJoint make(std::size_t a, std::size_t b, std::size_t c, std::vector<double> p);
  double operator()(std::size_t xs, std::size_t xt, std::size_t z) const {
    return p[(xs * b + xt) * c + z];
  }
};

// I(X_s; X_t | Z) in nats.
double exact_cmi(const DiscreteJoint& joint);
// I(X_s; X_t), marginalising Z.
double mutual_information(const DiscreteJoint& joint);
// I(X_s; X_t) - I(X_s; X_t | Z). Negative under synergy.
double interaction_information(const DiscreteJoint& joint);

struct Assumption1Report {
  double source_information = 0.0;  // I(X_s; Y)
  double target_information = 0.0;  // I(X_t; Y)
  double label_entropy = 0.0;       // H(Y)
  bool pass = false;
};

// Joint over (X_s, X_t, Y): passes when both inputs carry all of H(Y).
Assumption1Report verify_assumption1(const DiscreteJoint& joint, double tol = 1e-9);

// Scores floor at this value where the optimal ratio is zero.
inline constexpr double kScoreFloor = -30.0;

// Table phi(x_s, x_t, z), same layout as DiscreteJoint.
struct TabularScorer {
  std::size_t a = 0, b = 0, c = 0;
  std::vector<double> table;
  double operator()(std::size_t xs, std::size_t xt, std::size_t z) const {
    return table[(xs * b + xt) * c + z];
  }
};

// log P(x_t | x_s, z) / P(x_t | z), floored; zero on unsupported (x_s, z).
TabularScorer optimal_scorer(const DiscreteJoint& joint);

// One draw for the contrastive estimator: candidates[0] is the positive x_t,
// the rest are drawn from P(x_t | z).
struct DiscreteContrast {
  std::size_t xs = 0;
  std::size_t z = 0;
  std::vector<std::size_t> candidates;
};

std::vector<DiscreteContrast> sample_contrasts(const DiscreteJoint& joint, std::size_t k,
                                               std::size_t count, Rng& rng);

struct CnceEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::vector<double> terms;
};

// One CNCE term from K candidate scores with the positive first:
// log K - (max - s_0 + log sum exp(s_k - max)). Never exceeds log K and is
// exactly zero when K = 1 or all scores agree.
double cnce_term(std::span<const double> scores);

CnceEstimate cnce_estimate(const TabularScorer& scorer, std::span<const DiscreteContrast> draws);

// For each target row, the nearest source row by squared Euclidean
// distance; ties go to the lowest index.
std::vector<std::size_t> pair_positive(const Tensor& zt, const Tensor& zs);

// Every index of a batch of size n except i. Throws ContractError for n < 2.
std::vector<std::size_t> build_negatives(std::size_t i, std::size_t n);

// Learned scorer on features: score(i, k) = 0.5 * (<g(zs_i), zt_i> + <g(zt_k), zt_i>)
// where zs_i is the source partner of target row i and g maps features to
// features.
struct Scorer {
  Network projection;

  // hidden = {} gives a linear projection.
  static Scorer make(std::size_t width, const std::vector<std::size_t>& hidden, Rng& rng);
};

// N x N candidate score matrix; row i has its positive at column i and the
// other batch rows as negatives (K = N).
ad::Var scorer_matrix(const Scorer& scorer, std::span<const ad::Var> params, ad::Var zs_paired,
                      ad::Var zt);
// Mean CNCE term over the batch; every row term is <= log N.
ad::Var cnce_objective(const Scorer& scorer, std::span<const ad::Var> params, ad::Var zs_paired,
                       ad::Var zt);
// Value-only, with the per-row terms.
CnceEstimate cnce_estimate(const Scorer& scorer, const Tensor& zs_paired, const Tensor& zt);

// Text form: one cell per line, `x_s,x_t,z,probability`; alphabet sizes are
// one more than the largest index seen. Missing cells are zero.
DiscreteJoint parse_joint(std::istream& in);
DiscreteJoint read_joint(const std::string& path);

}  // namespace rlglc
