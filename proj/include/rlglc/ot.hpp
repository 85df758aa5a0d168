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

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rlglc/min_cost_flow.hpp"
#include "rlglc/tensor.hpp"

namespace rlglc {

// Weighted point set. Atoms are position vectors of a common dimension.
struct DiscreteMeasure {
  std::vector<std::vector<double>> atoms;
  std::vector<double> weights;
  double total_mass = 0.0;

  // Validates weights >= 0 and equal atom/weight counts; total_mass is the
  // weight sum.
  static DiscreteMeasure make(std::vector<std::vector<double>> atoms, std::vector<double> weights);
  // Atoms 0..n-1 on the line, used when only indexing matters.
  static DiscreteMeasure on_indices(std::vector<double> weights);

  std::size_t size() const { return weights.size(); }
  std::size_t dimension() const { return atoms.empty() ? 0 : atoms.front().size(); }
};

struct TransportPlan {
  Tensor coupling;  // n_source x n_target
  std::vector<double> row_marginal;
  std::vector<double> col_marginal;
};

struct CostMatrix {
  Tensor cost;  // ground distances, >= 0
  double exponent = 1.0;

  static CostMatrix from(Tensor cost, double exponent = 1.0);
  // 0 on the diagonal, `off` elsewhere.
  static CostMatrix uniform(std::size_t n, double off = 1.0);
};

struct TransportResult {
  double value = 0.0;
  TransportPlan plan;
};

CostMatrix euclidean_cost(const DiscreteMeasure& a, const DiscreteMeasure& b);

// (min over couplings of sum c^p * mu)^(1/p). The solver raises the ground
// distances to the power p. Throws InfeasibleError when the total masses
// differ and ContractError on empty measures.
TransportResult wasserstein_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                  const CostMatrix& cost, double p = 1.0,
                                  FlowSolver solver = FlowSolver::NetworkSimplex);

enum class MeasureTransform { SoftplusNormalize, ReluNormalize, Softmax };

MeasureTransform parse_measure_transform(const std::string& name);
std::string to_string(MeasureTransform t);

// Treats a feature vector of length M as a distribution over the positions
// {1/M, 2/M, ..., 1}; the weights are the normalised non-negative transform
// of the entries. Throws ContractError when nothing survives the transform.
DiscreteMeasure feature_to_measure(std::span<const double> z,
                                   MeasureTransform mode = MeasureTransform::SoftplusNormalize);

// Row-wise weights of feature_to_measure, as a matrix.
Tensor measure_weights(const Tensor& features, MeasureTransform mode);

// Exact 2-Wasserstein distance between two measures on the line by
// matching quantile functions.
double w2_dimension(const DiscreteMeasure& a, const DiscreteMeasure& b);

// Ground-cost matrix of w2_dimension between every pair of rows.
CostMatrix wwd_ground_cost(const Tensor& batch_a, const Tensor& batch_b,
                           MeasureTransform mode = MeasureTransform::SoftplusNormalize);

// W1 over samples (uniform weights unless given) with w2_dimension between
// the per-sample dimension measures as ground cost.
TransportResult wwd(const Tensor& batch_a, const Tensor& batch_b,
                    MeasureTransform mode = MeasureTransform::SoftplusNormalize,
                    std::span<const double> weights_a = {},
                    std::span<const double> weights_b = {});

// Relaxed transport: source atom i may emit up to P_s(i)/(1-beta), target
// atom j receives exactly P_t(j), total shipped 1. Zero whenever the target
// is contained in the scaled source and self-costs are zero.
TransportResult ar_wwd_primal(const DiscreteMeasure& source, const DiscreteMeasure& target,
                              const CostMatrix& cost, double beta,
                              FlowSolver solver = FlowSolver::NetworkSimplex);

// target(j) <= source(j)/(1-beta) at every shared atom index.
bool containment_check(const DiscreteMeasure& source, const DiscreteMeasure& target,
                       double beta);

// Text form: one atom per line, `weight,coord1[,coord2,...]`. Blank lines
// and lines starting with '#' are skipped.
DiscreteMeasure parse_measure(std::istream& in);
DiscreteMeasure read_measure(const std::string& path);
void write_measure(std::ostream& out, const DiscreteMeasure& m);

}  // namespace rlglc
