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

#include "rlglc/ot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "rlglc/error.hpp"
#include "rlglc/text_io.hpp"

namespace rlglc {

namespace {

constexpr double kMassTol = 1e-9;

double total(std::span<const double> w) { return std::accumulate(w.begin(), w.end(), 0.0); }

void require_equal_mass(double a, double b, const char* what) {
  if (std::abs(a - b) > kMassTol * std::max(1.0, std::max(std::abs(a), std::abs(b)))) {
    throw InfeasibleError(fmt::format("{}: total masses differ ({:.12g} vs {:.12g})", what, a, b));
  }
}

void require_cost_shape(const CostMatrix& c, std::size_t n, std::size_t m) {
  if (c.cost.rows() != n || c.cost.cols() != m) {
    throw DimensionError(
        fmt::format("cost matrix is {} but measures have {} and {} atoms", c.cost.shape_string(), n, m));
  }
}

TransportPlan plan_from(Tensor coupling) {
  TransportPlan plan;
  plan.row_marginal.assign(coupling.rows(), 0.0);
  plan.col_marginal.assign(coupling.cols(), 0.0);
  for (std::size_t i = 0; i < coupling.rows(); ++i)
    for (std::size_t j = 0; j < coupling.cols(); ++j) {
      plan.row_marginal[i] += coupling(i, j);
      plan.col_marginal[j] += coupling(i, j);
    }
  plan.coupling = std::move(coupling);
  return plan;
}

}  // namespace

DiscreteMeasure DiscreteMeasure::make(std::vector<std::vector<double>> atoms,
                                      std::vector<double> weights) {
  if (atoms.size() != weights.size()) {
    throw ContractError(fmt::format("measure: {} atoms but {} weights", atoms.size(), weights.size()));
  }
  for (const auto& a : atoms) {
    if (a.size() != atoms.front().size()) throw DimensionError("measure: atoms of mixed dimension");
  }
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ContractError("measure: weights must be finite and >= 0");
  }
  DiscreteMeasure m;
  m.total_mass = total(weights);
  m.atoms = std::move(atoms);
  m.weights = std::move(weights);
  return m;
}

DiscreteMeasure DiscreteMeasure::on_indices(std::vector<double> weights) {
  std::vector<std::vector<double>> atoms;
  for (std::size_t i = 0; i < weights.size(); ++i) atoms.push_back({static_cast<double>(i)});
  return make(std::move(atoms), std::move(weights));
}

CostMatrix CostMatrix::from(Tensor cost, double exponent) {
  for (double c : cost.values()) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw ContractError("cost matrix entries must be finite and >= 0");
  }
  if (!(exponent > 0.0)) throw ContractError("cost exponent must be positive");
  return CostMatrix{std::move(cost), exponent};
}

CostMatrix CostMatrix::uniform(std::size_t n, double off) {
  Tensor c(n, n, off);
  for (std::size_t i = 0; i < n; ++i) c(i, i) = 0.0;
  return from(std::move(c));
}

CostMatrix euclidean_cost(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  Tensor c(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      c(i, j) = std::sqrt(squared_distance(a.atoms[i], b.atoms[j]));
  return CostMatrix::from(std::move(c));
}

TransportResult wasserstein_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                  const CostMatrix& cost, double p, FlowSolver solver) {
  if (mu.size() == 0 || nu.size() == 0) throw ContractError("wasserstein_exact: empty measure");
  if (!(p > 0.0)) throw ContractError("wasserstein_exact: p must be positive");
  require_cost_shape(cost, mu.size(), nu.size());
  require_equal_mass(mu.total_mass, nu.total_mass, "wasserstein_exact");
  const std::size_t n = mu.size(), m = nu.size();
  FlowNetwork net;
  net.balance.resize(n + m);
  for (std::size_t i = 0; i < n; ++i) net.balance[i] = mu.weights[i];
  for (std::size_t j = 0; j < m; ++j) net.balance[n + j] = -nu.weights[j];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      net.arcs.push_back({i, n + j, kUnbounded, std::pow(cost.cost(i, j), p)});
  const FlowSolution sol =
      solver == FlowSolver::NetworkSimplex ? network_simplex(net) : successive_shortest_paths(net);
  Tensor coupling(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) coupling(i, j) = sol.flow[i * m + j];
  TransportResult r;
  r.value = std::pow(std::max(0.0, sol.cost), 1.0 / p);
  r.plan.coupling = std::move(coupling);
  r.plan.row_marginal = mu.weights;
  r.plan.col_marginal = nu.weights;
  return r;
}

MeasureTransform parse_measure_transform(const std::string& name) {
  if (name == "softplus-normalize") return MeasureTransform::SoftplusNormalize;
  if (name == "relu-normalize") return MeasureTransform::ReluNormalize;
  if (name == "softmax") return MeasureTransform::Softmax;
  throw ContractError("unknown measure transform '" + name + "'");
}

std::string to_string(MeasureTransform t) {
  switch (t) {
    case MeasureTransform::SoftplusNormalize:
      return "softplus-normalize";
    case MeasureTransform::ReluNormalize:
      return "relu-normalize";
    case MeasureTransform::Softmax:
      return "softmax";
  }
  return "?";
}

namespace {

std::vector<double> transform_weights(std::span<const double> z, MeasureTransform mode) {
  if (z.empty()) throw ContractError("feature_to_measure: empty feature vector");
  std::vector<double> w(z.size());
  switch (mode) {
    case MeasureTransform::SoftplusNormalize:
      for (std::size_t j = 0; j < z.size(); ++j)
        w[j] = z[j] > 0.0 ? z[j] + std::log1p(std::exp(-z[j])) : std::log1p(std::exp(z[j]));
      break;
    case MeasureTransform::ReluNormalize:
      for (std::size_t j = 0; j < z.size(); ++j) w[j] = std::max(0.0, z[j]);
      break;
    case MeasureTransform::Softmax: {
      const double mx = *std::max_element(z.begin(), z.end());
      for (std::size_t j = 0; j < z.size(); ++j) w[j] = std::exp(z[j] - mx);
      break;
    }
  }
  const double s = total(w);
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw ContractError("feature_to_measure: degenerate measure (transform left no mass)");
  }
  for (double& x : w) x /= s;
  return w;
}

}  // namespace

DiscreteMeasure feature_to_measure(std::span<const double> z, MeasureTransform mode) {
  std::vector<double> w = transform_weights(z, mode);
  const double M = static_cast<double>(z.size());
  std::vector<std::vector<double>> atoms;
  for (std::size_t j = 0; j < z.size(); ++j) atoms.push_back({static_cast<double>(j + 1) / M});
  return DiscreteMeasure::make(std::move(atoms), std::move(w));
}

Tensor measure_weights(const Tensor& features, MeasureTransform mode) {
  Tensor out(features.rows(), features.cols());
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const auto w = transform_weights(features.row_span(i), mode);
    std::copy(w.begin(), w.end(), out.row_span(i).begin());
  }
  return out;
}

double w2_dimension(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (a.size() == 0 || b.size() == 0) throw ContractError("w2_dimension: empty measure");
  if (a.dimension() != 1 || b.dimension() != 1) {
    throw ContractError("w2_dimension: measures must live on the line");
  }
  require_equal_mass(a.total_mass, b.total_mass, "w2_dimension");
  auto sorted = [](const DiscreteMeasure& m) {
    std::vector<std::pair<double, double>> s;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m.weights[i] > 0.0) s.emplace_back(m.atoms[i][0], m.weights[i]);
    }
    std::stable_sort(s.begin(), s.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });
    return s;
  };
  const auto xa = sorted(a);
  const auto xb = sorted(b);
  std::size_t i = 0, j = 0;
  double ra = xa.empty() ? 0.0 : xa[0].second;
  double rb = xb.empty() ? 0.0 : xb[0].second;
  double acc = 0.0;
  while (i < xa.size() && j < xb.size()) {
    const double mass = std::min(ra, rb);
    const double d = xa[i].first - xb[j].first;
    acc += mass * d * d;
    ra -= mass;
    rb -= mass;
    if (ra <= 0.0) {
      if (++i < xa.size()) ra = xa[i].second;
    }
    if (rb <= 0.0) {
      if (++j < xb.size()) rb = xb[j].second;
    }
  }
  return std::sqrt(acc);
}

CostMatrix wwd_ground_cost(const Tensor& batch_a, const Tensor& batch_b, MeasureTransform mode) {
  if (batch_a.cols() != batch_b.cols()) throw DimensionError("wwd: feature widths differ");
  std::vector<DiscreteMeasure> ma, mb;
  for (std::size_t i = 0; i < batch_a.rows(); ++i) ma.push_back(feature_to_measure(batch_a.row_span(i), mode));
  for (std::size_t j = 0; j < batch_b.rows(); ++j) mb.push_back(feature_to_measure(batch_b.row_span(j), mode));
  Tensor c(ma.size(), mb.size());
  for (std::size_t i = 0; i < ma.size(); ++i)
    for (std::size_t j = 0; j < mb.size(); ++j) c(i, j) = w2_dimension(ma[i], mb[j]);
  return CostMatrix::from(std::move(c));
}

TransportResult wwd(const Tensor& batch_a, const Tensor& batch_b, MeasureTransform mode,
                    std::span<const double> weights_a, std::span<const double> weights_b) {
  if (batch_a.rows() == 0 || batch_b.rows() == 0) throw ContractError("wwd: empty batch");
  auto weights = [](std::span<const double> given, std::size_t n) {
    if (given.empty()) return std::vector<double>(n, 1.0 / static_cast<double>(n));
    if (given.size() != n) throw ContractError("wwd: weight count does not match batch size");
    return std::vector<double>(given.begin(), given.end());
  };
  if (weights_a.empty() != weights_b.empty() && batch_a.rows() != batch_b.rows()) {
    throw ContractError("wwd: unequal batch sizes need explicit weights on both sides");
  }
  const auto wa = weights(weights_a, batch_a.rows());
  const auto wb = weights(weights_b, batch_b.rows());
  const CostMatrix cost = wwd_ground_cost(batch_a, batch_b, mode);
  return wasserstein_exact(DiscreteMeasure::on_indices(wa), DiscreteMeasure::on_indices(wb), cost, 1.0);
}

TransportResult ar_wwd_primal(const DiscreteMeasure& source, const DiscreteMeasure& target,
                              const CostMatrix& cost, double beta, FlowSolver solver) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw ContractError(fmt::format("ar_wwd_primal: beta must lie in (0, 1), got {}", beta));
  }
  if (source.size() == 0 || target.size() == 0) throw ContractError("ar_wwd_primal: empty measure");
  require_cost_shape(cost, source.size(), target.size());
  require_equal_mass(source.total_mass, target.total_mass, "ar_wwd_primal");
  TransportNetwork problem;
  for (double w : source.weights) problem.supplies.push_back(w / (1.0 - beta));
  problem.demands = target.weights;
  problem.capacities = Tensor(source.size(), target.size(), kUnbounded);
  problem.unit_costs = Tensor(source.size(), target.size());
  for (std::size_t i = 0; i < source.size(); ++i)
    for (std::size_t j = 0; j < target.size(); ++j)
      problem.unit_costs(i, j) = std::pow(cost.cost(i, j), cost.exponent);
  TransportFlow flow = min_cost_flow(problem, solver);
  TransportResult r;
  r.value = std::pow(std::max(0.0, flow.cost), 1.0 / cost.exponent);
  r.plan = plan_from(std::move(flow.flows));
  r.plan.col_marginal = target.weights;
  return r;
}

bool containment_check(const DiscreteMeasure& source, const DiscreteMeasure& target, double beta) {
  if (source.size() != target.size()) {
    throw ContractError("containment_check: measures must share atom indexing");
  }
  if (!(beta >= 0.0 && beta < 1.0)) throw ContractError("containment_check: beta must lie in [0, 1)");
  for (std::size_t j = 0; j < source.size(); ++j) {
    if (target.weights[j] > source.weights[j] / (1.0 - beta)) return false;
  }
  return true;
}

DiscreteMeasure parse_measure(std::istream& in) {
  std::vector<std::vector<double>> atoms;
  std::vector<double> weights;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::skippable(line)) continue;
    const auto parts = text::split(line, ',');
    if (parts.size() < 2) throw ParseError("expected `weight,coord1[,coord2,...]`", lineno);
    const double w = text::parse_double(parts[0], lineno);
    if (w < 0.0) throw ParseError("negative weight", lineno);
    std::vector<double> x;
    for (std::size_t k = 1; k < parts.size(); ++k) x.push_back(text::parse_double(parts[k], lineno));
    if (!atoms.empty() && x.size() != atoms.front().size()) {
      throw ParseError("atom dimension differs from the first line", lineno);
    }
    weights.push_back(w);
    atoms.push_back(std::move(x));
  }
  if (atoms.empty()) throw ContractError("measure file holds no atoms");
  return DiscreteMeasure::make(std::move(atoms), std::move(weights));
}

DiscreteMeasure read_measure(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open measure file '" + path + "'");
  return parse_measure(in);
}

void write_measure(std::ostream& out, const DiscreteMeasure& m) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << text::format_double(m.weights[i]);
    for (double x : m.atoms[i]) out << ',' << text::format_double(x);
    out << '\n';
  }
}

}  // namespace rlglc
