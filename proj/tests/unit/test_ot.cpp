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

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "rlglc/error.hpp"
#include "rlglc/min_cost_flow.hpp"
#include "rlglc/ot.hpp"
#include "rlglc/rng.hpp"
#include "lp_oracle.hpp"

namespace rlglc {
namespace {

// ---- brute-force LP oracle ------------------------------------------------
// min c.x subject to Aeq x = beq, Aub x <= bub, x >= 0, by enumerating every
// basic solution. Only for a handful of variables.
struct SmallLp {
  std::vector<double> c;
  std::vector<std::vector<double>> a_eq, a_ub;
  std::vector<double> b_eq, b_ub;
};

bool solve_square(std::vector<std::vector<double>> a, std::vector<double> b,
                  std::vector<double>& x) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-12) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  x.resize(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return true;
}

double lp_vertex_min(const SmallLp& lp) {
  const std::size_t nv = lp.c.size();
  // Inequalities: the explicit ones, then -x_k <= 0.
  std::vector<std::vector<double>> ineq = lp.a_ub;
  std::vector<double> rhs = lp.b_ub;
  for (std::size_t k = 0; k < nv; ++k) {
    std::vector<double> row(nv, 0.0);
    row[k] = -1.0;
    ineq.push_back(row);
    rhs.push_back(0.0);
  }
  const std::size_t need = nv - lp.a_eq.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<bool> pick(ineq.size(), false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(need), true);
  std::sort(pick.begin(), pick.end(), std::greater<>());
  do {
    auto a = lp.a_eq;
    auto b = lp.b_eq;
    for (std::size_t i = 0; i < ineq.size(); ++i) {
      if (pick[i]) {
        a.push_back(ineq[i]);
        b.push_back(rhs[i]);
      }
    }
    std::vector<double> x;
    if (!solve_square(a, b, x)) continue;
    bool ok = true;
    for (std::size_t i = 0; i < ineq.size() && ok; ++i) {
      double s = 0;
      for (std::size_t k = 0; k < nv; ++k) s += ineq[i][k] * x[k];
      ok = s <= rhs[i] + 1e-9;
    }
    if (!ok) continue;
    double v = 0;
    for (std::size_t k = 0; k < nv; ++k) v += lp.c[k] * x[k];
    best = std::min(best, v);
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

// Transportation LP with row sums <= row_cap (or == when exact_rows) and
// column sums == cols. The last equality is dropped when redundant.
double transport_lp(const std::vector<double>& rows, const std::vector<double>& cols,
                    const Tensor& cost, bool exact_rows) {
  const std::size_t n = rows.size(), m = cols.size();
  SmallLp lp;
  lp.c.assign(cost.values().begin(), cost.values().end());
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> r(n * m, 0.0);
    for (std::size_t i = 0; i < n; ++i) r[i * m + j] = 1.0;
    lp.a_eq.push_back(r);
    lp.b_eq.push_back(cols[j]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> r(n * m, 0.0);
    for (std::size_t j = 0; j < m; ++j) r[i * m + j] = 1.0;
    if (exact_rows) {
      if (i + 1 < n) {
        lp.a_eq.push_back(r);
        lp.b_eq.push_back(rows[i]);
      }
    } else {
      lp.a_ub.push_back(r);
      lp.b_ub.push_back(rows[i]);
    }
  }
  return lp_vertex_min(lp);
}

std::vector<double> random_simplex(Rng& rng, std::size_t n) {
  std::vector<double> w(n);
  for (double& v : w) v = rng.uniform(0.05, 1.0);
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= s;
  return w;
}

Tensor random_cost(Rng& rng, std::size_t n, std::size_t m, bool zero_diag) {
  Tensor c(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) c(i, j) = (zero_diag && i == j) ? 0.0 : rng.uniform(0.1, 2.0);
  return c;
}

void expect_marginals(const TransportPlan& plan) {
  const Tensor& c = plan.coupling;
  ASSERT_EQ(c.rows(), plan.row_marginal.size());
  ASSERT_EQ(c.cols(), plan.col_marginal.size());
  for (std::size_t i = 0; i < c.rows(); ++i) {
    double s = 0;
    for (std::size_t j = 0; j < c.cols(); ++j) {
      EXPECT_GE(c(i, j), 0.0);
      s += c(i, j);
    }
    EXPECT_NEAR(s, plan.row_marginal[i], 1e-9);
  }
  for (std::size_t j = 0; j < c.cols(); ++j) {
    double s = 0;
    for (std::size_t i = 0; i < c.rows(); ++i) s += c(i, j);
    EXPECT_NEAR(s, plan.col_marginal[j], 1e-9);
  }
}

// ---- wasserstein_exact ----------------------------------------------------

TEST(Wasserstein, IdenticalMeasuresGiveZeroAndDiagonalPlan) {
  auto mu = DiscreteMeasure::on_indices({0.2, 0.3, 0.5});
  auto r = wasserstein_exact(mu, mu, CostMatrix::uniform(3));
  EXPECT_DOUBLE_EQ(r.value, 0.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(r.plan.coupling(i, i), mu.weights[i], 1e-15);
  expect_marginals(r.plan);
}

TEST(Wasserstein, SingleAtomsAtDistanceThree) {
  auto a = DiscreteMeasure::make({{0.0}}, {1.0});
  auto b = DiscreteMeasure::make({{3.0}}, {1.0});
  EXPECT_NEAR(wasserstein_exact(a, b, euclidean_cost(a, b)).value, 3.0, 1e-15);
}

TEST(Wasserstein, TwoByTwoMatchesVertexEnumeration) {
  auto a = DiscreteMeasure::on_indices({0.5, 0.5});
  auto b = DiscreteMeasure::on_indices({0.25, 0.75});
  const Tensor cost = Tensor::from_rows({{0, 1}, {1, 0}});
  const auto r = wasserstein_exact(a, b, CostMatrix::from(cost));
  EXPECT_NEAR(r.value, 0.25, 1e-12);
  EXPECT_NEAR(transport_lp(a.weights, b.weights, cost, true), 0.25, 1e-12);
  expect_marginals(r.plan);
}

TEST(Wasserstein, MassMismatchIsInfeasible) {
  auto a = DiscreteMeasure::on_indices({0.5, 0.5});
  auto b = DiscreteMeasure::on_indices({0.5, 0.6});
  EXPECT_THROW(wasserstein_exact(a, b, CostMatrix::uniform(2)), InfeasibleError);
}

TEST(Wasserstein, EmptyMeasureIsContractError) {
  auto a = DiscreteMeasure::on_indices({});
  EXPECT_THROW(wasserstein_exact(a, a, CostMatrix::from(Tensor())), ContractError);
}

TEST(Wasserstein, RandomInstancesMatchLpOracleAndSsp) {
  Rng rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng.below(3), m = 1 + rng.below(3);
    auto a = DiscreteMeasure::on_indices(random_simplex(rng, n));
    auto b = DiscreteMeasure::on_indices(random_simplex(rng, m));
    const Tensor cost = random_cost(rng, n, m, false);
    const auto ns = wasserstein_exact(a, b, CostMatrix::from(cost));
    const auto ssp = wasserstein_exact(a, b, CostMatrix::from(cost), 1.0,
                                       FlowSolver::SuccessiveShortestPaths);
    EXPECT_NEAR(ns.value, transport_lp(a.weights, b.weights, cost, true), 1e-8);
    EXPECT_NEAR(ns.value, ssp.value, 1e-8);
    expect_marginals(ns.plan);
  }
}

TEST(Wasserstein, MetricPropertiesOnRandomTriples) {
  Rng rng(7);
  auto random_measure = [&](std::size_t n) {
    std::vector<std::vector<double>> atoms(n, std::vector<double>(2));
    for (auto& a : atoms)
      for (double& v : a) v = rng.uniform(-1.0, 1.0);
    return DiscreteMeasure::make(atoms, random_simplex(rng, n));
  };
  auto w1 = [](const DiscreteMeasure& a, const DiscreteMeasure& b) {
    return wasserstein_exact(a, b, euclidean_cost(a, b)).value;
  };
  for (int trial = 0; trial < 200; ++trial) {
    auto x = random_measure(1 + rng.below(5));
    auto y = random_measure(1 + rng.below(5));
    auto z = random_measure(1 + rng.below(5));
    const double xy = w1(x, y), yz = w1(y, z), xz = w1(x, z);
    EXPECT_LE(xz, xy + yz + 1e-8);
    EXPECT_NEAR(xy, w1(y, x), 1e-10);
    EXPECT_NEAR(w1(x, x), 0.0, 1e-12);
  }
}

// ---- min_cost_flow --------------------------------------------------------

TEST(MinCostFlow, SingleEdge) {
  TransportNetwork p{{1.0}, {1.0}, Tensor(1, 1, kUnbounded), Tensor(1, 1, 2.0)};
  EXPECT_DOUBLE_EQ(min_cost_flow(p).cost, 2.0);
}

TEST(MinCostFlow, BalancedTwoByTwoMatchesWasserstein) {
  const Tensor cost = Tensor::from_rows({{0.3, 1.2}, {0.9, 0.1}});
  TransportNetwork p{{0.6, 0.4}, {0.2, 0.8}, Tensor(2, 2, kUnbounded), cost};
  auto a = DiscreteMeasure::on_indices({0.6, 0.4});
  auto b = DiscreteMeasure::on_indices({0.2, 0.8});
  EXPECT_NEAR(min_cost_flow(p).cost, wasserstein_exact(a, b, CostMatrix::from(cost)).value, 1e-12);
}

TEST(MinCostFlow, CapacityLimitedDetourMatchesIntegerBruteForce) {
  // Source 0 is cheap but its arc to sink 0 is capped, forcing flow through
  // the expensive source.
  const Tensor cost = Tensor::from_rows({{1, 4}, {5, 2}});
  const Tensor cap = Tensor::from_rows({{1, 3}, {3, 3}});
  TransportNetwork p{{4, 3}, {3, 2}, cap, cost};
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a <= 1; ++a)
    for (int b = 0; b <= 3; ++b)
      for (int c = 0; c <= 3; ++c)
        for (int d = 0; d <= 3; ++d) {
          if (a + b > 4 || c + d > 3 || a + c != 3 || b + d != 2) continue;
          best = std::min(best, 1.0 * a + 4.0 * b + 5.0 * c + 2.0 * d);
        }
  const auto r = min_cost_flow(p);
  EXPECT_DOUBLE_EQ(r.cost, best);
  EXPECT_DOUBLE_EQ(r.cost, 1.0 + 10.0 + 4.0 + 2.0);
  EXPECT_NEAR(complementary_slackness_gap(r.network, r.solution), 0.0, 1e-12);
}

TEST(MinCostFlow, InfeasibleNamesCut) {
  TransportNetwork p{{0.3}, {0.5, 0.2}, Tensor(1, 2, kUnbounded), Tensor(1, 2, 1.0)};
  try {
    min_cost_flow(p);
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    EXPECT_NE(std::string(e.what()).find("cut"), std::string::npos) << e.what();
  }
}

TEST(MinCostFlow, CapacityCutIsInfeasible) {
  TransportNetwork p{{1.0, 1.0}, {1.0}, Tensor::from_rows({{0.2}, {0.3}}), Tensor(2, 1, 1.0)};
  EXPECT_THROW(min_cost_flow(p), InfeasibleError);
  EXPECT_THROW(min_cost_flow(p, FlowSolver::SuccessiveShortestPaths), InfeasibleError);
}

TEST(MinCostFlow, RandomGeneralNetworksAgreeWithSspAndCertify) {
  Rng rng(31);
  int solved = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng.below(6);
    FlowNetwork net;
    net.balance.assign(n, 0.0);
    const int pairs = 1 + static_cast<int>(rng.below(3));
    for (int k = 0; k < pairs; ++k) {
      const double amt = static_cast<double>(1 + rng.below(5));
      net.balance[rng.below(n)] += amt;
      net.balance[rng.below(n)] -= amt;
    }
    const std::size_t arcs = n + rng.below(3 * n);
    for (std::size_t k = 0; k < arcs; ++k) {
      FlowArc a;
      a.from = rng.below(n);
      a.to = rng.below(n);
      if (a.from == a.to) continue;
      a.cost = static_cast<double>(rng.below(10));
      a.capacity = rng.below(4) == 0 ? kUnbounded : static_cast<double>(1 + rng.below(6));
      net.arcs.push_back(a);
    }
    bool ns_ok = true, ssp_ok = true;
    FlowSolution ns, ssp;
    try { ns = network_simplex(net); } catch (const InfeasibleError&) { ns_ok = false; }
    try { ssp = successive_shortest_paths(net); } catch (const InfeasibleError&) { ssp_ok = false; }
    ASSERT_EQ(ns_ok, ssp_ok) << "trial " << trial;
    if (!ns_ok) continue;
    ++solved;
    EXPECT_NEAR(ns.cost, ssp.cost, 1e-9) << "trial " << trial;
    EXPECT_NEAR(complementary_slackness_gap(net, ns), 0.0, 1e-9);
  }
  EXPECT_GT(solved, 50);
}

TEST(MinCostFlow, TiesResolveReproducibly) {
  // Every plan costs the same; two runs must return the same one.
  TransportNetwork p{{0.5, 0.5}, {0.5, 0.5}, Tensor(2, 2, kUnbounded), Tensor(2, 2, 1.0)};
  EXPECT_EQ(min_cost_flow(p).flows, min_cost_flow(p).flows);
}

// ---- feature_to_measure / w2_dimension -----------------------------------

TEST(FeatureMeasure, ConstantVectorIsUniform) {
  const std::vector<double> z{1, 1, 1, 1};
  const auto m = feature_to_measure(z);
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_NEAR(m.weights[j], 0.25, 1e-15);
    EXPECT_NEAR(m.atoms[j][0], (j + 1) / 4.0, 1e-15);
  }
}

TEST(FeatureMeasure, SoftplusNormalizeFrozenWeights) {
  const std::vector<double> z{2, 0, 0};
  const auto m = feature_to_measure(z, MeasureTransform::SoftplusNormalize);
  EXPECT_NEAR(m.weights[0], 0.6054065999054768, 1e-14);
  EXPECT_NEAR(m.weights[1], 0.1972967000472616, 1e-14);
  EXPECT_NEAR(m.weights[2], 0.1972967000472616, 1e-14);
  EXPECT_NEAR(m.total_mass, 1.0, 1e-12);
}

TEST(FeatureMeasure, OneHotVectorsBecomeDistinctPointMasses) {
  std::vector<DiscreteMeasure> ms;
  for (int k = 0; k < 3; ++k) {
    std::vector<double> z(3, 0.0);
    z[k] = 1.0;
    ms.push_back(feature_to_measure(z, MeasureTransform::ReluNormalize));
    EXPECT_DOUBLE_EQ(ms.back().weights[k], 1.0);
  }
  const double d01 = w2_dimension(ms[0], ms[1]);
  const double d02 = w2_dimension(ms[0], ms[2]);
  EXPECT_NEAR(d01, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(d02, 2.0 / 3.0, 1e-12);
  EXPECT_GT(std::abs(d01 - d02), 0.1);
}

TEST(FeatureMeasure, DegenerateInputIsContractError) {
  const std::vector<double> z{-1, 0, -3};
  EXPECT_THROW(feature_to_measure(z, MeasureTransform::ReluNormalize), ContractError);
  EXPECT_THROW(feature_to_measure(std::vector<double>{}), ContractError);
}

TEST(W2Dimension, Examples) {
  auto p0 = DiscreteMeasure::make({{0.0}}, {1.0});
  auto p1 = DiscreteMeasure::make({{1.0}}, {1.0});
  EXPECT_DOUBLE_EQ(w2_dimension(p0, p0), 0.0);
  EXPECT_NEAR(w2_dimension(p0, p1), 1.0, 1e-15);
  auto a = DiscreteMeasure::make({{0.0}, {1.0}}, {0.5, 0.5});
  auto b = DiscreteMeasure::make({{0.0}, {1.0}}, {0.0, 1.0});
  EXPECT_NEAR(w2_dimension(a, b), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(wasserstein_exact(a, b, euclidean_cost(a, b), 2.0).value, std::sqrt(0.5), 1e-12);
}

TEST(W2Dimension, MassMismatchIsInfeasible) {
  auto a = DiscreteMeasure::make({{0.0}}, {1.0});
  auto b = DiscreteMeasure::make({{0.0}}, {0.5});
  EXPECT_THROW(w2_dimension(a, b), InfeasibleError);
}

TEST(W2Dimension, MatchesGenericLpOnRandomLineInstances) {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(12), m = 1 + rng.below(12);
    std::vector<std::vector<double>> xa(n), xb(m);
    for (auto& x : xa) x = {rng.uniform()};
    for (auto& x : xb) x = {rng.uniform()};
    auto a = DiscreteMeasure::make(xa, random_simplex(rng, n));
    auto b = DiscreteMeasure::make(xb, random_simplex(rng, m));
    const double lp = wasserstein_exact(a, b, euclidean_cost(a, b), 2.0).value;
    EXPECT_NEAR(w2_dimension(a, b), lp, 1e-8) << "trial " << trial;
  }
}

// ---- wwd ------------------------------------------------------------------

TEST(Wwd, IdenticalBatchesGiveZero) {
  const Tensor x = Tensor::from_rows({{1, 0, 2}, {0.5, 0.5, 0.5}});
  EXPECT_NEAR(wwd(x, x).value, 0.0, 1e-12);
}

TEST(Wwd, SingleRowsReduceToW2Dimension) {
  const Tensor a = Tensor::from_rows({{1, 0, 2}});
  const Tensor b = Tensor::from_rows({{0, 3, 0}});
  const auto ma = feature_to_measure(a.row_span(0));
  const auto mb = feature_to_measure(b.row_span(0));
  EXPECT_NEAR(wwd(a, b).value, w2_dimension(ma, mb), 1e-12);
}

TEST(Wwd, ThreeByThreeMatchesCompositionAndIsSymmetric) {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor a(3, 5), b(3, 5);
    for (double& v : a.values()) v = rng.normal();
    for (double& v : b.values()) v = rng.normal();
    const CostMatrix ground = wwd_ground_cost(a, b);
    Tensor manual(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        manual(i, j) = w2_dimension(feature_to_measure(a.row_span(i)), feature_to_measure(b.row_span(j)));
    EXPECT_EQ(ground.cost, manual);
    const auto u = DiscreteMeasure::on_indices({1.0 / 3, 1.0 / 3, 1.0 / 3});
    const double composed = wasserstein_exact(u, u, ground).value;
    EXPECT_NEAR(wwd(a, b).value, composed, 1e-12);
    EXPECT_NEAR(wwd(a, b).value, transport_lp(u.weights, u.weights, ground.cost, true), 1e-8);
    EXPECT_NEAR(wwd(a, b).value, wwd(b, a).value, 1e-12);
  }
}

// ---- ar_wwd_primal / containment -----------------------------------------

TEST(ArWwd, ContainmentGivesZero) {
  auto s = DiscreteMeasure::on_indices({0.5, 0.5});
  auto t = DiscreteMeasure::on_indices({0.3, 0.7});
  const auto r = ar_wwd_primal(s, t, CostMatrix::uniform(2), 0.4);
  EXPECT_NEAR(r.value, 0.0, 1e-15);
  expect_marginals(r.plan);
}

TEST(ArWwd, CapacityForcesCrossing) {
  auto s = DiscreteMeasure::on_indices({0.9, 0.1});
  auto t = DiscreteMeasure::on_indices({0.1, 0.9});
  const Tensor cost = Tensor::from_rows({{0, 1}, {1, 0}});
  const auto r = ar_wwd_primal(s, t, CostMatrix::from(cost), 0.5);
  EXPECT_NEAR(r.value, 0.7, 1e-12);
  EXPECT_NEAR(transport_lp({1.8, 0.2}, t.weights, cost, false), 0.7, 1e-12);
  expect_marginals(r.plan);
}

TEST(ArWwd, SmallBetaApproachesWasserstein) {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    auto s = DiscreteMeasure::on_indices(random_simplex(rng, 3));
    auto t = DiscreteMeasure::on_indices(random_simplex(rng, 3));
    const auto cost = CostMatrix::from(random_cost(rng, 3, 3, true));
    const double w = wasserstein_exact(s, t, cost).value;
    EXPECT_NEAR(ar_wwd_primal(s, t, cost, 1e-10).value, w, 1e-8);
  }
}

TEST(ArWwd, BetaOutsideOpenIntervalIsContractError) {
  auto s = DiscreteMeasure::on_indices({0.5, 0.5});
  EXPECT_THROW(ar_wwd_primal(s, s, CostMatrix::uniform(2), 0.0), ContractError);
  EXPECT_THROW(ar_wwd_primal(s, s, CostMatrix::uniform(2), 1.0), ContractError);
  EXPECT_THROW(ar_wwd_primal(s, s, CostMatrix::uniform(2), 1.5), ContractError);
}

TEST(ArWwd, RandomInstancesMatchLpOracle) {
  Rng rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng.below(2);
    auto s = DiscreteMeasure::on_indices(random_simplex(rng, n));
    auto t = DiscreteMeasure::on_indices(random_simplex(rng, n));
    const double beta = rng.uniform(0.05, 0.9);
    const Tensor cost = random_cost(rng, n, n, true);
    std::vector<double> caps(n);
    for (std::size_t i = 0; i < n; ++i) caps[i] = s.weights[i] / (1.0 - beta);
    EXPECT_NEAR(ar_wwd_primal(s, t, CostMatrix::from(cost), beta).value,
                transport_lp(caps, t.weights, cost, false), 1e-8);
  }
}

TEST(LpOracle, SimplexAgreesWithVertexEnumeration) {
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng.below(2);
    const auto rows = random_simplex(rng, n), cols = random_simplex(rng, n);
    const Tensor cost = random_cost(rng, n, n, trial % 2 == 0);
    std::vector<double> caps(n);
    for (std::size_t i = 0; i < n; ++i) caps[i] = rows[i] / 0.7;
    EXPECT_NEAR(*testing::transport_simplex(caps, cols, cost, false), transport_lp(caps, cols, cost, false), 1e-9);
    EXPECT_NEAR(*testing::transport_simplex(rows, cols, cost, true), transport_lp(rows, cols, cost, true), 1e-9);
  }
  EXPECT_FALSE(testing::transport_simplex({0.2, 0.2}, {0.5, 0.5}, Tensor(2, 2, 1.0), false).has_value());
}

TEST(ArWwd, ZeroIffContainedOnRandomPairs) {
  Rng rng(41);
  int contained = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(5);
    auto s = DiscreteMeasure::on_indices(random_simplex(rng, n));
    // Half the pairs are small perturbations of the source so both outcomes
    // are exercised.
    std::vector<double> tw = trial % 2 == 0 ? s.weights : random_simplex(rng, n);
    if (trial % 2 == 0) {
      for (double& v : tw) v *= rng.uniform(0.7, 1.3);
      const double sum = std::accumulate(tw.begin(), tw.end(), 0.0);
      for (double& v : tw) v /= sum;
    }
    auto t = DiscreteMeasure::on_indices(tw);
    const double beta = rng.uniform(0.05, 0.6);
    const auto r = ar_wwd_primal(s, t, CostMatrix::from(random_cost(rng, n, n, true)), beta);
    const bool in = containment_check(s, t, beta);
    contained += in;
    EXPECT_EQ(r.value <= 1e-12, in) << "trial " << trial << " value " << r.value;
    expect_marginals(r.plan);
  }
  EXPECT_GT(contained, 10);
  EXPECT_LT(contained, 90);
}

TEST(ArWwd, NonincreasingInBeta) {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    auto s = DiscreteMeasure::on_indices(random_simplex(rng, 4));
    auto t = DiscreteMeasure::on_indices(random_simplex(rng, 4));
    const auto cost = CostMatrix::from(random_cost(rng, 4, 4, true));
    double prev = std::numeric_limits<double>::infinity();
    for (double beta = 0.05; beta < 0.96; beta += 0.05) {
      const double v = ar_wwd_primal(s, t, cost, beta).value;
      EXPECT_LE(v, prev + 1e-12);
      prev = v;
    }
  }
}

TEST(Containment, Examples) {
  auto s = DiscreteMeasure::on_indices({0.5, 0.5});
  EXPECT_TRUE(containment_check(s, s, 0.3));
  EXPECT_TRUE(containment_check(s, DiscreteMeasure::on_indices({0.3, 0.7}), 0.4));
  EXPECT_FALSE(containment_check(DiscreteMeasure::on_indices({0.9, 0.1}),
                                 DiscreteMeasure::on_indices({0.1, 0.9}), 0.5));
}

// ---- text form -------------------------------------------------------------

TEST(MeasureText, RoundTripAndComments) {
  std::istringstream in("# weights then coordinates\n0.25,1.0,2.0\n\n0.75,-1,0.5\n");
  const auto m = parse_measure(in);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.dimension(), 2u);
  EXPECT_DOUBLE_EQ(m.weights[1], 0.75);
  std::ostringstream out;
  write_measure(out, m);
  std::istringstream back(out.str());
  const auto m2 = parse_measure(back);
  EXPECT_EQ(m2.atoms, m.atoms);
  EXPECT_EQ(m2.weights, m.weights);
}

TEST(MeasureText, BadNumberReportsLine) {
  std::istringstream in("0.5,1\n0.5,abc\n");
  try {
    parse_measure(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

}  // namespace
}  // namespace rlglc
