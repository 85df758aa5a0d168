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
#include <limits>
#include <vector>

#include "rlglc/tensor.hpp"

namespace rlglc {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

struct FlowArc {
  std::size_t from = 0;
  std::size_t to = 0;
  double capacity = kUnbounded;
  double cost = 0.0;
};

// Balanced network: balance[v] > 0 is supply, < 0 is demand, and every
// balance must be met exactly.
struct FlowNetwork {
  std::vector<double> balance;
  std::vector<FlowArc> arcs;
};

struct FlowSolution {
  double cost = 0.0;
  std::vector<double> flow;       // per arc
  std::vector<double> potential;  // per node; reduced cost = cost + pi[from] - pi[to]
  std::size_t pivots = 0;
};

// Primal network simplex with a strongly feasible spanning tree. The
// entering arc is the lowest-indexed arc with a violating reduced cost, so
// pivots (and therefore optimal plans under ties) are reproducible.
// Throws InfeasibleError naming a violated cut.
FlowSolution network_simplex(const FlowNetwork& net);

// Successive shortest augmenting paths (Bellman-Ford on the residual
// graph). Slow; kept as an independent oracle for tests.
FlowSolution successive_shortest_paths(const FlowNetwork& net);

// Largest cost magnitude of a reduced-cost violation, i.e. how far
// (flow, potential) is from satisfying complementary slackness. Zero for an
// optimal pair.
double complementary_slackness_gap(const FlowNetwork& net, const FlowSolution& sol,
                                   double flow_tol = 1e-12);

// Bipartite instance: supply node i may ship at most supplies[i], demand
// node j must receive exactly demands[j], arc (i, j) carries up to
// capacities(i, j) at unit_costs(i, j) per unit.
struct TransportNetwork {
  std::vector<double> supplies;
  std::vector<double> demands;
  Tensor capacities;  // n x m; kUnbounded allowed
  Tensor unit_costs;  // n x m
};

enum class FlowSolver { NetworkSimplex, SuccessiveShortestPaths };

struct TransportFlow {
  double cost = 0.0;
  Tensor flows;  // n x m
  FlowNetwork network;
  FlowSolution solution;
};

// Requires sum(supplies) >= sum(demands). Internally a super source with
// supply sum(demands) feeds each supply node through an arc of capacity
// supplies[i].
TransportFlow min_cost_flow(const TransportNetwork& problem,
                            FlowSolver solver = FlowSolver::NetworkSimplex);

}  // namespace rlglc
