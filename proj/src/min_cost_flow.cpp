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

#include "rlglc/min_cost_flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "rlglc/error.hpp"

namespace rlglc {

namespace {

double mass_scale(const FlowNetwork& net) {
  double s = 0.0;
  for (double b : net.balance) s += std::max(b, 0.0);
  return std::max(1.0, s);
}

void validate(const FlowNetwork& net) {
  const std::size_t n = net.balance.size();
  for (double b : net.balance) {
    if (!std::isfinite(b)) throw ContractError("flow network: non-finite balance");
  }
  for (const auto& a : net.arcs) {
    if (a.from >= n || a.to >= n) throw ContractError("flow network: arc endpoint out of range");
    if (!(a.capacity >= 0.0)) throw ContractError("flow network: negative capacity");
    if (!std::isfinite(a.cost)) throw ContractError("flow network: non-finite arc cost");
  }
}

// Residual graph used by the shortest-path oracle and by the cut reporter.
struct Residual {
  struct Edge {
    std::size_t to;
    double cap;
    double cost;
    std::size_t rev;
  };
  std::vector<std::vector<Edge>> adj;

  explicit Residual(std::size_t n) : adj(n) {}

  std::pair<std::size_t, std::size_t> add(std::size_t u, std::size_t v, double cap, double cost) {
    adj[u].push_back({v, cap, cost, adj[v].size()});
    adj[v].push_back({u, 0.0, -cost, adj[u].size() - 1});
    return {u, adj[u].size() - 1};
  }
};

struct ShortestPathRun {
  std::vector<double> flow;
  double sent = 0.0;
  double required = 0.0;
  std::vector<bool> reachable;  // from the super source, in the final residual graph
};

ShortestPathRun run_shortest_paths(const FlowNetwork& net) {
  validate(net);
  const std::size_t n = net.balance.size();
  const std::size_t source = n, sink = n + 1;
  const double eps = 1e-13 * mass_scale(net);
  Residual g(n + 2);
  std::vector<std::pair<std::size_t, std::size_t>> arc_ref;
  for (const auto& a : net.arcs) arc_ref.push_back(g.add(a.from, a.to, a.capacity, a.cost));
  ShortestPathRun run;
  for (std::size_t v = 0; v < n; ++v) {
    if (net.balance[v] > 0) g.add(source, v, net.balance[v], 0.0);
    if (net.balance[v] < 0) {
      g.add(v, sink, -net.balance[v], 0.0);
      run.required += -net.balance[v];
    }
  }
  const std::size_t V = n + 2;
  while (run.sent < run.required - eps) {
    std::vector<double> dist(V, kUnbounded);
    std::vector<std::size_t> prev_node(V, V), prev_edge(V, 0);
    dist[source] = 0.0;
    for (std::size_t iter = 0; iter < V; ++iter) {
      bool changed = false;
      for (std::size_t u = 0; u < V; ++u) {
        if (dist[u] == kUnbounded) continue;
        for (std::size_t k = 0; k < g.adj[u].size(); ++k) {
          const auto& e = g.adj[u][k];
          if (e.cap <= eps) continue;
          const double nd = dist[u] + e.cost;
          if (nd < dist[e.to] - 1e-12 * (1.0 + std::abs(nd))) {
            dist[e.to] = nd;
            prev_node[e.to] = u;
            prev_edge[e.to] = k;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    if (dist[sink] == kUnbounded) break;
    double push = run.required - run.sent;
    for (std::size_t v = sink; v != source; v = prev_node[v]) {
      push = std::min(push, g.adj[prev_node[v]][prev_edge[v]].cap);
    }
    for (std::size_t v = sink; v != source; v = prev_node[v]) {
      auto& e = g.adj[prev_node[v]][prev_edge[v]];
      e.cap -= push;
      g.adj[e.to][e.rev].cap += push;
    }
    run.sent += push;
  }
  run.flow.resize(net.arcs.size());
  for (std::size_t k = 0; k < net.arcs.size(); ++k) {
    const auto& [u, idx] = arc_ref[k];
    const auto& e = g.adj[u][idx];
    run.flow[k] = g.adj[e.to][e.rev].cap;
  }
  run.reachable.assign(V, false);
  std::deque<std::size_t> queue{source};
  run.reachable[source] = true;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (const auto& e : g.adj[u]) {
      if (e.cap > eps && !run.reachable[e.to]) {
        run.reachable[e.to] = true;
        queue.push_back(e.to);
      }
    }
  }
  run.reachable.resize(n);
  return run;
}

[[noreturn]] void throw_cut(const FlowNetwork& net, const ShortestPathRun& run) {
  std::vector<std::size_t> side;
  for (std::size_t v = 0; v < run.reachable.size(); ++v) {
    if (run.reachable[v]) side.push_back(v);
  }
  throw InfeasibleError(fmt::format(
      "infeasible flow network: the cut around nodes {} passes at most {:.12g} of the {:.12g} "
      "units demanded ({} nodes total)",
      side, run.sent, run.required, net.balance.size()));
}

}  // namespace

FlowSolution successive_shortest_paths(const FlowNetwork& net) {
  ShortestPathRun run = run_shortest_paths(net);
  const double eps = 1e-9 * mass_scale(net);
  double supply = 0.0;
  for (double b : net.balance) supply += std::max(b, 0.0);
  if (run.sent < run.required - eps || std::abs(supply - run.required) > eps) throw_cut(net, run);
  FlowSolution sol;
  sol.flow = std::move(run.flow);
  for (std::size_t k = 0; k < net.arcs.size(); ++k) sol.cost += sol.flow[k] * net.arcs[k].cost;
  return sol;
}

FlowSolution network_simplex(const FlowNetwork& net) {
  validate(net);
  const std::size_t n = net.balance.size();
  const std::size_t m = net.arcs.size();
  const std::size_t root = n;
  const std::size_t total = m + n;
  const double scale = mass_scale(net);
  const double flow_eps = 1e-14 * scale;

  constexpr std::int8_t kLower = 1, kUpper = -1, kTree = 0;
  constexpr int kUp = 1, kDown = -1;

  std::vector<std::size_t> src(total), dst(total);
  std::vector<double> cap(total), cost(total), flow(total, 0.0);
  std::vector<std::int8_t> state(total, kLower);

  double art_cost = 0.0;
  for (std::size_t e = 0; e < m; ++e) {
    src[e] = net.arcs[e].from;
    dst[e] = net.arcs[e].to;
    cap[e] = net.arcs[e].capacity;
    cost[e] = net.arcs[e].cost;
    art_cost = std::max(art_cost, std::abs(cost[e]));
  }
  art_cost = (art_cost + 1.0) * static_cast<double>(n + 1);
  const double price_eps = 1e-12 * art_cost;

  std::vector<std::size_t> tree_arcs(n);
  for (std::size_t u = 0; u < n; ++u) {
    const std::size_t e = m + u;
    cap[e] = kUnbounded;
    state[e] = kTree;
    tree_arcs[u] = e;
    if (net.balance[u] >= 0) {
      src[e] = u;
      dst[e] = root;
      flow[e] = net.balance[u];
      cost[e] = 0.0;
    } else {
      src[e] = root;
      dst[e] = u;
      flow[e] = -net.balance[u];
      cost[e] = art_cost;
    }
  }

  std::vector<std::size_t> parent(n + 1), pred(n + 1), depth(n + 1);
  std::vector<int> pred_dir(n + 1);
  std::vector<double> pi(n + 1);
  std::vector<std::vector<std::size_t>> tree_adj(n + 1);

  auto rebuild = [&] {
    for (auto& a : tree_adj) a.clear();
    for (std::size_t e : tree_arcs) {
      tree_adj[src[e]].push_back(e);
      tree_adj[dst[e]].push_back(e);
    }
    std::vector<bool> seen(n + 1, false);
    std::deque<std::size_t> queue{root};
    seen[root] = true;
    parent[root] = root;
    depth[root] = 0;
    pi[root] = 0.0;
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t e : tree_adj[u]) {
        const std::size_t v = src[e] == u ? dst[e] : src[e];
        if (seen[v]) continue;
        seen[v] = true;
        parent[v] = u;
        pred[v] = e;
        depth[v] = depth[u] + 1;
        if (src[e] == v) {
          pred_dir[v] = kUp;
          pi[v] = pi[u] - cost[e];
        } else {
          pred_dir[v] = kDown;
          pi[v] = pi[u] + cost[e];
        }
        queue.push_back(v);
      }
    }
  };
  rebuild();

  auto snap = [&](std::size_t e) {
    if (std::abs(flow[e]) <= flow_eps) flow[e] = 0.0;
    if (cap[e] != kUnbounded && std::abs(flow[e] - cap[e]) <= flow_eps) flow[e] = cap[e];
  };

  FlowSolution sol;
  for (;;) {
    std::size_t in_arc = total;
    for (std::size_t e = 0; e < m; ++e) {
      if (state[e] == kTree) continue;
      const double rc = cost[e] + pi[src[e]] - pi[dst[e]];
      if (state[e] * rc < -price_eps) {
        in_arc = e;
        break;
      }
    }
    if (in_arc == total) break;
    ++sol.pivots;

    std::size_t u = src[in_arc], v = dst[in_arc];
    while (u != v) {
      if (depth[u] > depth[v]) {
        u = parent[u];
      } else if (depth[v] > depth[u]) {
        v = parent[v];
      } else {
        u = parent[u];
        v = parent[v];
      }
    }
    const std::size_t join = u;

    const std::size_t first = state[in_arc] == kLower ? src[in_arc] : dst[in_arc];
    const std::size_t second = state[in_arc] == kLower ? dst[in_arc] : src[in_arc];
    double delta = cap[in_arc];
    int result = 0;
    std::size_t u_out = root;
    for (std::size_t w = first; w != join; w = parent[w]) {
      const std::size_t e = pred[w];
      double d = flow[e];
      if (pred_dir[w] == kDown) d = cap[e] == kUnbounded ? kUnbounded : cap[e] - d;
      if (d < delta) {
        delta = d;
        u_out = w;
        result = 1;
      }
    }
    for (std::size_t w = second; w != join; w = parent[w]) {
      const std::size_t e = pred[w];
      double d = flow[e];
      if (pred_dir[w] == kUp) d = cap[e] == kUnbounded ? kUnbounded : cap[e] - d;
      if (d <= delta) {
        delta = d;
        u_out = w;
        result = 2;
      }
    }
    if (delta == kUnbounded) throw InfeasibleError("network simplex: unbounded negative cycle");

    if (delta > 0.0) {
      const double val = state[in_arc] * delta;
      flow[in_arc] += val;
      snap(in_arc);
      for (std::size_t w = src[in_arc]; w != join; w = parent[w]) {
        flow[pred[w]] -= pred_dir[w] * val;
        snap(pred[w]);
      }
      for (std::size_t w = dst[in_arc]; w != join; w = parent[w]) {
        flow[pred[w]] += pred_dir[w] * val;
        snap(pred[w]);
      }
    }

    if (result == 0) {
      state[in_arc] = static_cast<std::int8_t>(-state[in_arc]);
      flow[in_arc] = state[in_arc] == kLower ? 0.0 : cap[in_arc];
      continue;
    }
    const std::size_t out_arc = pred[u_out];
    // The blocking arc ends at the bound it was moving towards.
    const bool decreasing = result == 1 ? pred_dir[u_out] == kUp : pred_dir[u_out] == kDown;
    state[out_arc] = decreasing ? kLower : kUpper;
    flow[out_arc] = decreasing ? 0.0 : cap[out_arc];
    state[in_arc] = kTree;
    *std::find(tree_arcs.begin(), tree_arcs.end(), out_arc) = in_arc;
    rebuild();
  }

  const double feas_eps = 1e-9 * scale;
  for (std::size_t u = 0; u < n; ++u) {
    if (flow[m + u] > feas_eps) throw_cut(net, run_shortest_paths(net));
  }
  sol.flow.assign(flow.begin(), flow.begin() + static_cast<std::ptrdiff_t>(m));
  for (std::size_t e = 0; e < m; ++e) sol.cost += sol.flow[e] * cost[e];
  sol.potential.assign(pi.begin(), pi.begin() + static_cast<std::ptrdiff_t>(n));
  return sol;
}

double complementary_slackness_gap(const FlowNetwork& net, const FlowSolution& sol,
                                   double flow_tol) {
  if (sol.potential.size() != net.balance.size()) {
    throw ContractError("complementary_slackness_gap: solution carries no potentials");
  }
  double gap = 0.0;
  for (std::size_t e = 0; e < net.arcs.size(); ++e) {
    const auto& a = net.arcs[e];
    const double rc = a.cost + sol.potential[a.from] - sol.potential[a.to];
    const double f = sol.flow[e];
    const bool at_lower = f <= flow_tol;
    const bool at_upper = a.capacity != kUnbounded && f >= a.capacity - flow_tol;
    if (at_lower && !at_upper) {
      gap = std::max(gap, -rc);
    } else if (at_upper && !at_lower) {
      gap = std::max(gap, rc);
    } else if (!at_lower && !at_upper) {
      gap = std::max(gap, std::abs(rc));
    }
  }
  return gap;
}

TransportFlow min_cost_flow(const TransportNetwork& p, FlowSolver solver) {
  const std::size_t n = p.supplies.size(), m = p.demands.size();
  if (n == 0 || m == 0) throw ContractError("min_cost_flow: empty supply or demand side");
  if (p.capacities.rows() != n || p.capacities.cols() != m || p.unit_costs.rows() != n ||
      p.unit_costs.cols() != m) {
    throw DimensionError("min_cost_flow: capacity/cost matrices must be supplies x demands");
  }
  double supply = 0.0, demand = 0.0;
  for (double s : p.supplies) {
    if (!(s >= 0.0)) throw ContractError("min_cost_flow: negative supply");
    supply += s;
  }
  for (double d : p.demands) {
    if (!(d >= 0.0)) throw ContractError("min_cost_flow: negative demand");
    demand += d;
  }
  const double tol = 1e-9 * std::max(1.0, demand);
  if (supply < demand - tol) {
    throw InfeasibleError(fmt::format(
        "infeasible flow network: the cut around all supply nodes passes at most {:.12g} of the "
        "{:.12g} units demanded",
        supply, demand));
  }
  TransportFlow out;
  FlowNetwork& net = out.network;
  const std::size_t super = n + m;
  net.balance.assign(n + m + 1, 0.0);
  net.balance[super] = demand;
  for (std::size_t j = 0; j < m; ++j) net.balance[n + j] = -p.demands[j];
  for (std::size_t i = 0; i < n; ++i) net.arcs.push_back({super, i, p.supplies[i], 0.0});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double c = p.unit_costs(i, j);
      const double k = p.capacities(i, j);
      if (!(k >= 0.0)) throw ContractError("min_cost_flow: negative capacity");
      net.arcs.push_back({i, n + j, k, c});
    }
  }
  out.solution = solver == FlowSolver::NetworkSimplex ? network_simplex(net)
                                                      : successive_shortest_paths(net);
  out.cost = out.solution.cost;
  out.flows = Tensor(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out.flows(i, j) = out.solution.flow[n + i * m + j];
  return out;
}

}  // namespace rlglc
