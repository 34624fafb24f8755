#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace netdesign::transport {

struct Plan {
  double cost = 0.0;
  // (source index, sink index, shipped mass), only positive shipments.
  std::vector<std::tuple<int, int, double>> legs;
};

// Exact balanced transportation problem on a dense bipartite instance,
// solved by successive shortest augmenting paths (Bellman-Ford on the
// residual graph, which keeps the logic straightforward in the presence of
// negative backward arcs). Instances here are tiny -- the atoms of a
// bidegree measure -- so exactness and determinism matter, asymptotics do
// not. Costs must be nonnegative.
inline Plan solve(std::vector<double> supply, std::vector<double> demand,
                  const std::vector<std::vector<double>>& cost) {
  const int ns = static_cast<int>(supply.size());
  const int nt = static_cast<int>(demand.size());
  if (static_cast<int>(cost.size()) != ns)
    throw std::invalid_argument("transport: cost matrix has wrong row count");
  for (const auto& row : cost)
    if (static_cast<int>(row.size()) != nt)
      throw std::invalid_argument("transport: cost matrix has wrong column count");

  double total_supply = 0.0, total_demand = 0.0;
  for (double s : supply) {
    if (s < 0.0) throw std::invalid_argument("transport: negative supply");
    total_supply += s;
  }
  for (double d : demand) {
    if (d < 0.0) throw std::invalid_argument("transport: negative demand");
    total_demand += d;
  }
  const double scale = std::max({total_supply, total_demand, 1.0});
  if (std::abs(total_supply - total_demand) > 1e-9 * scale)
    throw std::invalid_argument("transport: unbalanced instance");
  const double dust = 1e-13 * scale;  // residue left by repeated subtraction

  std::vector<std::vector<double>> flow(ns, std::vector<double>(nt, 0.0));
  const double inf = std::numeric_limits<double>::infinity();

  auto remaining_supply = [&] {
    double left = 0.0;
    for (double s : supply) left += std::max(s, 0.0);
    return left;
  };

  int guard = 8 * (ns + 1) * (nt + 1) + 16;
  while (remaining_supply() > dust) {
    if (--guard < 0) throw std::runtime_error("transport: failed to converge");

    std::vector<double> dist_s(ns, inf), dist_t(nt, inf);
    std::vector<int> parent_t(nt, -1);  // sink j reached by forward arc from source i
    std::vector<int> parent_s(ns, -1);  // source i reached by backward arc from sink j
    for (int i = 0; i < ns; ++i)
      if (supply[i] > dust) dist_s[i] = 0.0;

    for (int pass = 0; pass <= ns + nt + 1; ++pass) {
      bool changed = false;
      for (int i = 0; i < ns; ++i) {
        if (dist_s[i] == inf) continue;
        for (int j = 0; j < nt; ++j) {
          const double candidate = dist_s[i] + cost[i][j];
          if (candidate < dist_t[j] - 1e-15) {
            dist_t[j] = candidate;
            parent_t[j] = i;
            changed = true;
          }
        }
      }
      for (int j = 0; j < nt; ++j) {
        if (dist_t[j] == inf) continue;
        for (int i = 0; i < ns; ++i) {
          if (flow[i][j] <= dust) continue;  // backward arc needs positive flow
          const double candidate = dist_t[j] - cost[i][j];
          if (candidate < dist_s[i] - 1e-15) {
            dist_s[i] = candidate;
            parent_s[i] = j;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }

    int sink = -1;
    double best = inf;
    for (int j = 0; j < nt; ++j)
      if (demand[j] > dust && dist_t[j] < best) {
        best = dist_t[j];
        sink = j;
      }
    if (sink < 0) throw std::runtime_error("transport: no augmenting path");

    // Walk the alternating path back to an unsaturated source.
    double bottleneck = demand[sink];
    for (int j = sink;;) {
      const int i = parent_t[j];
      if (parent_s[i] == -1) {
        bottleneck = std::min(bottleneck, supply[i]);
        break;
      }
      const int jprev = parent_s[i];
      bottleneck = std::min(bottleneck, flow[i][jprev]);
      j = jprev;
    }
    for (int j = sink;;) {
      const int i = parent_t[j];
      flow[i][j] += bottleneck;
      if (parent_s[i] == -1) {
        supply[i] -= bottleneck;
        break;
      }
      const int jprev = parent_s[i];
      flow[i][jprev] -= bottleneck;
      j = jprev;
    }
    demand[sink] -= bottleneck;
  }

  Plan plan;
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nt; ++j)
      if (flow[i][j] > dust) {
        plan.cost += flow[i][j] * cost[i][j];
        plan.legs.emplace_back(i, j, flow[i][j]);
      }
  return plan;
}

}  // namespace netdesign::transport
