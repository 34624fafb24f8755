#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "netdesign/design.hpp"
#include "netdesign/graph.hpp"
#include "netdesign/interference.hpp"
#include "netdesign/transport.hpp"

namespace netdesign {

// Finite signed measure on bidegree pairs. Built from a treatment it has
// total mass exactly zero: the integer coefficients q (treated) and -p
// (control) telescope before the single division by pqn.
struct BidegreeMeasure {
  std::map<Bidegree, double> atoms;

  double total_mass() const {
    double mass = 0.0;
    for (const auto& [u, m] : atoms) mass += m;
    return mass;
  }

  double tv_norm() const {
    double mass = 0.0;
    for (const auto& [u, m] : atoms) mass += std::abs(m);
    return mass;
  }

  bool is_zero() const {
    for (const auto& [u, m] : atoms)
      if (m != 0.0) return false;
    return true;
  }
};

namespace detail {

inline std::map<Bidegree, long> bidegree_coefficients(const Graph& g, const Treatment& treatment,
                                                      const std::vector<int>& members) {
  std::map<Bidegree, long> coeffs;
  for (int v : members) {
    int a = 0;
    for (int w : g.neighbors(v))
      if (treatment.contains(w)) ++a;
    const Bidegree u{a, g.degree(v) - a};
    coeffs[u] += treatment.contains(v) ? treatment.config().q() : -treatment.config().p;
  }
  return coeffs;
}

inline BidegreeMeasure measure_from_coefficients(const std::map<Bidegree, long>& coeffs,
                                                 const ExperimentConfig& cfg) {
  BidegreeMeasure measure;
  const double pqn = static_cast<double>(cfg.p) * cfg.q() * cfg.n;
  for (const auto& [u, c] : coeffs)
    if (c != 0) measure.atoms[u] = static_cast<double>(c) / pqn;
  return measure;
}

}  // namespace detail

// D_T(u) = (1/pqn) sum_v pq(T,v) delta_{bidegree(v)}(u).
inline BidegreeMeasure bidegree_measure(const Graph& g, const Treatment& treatment) {
  if (treatment.config().num_vertices() != g.num_vertices())
    throw std::invalid_argument("bidegree_measure: treatment size mismatch");
  if (g.has_isolated_vertex())
    throw std::invalid_argument("bidegree_measure: graph has isolated vertices");
  std::vector<int> all(g.num_vertices());
  std::iota(all.begin(), all.end(), 0);
  return detail::measure_from_coefficients(detail::bidegree_coefficients(g, treatment, all),
                                           treatment.config());
}

// D^pi per part; requires |T n pi| = p|pi|/r for every part.
inline std::vector<BidegreeMeasure> typed_bidegree_measures(const Graph& g,
                                                            const Treatment& treatment,
                                                            const TypePartition& types) {
  if (treatment.config().num_vertices() != g.num_vertices())
    throw std::invalid_argument("typed_bidegree_measures: treatment size mismatch");
  if (g.has_isolated_vertex())
    throw std::invalid_argument("typed_bidegree_measures: graph has isolated vertices");
  const auto& cfg = treatment.config();
  types.check_divisible(cfg.r);
  std::vector<BidegreeMeasure> measures;
  measures.reserve(types.parts.size());
  for (const auto& part : types.parts) {
    long treated_in_part = 0;
    for (int v : part)
      if (treatment.contains(v)) ++treated_in_part;
    if (treated_in_part * cfg.r != static_cast<long>(part.size()) * cfg.p)
      throw std::invalid_argument("typed_bidegree_measures: |T n pi| != p|pi|/r");
    measures.push_back(detail::measure_from_coefficients(
        detail::bidegree_coefficients(g, treatment, part), cfg));
  }
  return measures;
}

// ---- perfect quasi-colorings (r = 2, p = q = 1) --------------------------------

namespace detail {

// Sorted bidegree lists of the vertices inside and outside Q; D_Q = 0 is
// exactly equality of the two multisets, so the test is pure integer work.
inline bool balanced_bidegrees(const Graph& g, const std::vector<char>& in_q,
                               const std::vector<int>& members) {
  std::vector<Bidegree> ins, outs;
  for (int v : members) {
    int a = 0;
    for (int w : g.neighbors(v))
      if (in_q[w]) ++a;
    (in_q[v] ? ins : outs).push_back(Bidegree{a, g.degree(v) - a});
  }
  if (ins.size() != outs.size()) return false;
  std::sort(ins.begin(), ins.end());
  std::sort(outs.begin(), outs.end());
  return ins == outs;
}

inline std::vector<char> coloring_mask(const Graph& g, const std::vector<int>& q_set) {
  if (g.num_vertices() % 2 != 0)
    throw std::invalid_argument("quasicoloring: |V(G)| must be even");
  if (static_cast<int>(q_set.size()) * 2 != g.num_vertices())
    throw std::invalid_argument("quasicoloring: |Q| must equal |V(G)|/2");
  std::vector<char> mask(g.num_vertices(), 0);
  for (int v : q_set) {
    if (v < 0 || v >= g.num_vertices())
      throw std::invalid_argument("quasicoloring: vertex out of range");
    if (mask[v]) throw std::invalid_argument("quasicoloring: repeated vertex");
    mask[v] = 1;
  }
  return mask;
}

}  // namespace detail

inline bool is_perfect_quasicoloring(const Graph& g, const std::vector<int>& q_set) {
  const auto mask = detail::coloring_mask(g, q_set);
  std::vector<int> all(g.num_vertices());
  std::iota(all.begin(), all.end(), 0);
  return detail::balanced_bidegrees(g, mask, all);
}

inline bool is_perfect_quasicoloring(const Graph& g, const std::vector<int>& q_set,
                                     const TypePartition& types) {
  const auto mask = detail::coloring_mask(g, q_set);
  types.check_divisible(2);
  for (const auto& part : types.parts)
    if (!detail::balanced_bidegrees(g, mask, part)) return false;
  return true;
}

// Exhaustive search for a perfect quasi-coloring; subsets are visited in
// lexicographic order, so the first hit is the smallest witness. Since Q is
// perfect iff its complement is, only subsets containing vertex 0 need to be
// scanned in the untyped case.
inline std::optional<std::vector<int>> find_perfect_quasicoloring(
    const Graph& g, const std::optional<TypePartition>& types = std::nullopt,
    int vertex_cap = 24) {
  const int nv = g.num_vertices();
  if (nv % 2 != 0) throw std::invalid_argument("quasicoloring: |V(G)| must be even");
  if (nv > vertex_cap) throw std::runtime_error("quasicoloring search: vertex cap exceeded");

  // Degree multiset balance is necessary; it prunes most candidates cheaply.
  auto degree_balanced = [&](const std::vector<int>& q_set) {
    std::vector<char> mask(nv, 0);
    for (int v : q_set) mask[v] = 1;
    std::map<int, int> counts;
    for (int v = 0; v < nv; ++v) counts[g.degree(v)] += mask[v] ? 1 : -1;
    for (const auto& [d, c] : counts)
      if (c != 0) return false;
    return true;
  };

  std::optional<std::vector<int>> witness;
  if (!types) {
    for_each_combination(nv - 1, nv / 2 - 1, [&](const std::vector<int>& rest) {
      if (witness) return;
      std::vector<int> q_set{0};
      for (int v : rest) q_set.push_back(v + 1);
      if (!degree_balanced(q_set)) return;
      if (is_perfect_quasicoloring(g, q_set)) witness = q_set;
    });
    return witness;
  }

  types->check_divisible(2);
  enumerate_type_restricted(*types, ExperimentConfig::create(1, 2, nv / 2),
                            [&](const Treatment& t) {
                              if (witness) return;
                              if (!degree_balanced(t.treated())) return;
                              if (is_perfect_quasicoloring(g, t.treated(), *types))
                                witness = t.treated();
                            },
                            std::uint64_t{1} << 62);
  return witness;
}

// Push-forward by (a,b) -> (b,a); tau_* D_Q = -D_{V\Q} for half colorings.
inline BidegreeMeasure pushforward_swap(const BidegreeMeasure& measure) {
  BidegreeMeasure out;
  for (const auto& [u, m] : measure.atoms) out.atoms[Bidegree{u.untreated, u.treated}] += m;
  return out;
}

// ---- Wasserstein norm -----------------------------------------------------------

struct TransportLeg {
  Bidegree from;
  Bidegree to;
  double mass = 0.0;
};

struct WassersteinResult {
  double value = 0.0;
  std::vector<TransportLeg> plan;
};

// ||D||_w under d_K: by Kantorovich duality on a finite metric space the
// supremum over 1-Lipschitz f equals the minimum cost of transporting the
// positive part onto the negative part.
inline WassersteinResult wasserstein_norm(const BidegreeMeasure& measure,
                                          const LipschitzBudget& budget, int dmax) {
  const double scale = std::max(measure.tv_norm(), 1.0);
  if (std::abs(measure.total_mass()) > 1e-12 * scale)
    throw std::invalid_argument("wasserstein_norm: measure must have total mass 0");

  std::vector<Bidegree> sources, sinks;
  std::vector<double> supply, demand;
  for (const auto& [u, m] : measure.atoms) {
    if (m > 0.0) {
      sources.push_back(u);
      supply.push_back(m);
    } else if (m < 0.0) {
      sinks.push_back(u);
      demand.push_back(-m);
    }
  }
  WassersteinResult result;
  if (sources.empty()) return result;

  // The pieces may be off by the tolerance allowed above; rebalance the last
  // demand so the solver sees an exactly balanced instance.
  double s_total = 0.0, d_total = 0.0;
  for (double s : supply) s_total += s;
  for (double d : demand) d_total += d;
  if (!demand.empty()) demand.back() += s_total - d_total;

  const DkMetric metric{budget.k1, budget.k2, dmax};
  std::vector<std::vector<double>> cost(sources.size(), std::vector<double>(sinks.size(), 0.0));
  for (std::size_t i = 0; i < sources.size(); ++i)
    for (std::size_t j = 0; j < sinks.size(); ++j) cost[i][j] = metric(sources[i], sinks[j]);

  const auto plan = transport::solve(supply, demand, cost);
  result.value = plan.cost;
  for (const auto& [i, j, mass] : plan.legs)
    result.plan.push_back(TransportLeg{sources[i], sinks[j], mass});
  return result;
}

// ---- partition constant and measure integrals -----------------------------------

// C_P = (2 / (dmax (r-1))) sum_i sum_{{v,v'} in S_i} |d(v) - d(v')|.
inline double c_p(const Partition& partition, const Graph& g, const ExperimentConfig& cfg) {
  partition.check_config(cfg);
  long long total = 0;
  for (const auto& block : partition.blocks)
    for (std::size_t a = 0; a < block.size(); ++a)
      for (std::size_t b = a + 1; b < block.size(); ++b)
        total += std::abs(g.degree(block[a]) - g.degree(block[b]));
  if (total == 0) return 0.0;
  const int dmax = degree_stats(g).dmax;
  return 2.0 * static_cast<double>(total) / (static_cast<double>(dmax) * (cfg.r - 1));
}

// xi = sum_u f(u) D(u) (Eq. for symmetric models); typed version sums the
// per-part integrals.
inline double xi_via_measure(const SymmetricTable& f, const BidegreeMeasure& measure) {
  double total = 0.0;
  for (const auto& [u, m] : measure.atoms) total += f.at(u) * m;
  return total;
}

inline double xi_via_measure(const SymmetricInterference& f, const BidegreeMeasure& measure) {
  double total = 0.0;
  for (const auto& [u, m] : measure.atoms) total += f.eval(u.treated, u.degree()) * m;
  return total;
}

inline double xi_via_measure(const std::vector<SymmetricTable>& per_part,
                             const std::vector<BidegreeMeasure>& measures) {
  if (per_part.size() != measures.size())
    throw std::invalid_argument("xi_via_measure: one table per part required");
  double total = 0.0;
  for (std::size_t i = 0; i < per_part.size(); ++i)
    total += xi_via_measure(per_part[i], measures[i]);
  return total;
}

// ---- serialization ---------------------------------------------------------------

// Lines "a b mass".
inline void write_measure(std::ostream& os, const BidegreeMeasure& measure) {
  char buffer[80];
  for (const auto& [u, m] : measure.atoms) {
    std::snprintf(buffer, sizeof(buffer), "%d %d %.17g", u.treated, u.untreated, m);
    os << buffer << '\n';
  }
}

inline BidegreeMeasure read_measure(std::istream& is) {
  BidegreeMeasure measure;
  int a = 0, b = 0;
  double m = 0.0;
  while (is >> a >> b >> m) measure.atoms[Bidegree{a, b}] += m;
  return measure;
}

}  // namespace netdesign
