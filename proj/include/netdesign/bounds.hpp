#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "netdesign/design.hpp"
#include "netdesign/graph.hpp"
#include "netdesign/interference.hpp"
#include "netdesign/quasicoloring.hpp"

namespace netdesign {

namespace detail {

inline void require_no_isolated(const Graph& g, const char* who) {
  if (g.has_isolated_vertex())
    throw std::invalid_argument(std::string(who) + ": graph has isolated vertices");
}

inline void require_positive_dmin(const Graph& g, const char* who) {
  if (degree_stats(g).dmin == 0)
    throw std::invalid_argument(std::string(who) + ": requires dmin >= 1");
}

// sum over v of |P_v n N(v)| / d(v) for a partition given as block-of map.
inline double block_neighbor_ratio(const Graph& g, const std::vector<int>& block_of,
                                   std::span<const double> vertex_weight) {
  double total = 0.0;
  for (int v = 0; v < g.num_vertices(); ++v) {
    int inside = 0;
    for (int w : g.neighbors(v))
      if (block_of[w] == block_of[v]) ++inside;
    total += vertex_weight[v] * inside / static_cast<double>(g.degree(v));
  }
  return total;
}

}  // namespace detail

// |E xi| <= (1/(nr(r-1))) sum_v |P_v n N(v)| K_v / d(v), for T_{B,P}.
inline double bias_bound_lipschitz(const Graph& g, const Partition& partition,
                                   std::span<const double> k_v) {
  detail::require_no_isolated(g, "bias_bound_lipschitz");
  if (static_cast<int>(k_v.size()) != g.num_vertices())
    throw std::invalid_argument("bias_bound_lipschitz: one constant per vertex required");
  const int r = partition.block_size();
  const int n = partition.num_blocks();
  const auto block_of = partition.block_of();
  const double total = detail::block_neighbor_ratio(g, block_of, k_v);
  return total / (static_cast<double>(n) * r * (r - 1));
}

// |E xi| <= (1/(nr(r-1))) sum_i sum_{{w,w'} in S_i} (W_w(w') + W_{w'}(w)).
inline double bias_bound_weights(const Graph& g, const Partition& partition,
                                 const InterferenceSpec& spec) {
  const int r = partition.block_size();
  const int n = partition.num_blocks();
  double total = 0.0;
  for (const auto& block : partition.blocks)
    for (std::size_t a = 0; a < block.size(); ++a)
      for (std::size_t b = a + 1; b < block.size(); ++b)
        total += weight(spec, g, block[a], block[b]) + weight(spec, g, block[b], block[a]);
  return total / (static_cast<double>(n) * r * (r - 1));
}

// CRD: |E xi| <= Kbar / (rn - 1).
inline double bias_bound_crd(double kbar, int r, int n) {
  if (static_cast<long>(r) * n < 2) throw std::invalid_argument("bias_bound_crd: need rn >= 2");
  return kbar / (static_cast<double>(r) * n - 1.0);
}

// Semi-restricted randomization over refinements of Pi: |E xi| <= 2 Kmax |Pi| / (rn).
inline double bias_bound_semirestricted(double kmax, int num_parts, int r, int n) {
  return 2.0 * kmax * num_parts / (static_cast<double>(r) * n);
}

// sqrt(E_B xi^2) <= K1 C_P / (sqrt(pq) n) + (1/rn) sum 4 K2 / sqrt(d(v))
//                 + (K2/pqn) sum |P_v n N(v)| / d(v),   assuming ||f||_{d_K} <= 1.
inline double mse_bound_general(const Graph& g, const Partition& partition, double k1, double k2,
                                const ExperimentConfig& cfg) {
  detail::require_no_isolated(g, "mse_bound_general");
  partition.check_config(cfg);
  const double pq = static_cast<double>(cfg.p) * cfg.q();
  const double cp = c_p(partition, g, cfg);
  double inv_sqrt_deg = 0.0;
  for (int v = 0; v < g.num_vertices(); ++v) inv_sqrt_deg += 1.0 / std::sqrt(g.degree(v));
  const std::vector<double> ones(g.num_vertices(), 1.0);
  const double ratio = detail::block_neighbor_ratio(g, partition.block_of(), ones);
  return k1 * cp / (std::sqrt(pq) * cfg.n) + 4.0 * k2 * inv_sqrt_deg / cfg.num_vertices() +
         k2 * ratio / (pq * cfg.n);
}

struct BiasRmse {
  double bias = 0.0;
  double rmse = 0.0;
};

// Bounds for T_{B,P*} (partition by degree), assuming ||f||_{d_K} <= 1:
//   |E xi|        <= min{r-1, dmin} (K1 + K2) / ((r-1) dmin)
//   sqrt(E xi^2)  <= 2K1/(sqrt(pq) n) + 4K2/(r sqrt(dmin)) + r K2 min{r-1,dmin}/(pq dmin).
inline BiasRmse mse_bound_dense(const Graph& g, double k1, double k2,
                                const ExperimentConfig& cfg) {
  detail::require_positive_dmin(g, "mse_bound_dense");
  const auto stats = degree_stats(g);
  const double pq = static_cast<double>(cfg.p) * cfg.q();
  const double dmin = stats.dmin;
  const double clamp = std::min<double>(cfg.r - 1, dmin);
  BiasRmse out;
  out.bias = clamp * (k1 + k2) / ((cfg.r - 1) * dmin);
  out.rmse = 2.0 * k1 / (std::sqrt(pq) * cfg.n) + 4.0 * k2 / (cfg.r * std::sqrt(dmin)) +
             cfg.r * k2 * clamp / (pq * dmin);
  return out;
}

// Bounds for T_{B,P**} (randomized degree blocking), assuming ||f||_{d_K} <= 1:
//   |E xi|       <= K1/n + 3 K2 (dmax - dmin) / n
//   sqrt(E xi^2) <= K1/n + K2 (dmax-dmin)/(n dmin) + 2 K2 sqrt(dmax-dmin)/sqrt(n dmin)
//                 + 4 K2 sqrt(r^2 dmax^2 + 1)/sqrt(n dmin)
//                 + r K2 min{r-1, dmin} sqrt(r^2 dmax^2 + 1)/(pq sqrt(n) dmin).
inline BiasRmse mse_bound_sparse(const Graph& g, double k1, double k2,
                                 const ExperimentConfig& cfg) {
  detail::require_positive_dmin(g, "mse_bound_sparse");
  const auto stats = degree_stats(g);
  const double pq = static_cast<double>(cfg.p) * cfg.q();
  const double dmin = stats.dmin;
  const double dmax = stats.dmax;
  const double n = cfg.n;
  const double spread = dmax - dmin;
  const double hub = std::sqrt(static_cast<double>(cfg.r) * cfg.r * dmax * dmax + 1.0);
  const double clamp = std::min<double>(cfg.r - 1, dmin);
  BiasRmse out;
  out.bias = k1 / n + 3.0 * k2 * spread / n;
  out.rmse = k1 / n + k2 * spread / (n * dmin) + 2.0 * k2 * std::sqrt(spread) / std::sqrt(n * dmin) +
             4.0 * k2 * hub / std::sqrt(n * dmin) + cfg.r * k2 * clamp * hub / (pq * std::sqrt(n) * dmin);
  return out;
}

struct TypedBounds {
  double bias = 0.0;         // K |Pi| / (rn)
  double rmse_tv = 0.0;      // Prop-TVbound analogue under the typed metric
  double rmse_sparse = 0.0;  // sparse-regime bound for T_Pi
};

// Bounds for T_Pi with ||f_pi||_d <= 1 under d((a,b),(c,d)) = K |a/(a+b) - c/(c+d)|.
// The TV-style term holds for every refinement P of Pi, so |P_v n N(v)| is
// replaced by its worst case min{r-1, |Pi_v n N(v)|}.
inline TypedBounds typed_bounds(const Graph& g, const TypePartition& types, double k,
                                const ExperimentConfig& cfg) {
  detail::require_positive_dmin(g, "typed_bounds");
  types.check_divisible(cfg.r);
  const auto stats = degree_stats(g);
  const double pq = static_cast<double>(cfg.p) * cfg.q();
  const double dmin = stats.dmin;
  const double dmax = stats.dmax;
  const double n = cfg.n;
  TypedBounds out;
  out.bias = k * types.num_parts() / (static_cast<double>(cfg.r) * n);

  const auto part_of = types.part_of(cfg.num_vertices());
  double inv_sqrt_deg = 0.0;
  double ratio = 0.0;
  for (int v = 0; v < g.num_vertices(); ++v) {
    inv_sqrt_deg += 1.0 / std::sqrt(g.degree(v));
    int inside = 0;
    for (int w : g.neighbors(v))
      if (part_of[w] == part_of[v]) ++inside;
    ratio += std::min(cfg.r - 1, inside) / static_cast<double>(g.degree(v));
  }
  out.rmse_tv = 4.0 * k * inv_sqrt_deg / cfg.num_vertices() + k * ratio / (pq * n);

  const double hub = std::sqrt(static_cast<double>(cfg.r) * cfg.r * dmax * dmax + 1.0);
  const double clamp = std::min<double>(cfg.r - 1, dmin);
  out.rmse_sparse = k * (std::sqrt(2.0 * types.num_parts()) / std::sqrt(n * cfg.r * dmin) +
                         4.0 * hub / std::sqrt(n * dmin) + cfg.r * clamp * hub / (pq * std::sqrt(n) * dmin));
  return out;
}

struct HomophilyBounds {
  double bias = 0.0;        // K |Pi| / n
  double rmse = 0.0;
  double var_tideal = 0.0;  // 2 r sigma^2 / (pqn)
};

// Homophily bounds under T_Pi:
//   |E that - tbar|          <= K |Pi| / n
//   sqrt(E (that - tbar)^2)  <= (1/rn) sum 4K/sqrt(d(v))
//                              + (K/pqn) sum (r-1)|Pi_v n N(v)| / ((|Pi_v|-1) d(v))
//                              + sigma sqrt(2r) / sqrt(pqn).
inline HomophilyBounds homophily_bounds(double sigma, double k, int num_parts,
                                        const ExperimentConfig& cfg, const Graph& g,
                                        const TypePartition& types) {
  detail::require_positive_dmin(g, "homophily_bounds");
  types.check_divisible(cfg.r);
  const double pq = static_cast<double>(cfg.p) * cfg.q();
  HomophilyBounds out;
  out.bias = k * num_parts / static_cast<double>(cfg.n);
  out.var_tideal = 2.0 * cfg.r * sigma * sigma / (pq * cfg.n);

  const auto part_of = types.part_of(cfg.num_vertices());
  std::vector<std::size_t> part_size(types.num_parts());
  for (int i = 0; i < types.num_parts(); ++i) part_size[i] = types.parts[i].size();
  double inv_sqrt_deg = 0.0;
  double ratio = 0.0;
  for (int v = 0; v < g.num_vertices(); ++v) {
    inv_sqrt_deg += 1.0 / std::sqrt(g.degree(v));
    int inside = 0;
    for (int w : g.neighbors(v))
      if (part_of[w] == part_of[v]) ++inside;
    const double denom = static_cast<double>(part_size[part_of[v]] - 1) * g.degree(v);
    ratio += (cfg.r - 1) * inside / denom;
  }
  out.rmse = 4.0 * k * inv_sqrt_deg / cfg.num_vertices() + k * ratio / (pq * cfg.n) +
             sigma * std::sqrt(2.0 * cfg.r) / std::sqrt(pq * cfg.n);
  return out;
}

// ---- report -----------------------------------------------------------------------

struct BoundReport {
  std::string provenance;  // which formula produced the bounds
  double bias_bound = 0.0;
  double rmse_bound = 0.0;
  double k1 = 0.0, k2 = 0.0;
  double kbar = 0.0, kmax = 0.0;
  int dmin = 0, dmax = 0;
  int p = 0, q = 0, r = 0, n = 0;
  int num_parts = 0;
  double sigma = 0.0;
  double lip_scale = 1.0;  // computed ||f||_{d_K} used to rescale the metric
};

inline std::string bound_report_csv_header() {
  return "provenance,bias_bound,rmse_bound,k1,k2,kbar,kmax,dmin,dmax,p,q,r,n,num_parts,sigma,"
         "lip_scale";
}

inline std::string to_csv_row(const BoundReport& report) {
  char buffer[512];
  std::snprintf(buffer, sizeof(buffer),
                "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%d,%d,%d,%d,%d,%.17g,%.17g",
                report.provenance.c_str(), report.bias_bound, report.rmse_bound, report.k1,
                report.k2, report.kbar, report.kmax, report.dmin, report.dmax, report.p, report.q,
                report.r, report.n, report.num_parts, report.sigma, report.lip_scale);
  return buffer;
}

}  // namespace netdesign
