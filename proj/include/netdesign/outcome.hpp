#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "netdesign/design.hpp"
#include "netdesign/graph.hpp"
#include "netdesign/interference.hpp"
#include "netdesign/rng.hpp"

namespace netdesign {

// y_v = x_v + 1_T(v) t_v + f_v(T n N(v)).
struct OutcomeModel {
  std::vector<double> x;  // baseline
  std::vector<double> t;  // direct effect
  InterferenceSpec spec;

  void check_covers(int num_vertices) const {
    if (static_cast<int>(x.size()) != num_vertices || static_cast<int>(t.size()) != num_vertices)
      throw std::invalid_argument("outcome model: x/t must cover all vertices");
  }
};

// |T n N(v)| for every vertex.
inline std::vector<int> treated_neighbor_counts(const Graph& g, const Treatment& treatment) {
  std::vector<int> counts(g.num_vertices(), 0);
  for (int v = 0; v < g.num_vertices(); ++v)
    for (int w : g.neighbors(v))
      if (treatment.contains(w)) ++counts[v];
  return counts;
}

inline std::vector<double> simulate_outcomes(const OutcomeModel& model, const Graph& g,
                                             const Treatment& treatment) {
  model.check_covers(g.num_vertices());
  if (treatment.config().num_vertices() != g.num_vertices())
    throw std::invalid_argument("simulate_outcomes: treatment size mismatch");
  const auto counts = treated_neighbor_counts(g, treatment);
  std::vector<double> y(g.num_vertices());
  for (int v = 0; v < g.num_vertices(); ++v) {
    y[v] = model.x[v] + (treatment.contains(v) ? model.t[v] : 0.0) +
           eval_interference(model.spec, g, v, counts[v]);
  }
  return y;
}

// (1/pqn) (q sum_T y - p sum_{T^c} y).
inline double neyman_estimate(std::span<const double> y, const Treatment& treatment) {
  const auto& cfg = treatment.config();
  if (static_cast<int>(y.size()) != cfg.num_vertices())
    throw std::invalid_argument("neyman_estimate: outcome vector size mismatch");
  double sum = 0.0;
  for (int v = 0; v < cfg.num_vertices(); ++v) sum += treatment.sign_coefficient(v) * y[v];
  return sum / (static_cast<double>(cfg.p) * cfg.q() * cfg.n);
}

// tbar = (1/rn) sum t_v, the estimand.
inline double average_direct_effect(const OutcomeModel& model) {
  double sum = 0.0;
  for (double tv : model.t) sum += tv;
  return model.t.empty() ? 0.0 : sum / static_cast<double>(model.t.size());
}

// (1/pqn) (q sum_T (x_v + t_v) - p sum_{T^c} x_v): the estimator with the
// interference terms removed.
inline double t_ideal(const OutcomeModel& model, const Treatment& treatment) {
  const auto& cfg = treatment.config();
  model.check_covers(cfg.num_vertices());
  double sum = 0.0;
  for (int v = 0; v < cfg.num_vertices(); ++v) {
    if (treatment.contains(v))
      sum += cfg.q() * (model.x[v] + model.t[v]);
    else
      sum -= cfg.p * model.x[v];
  }
  return sum / (static_cast<double>(cfg.p) * cfg.q() * cfg.n);
}

// xi = (1/pqn) sum_v pq(T,v) f_v(T n N(v)), the average interference effect;
// equals neyman_estimate - t_ideal.
inline double xi(const OutcomeModel& model, const Graph& g, const Treatment& treatment) {
  const auto& cfg = treatment.config();
  if (cfg.num_vertices() != g.num_vertices())
    throw std::invalid_argument("xi: treatment size mismatch");
  const auto counts = treated_neighbor_counts(g, treatment);
  double sum = 0.0;
  for (int v = 0; v < g.num_vertices(); ++v)
    sum += treatment.sign_coefficient(v) * eval_interference(model.spec, g, v, counts[v]);
  return sum / (static_cast<double>(cfg.p) * cfg.q() * cfg.n);
}

// ---- homophily ---------------------------------------------------------------

struct HomophilyStats {
  std::vector<double> part_x_mean;
  std::vector<double> part_t_mean;
  std::vector<double> discrepancy;  // eps_v = x_v - x_pi + (q/r)(t_v - t_pi)
  double sigma_sq = 0.0;            // (1/rn) sum eps_v^2
};

inline HomophilyStats homophily_stats(const OutcomeModel& model, const TypePartition& types,
                                      const ExperimentConfig& cfg) {
  model.check_covers(cfg.num_vertices());
  const auto part_of = types.part_of(cfg.num_vertices());
  for (int v = 0; v < cfg.num_vertices(); ++v)
    if (part_of[v] < 0) throw std::invalid_argument("homophily: types do not cover vertex set");

  HomophilyStats stats;
  stats.part_x_mean.assign(types.num_parts(), 0.0);
  stats.part_t_mean.assign(types.num_parts(), 0.0);
  for (int i = 0; i < types.num_parts(); ++i) {
    const auto& part = types.parts[i];
    for (int v : part) {
      stats.part_x_mean[i] += model.x[v];
      stats.part_t_mean[i] += model.t[v];
    }
    stats.part_x_mean[i] /= static_cast<double>(part.size());
    stats.part_t_mean[i] /= static_cast<double>(part.size());
  }
  stats.discrepancy.resize(cfg.num_vertices());
  const double q_over_r = static_cast<double>(cfg.q()) / cfg.r;
  double sum_sq = 0.0;
  for (int v = 0; v < cfg.num_vertices(); ++v) {
    const int i = part_of[v];
    stats.discrepancy[v] = model.x[v] - stats.part_x_mean[i] +
                           q_over_r * (model.t[v] - stats.part_t_mean[i]);
    sum_sq += stats.discrepancy[v] * stats.discrepancy[v];
  }
  stats.sigma_sq = sum_sq / cfg.num_vertices();
  return stats;
}

// x_v ~ N(0,1), t_v ~ N(2, 0.25); the 0.25 is a variance, so sd = 0.5.
inline OutcomeModel sample_gaussian_model(const Graph& g, InterferenceSpec spec, Rng& rng) {
  OutcomeModel model;
  model.spec = std::move(spec);
  model.x.reserve(g.num_vertices());
  model.t.reserve(g.num_vertices());
  for (int v = 0; v < g.num_vertices(); ++v) model.x.push_back(rng.next_normal(0.0, 1.0));
  for (int v = 0; v < g.num_vertices(); ++v) model.t.push_back(rng.next_normal(2.0, 0.5));
  return model;
}

inline OutcomeModel sample_gaussian_model(const Graph& g, InterferenceSpec spec,
                                          std::uint64_t seed) {
  Rng rng(seed);
  return sample_gaussian_model(g, std::move(spec), rng);
}

// Per-vertex rows "v x_v t_v" preceded by a line naming the interference spec.
inline void write_outcome_model(std::ostream& os, const OutcomeModel& model,
                                const std::string& spec_label) {
  os << "spec " << spec_label << '\n';
  char buffer[96];
  for (std::size_t v = 0; v < model.x.size(); ++v) {
    std::snprintf(buffer, sizeof(buffer), "%zu %.17g %.17g", v, model.x[v], model.t[v]);
    os << buffer << '\n';
  }
}

// Parsed model file; the interference label is returned as-is for the caller
// to bind to an InterferenceSpec.
struct OutcomeModelFile {
  std::vector<double> x;
  std::vector<double> t;
  std::string spec_label;
};

inline OutcomeModelFile read_outcome_model(std::istream& is) {
  OutcomeModelFile file;
  std::string keyword;
  if (!(is >> keyword) || keyword != "spec")
    throw std::runtime_error("outcome model file: missing spec line");
  std::getline(is, file.spec_label);
  if (!file.spec_label.empty() && file.spec_label.front() == ' ')
    file.spec_label.erase(file.spec_label.begin());
  std::size_t v = 0;
  double x = 0.0, t = 0.0;
  while (is >> v >> x >> t) {
    if (v != file.x.size()) throw std::runtime_error("outcome model file: rows out of order");
    file.x.push_back(x);
    file.t.push_back(t);
  }
  return file;
}

}  // namespace netdesign
