#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "netdesign/design.hpp"
#include "netdesign/graph.hpp"
#include "netdesign/outcome.hpp"
#include "netdesign/rng.hpp"

namespace netdesign {

// Neumaier compensated summation; the enumeration oracles promise 1e-12
// accuracy over up to 10^6 design points.
class CompensatedSum {
 public:
  void add(double value) {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value))
      compensation_ += (sum_ - t) + value;
    else
      compensation_ += (value - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

struct ExactMoments {
  double mean_xi = 0.0;
  double second_moment_xi = 0.0;
  double mean_estimator = 0.0;
  double var_estimator = 0.0;
  double mean_tideal = 0.0;
  double var_tideal = 0.0;
  std::uint64_t num_assignments = 0;
  std::string design;
  std::string instance;
};

namespace detail {

class MomentAccumulator {
 public:
  void add(double xi_value, double estimator, double tideal) {
    xi_.add(xi_value);
    xi_sq_.add(xi_value * xi_value);
    est_.add(estimator);
    est_sq_.add(estimator * estimator);
    ideal_.add(tideal);
    ideal_sq_.add(tideal * tideal);
    ++count_;
  }

  ExactMoments finish(std::string design, std::string instance) const {
    if (count_ == 0) throw std::logic_error("oracle: no assignments enumerated");
    const double n = static_cast<double>(count_);
    ExactMoments m;
    m.mean_xi = xi_.value() / n;
    m.second_moment_xi = xi_sq_.value() / n;
    m.mean_estimator = est_.value() / n;
    m.var_estimator = est_sq_.value() / n - m.mean_estimator * m.mean_estimator;
    m.mean_tideal = ideal_.value() / n;
    m.var_tideal = ideal_sq_.value() / n - m.mean_tideal * m.mean_tideal;
    m.num_assignments = count_;
    m.design = std::move(design);
    m.instance = std::move(instance);
    return m;
  }

 private:
  CompensatedSum xi_, xi_sq_, est_, est_sq_, ideal_, ideal_sq_;
  std::uint64_t count_ = 0;
};

inline void evaluate_assignment(const Graph& g, const OutcomeModel& model, const Treatment& t,
                                MomentAccumulator& acc) {
  const double xi_value = xi(model, g, t);
  const double ideal = t_ideal(model, t);
  acc.add(xi_value, ideal + xi_value, ideal);
}

}  // namespace detail

// Exact moments of xi, the estimator, and t_ideal over all C(r,p)^n
// within-block assignments of a fixed partition.
inline ExactMoments exact_moments_blocked(const Graph& g, const Partition& partition,
                                          const ExperimentConfig& cfg, const OutcomeModel& model,
                                          std::uint64_t cap = kDefaultEnumerationCap) {
  model.check_covers(g.num_vertices());
  detail::MomentAccumulator acc;
  enumerate_block_assignments(partition, cfg,
                              [&](const Treatment& t) { detail::evaluate_assignment(g, model, t, acc); },
                              cap);
  std::ostringstream instance;
  instance << "blocked graph nv=" << g.num_vertices() << " e=" << g.num_edges();
  return acc.finish("within-blocks", instance.str());
}

// Exact moments over all (rn choose pn) completely randomized treatments.
inline ExactMoments exact_moments_crd(const Graph& g, const ExperimentConfig& cfg,
                                      const OutcomeModel& model,
                                      std::uint64_t cap = kDefaultEnumerationCap) {
  if (cfg.num_vertices() != g.num_vertices())
    throw std::invalid_argument("exact_moments_crd: config does not match graph");
  model.check_covers(g.num_vertices());
  if (binomial_coefficient(cfg.num_vertices(), cfg.num_treated()) > cap)
    throw std::runtime_error("enumeration cap exceeded");
  detail::MomentAccumulator acc;
  for_each_combination(cfg.num_vertices(), cfg.num_treated(), [&](const std::vector<int>& combo) {
    detail::evaluate_assignment(g, model, Treatment::from_set(combo, cfg), acc);
  });
  std::ostringstream instance;
  instance << "crd graph nv=" << g.num_vertices() << " e=" << g.num_edges();
  return acc.finish("crd", instance.str());
}

// Exact moments over all T_Pi draws (product of per-part subsets).
inline ExactMoments exact_moments_typed(const Graph& g, const TypePartition& types,
                                        const ExperimentConfig& cfg, const OutcomeModel& model,
                                        std::uint64_t cap = kDefaultEnumerationCap) {
  model.check_covers(g.num_vertices());
  detail::MomentAccumulator acc;
  enumerate_type_restricted(types, cfg,
                            [&](const Treatment& t) { detail::evaluate_assignment(g, model, t, acc); },
                            cap);
  std::ostringstream instance;
  instance << "typed graph nv=" << g.num_vertices() << " parts=" << types.num_parts();
  return acc.finish("type-restricted", instance.str());
}

// ---- Monte Carlo ------------------------------------------------------------------

using DesignSampler = std::function<Treatment(Rng&)>;

struct MonteCarloMoments {
  double mean_xi = 0.0;
  double se_mean_xi = 0.0;
  double second_moment_xi = 0.0;
  double se_second_moment_xi = 0.0;
  double mean_estimator = 0.0;
  double se_mean_estimator = 0.0;
  double var_estimator = 0.0;
  double mse_estimator = 0.0;  // mean of (estimator - tbar)^2
  double se_mse_estimator = 0.0;
  std::uint64_t replications = 0;
};

// Seeded Monte Carlo over treatment draws. Replication i reads only from
// Rng(seed, i), and reduction happens in index order, so the result is a
// pure function of (inputs, seed) no matter how many threads run.
inline MonteCarloMoments monte_carlo_moments(const DesignSampler& sampler,
                                             const OutcomeModel& model, const Graph& g,
                                             const ExperimentConfig& cfg,
                                             std::uint64_t replications, std::uint64_t seed,
                                             int threads = 1) {
  if (replications < 2) throw std::invalid_argument("monte_carlo_moments: need >= 2 replications");
  if (cfg.num_vertices() != g.num_vertices())
    throw std::invalid_argument("monte_carlo_moments: config does not match graph");
  model.check_covers(g.num_vertices());
  const double tbar = average_direct_effect(model);

  std::vector<double> xi_values(replications), est_values(replications);
  auto run_range = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t i = begin; i < end; ++i) {
      Rng rng(seed, i);
      const Treatment t = sampler(rng);
      const double xi_value = xi(model, g, t);
      xi_values[i] = xi_value;
      est_values[i] = t_ideal(model, t) + xi_value;
    }
  };
  if (threads <= 1) {
    run_range(0, replications);
  } else {
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (replications + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
      const std::uint64_t begin = std::min<std::uint64_t>(w * chunk, replications);
      const std::uint64_t end = std::min<std::uint64_t>(begin + chunk, replications);
      if (begin < end) pool.emplace_back(run_range, begin, end);
    }
    for (auto& worker : pool) worker.join();
  }

  CompensatedSum xi_sum, xi_sq, xi_4th, est_sum, est_sq, err_sq, err_4th;
  for (std::uint64_t i = 0; i < replications; ++i) {
    const double x = xi_values[i];
    const double e = est_values[i];
    const double err = e - tbar;
    xi_sum.add(x);
    xi_sq.add(x * x);
    xi_4th.add(x * x * x * x);
    est_sum.add(e);
    est_sq.add(e * e);
    err_sq.add(err * err);
    err_4th.add(err * err * err * err);
  }
  const double n = static_cast<double>(replications);
  MonteCarloMoments m;
  m.replications = replications;
  m.mean_xi = xi_sum.value() / n;
  m.second_moment_xi = xi_sq.value() / n;
  m.mean_estimator = est_sum.value() / n;
  m.var_estimator = est_sq.value() / n - m.mean_estimator * m.mean_estimator;
  m.mse_estimator = err_sq.value() / n;
  const double var_xi = std::max(0.0, m.second_moment_xi - m.mean_xi * m.mean_xi);
  m.se_mean_xi = std::sqrt(var_xi / n);
  m.se_mean_estimator = std::sqrt(std::max(0.0, m.var_estimator) / n);
  const double var_xi_sq = std::max(0.0, xi_4th.value() / n - m.second_moment_xi * m.second_moment_xi);
  m.se_second_moment_xi = std::sqrt(var_xi_sq / n);
  const double var_err_sq = std::max(0.0, err_4th.value() / n - m.mse_estimator * m.mse_estimator);
  m.se_mse_estimator = std::sqrt(var_err_sq / n);
  return m;
}

// ---- disk cache -------------------------------------------------------------------

inline std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline std::string graph_hash(const Graph& g) {
  std::ostringstream os;
  write_graph(os, g);
  char buffer[24];
  std::snprintf(buffer, sizeof(buffer), "g%016llx",
                static_cast<unsigned long long>(fnv1a(os.str())));
  return buffer;
}

inline std::string model_hash(const OutcomeModel& model) {
  std::ostringstream os;
  char buffer[80];
  for (std::size_t v = 0; v < model.x.size(); ++v) {
    std::snprintf(buffer, sizeof(buffer), "%zu %.17g %.17g;", v, model.x[v], model.t[v]);
    os << buffer;
  }
  std::snprintf(buffer, sizeof(buffer), "m%016llx",
                static_cast<unsigned long long>(fnv1a(os.str())));
  return buffer;
}

inline std::string oracle_cache_key(const Graph& g, const std::string& design_descriptor,
                                    const OutcomeModel& model) {
  char buffer[24];
  std::snprintf(buffer, sizeof(buffer), "d%016llx",
                static_cast<unsigned long long>(fnv1a(design_descriptor)));
  return graph_hash(g) + "-" + buffer + "-" + model_hash(model);
}

// Tiny text cache of exact oracle results keyed by
// (graph hash, design descriptor, model hash).
class OracleCache {
 public:
  explicit OracleCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  std::optional<ExactMoments> load(const std::string& key) const {
    std::ifstream in(dir_ / (key + ".txt"));
    if (!in) return std::nullopt;
    ExactMoments m;
    std::string label;
    if (!(in >> label >> m.mean_xi >> m.second_moment_xi >> m.mean_estimator >> m.var_estimator >>
          m.mean_tideal >> m.var_tideal >> m.num_assignments))
      return std::nullopt;
    std::getline(in, label);
    std::getline(in, m.design);
    std::getline(in, m.instance);
    return m;
  }

  void store(const std::string& key, const ExactMoments& m) const {
    std::ofstream out(dir_ / (key + ".txt"));
    char buffer[256];
    std::snprintf(buffer, sizeof(buffer), "v1 %.17g %.17g %.17g %.17g %.17g %.17g %llu",
                  m.mean_xi, m.second_moment_xi, m.mean_estimator, m.var_estimator, m.mean_tideal,
                  m.var_tideal, static_cast<unsigned long long>(m.num_assignments));
    out << buffer << '\n' << m.design << '\n' << m.instance << '\n';
  }

 private:
  std::filesystem::path dir_;
};

}  // namespace netdesign
