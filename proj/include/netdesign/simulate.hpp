#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "netdesign/bounds.hpp"
#include "netdesign/design.hpp"
#include "netdesign/graph.hpp"
#include "netdesign/interference.hpp"
#include "netdesign/oracle.hpp"
#include "netdesign/outcome.hpp"
#include "netdesign/quasicoloring.hpp"

namespace netdesign {

// One simulation cell: a graph, a design, an interference strength, and the
// Monte Carlo settings. Field names double as CLI option and config-file keys.
struct RunConfig {
  std::string family = "er";  // er | pa | file
  int n_vertices = 100;
  double density = 0.1;  // er edge probability
  double pa_pow = 1.0;   // pa attachment power ("pow")
  int pa_m = 2;          // pa edges per new vertex ("m")
  std::string graph_file;
  std::uint64_t graph_seed = 1;

  std::string design = "crd";  // crd | pbd | pbd-random | typed
  std::string types_file;

  std::string interference = "linear";  // linear | normalized-linear | threshold-count |
                                        // threshold-fraction | table
  double gamma = 1.0;
  int threshold_k = 1;
  double frac = -1.0;  // threshold-fraction cutoff; negative means default p/r
  std::string table_file;

  int p = 1;
  int r = 2;
  std::uint64_t model_seed = 1;
  std::uint64_t design_seed = 1;
  std::uint64_t replications = 2000;
  bool redraw_models = false;
  int threads = 1;
};

struct CellResult {
  std::string family;
  int n_vertices = 0;
  double density_or_pow = 0.0;
  std::optional<int> m;
  double gamma = 0.0;
  std::string design;
  std::uint64_t replications = 0;
  double mse = 0.0;
  double log_mse = 0.0;  // natural logarithm
  double bias_mc = 0.0;
  double se = 0.0;  // standard error of the MSE estimate
  std::optional<double> bound_bias;
  std::optional<double> bound_rmse;
  std::uint64_t seed = 0;
};

inline Graph make_run_graph(const RunConfig& config) {
  if (config.family == "er")
    return gen_erdos_renyi(config.n_vertices, config.density, config.graph_seed);
  if (config.family == "pa")
    return gen_preferential_attachment(config.n_vertices, config.pa_pow, config.pa_m,
                                       config.graph_seed);
  if (config.family == "file") {
    std::ifstream in(config.graph_file);
    if (!in) throw std::invalid_argument("run config: cannot open graph file " + config.graph_file);
    return read_graph(in);
  }
  throw std::invalid_argument("run config: unknown graph family " + config.family);
}

inline SymmetricInterference make_interference(const RunConfig& config) {
  if (config.interference == "linear") return SymmetricInterference(Linear{config.gamma});
  if (config.interference == "normalized-linear")
    return SymmetricInterference(NormalizedLinear{config.gamma});
  if (config.interference == "threshold-count")
    return SymmetricInterference(ThresholdCount{config.gamma, config.threshold_k});
  if (config.interference == "threshold-fraction") {
    const double frac =
        config.frac >= 0.0 ? config.frac : static_cast<double>(config.p) / config.r;
    return SymmetricInterference(ThresholdFraction{config.gamma, frac});
  }
  if (config.interference == "table") {
    std::ifstream in(config.table_file);
    if (!in) throw std::invalid_argument("run config: cannot open table file " + config.table_file);
    return SymmetricInterference(read_symmetric_table(in));
  }
  throw std::invalid_argument("run config: unknown interference " + config.interference);
}

inline TypePartition load_types(const RunConfig& config, const Graph& g) {
  if (config.types_file.empty())
    throw std::invalid_argument("run config: typed design requires types_file");
  std::ifstream in(config.types_file);
  if (!in) throw std::invalid_argument("run config: cannot open types file " + config.types_file);
  return read_type_partition(in, g.num_vertices());
}

// Design sampler for one replication; pbd fixes P* once, pbd-random redraws
// P** every replication, as the designs prescribe.
inline DesignSampler make_design_sampler(const RunConfig& config, const Graph& g,
                                         const ExperimentConfig& cfg,
                                         const std::optional<TypePartition>& types) {
  if (config.design == "crd") return [&g, cfg](Rng& rng) { return crd(g, cfg, rng); };
  if (config.design == "pbd") {
    auto partition = std::make_shared<Partition>(partition_by_degree(g, cfg));
    return [partition, cfg](Rng& rng) { return sample_within_blocks(*partition, cfg, rng); };
  }
  if (config.design == "pbd-random") {
    return [&g, cfg](Rng& rng) {
      const Partition partition = randomized_degree_blocking(g, cfg, rng);
      return sample_within_blocks(partition, cfg, rng);
    };
  }
  if (config.design == "typed") {
    if (!types) throw std::invalid_argument("run config: typed design requires types");
    auto shared = std::make_shared<TypePartition>(*types);
    return [&g, shared, cfg](Rng& rng) { return type_restricted(g, *shared, cfg, rng); };
  }
  throw std::invalid_argument("run config: unknown design " + config.design);
}

namespace detail {

// Per-part Lipschitz norm under the typed metric d(u,v) = |frac(u)-frac(v)|;
// returns max over parts, infinity if some part is not Lipschitz at all.
inline double typed_lipschitz_norm(const SymmetricInterference& f, const Graph& g,
                                   const TypePartition& types) {
  double norm = 0.0;
  for (const auto& part : types.parts) {
    std::map<int, bool> degrees;
    for (int v : part) degrees[g.degree(v)] = true;
    std::vector<Bidegree> points;
    for (const auto& [d, unused] : degrees)
      for (int a = 0; a <= d; ++a) points.push_back(Bidegree{a, d - a});
    for (std::size_t i = 0; i < points.size(); ++i)
      for (std::size_t j = i + 1; j < points.size(); ++j) {
        const double gap =
            std::abs(f.eval(points[i].treated, points[i].degree()) -
                     f.eval(points[j].treated, points[j].degree()));
        const double dist =
            std::abs(points[i].treated_fraction() - points[j].treated_fraction());
        if (dist <= 0.0) {
          if (gap > 0.0) return std::numeric_limits<double>::infinity();
          continue;
        }
        norm = std::max(norm, gap / dist);
      }
  }
  return norm;
}

inline void attach_bounds(CellResult& cell, const RunConfig& config, const Graph& g,
                          const ExperimentConfig& cfg, const SymmetricInterference& f,
                          const std::optional<TypePartition>& types) {
  // Bound formulas divide by vertex degrees; with isolated vertices present
  // the report is simply omitted.
  if (g.has_isolated_vertex()) return;
  const InterferenceSpec spec = InterferenceSpec::untyped(f);
  const auto budget = lipschitz_budget(spec, g, 1.0, 1.0);
  const int dmax = degree_stats(g).dmax;

  if (config.design == "crd") {
    cell.bound_bias = bias_bound_crd(budget.average(), cfg.r, cfg.n);
    return;
  }
  if (config.design == "typed") {
    if (!types) return;
    const double scale = typed_lipschitz_norm(f, g, *types);
    if (!std::isfinite(scale)) return;
    const auto tb = typed_bounds(g, *types, scale, cfg);
    cell.bound_bias = tb.bias;
    cell.bound_rmse = std::min(tb.rmse_tv, tb.rmse_sparse);
    return;
  }
  // pbd / pbd-random: rescale the d_K metric so that ||f||_{d_K} = 1.
  const double scale = lipschitz_norm(materialize_table(f, g), DkMetric{1.0, 1.0, dmax});
  if (!std::isfinite(scale)) return;
  if (config.design == "pbd") {
    const auto b = mse_bound_dense(g, scale, scale, cfg);
    cell.bound_bias = b.bias;
    cell.bound_rmse = b.rmse;
  } else if (config.design == "pbd-random") {
    const auto b = mse_bound_sparse(g, scale, scale, cfg);
    cell.bound_bias = b.bias;
    cell.bound_rmse = b.rmse;
  }
}

}  // namespace detail

inline CellResult run_experiment(const RunConfig& config) {
  if (config.replications < 1) throw std::invalid_argument("run config: need replications >= 1");
  const Graph g = make_run_graph(config);
  const ExperimentConfig cfg = ExperimentConfig::for_graph(g, config.p, config.r);
  const SymmetricInterference f = make_interference(config);
  std::optional<TypePartition> types;
  if (config.design == "typed") types = load_types(config, g);
  const DesignSampler sampler = make_design_sampler(config, g, cfg, types);

  CellResult cell;
  cell.family = config.family;
  cell.n_vertices = g.num_vertices();
  cell.density_or_pow = config.family == "pa" ? config.pa_pow : config.density;
  if (config.family == "pa") cell.m = config.pa_m;
  cell.gamma = config.gamma;
  cell.design = config.design;
  cell.replications = config.replications;
  cell.seed = config.graph_seed;  // identifies the graph instance of the row

  const std::uint64_t reps = config.replications;
  if (!config.redraw_models) {
    const OutcomeModel model =
        sample_gaussian_model(g, InterferenceSpec::untyped(f), config.model_seed);
    if (reps == 1) {  // a single draw has no standard error
      Rng design_rng(config.design_seed, 0);
      const Treatment t = sampler(design_rng);
      const double error = t_ideal(model, t) + xi(model, g, t) - average_direct_effect(model);
      cell.mse = error * error;
      cell.se = std::numeric_limits<double>::quiet_NaN();
      cell.bias_mc = error;
    } else {
      const auto mc = monte_carlo_moments(sampler, model, g, cfg, reps, config.design_seed,
                                          config.threads);
      cell.mse = mc.mse_estimator;
      cell.se = mc.se_mse_estimator;
      cell.bias_mc = mc.mean_estimator - average_direct_effect(model);
    }
  } else {
    // Fresh x,t per replication; replication i depends only on (seeds, i).
    std::vector<double> sq_err(reps), err(reps);
    auto run_range = [&](std::uint64_t begin, std::uint64_t end) {
      for (std::uint64_t i = begin; i < end; ++i) {
        Rng model_rng(config.model_seed, i);
        const OutcomeModel model = sample_gaussian_model(g, InterferenceSpec::untyped(f), model_rng);
        Rng design_rng(config.design_seed, i);
        const Treatment t = sampler(design_rng);
        const double estimate = t_ideal(model, t) + xi(model, g, t);
        const double e = estimate - average_direct_effect(model);
        err[i] = e;
        sq_err[i] = e * e;
      }
    };
    if (config.threads <= 1) {
      run_range(0, reps);
    } else {
      std::vector<std::thread> pool;
      const std::uint64_t chunk = (reps + config.threads - 1) / config.threads;
      for (int w = 0; w < config.threads; ++w) {
        const std::uint64_t begin = std::min<std::uint64_t>(w * chunk, reps);
        const std::uint64_t end = std::min<std::uint64_t>(begin + chunk, reps);
        if (begin < end) pool.emplace_back(run_range, begin, end);
      }
      for (auto& worker : pool) worker.join();
    }
    CompensatedSum sum_sq, sum_err, sum_4th;
    for (std::uint64_t i = 0; i < reps; ++i) {
      sum_sq.add(sq_err[i]);
      sum_err.add(err[i]);
      sum_4th.add(sq_err[i] * sq_err[i]);
    }
    const double n = static_cast<double>(reps);
    cell.mse = sum_sq.value() / n;
    cell.bias_mc = sum_err.value() / n;
    const double var_sq = std::max(0.0, sum_4th.value() / n - cell.mse * cell.mse);
    cell.se = reps > 1 ? std::sqrt(var_sq / n) : std::numeric_limits<double>::quiet_NaN();
  }
  cell.log_mse = std::log(cell.mse);
  detail::attach_bounds(cell, config, g, cfg, f, types);
  return cell;
}

// ---- sweep --------------------------------------------------------------------

struct SweepConfig {
  RunConfig base;
  std::vector<int> n_vertices{100};
  std::vector<double> densities{0.05, 0.1, 0.5};
  std::vector<double> pows{1.0, 2.0};
  std::vector<int> ms{2, 4};
  std::vector<double> gammas{0.5, 1.0, 2.0};
  std::vector<std::string> designs{"crd", "pbd"};
  // graph instances per cell; repeat j shifts every seed by j so the rows
  // stay distinguishable and fully reproducible
  int graph_repeats = 1;
};

inline std::vector<CellResult> sweep(const SweepConfig& config) {
  if (config.graph_repeats < 1)
    throw std::invalid_argument("sweep: need graph_repeats >= 1");
  std::vector<CellResult> rows;
  const bool is_pa = config.base.family == "pa";
  const std::vector<double>& knobs = is_pa ? config.pows : config.densities;
  const std::vector<int> single_m{config.base.pa_m};
  const std::vector<int>& ms = is_pa ? config.ms : single_m;
  for (int n : config.n_vertices)
    for (double knob : knobs)
      for (int m : ms)
        for (double gamma : config.gammas)
          for (const auto& design : config.designs)
            for (int repeat = 0; repeat < config.graph_repeats; ++repeat) {
              RunConfig cell = config.base;
              cell.n_vertices = n;
              if (is_pa) {
                cell.pa_pow = knob;
                cell.pa_m = m;
              } else {
                cell.density = knob;
              }
              cell.gamma = gamma;
              cell.design = design;
              cell.graph_seed += repeat;
              cell.model_seed += repeat;
              cell.design_seed += repeat;
              rows.push_back(run_experiment(cell));
            }
  return rows;
}

// ---- CSV ----------------------------------------------------------------------

inline std::string csv_header() {
  return "family,N,density_or_pow,m,gamma,design,R,mse,log_mse,bias_mc,se,bound_bias,bound_rmse,"
         "seed";
}

inline std::string to_csv_row(const CellResult& c) {
  auto fmt = [](double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return std::string(buffer);
  };
  std::ostringstream os;
  os << c.family << ',' << c.n_vertices << ',' << fmt(c.density_or_pow) << ',';
  if (c.m) os << *c.m;
  os << ',' << fmt(c.gamma) << ',' << c.design << ',' << c.replications << ',' << fmt(c.mse) << ','
     << fmt(c.log_mse) << ',' << fmt(c.bias_mc) << ',' << fmt(c.se) << ',';
  if (c.bound_bias) os << fmt(*c.bound_bias);
  os << ',';
  if (c.bound_rmse) os << fmt(*c.bound_rmse);
  os << ',' << c.seed;
  return os.str();
}

inline void write_csv(std::ostream& os, const std::vector<CellResult>& rows) {
  os << csv_header() << '\n';
  for (const auto& row : rows) os << to_csv_row(row) << '\n';
}

}  // namespace netdesign
