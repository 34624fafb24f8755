// Command-line front end: graph generation, treatment designs, quasi-coloring
// diagnostics, bound reports, and the simulation/sweep pipeline.
//
// Exit codes: 0 on success, 2 on any validation error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "netdesign/bounds.hpp"
#include "netdesign/design.hpp"
#include "netdesign/graph.hpp"
#include "netdesign/interference.hpp"
#include "netdesign/oracle.hpp"
#include "netdesign/outcome.hpp"
#include "netdesign/quasicoloring.hpp"
#include "netdesign/simulate.hpp"

namespace {

using namespace netdesign;

constexpr int kValidationError = 2;

Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open graph file " + path);
  return read_graph(in);
}

std::vector<int> load_vertex_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open vertex-set file " + path);
  return read_vertex_set(in);
}

std::optional<TypePartition> maybe_load_types(const std::string& path, const Graph& g) {
  if (path.empty()) return std::nullopt;
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open types file " + path);
  return read_type_partition(in, g.num_vertices());
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw std::invalid_argument("cannot open output file " + path);
  return file;
}

void add_interference_options(CLI::App* cmd, RunConfig& config) {
  cmd->add_option("--interference", config.interference,
                  "linear | normalized-linear | threshold-count | threshold-fraction | table");
  cmd->add_option("--gamma", config.gamma, "interference strength");
  cmd->add_option("--threshold_k,--k", config.threshold_k, "threshold-count cutoff");
  cmd->add_option("--frac", config.frac, "threshold-fraction cutoff (default p/r)");
  cmd->add_option("--table_file", config.table_file, "symmetric table file (a b value lines)");
}

void add_design_options(CLI::App* cmd, RunConfig& config) {
  cmd->add_option("--design", config.design, "crd | pbd | pbd-random | typed");
  cmd->add_option("--types_file", config.types_file, "type partition file for the typed design");
  cmd->add_option("--p", config.p, "treated units per block");
  cmd->add_option("--r", config.r, "block size");
}

int run_gen_graph(const RunConfig& config, const std::string& out_path) {
  const Graph g = make_run_graph(config);
  std::ofstream file;
  std::ostream& os = open_output(file, out_path);
  write_graph(os, g);
  if (g.has_isolated_vertex())
    std::cerr << "note: graph contains isolated vertices; bound computations will reject it\n";
  return 0;
}

int run_design(const RunConfig& config, const std::string& graph_path,
               const std::string& out_path, const std::string& partition_out) {
  const Graph g = load_graph(graph_path);
  const ExperimentConfig cfg = ExperimentConfig::for_graph(g, config.p, config.r);
  std::optional<TypePartition> types = maybe_load_types(config.types_file, g);
  Rng rng(config.design_seed);

  std::optional<Partition> partition;
  Treatment treatment = [&] {
    if (config.design == "crd") return crd(g, cfg, rng);
    if (config.design == "pbd") {
      partition = partition_by_degree(g, cfg);
      return sample_within_blocks(*partition, cfg, rng);
    }
    if (config.design == "pbd-random") {
      partition = randomized_degree_blocking(g, cfg, rng);
      return sample_within_blocks(*partition, cfg, rng);
    }
    if (config.design == "typed") {
      if (!types) throw std::invalid_argument("typed design requires --types_file");
      return type_restricted(g, *types, cfg, rng);
    }
    throw std::invalid_argument("unknown design " + config.design);
  }();

  std::ofstream file;
  std::ostream& os = open_output(file, out_path);
  write_treatment(os, treatment);
  if (!partition_out.empty()) {
    if (!partition) throw std::invalid_argument("--partition-out requires pbd or pbd-random");
    std::ofstream pfile(partition_out);
    if (!pfile) throw std::invalid_argument("cannot open partition output " + partition_out);
    write_partition(pfile, *partition);
  }
  return 0;
}

int run_qc_check(const std::string& graph_path, const std::string& set_path,
                 const std::string& types_path) {
  const Graph g = load_graph(graph_path);
  const std::vector<int> q = load_vertex_set(set_path);
  const auto types = maybe_load_types(types_path, g);
  const bool perfect =
      types ? is_perfect_quasicoloring(g, q, *types) : is_perfect_quasicoloring(g, q);
  std::cout << (perfect ? "PERFECT" : "NOT_PERFECT") << '\n';
  return 0;
}

int run_qc_find(const std::string& graph_path, const std::string& types_path, int cap) {
  const Graph g = load_graph(graph_path);
  const auto types = maybe_load_types(types_path, g);
  const auto witness = find_perfect_quasicoloring(g, types, cap);
  if (!witness) {
    std::cout << "NONE\n";
    return 0;
  }
  for (std::size_t i = 0; i < witness->size(); ++i)
    std::cout << (i ? " " : "") << (*witness)[i];
  std::cout << '\n';
  return 0;
}

int run_bounds(const RunConfig& config, const std::string& graph_path, double k1, double k2,
               double sigma, const std::string& out_path) {
  const Graph g = load_graph(graph_path);
  const ExperimentConfig cfg = ExperimentConfig::for_graph(g, config.p, config.r);
  if (g.has_isolated_vertex())
    throw std::invalid_argument("bounds: graph has isolated vertices (the formulas divide by d(v))");
  const SymmetricInterference f = make_interference(config);
  const InterferenceSpec spec = InterferenceSpec::untyped(f);
  const auto budget = lipschitz_budget(spec, g, k1, k2);
  const auto stats = degree_stats(g);
  const auto types = maybe_load_types(config.types_file, g);

  BoundReport base;
  base.k1 = k1;
  base.k2 = k2;
  base.kbar = budget.average();
  base.kmax = budget.max_constant();
  base.dmin = stats.dmin;
  base.dmax = stats.dmax;
  base.p = cfg.p;
  base.q = cfg.q();
  base.r = cfg.r;
  base.n = cfg.n;
  base.num_parts = types ? types->num_parts() : 0;
  base.sigma = sigma;

  std::vector<BoundReport> rows;
  if (config.design == "crd") {
    BoundReport row = base;
    row.provenance = "crd";
    row.bias_bound = bias_bound_crd(budget.average(), cfg.r, cfg.n);
    row.rmse_bound = std::numeric_limits<double>::quiet_NaN();
    rows.push_back(row);
  } else if (config.design == "pbd" || config.design == "pbd-random") {
    // rescale the metric so the user's f becomes 1-Lipschitz under d_K
    const double scale = lipschitz_norm(materialize_table(f, g), DkMetric{k1, k2, stats.dmax});
    if (!std::isfinite(scale))
      throw std::invalid_argument("bounds: spec is not d_K-Lipschitz on this graph");
    if (config.design == "pbd") {
      const Partition pstar = partition_by_degree(g, cfg);
      BoundReport lip = base;
      lip.provenance = "bias-lipschitz";
      lip.bias_bound = bias_bound_lipschitz(g, pstar, budget.per_vertex);
      lip.rmse_bound = std::numeric_limits<double>::quiet_NaN();
      rows.push_back(lip);

      BoundReport wts = base;
      wts.provenance = "bias-weights";
      wts.bias_bound = bias_bound_weights(g, pstar, spec);
      wts.rmse_bound = std::numeric_limits<double>::quiet_NaN();
      rows.push_back(wts);

      BoundReport general = base;
      general.provenance = "mse-general";
      general.lip_scale = scale;
      general.bias_bound = std::numeric_limits<double>::quiet_NaN();
      general.rmse_bound = mse_bound_general(g, pstar, scale * k1, scale * k2, cfg);
      rows.push_back(general);

      BoundReport dense = base;
      dense.provenance = "dense";
      dense.lip_scale = scale;
      const auto pair = mse_bound_dense(g, scale * k1, scale * k2, cfg);
      dense.bias_bound = pair.bias;
      dense.rmse_bound = pair.rmse;
      rows.push_back(dense);
    } else {
      BoundReport sparse = base;
      sparse.provenance = "sparse";
      sparse.lip_scale = scale;
      const auto pair = mse_bound_sparse(g, scale * k1, scale * k2, cfg);
      sparse.bias_bound = pair.bias;
      sparse.rmse_bound = pair.rmse;
      rows.push_back(sparse);
    }
  } else if (config.design == "typed") {
    if (!types) throw std::invalid_argument("bounds: typed design requires --types_file");
    const double scale = detail::typed_lipschitz_norm(f, g, *types);
    if (!std::isfinite(scale))
      throw std::invalid_argument("bounds: spec is not Lipschitz under the typed metric");
    const auto tb = typed_bounds(g, *types, scale, cfg);
    BoundReport typed_row = base;
    typed_row.provenance = "typed";
    typed_row.lip_scale = scale;
    typed_row.bias_bound = tb.bias;
    typed_row.rmse_bound = std::min(tb.rmse_tv, tb.rmse_sparse);
    rows.push_back(typed_row);
    if (sigma > 0.0) {
      const auto hb = homophily_bounds(sigma, scale, types->num_parts(), cfg, g, *types);
      BoundReport hom = base;
      hom.provenance = "homophily";
      hom.lip_scale = scale;
      hom.bias_bound = hb.bias;
      hom.rmse_bound = hb.rmse;
      rows.push_back(hom);
    }
  } else {
    throw std::invalid_argument("unknown design " + config.design);
  }

  std::ofstream file;
  std::ostream& os = open_output(file, out_path);
  os << bound_report_csv_header() << '\n';
  for (const auto& row : rows) os << to_csv_row(row) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"treatment designs, quasi-coloring diagnostics and simulations "
               "for randomized experiments on networks with interference"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file with RunConfig field names");

  RunConfig config;
  std::string graph_path, out_path, partition_out, set_path;
  double k1 = 1.0, k2 = 1.0, sigma = 0.0;
  int cap = 24;
  SweepConfig sweep_config;

  auto add_graph_options = [&](CLI::App* cmd) {
    cmd->add_option("--family", config.family, "er | pa | file");
    cmd->add_option("--n_vertices,--n", config.n_vertices, "number of vertices");
    cmd->add_option("--density", config.density, "er edge probability");
    cmd->add_option("--pa_pow,--pow", config.pa_pow, "pa attachment power");
    cmd->add_option("--pa_m,--m", config.pa_m, "pa edges per new vertex");
    cmd->add_option("--graph_file", config.graph_file, "edge-list file when family=file");
    cmd->add_option("--graph_seed", config.graph_seed, "graph generation seed");
  };

  CLI::App* gen = app.add_subcommand("gen-graph", "generate a graph and write its edge list");
  add_graph_options(gen);
  gen->add_option("--out", out_path, "output path (default stdout)");

  CLI::App* design_cmd = app.add_subcommand("design", "draw a treatment from a design");
  design_cmd->add_option("--graph", graph_path, "edge-list file")->required();
  add_design_options(design_cmd, config);
  design_cmd->add_option("--seed", config.design_seed, "design seed");
  design_cmd->add_option("--out", out_path, "treatment output path (default stdout)");
  design_cmd->add_option("--partition-out", partition_out, "also write the partition");

  CLI::App* qc_check = app.add_subcommand("qc-check", "test a vertex set for perfection");
  qc_check->add_option("--graph", graph_path, "edge-list file")->required();
  qc_check->add_option("--set", set_path, "vertex set, one index per line")->required();
  qc_check->add_option("--types_file", config.types_file, "optional type partition");

  CLI::App* qc_find = app.add_subcommand("qc-find", "search for a perfect quasi-coloring");
  qc_find->add_option("--graph", graph_path, "edge-list file")->required();
  qc_find->add_option("--types_file", config.types_file, "optional type partition");
  qc_find->add_option("--cap", cap, "vertex cap for the exhaustive search");

  CLI::App* bounds_cmd = app.add_subcommand("bounds", "closed-form bias/MSE bound report");
  bounds_cmd->add_option("--graph", graph_path, "edge-list file")->required();
  add_design_options(bounds_cmd, config);
  add_interference_options(bounds_cmd, config);
  bounds_cmd->add_option("--k1", k1, "degree scale of the d_K metric");
  bounds_cmd->add_option("--k2", k2, "fraction scale of the d_K metric");
  bounds_cmd->add_option("--sigma", sigma, "homophily sigma (enables the homophily row)");
  bounds_cmd->add_option("--out", out_path, "output path (default stdout)");

  CLI::App* simulate_cmd = app.add_subcommand("simulate", "run one simulation cell");
  add_graph_options(simulate_cmd);
  add_design_options(simulate_cmd, config);
  add_interference_options(simulate_cmd, config);
  simulate_cmd->add_option("--model_seed", config.model_seed, "outcome model seed");
  simulate_cmd->add_option("--design_seed", config.design_seed, "treatment randomization seed");
  simulate_cmd->add_option("--replications", config.replications, "Monte Carlo replications");
  simulate_cmd->add_flag("--redraw_models", config.redraw_models,
                         "redraw x,t each replication instead of fixing them per graph");
  simulate_cmd->add_option("--threads", config.threads, "worker threads");
  simulate_cmd->add_option("--out", out_path, "output path (default stdout)");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "grid of simulation cells, CSV output");
  add_graph_options(sweep_cmd);
  add_interference_options(sweep_cmd, config);
  sweep_cmd->add_option("--p", config.p, "treated units per block");
  sweep_cmd->add_option("--r", config.r, "block size");
  sweep_cmd->add_option("--types_file", config.types_file, "type partition for the typed design");
  sweep_cmd->add_option("--model_seed", config.model_seed, "outcome model seed");
  sweep_cmd->add_option("--design_seed", config.design_seed, "treatment randomization seed");
  sweep_cmd->add_option("--replications", config.replications, "Monte Carlo replications");
  sweep_cmd->add_flag("--redraw_models", config.redraw_models, "redraw x,t each replication");
  sweep_cmd->add_option("--threads", config.threads, "worker threads");
  sweep_cmd->add_option("--sizes", sweep_config.n_vertices, "graph sizes")->delimiter(',');
  sweep_cmd->add_option("--densities", sweep_config.densities, "er densities")->delimiter(',');
  sweep_cmd->add_option("--pows", sweep_config.pows, "pa powers")->delimiter(',');
  sweep_cmd->add_option("--ms", sweep_config.ms, "pa edges per step")->delimiter(',');
  sweep_cmd->add_option("--gammas", sweep_config.gammas, "interference strengths")->delimiter(',');
  sweep_cmd->add_option("--designs", sweep_config.designs, "designs to compare")->delimiter(',');
  sweep_cmd->add_option("--graph_repeats", sweep_config.graph_repeats,
                        "graph instances per cell (seeds shift by the repeat index)");
  sweep_cmd->add_option("--out", out_path, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return kValidationError;
  }

  try {
    if (gen->parsed()) return run_gen_graph(config, out_path);
    if (design_cmd->parsed()) return run_design(config, graph_path, out_path, partition_out);
    if (qc_check->parsed()) return run_qc_check(graph_path, set_path, config.types_file);
    if (qc_find->parsed()) return run_qc_find(graph_path, config.types_file, cap);
    if (bounds_cmd->parsed()) return run_bounds(config, graph_path, k1, k2, sigma, out_path);
    if (simulate_cmd->parsed()) {
      const CellResult cell = run_experiment(config);
      std::ofstream file;
      std::ostream& os = open_output(file, out_path);
      os << csv_header() << '\n' << to_csv_row(cell) << '\n';
      return 0;
    }
    if (sweep_cmd->parsed()) {
      sweep_config.base = config;
      const auto rows = sweep(sweep_config);
      std::ofstream file;
      std::ostream& os = open_output(file, out_path);
      write_csv(os, rows);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationError;
  }
  return 0;
}
