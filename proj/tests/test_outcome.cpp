#include <cmath>

#include "doctest.h"
#include "netdesign/oracle.hpp"
#include "netdesign/outcome.hpp"
#include "test_support.hpp"

using namespace netdesign;

namespace {

Graph cycle(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return build_graph(n, edges);
}

OutcomeModel zero_model(int nv, SymmetricInterference f) {
  OutcomeModel m;
  m.x.assign(nv, 0.0);
  m.t.assign(nv, 0.0);
  m.spec = InterferenceSpec::untyped(std::move(f));
  return m;
}

}  // namespace

TEST_CASE("outcomes follow the linear model") {
  const Graph square = cycle(4);
  const auto cfg = ExperimentConfig::for_graph(square, 1, 2);
  OutcomeModel model = zero_model(4, SymmetricInterference(Linear{0.0}));
  model.x = {1.0, 2.0, 3.0, 4.0};
  model.t = {10.0, 20.0, 30.0, 40.0};
  const Treatment t = Treatment::from_set({0, 2}, cfg);

  // zero interference: y = x + 1_T t
  auto y = simulate_outcomes(model, square, t);
  CHECK(y[0] == doctest::Approx(11.0));
  CHECK(y[1] == doctest::Approx(2.0));
  CHECK(y[2] == doctest::Approx(33.0));
  CHECK(y[3] == doctest::Approx(4.0));

  // linear interference: untreated vertices see their treated neighbors
  const double gamma = 0.5;
  model.spec = InterferenceSpec::untyped(SymmetricInterference(Linear{gamma}));
  y = simulate_outcomes(model, square, t);
  CHECK(y[1] == doctest::Approx(2.0 + 2 * gamma));  // both neighbors treated
  CHECK(y[3] == doctest::Approx(4.0 + 2 * gamma));
  CHECK(y[0] == doctest::Approx(11.0));  // treated, no treated neighbors
}

TEST_CASE("hexagon with alternating treatment: y is gamma times treated-neighbor count") {
  const Graph hex = cycle(6);
  const auto cfg = ExperimentConfig::for_graph(hex, 1, 2);
  const double gamma = 0.7;
  const OutcomeModel model = zero_model(6, SymmetricInterference(Linear{gamma}));
  const Treatment t = Treatment::from_set({0, 2, 4}, cfg);
  const auto y = simulate_outcomes(model, hex, t);
  const auto counts = treated_neighbor_counts(hex, t);
  for (int v = 0; v < 6; ++v) CHECK(y[v] == doctest::Approx(gamma * counts[v]));
  for (int v : {1, 3, 5}) CHECK(y[v] == doctest::Approx(2 * gamma));
  for (int v : {0, 2, 4}) CHECK(y[v] == 0.0);
}

TEST_CASE("neyman estimator closed-form cases") {
  const auto cfg = ExperimentConfig::create(1, 2, 2);
  const Treatment t = Treatment::from_set({0, 2}, cfg);

  // constant outcomes cancel exactly
  std::vector<double> constant(4, 3.25);
  CHECK(neyman_estimate(constant, t) == doctest::Approx(0.0));

  // p = q = n = 1: difference of the two outcomes
  const auto tiny = ExperimentConfig::create(1, 2, 1);
  const Treatment first = Treatment::from_set({0}, tiny);
  const std::vector<double> y{3.0, 1.0};
  CHECK(neyman_estimate(y, first) == doctest::Approx(2.0));

  std::vector<double> three(3, 0.0);
  CHECK_THROWS_AS(neyman_estimate(three, t), std::invalid_argument);
}

TEST_CASE("average direct effect") {
  OutcomeModel model = zero_model(2, SymmetricInterference(Linear{0.0}));
  model.t = {2.0, 2.0};
  CHECK(average_direct_effect(model) == doctest::Approx(2.0));
  model.t = {1.0, 3.0};
  CHECK(average_direct_effect(model) == doctest::Approx(2.0));
}

TEST_CASE("t_ideal special cases and exhaustive expectations") {
  const Graph square = cycle(4);
  const auto cfg = ExperimentConfig::for_graph(square, 1, 2);

  // x = 0: t_ideal = (1/pn) sum_{v in T} t_v
  OutcomeModel model = zero_model(4, SymmetricInterference(Linear{0.3}));
  model.t = {1.0, 2.0, 3.0, 4.0};
  const Treatment t = Treatment::from_set({1, 3}, cfg);
  CHECK(t_ideal(model, t) == doctest::Approx((2.0 + 4.0) / 2.0));

  // t = 0, x arbitrary: CRD expectation of t_ideal is zero
  Rng rng(77);
  OutcomeModel noise = zero_model(4, SymmetricInterference(Linear{0.3}));
  for (int v = 0; v < 4; ++v) noise.x[v] = rng.next_normal(0.0, 1.0);
  const auto crd_moments = exact_moments_crd(square, cfg, noise);
  CHECK(crd_moments.mean_tideal == doctest::Approx(0.0).epsilon(1e-12));

  // P(v in T) = p/r designs make t_ideal unbiased for tbar
  const OutcomeModel random_model =
      testsupport::random_model(rng, 4, InterferenceSpec::untyped(SymmetricInterference(Linear{0.9})));
  const auto blocked =
      exact_moments_blocked(square, Partition::create({{0, 1}, {2, 3}}, 4), cfg, random_model);
  CHECK(blocked.mean_tideal == doctest::Approx(average_direct_effect(random_model)).epsilon(1e-12));
}

TEST_CASE("xi: zero spec, clique-plus-isolated value, and the estimator identity") {
  // zero interference gives xi = 0
  const Graph square = cycle(4);
  const auto cfg4 = ExperimentConfig::for_graph(square, 1, 2);
  const OutcomeModel silent = zero_model(4, SymmetricInterference(Linear{0.0}));
  CHECK(xi(silent, square, Treatment::from_set({0, 1}, cfg4)) == 0.0);

  // complete graph on 2k plus 2k isolated vertices, alpha = k treated in the
  // clique: xi = -gamma/2 (the P* design forces this alpha)
  const int k = 4;
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < 2 * k; ++u)
    for (int v = u + 1; v < 2 * k; ++v) edges.emplace_back(u, v);
  const Graph lopsided = build_graph(4 * k, edges);
  const auto cfg = ExperimentConfig::for_graph(lopsided, 1, 2);
  const double gamma = 0.8;
  const OutcomeModel model = zero_model(4 * k, SymmetricInterference(Linear{gamma}));
  std::vector<int> treated;
  for (int v = 0; v < k; ++v) treated.push_back(v);            // k clique vertices
  for (int v = 2 * k; v < 3 * k; ++v) treated.push_back(v);    // k isolated vertices
  CHECK(xi(model, lopsided, Treatment::from_set(treated, cfg)) == doctest::Approx(-gamma / 2));

  // t_neyman = t_ideal + xi to 1e-12 on random instances
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const Graph g = testsupport::random_graph_no_isolated(rng, 10, 0.3);
    const auto c = ExperimentConfig::for_graph(g, 1, 2);
    const SymmetricInterference f = trial % 2 ? testsupport::random_closed_form(rng)
                                              : SymmetricInterference(testsupport::random_table(rng, g));
    const OutcomeModel m = testsupport::random_model(rng, 10, InterferenceSpec::untyped(f));
    const Treatment t = crd(g, c, rng);
    const auto y = simulate_outcomes(m, g, t);
    CHECK(std::abs(neyman_estimate(y, t) - (t_ideal(m, t) + xi(m, g, t))) < 1e-12);
  }
}

TEST_CASE("estimator bias reduces to E[xi] exactly under enumeration") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Graph g = testsupport::random_graph_no_isolated(rng, 8, 0.35);
    const auto cfg = ExperimentConfig::for_graph(g, 1, 2);
    const Partition partition = testsupport::random_partition(rng, cfg);
    const OutcomeModel model = testsupport::random_model(
        rng, 8, InterferenceSpec::untyped(testsupport::random_closed_form(rng)));
    const auto moments = exact_moments_blocked(g, partition, cfg, model);
    const double tbar = average_direct_effect(model);
    CHECK(std::abs((moments.mean_estimator - tbar) - moments.mean_xi) < 1e-12);
  }
}

TEST_CASE("homophily statistics") {
  const auto cfg = ExperimentConfig::create(1, 2, 2);

  // constant within parts: sigma^2 = 0
  OutcomeModel model = zero_model(4, SymmetricInterference(Linear{0.0}));
  model.x = {1.0, 1.0, -2.0, -2.0};
  model.t = {3.0, 3.0, 5.0, 5.0};
  const TypePartition types = TypePartition::create({{0, 1}, {2, 3}}, 4);
  auto stats = homophily_stats(model, types, cfg);
  CHECK(stats.sigma_sq == doctest::Approx(0.0));
  CHECK(stats.part_x_mean[0] == doctest::Approx(1.0));
  CHECK(stats.part_t_mean[1] == doctest::Approx(5.0));

  // one part, x = (1,-1), t = 0, q/r = 1/2: eps = (1,-1), sigma^2 = 1
  OutcomeModel pair = zero_model(2, SymmetricInterference(Linear{0.0}));
  pair.x = {1.0, -1.0};
  const auto tiny = ExperimentConfig::create(1, 2, 1);
  const TypePartition whole = TypePartition::create({{0, 1}}, 2);
  stats = homophily_stats(pair, whole, tiny);
  CHECK(stats.discrepancy[0] == doctest::Approx(1.0));
  CHECK(stats.discrepancy[1] == doctest::Approx(-1.0));
  CHECK(stats.sigma_sq == doctest::Approx(1.0));

  // shifting every x by a constant leaves sigma^2 unchanged; centered sums vanish
  Rng rng(3);
  OutcomeModel noisy = zero_model(4, SymmetricInterference(Linear{0.0}));
  for (int v = 0; v < 4; ++v) {
    noisy.x[v] = rng.next_normal(0.0, 1.0);
    noisy.t[v] = rng.next_normal(2.0, 0.5);
  }
  const auto base = homophily_stats(noisy, types, cfg);
  OutcomeModel shifted = noisy;
  for (double& x : shifted.x) x += 17.5;
  const auto moved = homophily_stats(shifted, types, cfg);
  CHECK(moved.sigma_sq == doctest::Approx(base.sigma_sq).epsilon(1e-12));
  for (int i = 0; i < types.num_parts(); ++i) {
    double sx = 0.0, st = 0.0;
    for (int v : types.parts[i]) {
      sx += noisy.x[v] - base.part_x_mean[i];
      st += noisy.t[v] - base.part_t_mean[i];
    }
    CHECK(std::abs(sx) < 1e-12);
    CHECK(std::abs(st) < 1e-12);
  }
}

TEST_CASE("gaussian model sampling: moments and determinism") {
  const Graph big = build_graph(100000, {{0, 1}});
  const auto spec = InterferenceSpec::untyped(SymmetricInterference(Linear{1.0}));
  const OutcomeModel model = sample_gaussian_model(big, spec, 2024);

  const int n = big.num_vertices();
  double x_sum = 0.0, t_sum = 0.0, t_sq = 0.0;
  for (int v = 0; v < n; ++v) {
    x_sum += model.x[v];
    t_sum += model.t[v];
    t_sq += model.t[v] * model.t[v];
  }
  const double x_mean = x_sum / n;
  const double t_mean = t_sum / n;
  const double t_var = t_sq / n - t_mean * t_mean;
  CHECK(std::abs(x_mean - 0.0) < 3.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(t_mean - 2.0) < 3.0 * 0.5 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(t_var - 0.25) < 3.0 * 0.25 * std::sqrt(2.0 / (n - 1.0)));

  const OutcomeModel again = sample_gaussian_model(big, spec, 2024);
  CHECK(again.x == model.x);
  CHECK(again.t == model.t);
}

TEST_CASE("outcome model serialization round trips exactly") {
  const Graph square = cycle(4);
  const auto spec = InterferenceSpec::untyped(SymmetricInterference(Linear{0.4}));
  const OutcomeModel model = sample_gaussian_model(square, spec, 91);
  std::ostringstream os;
  write_outcome_model(os, model, "linear gamma=0.4");
  std::istringstream is(os.str());
  const OutcomeModelFile file = read_outcome_model(is);
  CHECK(file.spec_label == "linear gamma=0.4");
  CHECK(file.x == model.x);
  CHECK(file.t == model.t);

  std::istringstream bad("1 0.5 0.5\n");
  CHECK_THROWS_AS(read_outcome_model(bad), std::runtime_error);
}
