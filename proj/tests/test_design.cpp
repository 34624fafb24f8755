#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "netdesign/design.hpp"
#include "netdesign/quasicoloring.hpp"
#include "test_support.hpp"

using namespace netdesign;
using testsupport::chi_square;

namespace {

Graph cycle(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return build_graph(n, edges);
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_THROWS_AS(ExperimentConfig::create(0, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(ExperimentConfig::create(2, 2, 1), std::invalid_argument);
  const auto cfg = ExperimentConfig::create(1, 3, 4);
  CHECK(cfg.q() == 2);
  CHECK(cfg.num_vertices() == 12);
  CHECK(cfg.num_treated() == 4);
  CHECK_THROWS_AS(ExperimentConfig::for_graph(cycle(6), 1, 4), std::invalid_argument);
}

TEST_CASE("within-block sampling treats exactly p per block") {
  const auto cfg = ExperimentConfig::create(1, 3, 2);
  const Partition partition = Partition::create({{0, 1, 2}, {3, 4, 5}}, 6);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Treatment t = sample_within_blocks(partition, cfg, seed);
    for (const auto& block : partition.blocks) {
      int hit = 0;
      for (int v : block)
        if (t.contains(v)) ++hit;
      CHECK(hit == cfg.p);
    }
  }
}

TEST_CASE("single pair block is a fair coin") {
  const auto cfg = ExperimentConfig::create(1, 2, 1);
  const Partition partition = Partition::create({{0, 1}}, 2);
  long first = 0;
  const int draws = 100000;
  for (int s = 0; s < draws; ++s)
    if (sample_within_blocks(partition, cfg, s).contains(0)) ++first;
  const double phat = static_cast<double>(first) / draws;
  CHECK(std::abs(phat - 0.5) < 3.0 * std::sqrt(0.25 / draws));
}

TEST_CASE("within-block marginals equal p/r over Monte Carlo draws") {
  const auto cfg = ExperimentConfig::create(2, 3, 2);
  const Partition partition = Partition::create({{5, 1, 3}, {0, 2, 4}}, 6);
  std::vector<long> hits(6, 0);
  const int draws = 100000;
  for (int s = 0; s < draws; ++s) {
    const Treatment t = sample_within_blocks(partition, cfg, s);
    for (int v = 0; v < 6; ++v)
      if (t.contains(v)) ++hits[v];
  }
  const double target = 2.0 / 3.0;
  for (long h : hits)
    CHECK(std::abs(h / static_cast<double>(draws) - target) <
          3.0 * std::sqrt(target * (1 - target) / draws));
}

TEST_CASE("block enumeration is exhaustive, uniform and exact") {
  const auto cfg = ExperimentConfig::create(1, 2, 2);
  const Partition partition = Partition::create({{0, 1}, {2, 3}}, 4);
  std::set<std::vector<int>> seen;
  std::vector<long> treated_count(4, 0);
  std::uint64_t total = 0;
  enumerate_block_assignments(partition, cfg, [&](const Treatment& t) {
    seen.insert(t.treated());
    for (int v : t.treated()) ++treated_count[v];
    ++total;
  });
  CHECK(total == 4);
  CHECK(seen.size() == 4);
  // exact rational marginal: count * r == total * p
  for (long c : treated_count) CHECK(c * cfg.r == static_cast<long>(total) * cfg.p);

  // empirical draws hit each of the four with equal frequency
  std::map<std::vector<int>, long> freq;
  const int draws = 40000;
  for (int s = 0; s < draws; ++s) freq[sample_within_blocks(partition, cfg, s).treated()]++;
  REQUIRE(freq.size() == 4);
  std::vector<long> counts;
  for (auto& [k, v] : freq) counts.push_back(v);
  CHECK(chi_square(counts, draws / 4.0) < 25.0);  // 3 dof
}

TEST_CASE("enumeration counts match C(r,p)^n") {
  const Partition three_pairs = Partition::create({{0, 1}, {2, 3}, {4, 5}}, 6);
  std::uint64_t count = 0;
  enumerate_block_assignments(three_pairs, ExperimentConfig::create(1, 2, 3),
                              [&](const Treatment&) { ++count; });
  CHECK(count == 8);

  const Partition two_triples = Partition::create({{0, 1, 2}, {3, 4, 5}}, 6);
  count = 0;
  enumerate_block_assignments(two_triples, ExperimentConfig::create(1, 3, 2),
                              [&](const Treatment&) { ++count; });
  CHECK(count == 9);
}

TEST_CASE("enumeration cap is enforced") {
  const auto cfg = ExperimentConfig::create(1, 2, 30);
  std::vector<std::vector<int>> blocks;
  for (int i = 0; i < 30; ++i) blocks.push_back({2 * i, 2 * i + 1});
  const Partition partition = Partition::create(blocks, 60);
  CHECK_THROWS_AS(enumerate_block_assignments(partition, cfg, [](const Treatment&) {}, 1000),
                  std::runtime_error);
}

TEST_CASE("crd endpoints and uniformity") {
  const Graph pair = build_graph(2, {{0, 1}});
  const auto tiny = ExperimentConfig::for_graph(pair, 1, 2);
  long first = 0;
  for (int s = 0; s < 20000; ++s)
    if (crd(pair, tiny, s).contains(0)) ++first;
  CHECK(std::abs(first / 20000.0 - 0.5) < 3.0 * std::sqrt(0.25 / 20000.0));

  // all 6 two-subsets of 4 vertices equally likely
  const Graph square = cycle(4);
  const auto cfg = ExperimentConfig::for_graph(square, 1, 2);
  std::map<std::vector<int>, long> freq;
  const int draws = 60000;
  for (int s = 0; s < draws; ++s) freq[crd(square, cfg, s).treated()]++;
  REQUIRE(freq.size() == 6);
  std::vector<long> counts;
  for (auto& [k, v] : freq) counts.push_back(v);
  CHECK(chi_square(counts, draws / 6.0) < 25.0);  // 5 dof, 0.999 quantile ~20.5

  std::vector<long> marginal(4, 0);
  for (auto& [subset, c] : freq)
    for (int v : subset) marginal[v] += c;
  for (long hits : marginal)
    CHECK(std::abs(hits / static_cast<double>(draws) - 0.5) < 3.0 * std::sqrt(0.25 / draws));
}

TEST_CASE("partition by degree sorts non-increasing with index ties and respects C_P* <= 2") {
  // complete graph on 2k plus 2k isolated vertices: clique with clique,
  // isolated with isolated
  const int k = 3;
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < 2 * k; ++u)
    for (int v = u + 1; v < 2 * k; ++v) edges.emplace_back(u, v);
  const Graph lopsided = build_graph(4 * k, edges);
  const auto cfg = ExperimentConfig::for_graph(lopsided, 1, 2);
  const Partition pstar = partition_by_degree(lopsided, cfg);
  for (const auto& block : pstar.blocks) {
    const bool both_clique = block[0] < 2 * k && block[1] < 2 * k;
    const bool both_isolated = block[0] >= 2 * k && block[1] >= 2 * k;
    CHECK((both_clique || both_isolated));
  }
  // regular graph: C_{P*} = 0
  const Graph hex = cycle(6);
  const auto hex_cfg = ExperimentConfig::for_graph(hex, 1, 2);
  CHECK(c_p(partition_by_degree(hex, hex_cfg), hex, hex_cfg) == 0.0);

  // the blocks walk the degree-sorted order
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const Graph g = testsupport::random_graph_no_isolated(rng, 12, 0.3);
    const auto c = ExperimentConfig::for_graph(g, 1, 3);
    const Partition p = partition_by_degree(g, c);
    int previous_min = 1 << 30;
    for (const auto& block : p.blocks) {
      int lo = 1 << 30, hi = -1;
      for (int v : block) {
        lo = std::min(lo, g.degree(v));
        hi = std::max(hi, g.degree(v));
      }
      CHECK(hi <= previous_min);
      previous_min = lo;
    }
    CHECK(c_p(p, g, c) <= 2.0 + 1e-12);
  }
}

TEST_CASE("randomized degree blocking: leftovers and same-degree blocks") {
  // star K_{1,3} plus an extra edge: degrees {3:1, 1:5}, so |S| = 1 + 1 = 2
  const Graph g = build_graph(6, {{0, 1}, {0, 2}, {0, 3}, {4, 5}});
  CHECK(degree_blocking_leftover_count(g, 2) == 2);
  const auto cfg = ExperimentConfig::for_graph(g, 1, 2);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Partition p = randomized_degree_blocking(g, cfg, seed);
    // exactly one block mixes degrees (the leftover block {0, leaf})
    int mixed = 0;
    for (const auto& block : p.blocks)
      if (g.degree(block[0]) != g.degree(block[1])) ++mixed;
    CHECK(mixed == 1);
    // the mixed block is first and blocks leftovers by degree order
    CHECK(g.degree(p.blocks.front()[0]) != g.degree(p.blocks.front()[1]));
  }

  // regular graph, even class: no leftovers
  const Graph hex = cycle(6);
  CHECK(degree_blocking_leftover_count(hex, 2) == 0);
}

TEST_CASE("randomized degree blocking samples same-degree pairings uniformly") {
  // hexagon: one degree class of 6 vertices; 15 perfect matchings
  const Graph hex = cycle(6);
  const auto cfg = ExperimentConfig::for_graph(hex, 1, 2);
  std::map<std::set<std::pair<int, int>>, long> freq;
  const int draws = 100000;
  for (int s = 0; s < draws; ++s) {
    const Partition p = randomized_degree_blocking(hex, cfg, s);
    std::set<std::pair<int, int>> key;
    for (const auto& block : p.blocks)
      key.insert({std::min(block[0], block[1]), std::max(block[0], block[1])});
    ++freq[key];
  }
  REQUIRE(freq.size() == 15);
  std::vector<long> counts;
  for (auto& [k, v] : freq) counts.push_back(v);
  CHECK(chi_square(counts, draws / 15.0) < 40.0);  // 14 dof, 0.999 quantile ~36.1
}

TEST_CASE("type-restricted treatment hits exact per-part counts") {
  const Graph g = cycle(8);
  const auto cfg = ExperimentConfig::for_graph(g, 1, 2);
  const TypePartition types = TypePartition::create({{0, 1, 2, 3}, {4, 5, 6, 7}}, 8);
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const Treatment t = type_restricted(g, types, cfg, seed);
    for (const auto& part : types.parts) {
      int hit = 0;
      for (int v : part)
        if (t.contains(v)) ++hit;
      CHECK(hit == static_cast<int>(part.size()) / cfg.r * cfg.p);
    }
  }
  const TypePartition bad = TypePartition::create({{0, 1, 2}, {3, 4, 5, 6, 7}}, 8);
  CHECK_THROWS_AS(type_restricted(g, bad, cfg, 1u), std::invalid_argument);
}

TEST_CASE("type-restricted with one part matches crd distributionally") {
  const Graph square = cycle(4);
  const auto cfg = ExperimentConfig::for_graph(square, 1, 2);
  const TypePartition whole = TypePartition::create({{0, 1, 2, 3}}, 4);
  std::map<std::vector<int>, long> freq;
  const int draws = 60000;
  for (int s = 0; s < draws; ++s) freq[type_restricted(square, whole, cfg, s).treated()]++;
  REQUIRE(freq.size() == 6);
  std::vector<long> counts;
  for (auto& [k, v] : freq) counts.push_back(v);
  CHECK(chi_square(counts, draws / 6.0) < 25.0);
}

TEST_CASE("type-restricted marginals equal p/r across parts") {
  const Graph g = cycle(8);
  const auto cfg = ExperimentConfig::for_graph(g, 1, 2);
  const TypePartition types = TypePartition::create({{0, 1, 2, 3}, {4, 5, 6, 7}}, 8);
  std::vector<long> hits(8, 0);
  const int draws = 60000;
  for (int s = 0; s < draws; ++s) {
    const Treatment t = type_restricted(g, types, cfg, s);
    for (int v = 0; v < 8; ++v)
      if (t.contains(v)) ++hits[v];
  }
  for (long h : hits)
    CHECK(std::abs(h / static_cast<double>(draws) - 0.5) < 3.0 * std::sqrt(0.25 / draws));
}

TEST_CASE("type-restricted enumeration covers the product space") {
  const TypePartition types = TypePartition::create({{0, 1}, {2, 3}}, 4);
  const auto cfg = ExperimentConfig::create(1, 2, 2);
  std::set<std::vector<int>> seen;
  enumerate_type_restricted(types, cfg, [&](const Treatment& t) { seen.insert(t.treated()); });
  CHECK(seen.size() == 4);
}

TEST_CASE("serialization round trips") {
  const auto cfg = ExperimentConfig::create(1, 2, 2);
  const Treatment t = Treatment::from_set({3, 0}, cfg);
  std::ostringstream os;
  write_treatment(os, t);
  CHECK(os.str() == "0\n3\n");

  const Partition p = Partition::create({{2, 0}, {1, 3}}, 4);
  std::ostringstream pos;
  write_partition(pos, p);
  std::istringstream pis(pos.str());
  const Partition back = read_partition(pis, 4);
  CHECK(back.blocks == p.blocks);
}
