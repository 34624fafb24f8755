#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "netdesign/graph.hpp"
#include "netdesign/rng.hpp"

namespace netdesign {

// Experiment size (p, r, n): n blocks of r units, p treated per block,
// q = r - p controls, pn treated in total.
struct ExperimentConfig {
  int p = 1;
  int r = 2;
  int n = 1;

  static ExperimentConfig create(int p, int r, int n) {
    if (p < 1 || p >= r) throw std::invalid_argument("config: need 1 <= p < r");
    if (n < 1) throw std::invalid_argument("config: need n >= 1");
    return ExperimentConfig{p, r, n};
  }

  static ExperimentConfig for_graph(const Graph& g, int p, int r) {
    if (r < 2) throw std::invalid_argument("config: need r >= 2");
    if (g.num_vertices() % r != 0)
      throw std::invalid_argument("config: num_vertices not divisible by r");
    return create(p, r, g.num_vertices() / r);
  }

  int q() const { return r - p; }
  int num_vertices() const { return r * n; }
  int num_treated() const { return p * n; }

  bool operator==(const ExperimentConfig&) const = default;
};

// A treated vertex set of size pn together with its configuration.
class Treatment {
 public:
  static Treatment from_set(std::vector<int> treated, const ExperimentConfig& cfg) {
    std::sort(treated.begin(), treated.end());
    if (std::adjacent_find(treated.begin(), treated.end()) != treated.end())
      throw std::invalid_argument("treatment: repeated vertex");
    if (static_cast<int>(treated.size()) != cfg.num_treated())
      throw std::invalid_argument("treatment: |T| != p*n");
    Treatment t;
    t.cfg_ = cfg;
    t.mask_.assign(cfg.num_vertices(), 0);
    for (int v : treated) {
      if (v < 0 || v >= cfg.num_vertices())
        throw std::invalid_argument("treatment: vertex out of range");
      t.mask_[v] = 1;
    }
    t.treated_ = std::move(treated);
    return t;
  }

  bool contains(int v) const { return mask_.at(v) != 0; }
  const std::vector<int>& treated() const { return treated_; }
  const ExperimentConfig& config() const { return cfg_; }

  // pq(T, v): q for treated vertices, -p for controls.
  double sign_coefficient(int v) const { return contains(v) ? cfg_.q() : -cfg_.p; }

 private:
  std::vector<int> treated_;
  std::vector<std::uint8_t> mask_;
  ExperimentConfig cfg_;
};

// Ordered list of disjoint equally-sized blocks covering 0..nv-1.
struct Partition {
  std::vector<std::vector<int>> blocks;

  static Partition create(std::vector<std::vector<int>> blocks, int num_vertices) {
    if (blocks.empty()) throw std::invalid_argument("partition: no blocks");
    const std::size_t r = blocks.front().size();
    std::vector<char> seen(num_vertices, 0);
    for (auto& block : blocks) {
      if (block.size() != r) throw std::invalid_argument("partition: unequal block sizes");
      for (int v : block) {
        if (v < 0 || v >= num_vertices) throw std::invalid_argument("partition: vertex out of range");
        if (seen[v]) throw std::invalid_argument("partition: vertex repeated");
        seen[v] = 1;
      }
    }
    if (blocks.size() * r != static_cast<std::size_t>(num_vertices))
      throw std::invalid_argument("partition: blocks do not cover the vertex set");
    return Partition{std::move(blocks)};
  }

  int block_size() const { return static_cast<int>(blocks.front().size()); }
  int num_blocks() const { return static_cast<int>(blocks.size()); }

  void check_config(const ExperimentConfig& cfg) const {
    if (block_size() != cfg.r || num_blocks() != cfg.n)
      throw std::invalid_argument("partition: does not match configuration");
  }

  // Index of the block containing each vertex.
  std::vector<int> block_of() const {
    int nv = num_blocks() * block_size();
    std::vector<int> owner(nv, -1);
    for (int i = 0; i < num_blocks(); ++i)
      for (int v : blocks[i]) owner[v] = i;
    return owner;
  }
};

// Disjoint vertex groups covering V(G); sizes may differ between parts.
struct TypePartition {
  std::vector<std::vector<int>> parts;

  static TypePartition create(std::vector<std::vector<int>> parts, int num_vertices) {
    std::vector<char> seen(num_vertices, 0);
    std::size_t covered = 0;
    for (auto& part : parts) {
      if (part.empty()) throw std::invalid_argument("types: empty part");
      for (int v : part) {
        if (v < 0 || v >= num_vertices) throw std::invalid_argument("types: vertex out of range");
        if (seen[v]) throw std::invalid_argument("types: vertex repeated");
        seen[v] = 1;
        ++covered;
      }
    }
    if (covered != static_cast<std::size_t>(num_vertices))
      throw std::invalid_argument("types: parts do not cover the vertex set");
    return TypePartition{std::move(parts)};
  }

  int num_parts() const { return static_cast<int>(parts.size()); }

  std::vector<int> part_of(int num_vertices) const {
    std::vector<int> owner(num_vertices, -1);
    for (int i = 0; i < num_parts(); ++i)
      for (int v : parts[i]) owner[v] = i;
    return owner;
  }

  void check_divisible(int r) const {
    for (const auto& part : parts)
      if (part.size() % r != 0)
        throw std::invalid_argument("types: part size not divisible by r");
  }
};

// T_{B,P}: within each block, p of the r members are treated uniformly at
// random, blocks independent. Every vertex ends up treated with marginal
// probability p/r.
inline Treatment sample_within_blocks(const Partition& partition, const ExperimentConfig& cfg,
                                      Rng& rng) {
  partition.check_config(cfg);
  std::vector<int> treated;
  treated.reserve(cfg.num_treated());
  for (const auto& block : partition.blocks) {
    for (int j : rng.sample_indices(cfg.r, cfg.p)) treated.push_back(block[j]);
  }
  return Treatment::from_set(std::move(treated), cfg);
}

inline Treatment sample_within_blocks(const Partition& partition, const ExperimentConfig& cfg,
                                      std::uint64_t seed) {
  Rng rng(seed);
  return sample_within_blocks(partition, cfg, rng);
}

// Completely randomized design: T uniform over all (rn choose pn) subsets.
inline Treatment crd(const Graph& g, const ExperimentConfig& cfg, Rng& rng) {
  if (g.num_vertices() != cfg.num_vertices())
    throw std::invalid_argument("crd: graph size does not match configuration");
  return Treatment::from_set(rng.sample_indices(cfg.num_vertices(), cfg.num_treated()), cfg);
}

inline Treatment crd(const Graph& g, const ExperimentConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  return crd(g, cfg, rng);
}

// P*: sort vertices by non-increasing degree (ties by index) and cut the
// order into consecutive blocks of r. Satisfies C_{P*} <= 2.
inline Partition partition_by_degree(const Graph& g, const ExperimentConfig& cfg) {
  if (g.num_vertices() != cfg.num_vertices())
    throw std::invalid_argument("partition_by_degree: graph size does not match configuration");
  std::vector<int> order(g.num_vertices());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return g.degree(a) > g.degree(b); });
  std::vector<std::vector<int>> blocks(cfg.n);
  for (int i = 0; i < cfg.n; ++i)
    blocks[i].assign(order.begin() + static_cast<std::ptrdiff_t>(i) * cfg.r,
                     order.begin() + static_cast<std::ptrdiff_t>(i + 1) * cfg.r);
  return Partition::create(std::move(blocks), g.num_vertices());
}

// P**: within each exact-degree class, all but (count mod r) vertices are
// blocked uniformly at random into same-degree blocks; the leftovers S
// (highest-index vertices of each class) are blocked by non-increasing
// degree, ties by index. The S blocks come first, as in the definition.
inline Partition randomized_degree_blocking(const Graph& g, const ExperimentConfig& cfg,
                                            Rng& rng) {
  if (g.num_vertices() != cfg.num_vertices())
    throw std::invalid_argument("randomized_degree_blocking: graph size mismatch");
  std::map<int, std::vector<int>> classes;  // degree -> sorted vertex list
  for (int v = 0; v < g.num_vertices(); ++v) classes[g.degree(v)].push_back(v);

  std::vector<int> leftovers;
  std::vector<std::vector<int>> random_blocks;
  for (auto& [degree, members] : classes) {
    const int keep = static_cast<int>(members.size()) - static_cast<int>(members.size()) % cfg.r;
    for (std::size_t i = keep; i < members.size(); ++i) leftovers.push_back(members[i]);
    std::vector<int> pool(members.begin(), members.begin() + keep);
    rng.shuffle(pool);
    for (int i = 0; i + cfg.r <= keep; i += cfg.r)
      random_blocks.emplace_back(pool.begin() + i, pool.begin() + i + cfg.r);
  }
  std::stable_sort(leftovers.begin(), leftovers.end(),
                   [&](int a, int b) { return g.degree(a) > g.degree(b); });

  std::vector<std::vector<int>> blocks;
  for (std::size_t i = 0; i + cfg.r <= leftovers.size(); i += cfg.r)
    blocks.emplace_back(leftovers.begin() + i, leftovers.begin() + i + cfg.r);
  for (auto& block : random_blocks) blocks.push_back(std::move(block));
  return Partition::create(std::move(blocks), g.num_vertices());
}

inline Partition randomized_degree_blocking(const Graph& g, const ExperimentConfig& cfg,
                                            std::uint64_t seed) {
  Rng rng(seed);
  return randomized_degree_blocking(g, cfg, rng);
}

// Leftover set size of P**: sum over degree classes of (count mod r).
inline int degree_blocking_leftover_count(const Graph& g, int r) {
  std::map<int, int> counts;
  for (int v = 0; v < g.num_vertices(); ++v) ++counts[g.degree(v)];
  int total = 0;
  for (auto [degree, count] : counts) total += count % r;
  return total;
}

// T_Pi: independently for each part, a uniform subset of size p|pi|/r.
inline Treatment type_restricted(const Graph& g, const TypePartition& types,
                                 const ExperimentConfig& cfg, Rng& rng) {
  if (g.num_vertices() != cfg.num_vertices())
    throw std::invalid_argument("type_restricted: graph size does not match configuration");
  types.check_divisible(cfg.r);
  std::vector<int> treated;
  treated.reserve(cfg.num_treated());
  for (const auto& part : types.parts) {
    const int take = static_cast<int>(part.size()) / cfg.r * cfg.p;
    for (int j : rng.sample_indices(static_cast<int>(part.size()), take))
      treated.push_back(part[j]);
  }
  return Treatment::from_set(std::move(treated), cfg);
}

inline Treatment type_restricted(const Graph& g, const TypePartition& types,
                                 const ExperimentConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  return type_restricted(g, types, cfg, rng);
}

// ---- exhaustive enumeration -------------------------------------------------

inline std::uint64_t binomial_coefficient(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 result = 1;
  for (int i = 1; i <= k; ++i) {
    result = result * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    if (result > static_cast<unsigned __int128>(UINT64_MAX))
      throw std::overflow_error("binomial_coefficient: overflow");
  }
  return static_cast<std::uint64_t>(result);
}

// Calls fn(combo) for every k-subset of {0..n-1}, in lexicographic order.
template <typename Fn>
void for_each_combination(int n, int k, Fn&& fn) {
  if (k < 0 || k > n) return;
  std::vector<int> combo(k);
  std::iota(combo.begin(), combo.end(), 0);
  while (true) {
    fn(std::as_const(combo));
    int i = k - 1;
    while (i >= 0 && combo[i] == n - k + i) --i;
    if (i < 0) break;
    ++combo[i];
    for (int j = i + 1; j < k; ++j) combo[j] = combo[j - 1] + 1;
  }
}

constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

// Yields all C(r,p)^n equally likely within-block assignments exactly once.
class BlockAssignmentEnumerator {
 public:
  BlockAssignmentEnumerator(const Partition& partition, const ExperimentConfig& cfg,
                            std::uint64_t cap = kDefaultEnumerationCap)
      : partition_(partition), cfg_(cfg) {
    partition.check_config(cfg);
    const std::uint64_t per_block = binomial_coefficient(cfg.r, cfg.p);
    total_ = 1;
    for (int i = 0; i < cfg.n; ++i) {
      if (total_ > cap / per_block) throw std::runtime_error("enumeration cap exceeded");
      total_ *= per_block;
    }
    for_each_combination(cfg.r, cfg.p,
                         [&](const std::vector<int>& combo) { block_choices_.push_back(combo); });
    odometer_.assign(cfg.n, 0);
  }

  std::uint64_t total_count() const { return total_; }

  // Returns false once all assignments have been produced.
  bool next(Treatment& out) {
    if (done_) return false;
    std::vector<int> treated;
    treated.reserve(cfg_.num_treated());
    for (int i = 0; i < cfg_.n; ++i)
      for (int j : block_choices_[odometer_[i]]) treated.push_back(partition_.blocks[i][j]);
    out = Treatment::from_set(std::move(treated), cfg_);
    for (int i = cfg_.n - 1; i >= 0; --i) {
      if (++odometer_[i] < block_choices_.size()) return true;
      odometer_[i] = 0;
    }
    done_ = true;
    return true;
  }

 private:
  Partition partition_;
  ExperimentConfig cfg_;
  std::vector<std::vector<int>> block_choices_;
  std::vector<std::size_t> odometer_;
  std::uint64_t total_ = 0;
  bool done_ = false;
};

template <typename Fn>
void enumerate_block_assignments(const Partition& partition, const ExperimentConfig& cfg,
                                 Fn&& fn, std::uint64_t cap = kDefaultEnumerationCap) {
  BlockAssignmentEnumerator en(partition, cfg, cap);
  Treatment t;
  while (en.next(t)) fn(std::as_const(t));
}

// All T_Pi draws: product over parts of the C(|pi|, p|pi|/r) subsets.
template <typename Fn>
void enumerate_type_restricted(const TypePartition& types, const ExperimentConfig& cfg, Fn&& fn,
                               std::uint64_t cap = kDefaultEnumerationCap) {
  types.check_divisible(cfg.r);
  std::vector<std::vector<std::vector<int>>> part_choices;  // per part, list of treated subsets
  std::uint64_t total = 1;
  for (const auto& part : types.parts) {
    const int take = static_cast<int>(part.size()) / cfg.r * cfg.p;
    const std::uint64_t count = binomial_coefficient(static_cast<int>(part.size()), take);
    if (count != 0 && total > cap / count) throw std::runtime_error("enumeration cap exceeded");
    total *= count;
    auto& choices = part_choices.emplace_back();
    for_each_combination(static_cast<int>(part.size()), take,
                         [&](const std::vector<int>& combo) {
                           std::vector<int> chosen;
                           chosen.reserve(combo.size());
                           for (int j : combo) chosen.push_back(part[j]);
                           choices.push_back(std::move(chosen));
                         });
  }
  std::vector<std::size_t> odometer(types.parts.size(), 0);
  while (true) {
    std::vector<int> treated;
    treated.reserve(cfg.num_treated());
    for (std::size_t i = 0; i < part_choices.size(); ++i)
      for (int v : part_choices[i][odometer[i]]) treated.push_back(v);
    const Treatment t = Treatment::from_set(std::move(treated), cfg);
    fn(t);
    int i = static_cast<int>(odometer.size()) - 1;
    while (i >= 0) {
      if (++odometer[i] < part_choices[i].size()) break;
      odometer[i] = 0;
      --i;
    }
    if (i < 0) break;
  }
}

// ---- serialization ----------------------------------------------------------

// Treatment: one treated vertex index per line.
inline void write_treatment(std::ostream& os, const Treatment& t) {
  for (int v : t.treated()) os << v << '\n';
}

inline std::vector<int> read_vertex_set(std::istream& is) {
  std::vector<int> vertices;
  int v = 0;
  while (is >> v) vertices.push_back(v);
  return vertices;
}

// Partition / type partition: one group per line, space-separated indices.
inline void write_vertex_groups(std::ostream& os, const std::vector<std::vector<int>>& groups) {
  for (const auto& group : groups) {
    for (std::size_t i = 0; i < group.size(); ++i) os << (i ? " " : "") << group[i];
    os << '\n';
  }
}

inline std::vector<std::vector<int>> read_vertex_groups(std::istream& is) {
  std::vector<std::vector<int>> groups;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<int> group;
    int v = 0;
    while (ls >> v) group.push_back(v);
    if (!group.empty()) groups.push_back(std::move(group));
  }
  return groups;
}

inline void write_partition(std::ostream& os, const Partition& p) {
  write_vertex_groups(os, p.blocks);
}

inline Partition read_partition(std::istream& is, int num_vertices) {
  return Partition::create(read_vertex_groups(is), num_vertices);
}

inline TypePartition read_type_partition(std::istream& is, int num_vertices) {
  return TypePartition::create(read_vertex_groups(is), num_vertices);
}

}  // namespace netdesign
