#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "netdesign/design.hpp"
#include "netdesign/graph.hpp"

namespace netdesign {

// (treated neighbors, untreated neighbors). The valid bidegrees for a graph
// form B = {(a,b) : a+b is a degree occurring in the graph}.
struct Bidegree {
  int treated = 0;
  int untreated = 0;

  int degree() const { return treated + untreated; }
  double treated_fraction() const {
    return degree() == 0 ? 0.0 : static_cast<double>(treated) / degree();
  }
  auto operator<=>(const Bidegree&) const = default;
};

inline std::ostream& operator<<(std::ostream& os, const Bidegree& u) {
  return os << '(' << u.treated << ',' << u.untreated << ')';
}

// ---- symmetric interference families -----------------------------------------

struct Linear {
  double gamma = 1.0;  // f(a,b) = gamma * a
};

struct NormalizedLinear {
  double gamma = 1.0;  // f(a,b) = gamma * a/(a+b)
};

struct ThresholdCount {
  double gamma = 1.0;  // f(a,b) = gamma * min(a, cap)
  int cap = 1;
};

struct ThresholdFraction {
  double gamma = 1.0;  // f(a,b) = gamma * min(a/(a+b), frac)
  double frac = 0.5;   // defaults to the p/r-style cutoff when built by the CLI
};

// Explicit f(a,b) on bidegree pairs. Entries with a = 0 may be omitted (they
// default to 0); storing a nonzero value there would contradict f_v(empty)=0.
class SymmetricTable {
 public:
  SymmetricTable() = default;

  explicit SymmetricTable(std::map<Bidegree, double> values) : values_(std::move(values)) {
    for (const auto& [u, f] : values_) {
      if (u.treated < 0 || u.untreated < 0)
        throw std::invalid_argument("symmetric table: negative bidegree");
      if (u.treated == 0 && f != 0.0)
        throw std::invalid_argument("symmetric table: nonzero value at (0,d) violates f(empty)=0");
    }
  }

  double at(Bidegree u) const {
    if (u.treated == 0) return 0.0;
    auto it = values_.find(u);
    if (it == values_.end()) {
      std::ostringstream msg;
      msg << "symmetric table: missing entry " << u;
      throw std::out_of_range(msg.str());
    }
    return it->second;
  }

  bool has(Bidegree u) const { return u.treated == 0 || values_.count(u) > 0; }
  const std::map<Bidegree, double>& entries() const { return values_; }

 private:
  std::map<Bidegree, double> values_;
};

// One symmetric interference function f(a,b); evaluation, the tight
// K_v-Lipschitz constant, and the single-neighbor weight bound.
class SymmetricInterference {
 public:
  using Model =
      std::variant<Linear, NormalizedLinear, ThresholdCount, ThresholdFraction, SymmetricTable>;

  SymmetricInterference() : model_(Linear{0.0}) {}
  SymmetricInterference(Model model) : model_(std::move(model)) {}

  // f(a, d-a) for a treated neighbors out of d.
  double eval(int treated, int degree) const {
    if (treated < 0 || treated > degree)
      throw std::invalid_argument("interference: treated-neighbor count out of range");
    if (treated == 0) return 0.0;
    const double a = treated;
    const double d = degree;
    return std::visit(
        [&](const auto& m) -> double {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, Linear>) return m.gamma * a;
          else if constexpr (std::is_same_v<M, NormalizedLinear>) return m.gamma * a / d;
          else if constexpr (std::is_same_v<M, ThresholdCount>)
            return m.gamma * std::min<double>(a, m.cap);
          else if constexpr (std::is_same_v<M, ThresholdFraction>)
            return m.gamma * std::min(a / d, m.frac);
          else
            return m.at(Bidegree{treated, degree - treated});
        },
        model_);
  }

  // Largest change from toggling one neighbor: max_a |f(a+1,d-a-1) - f(a,d-a)|.
  // Set-independence of symmetric f makes this exactly the appendix weight.
  double step_weight(int degree) const {
    double w = 0.0;
    for (int a = 0; a < degree; ++a)
      w = std::max(w, std::abs(eval(a + 1, degree) - eval(a, degree)));
    return w;
  }

  // K_v for a vertex of the given degree.
  double lipschitz_constant(int degree) const {
    if (degree == 0) return 0.0;
    return std::visit(
        [&](const auto& m) -> double {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, Linear>) return m.gamma * degree;
          else if constexpr (std::is_same_v<M, NormalizedLinear>) return m.gamma;
          else if constexpr (std::is_same_v<M, ThresholdCount>) return m.gamma * degree;
          else if constexpr (std::is_same_v<M, ThresholdFraction>) return m.gamma;
          else
            return degree * step_weight(degree);  // tight: one toggle moves to an adjacent pair
        },
        model_);
  }

  const Model& model() const { return model_; }

 private:
  Model model_;
};

// Interference specification for a whole graph: one shared function, or one
// function per type of a TypePartition.
class InterferenceSpec {
 public:
  static InterferenceSpec untyped(SymmetricInterference f) {
    InterferenceSpec spec;
    spec.functions_.push_back(std::move(f));
    return spec;
  }

  static InterferenceSpec typed(TypePartition types, std::vector<SymmetricInterference> per_part,
                                int num_vertices) {
    if (types.parts.size() != per_part.size())
      throw std::invalid_argument("interference: one function per type required");
    InterferenceSpec spec;
    spec.functions_ = std::move(per_part);
    spec.part_of_ = types.part_of(num_vertices);
    spec.types_ = std::move(types);
    return spec;
  }

  bool is_typed() const { return types_.has_value(); }
  const TypePartition& types() const {
    if (!types_) throw std::logic_error("interference: untyped spec has no type partition");
    return *types_;
  }

  const SymmetricInterference& for_vertex(int v) const {
    if (!is_typed()) return functions_.front();
    return functions_.at(part_of_.at(v));
  }

  const std::vector<SymmetricInterference>& functions() const { return functions_; }

 private:
  std::vector<SymmetricInterference> functions_;
  std::vector<int> part_of_;
  std::optional<TypePartition> types_;
};

inline double eval_interference(const InterferenceSpec& spec, const Graph& g, int v,
                                int treated_neighbors) {
  return spec.for_vertex(v).eval(treated_neighbors, g.degree(v));
}

inline double lipschitz_constant(const InterferenceSpec& spec, const Graph& g, int v) {
  return spec.for_vertex(v).lipschitz_constant(g.degree(v));
}

// W_v(w): worst change in f_v from toggling w, 0 when w is not a neighbor.
inline double weight(const InterferenceSpec& spec, const Graph& g, int v, int w) {
  if (!g.has_edge(v, w)) return 0.0;
  return spec.for_vertex(v).step_weight(g.degree(v));
}

// ---- Lipschitz budget and the d_K metric --------------------------------------

struct LipschitzBudget {
  std::vector<double> per_vertex;
  double k1 = 1.0;  // degree-difference scale in d_K (>= 0)
  double k2 = 1.0;  // treated-fraction scale in d_K (> 0)

  double average() const {
    double sum = 0.0;
    for (double k : per_vertex) sum += k;
    return per_vertex.empty() ? 0.0 : sum / static_cast<double>(per_vertex.size());
  }

  double max_constant() const {
    double m = 0.0;
    for (double k : per_vertex) m = std::max(m, k);
    return m;
  }
};

inline LipschitzBudget lipschitz_budget(const InterferenceSpec& spec, const Graph& g,
                                        double k1 = 1.0, double k2 = 1.0) {
  if (k1 < 0.0 || k2 <= 0.0)
    throw std::invalid_argument("lipschitz budget: need K1 >= 0 and K2 > 0");
  LipschitzBudget budget;
  budget.k1 = k1;
  budget.k2 = k2;
  budget.per_vertex.reserve(g.num_vertices());
  for (int v = 0; v < g.num_vertices(); ++v)
    budget.per_vertex.push_back(lipschitz_constant(spec, g, v));
  return budget;
}

// d_K((a,b),(c,d)) = K1 |a+b-c-d| / dmax + K2 |a/(a+b) - c/(c+d)|.
struct DkMetric {
  double k1 = 1.0;
  double k2 = 1.0;
  int dmax = 1;

  double operator()(Bidegree u1, Bidegree u2) const {
    if (u1.degree() < 1 || u2.degree() < 1)
      throw std::invalid_argument("d_K: zero-degree bidegree pair");
    return k1 * std::abs(u1.degree() - u2.degree()) / static_cast<double>(dmax) +
           k2 * std::abs(u1.treated_fraction() - u2.treated_fraction());
  }
};

inline double metric_dk(const LipschitzBudget& budget, int dmax, Bidegree u1, Bidegree u2) {
  return DkMetric{budget.k1, budget.k2, dmax}(u1, u2);
}

// All bidegrees that can occur in g: for each distinct degree d, the pairs
// (a, d-a), a = 0..d.
inline std::vector<Bidegree> bidegree_domain(const Graph& g) {
  std::vector<Bidegree> domain;
  for (const auto& [d, count] : degree_stats(g).degree_histogram)
    for (int a = 0; a <= d; ++a) domain.push_back(Bidegree{a, d - a});
  return domain;
}

// f evaluated on all of B; the table form used by measure integrals and
// Lipschitz-norm computations.
inline SymmetricTable materialize_table(const SymmetricInterference& f, const Graph& g) {
  std::map<Bidegree, double> values;
  for (Bidegree u : bidegree_domain(g)) values[u] = f.eval(u.treated, u.degree());
  return SymmetricTable(std::move(values));
}

// ||f||_d = max over pairs of |f(u)-f(v)| / d(u,v); infinity when two points
// at distance zero carry different values.
inline double lipschitz_norm(const SymmetricTable& table, const DkMetric& metric) {
  // full domain from the table, including the implicit (0,d) zeros
  std::vector<Bidegree> points;
  std::map<int, bool> degrees;
  for (const auto& [u, f] : table.entries()) degrees[u.degree()] = true;
  for (const auto& [d, unused] : degrees)
    for (int a = 0; a <= d; ++a) points.push_back(Bidegree{a, d - a});
  double norm = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double gap = std::abs(table.at(points[i]) - table.at(points[j]));
      const double dist = metric(points[i], points[j]);
      if (dist <= 0.0) {
        if (gap > 0.0) return std::numeric_limits<double>::infinity();
        continue;
      }
      norm = std::max(norm, gap / dist);
    }
  return norm;
}

// ---- table file format --------------------------------------------------------

// Lines "a b value"; blank lines and '#' comments allowed. Explicit nonzero
// (0,d) entries are rejected.
inline SymmetricTable read_symmetric_table(std::istream& is) {
  std::map<Bidegree, double> values;
  std::string line;
  while (std::getline(is, line)) {
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream ls(line);
    int a = 0, b = 0;
    double f = 0.0;
    if (!(ls >> a >> b >> f)) throw std::runtime_error("symmetric table file: malformed line");
    if (!values.emplace(Bidegree{a, b}, f).second)
      throw std::runtime_error("symmetric table file: duplicate entry");
  }
  return SymmetricTable(std::move(values));
}

inline void write_symmetric_table(std::ostream& os, const SymmetricTable& table) {
  for (const auto& [u, f] : table.entries()) os << u.treated << ' ' << u.untreated << ' ' << f << '\n';
}

// True when the table covers every bidegree the graph can produce.
inline void validate_table_for_graph(const SymmetricTable& table, const Graph& g) {
  for (Bidegree u : bidegree_domain(g))
    if (!table.has(u)) {
      std::ostringstream msg;
      msg << "symmetric table: missing entry " << u << " required by graph";
      throw std::invalid_argument(msg.str());
    }
}

}  // namespace netdesign
