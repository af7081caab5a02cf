#include "fapprox/multi_index.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "fapprox/errors.hpp"

namespace fapprox {

bool graded_lex_less(const MultiIndex& a, const MultiIndex& b) {
  const long ta = std::accumulate(a.begin(), a.end(), 0L);
  const long tb = std::accumulate(b.begin(), b.end(), 0L);
  if (ta != tb) return ta < tb;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool MultiIndexSet::contains(const MultiIndex& nu) const { return position(nu) >= 0; }

std::ptrdiff_t MultiIndexSet::position(const MultiIndex& nu) const {
  auto it = std::lower_bound(indices.begin(), indices.end(), nu, graded_lex_less);
  if (it == indices.end() || *it != nu) return -1;
  return it - indices.begin();
}

MultiIndexSet make_index_set(int dim, std::vector<MultiIndex> indices) {
  if (dim < 1) throw std::invalid_argument("make_index_set: dim must be >= 1");
  for (const auto& nu : indices) {
    if (static_cast<int>(nu.size()) != dim)
      throw std::invalid_argument("make_index_set: index dimension mismatch");
    for (int v : nu)
      if (v < 0) throw std::invalid_argument("make_index_set: negative entry");
  }
  std::sort(indices.begin(), indices.end(), graded_lex_less);
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  return MultiIndexSet{dim, -1, std::move(indices)};
}

namespace {

void enumerate_hc(int d, long cap, int coord, MultiIndex& current, long product,
                  std::vector<MultiIndex>& out, std::size_t max_cardinality) {
  if (coord == d) {
    if (out.size() >= max_cardinality)
      throw budget_error("hyperbolic_cross: cardinality cap exceeded");
    out.push_back(current);
    return;
  }
  // product * (nu+1) <= cap prunes each coordinate loop without box enumeration.
  for (int nu = 0; product * (nu + 1) <= cap; ++nu) {
    current[coord] = nu;
    enumerate_hc(d, cap, coord + 1, current, product * (nu + 1), out, max_cardinality);
  }
  current[coord] = 0;
}

std::uint64_t hc_count(int d, std::uint64_t cap) {
  if (d == 1) return cap;
  std::uint64_t total = 0;
  for (std::uint64_t k = 1; k <= cap; ++k) total += hc_count(d - 1, cap / k);
  return total;
}

}  // namespace

MultiIndexSet hyperbolic_cross(int d, int s, std::size_t max_cardinality) {
  if (d < 1 || s < 1) throw std::invalid_argument("hyperbolic_cross: require d >= 1, s >= 1");
  if (hc_cardinality(d, s) > max_cardinality)
    throw budget_error("hyperbolic_cross: cardinality cap exceeded");
  std::vector<MultiIndex> raw;
  MultiIndex current(d, 0);
  enumerate_hc(d, static_cast<long>(s) + 1, 0, current, 1, raw, max_cardinality);
  auto set = make_index_set(d, std::move(raw));
  set.degree = s;
  return set;
}

std::uint64_t hc_cardinality(int d, int s) {
  if (d < 1 || s < 1) throw std::invalid_argument("hc_cardinality: require d >= 1, s >= 1");
  return hc_count(d, static_cast<std::uint64_t>(s) + 1);
}

DegreeSearch find_hc_degree(int d, std::uint64_t target) {
  DegreeSearch best;
  std::uint64_t best_gap = ~0ull;
  for (int s = 1;; ++s) {
    const std::uint64_t n = hc_cardinality(d, s);
    const std::uint64_t gap = n > target ? n - target : target - n;
    if (gap < best_gap) {
      best_gap = gap;
      best = DegreeSearch{s, n, n == target};
    }
    if (n >= target) break;
  }
  return best;
}

bool is_lower(const MultiIndexSet& set) {
  // Downward closure under single decrements implies full closure.
  for (const auto& nu : set.indices) {
    MultiIndex mu = nu;
    for (std::size_t j = 0; j < mu.size(); ++j) {
      if (mu[j] == 0) continue;
      mu[j] -= 1;
      if (!set.contains(mu)) return false;
      mu[j] += 1;
    }
  }
  return true;
}

double legendre_weight(const MultiIndex& nu) {
  double w = 1.0;
  for (int v : nu) w *= std::sqrt(2.0 * v + 1.0);
  return w;
}

WeightVector legendre_weights(const MultiIndexSet& set) {
  WeightVector u;
  u.values.reserve(set.size());
  for (const auto& nu : set.indices) u.values.push_back(legendre_weight(nu));
  return u;
}

double weighted_cardinality(const MultiIndexSet& S, const WeightVector& weights) {
  if (weights.size() != S.size())
    throw std::invalid_argument("weighted_cardinality: weights not aligned with set");
  double total = 0.0;
  for (double u : weights.values) total += u * u;
  return total;
}

namespace {

// Shared state of the lower-subset enumeration. Lower sets are grown by
// appending frontier elements in increasing canonical position, which yields
// each lower subset exactly once (canonical prefixes of a lower set are lower).
struct LowerSubsetSearch {
  const MultiIndexSet& domain;
  int max_size;
  std::uint64_t budget;
  std::uint64_t nodes = 0;
  std::vector<int> members;                      // positions in domain order
  const std::function<void(const std::vector<int>&)>& visit;

  LowerSubsetSearch(const MultiIndexSet& dom, int ms, std::uint64_t b,
                    const std::function<void(const std::vector<int>&)>& v)
      : domain(dom), max_size(ms), budget(b), visit(v) {}

  bool addable(int pos) const {
    const MultiIndex& nu = domain.indices[pos];
    MultiIndex mu = nu;
    for (std::size_t j = 0; j < mu.size(); ++j) {
      if (mu[j] == 0) continue;
      mu[j] -= 1;
      const auto p = domain.position(mu);
      mu[j] += 1;
      if (p < 0) return false;
      if (!std::binary_search(members.begin(), members.end(), static_cast<int>(p)))
        return false;
    }
    return true;
  }

  void grow(int min_pos) {
    if (++nodes > budget) throw budget_error("lower-set enumeration: search budget exceeded");
    if (!members.empty()) visit(members);
    if (static_cast<int>(members.size()) == max_size) return;
    for (int pos = min_pos; pos < static_cast<int>(domain.size()); ++pos) {
      if (!addable(pos)) continue;
      members.push_back(pos);
      grow(pos + 1);
      members.pop_back();
    }
  }
};

}  // namespace

void for_each_lower_subset(const MultiIndexSet& domain, int max_size,
                           const std::function<void(const std::vector<int>&)>& visit,
                           std::uint64_t max_nodes) {
  if (max_size < 1) return;
  LowerSubsetSearch search(domain, max_size, max_nodes, visit);
  search.grow(0);
}

double intrinsic_lower_sparsity(int d, int s, const LowerSetSearchLimits& limits) {
  if (d < 1 || s < 1)
    throw std::invalid_argument("intrinsic_lower_sparsity: require d >= 1, s >= 1");
  if (s > limits.max_s || d > limits.max_dim)
    throw budget_error("intrinsic_lower_sparsity: search budget exceeded");

  const MultiIndexSet domain = hyperbolic_cross(d, s);
  const WeightVector u = legendre_weights(domain);
  std::vector<double> usq(domain.size());
  for (std::size_t i = 0; i < domain.size(); ++i) usq[i] = u[i] * u[i];

  // Suffix maxima of squared weights in canonical order bound what any
  // remaining slot can contribute, pruning against the s^2 ceiling.
  std::vector<double> suffix_max(domain.size() + 1, 0.0);
  for (std::ptrdiff_t i = domain.size() - 1; i >= 0; --i)
    suffix_max[i] = std::max(suffix_max[i + 1], usq[i]);

  double best = 0.0;
  std::uint64_t nodes = 0;
  std::vector<int> members;
  std::function<void(double, int)> grow = [&](double weight, int min_pos) {
    if (++nodes > limits.max_nodes)
      throw budget_error("intrinsic_lower_sparsity: search budget exceeded");
    best = std::max(best, weight);
    const int slots = s - static_cast<int>(members.size());
    if (slots == 0) return;
    for (int pos = min_pos; pos < static_cast<int>(domain.size()); ++pos) {
      if (weight + slots * suffix_max[pos] <= best) break;  // suffix_max non-increasing
      // admissible iff all predecessors of domain[pos] are current members
      const MultiIndex& nu = domain.indices[pos];
      bool ok = true;
      MultiIndex mu = nu;
      for (std::size_t j = 0; j < mu.size() && ok; ++j) {
        if (mu[j] == 0) continue;
        mu[j] -= 1;
        const auto p = domain.position(mu);
        mu[j] += 1;
        ok = p >= 0 && std::binary_search(members.begin(), members.end(), static_cast<int>(p));
      }
      if (!ok) continue;
      members.push_back(pos);
      grow(weight + usq[pos], pos + 1);
      members.pop_back();
    }
  };
  grow(0.0, 0);
  return best;
}

HcCardinalityBounds hc_cardinality_bounds(int d, int s) {
  if (d < 1 || s < 1)
    throw std::invalid_argument("hc_cardinality_bounds: require d >= 1, s >= 1");
  const double t = static_cast<double>(s) + 1.0;  // the defining product cap
  HcCardinalityBounds b{};
  b.cubic = 2.0 * t * t * t * std::pow(4.0, d);
  b.power_log_dim = std::exp(2.0) * std::pow(t, 2.0 + std::log2(static_cast<double>(d)));
  double factorial = 1.0;
  for (int k = 2; k <= d - 1; ++k) factorial *= k;
  b.factorial = t * std::pow(std::log(t) + d * std::log(2.0), d - 1) / factorial;
  return b;
}

void write_index_set(std::ostream& out, const MultiIndexSet& set) {
  out << set.dim << ' ' << set.degree << '\n';
  for (const auto& nu : set.indices) {
    for (std::size_t j = 0; j < nu.size(); ++j) {
      if (j) out << ' ';
      out << nu[j];
    }
    out << '\n';
  }
}

MultiIndexSet read_index_set(std::istream& in) {
  int dim = 0, degree = -1;
  if (!(in >> dim >> degree)) throw std::runtime_error("read_index_set: bad header");
  std::vector<MultiIndex> indices;
  MultiIndex nu(dim);
  while (true) {
    bool got = true;
    for (int j = 0; j < dim; ++j) {
      if (!(in >> nu[j])) {
        got = false;
        break;
      }
    }
    if (!got) break;
    indices.push_back(nu);
  }
  auto set = make_index_set(dim, std::move(indices));
  set.degree = degree;
  return set;
}

}  // namespace fapprox
