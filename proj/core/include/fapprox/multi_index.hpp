#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace fapprox {

/// One d-dimensional multi-index: per-coordinate polynomial degrees, all >= 0.
using MultiIndex = std::vector<int>;

/// Ordered, duplicate-free collection of multi-indices sharing one dimension.
/// Canonical order is graded lexicographic: ascending total degree, ties
/// broken lexicographically. All free functions below rely on this order.
struct MultiIndexSet {
  int dim = 1;
  int degree = -1;  // hyperbolic-cross degree when built by hyperbolic_cross, else -1
  std::vector<MultiIndex> indices;

  std::size_t size() const { return indices.size(); }
  bool contains(const MultiIndex& nu) const;
  /// Position of nu in canonical order, or -1 if absent.
  std::ptrdiff_t position(const MultiIndex& nu) const;
};

/// Graded-lexicographic strict order.
bool graded_lex_less(const MultiIndex& a, const MultiIndex& b);

/// Sorts, deduplicates and validates a raw index list into canonical form.
MultiIndexSet make_index_set(int dim, std::vector<MultiIndex> indices);

/// Per-index weights aligned with a MultiIndexSet.
struct WeightVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

/// The set { nu : prod_j (nu_j + 1) <= s + 1 }, canonically ordered.
/// Throws budget_error if the cardinality would exceed `max_cardinality`.
MultiIndexSet hyperbolic_cross(int d, int s, std::size_t max_cardinality = 10'000'000);

/// Cardinality of hyperbolic_cross(d, s) without materializing the set.
std::uint64_t hc_cardinality(int d, int s);

/// Result of scanning degrees for a requested cardinality.
struct DegreeSearch {
  int degree = 0;
  std::uint64_t cardinality = 0;
  bool exact = false;
};

/// Smallest s whose hyperbolic cross cardinality equals `target`; if no exact
/// match exists, the s with nearest cardinality (exact == false).
DegreeSearch find_hc_degree(int d, std::uint64_t target);

/// True iff the set is downward closed: every componentwise-smaller index of
/// a member is also a member.
bool is_lower(const MultiIndexSet& set);

/// u_nu = prod_j sqrt(2 nu_j + 1), the sup norm of the tensor Legendre basis
/// function with index nu.
double legendre_weight(const MultiIndex& nu);
WeightVector legendre_weights(const MultiIndexSet& set);

/// Sum of squared weights over S. `weights` must be aligned with S
/// (one value per index, same order); misalignment throws.
double weighted_cardinality(const MultiIndexSet& S, const WeightVector& weights);

/// Caps for the exhaustive lower-set searches.
struct LowerSetSearchLimits {
  int max_s = 20;
  int max_dim = 4;
  std::uint64_t max_nodes = 200'000'000;  // branch-and-bound node budget
};

/// K(s): maximal weighted cardinality (Legendre weights) over lower subsets
/// of the hyperbolic cross of degree s with at most s elements, computed by
/// branch-and-bound enumeration of lower sets. Throws budget_error when the
/// instance exceeds the limits.
double intrinsic_lower_sparsity(int d, int s, const LowerSetSearchLimits& limits = {});

/// Enumerates every lower subset of `domain` with cardinality <= max_size and
/// invokes visit(positions) for each (positions index into domain's canonical
/// order, in increasing order). Node budget guards runaway instances.
void for_each_lower_subset(const MultiIndexSet& domain, int max_size,
                           const std::function<void(const std::vector<int>&)>& visit,
                           std::uint64_t max_nodes = 200'000'000);

/// The three closed-form upper bounds on the hyperbolic cross cardinality,
/// evaluated at the defining threshold t = s + 1 (the product cap), which is
/// the form under which each bound dominates the true count for all d, s.
struct HcCardinalityBounds {
  double cubic;          // 2 t^3 4^d
  double power_log_dim;  // e^2 t^(2 + log2 d)
  double factorial;      // t (ln t + d ln 2)^(d-1) / (d-1)!
};
HcCardinalityBounds hc_cardinality_bounds(int d, int s);

/// Text round-trip: first line "d s", one index per line, canonical order.
void write_index_set(std::ostream& out, const MultiIndexSet& set);
MultiIndexSet read_index_set(std::istream& in);

}  // namespace fapprox
