#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>

#include "fapprox/function.hpp"
#include "fapprox/legendre.hpp"
#include "fapprox/multi_index.hpp"

namespace fapprox {

/// Deterministic testing/integration rule on (-1,1)^d, normalized to the
/// uniform probability measure (weights sum to 1).
struct QuadratureRule {
  int dim = 1;
  int level = 0;    // -1 for QMC grids
  bool qmc = false;
  Eigen::MatrixXd nodes;    // n x d
  Eigen::VectorXd weights;  // n

  Eigen::Index size() const { return weights.size(); }
};

/// Nested 1D Clenshaw-Curtis rule: one node {0} at level 0, 2^level + 1
/// Chebyshev extrema at level >= 1. Level cap 20.
QuadratureRule cc_rule_1d(int level);

/// Node count of smolyak_rule(d, level) without constructing it.
std::uint64_t smolyak_node_count(int d, int level);

/// Isotropic Smolyak combination of the nested 1D rules. Throws budget_error
/// if the node count exceeds `node_cap`.
QuadratureRule smolyak_rule(int d, int level, std::uint64_t node_cap = 5'000'000);

/// Deterministic quasi-Monte Carlo grid (Halton sequence, equal weights) for
/// testing discontinuous targets where sparse grids converge slowly.
QuadratureRule qmc_rule(int d, Eigen::Index points = 200'000);

/// Sum_i w_i g(x_i), accumulated by pairwise summation so the result is
/// independent of any parallel schedule.
double integrate(const QuadratureRule& rule, const RealFn& g);

/// Pairwise-summation reduction of a contribution vector (exposed for reuse).
double pairwise_sum(const Eigen::VectorXd& v);

/// c_nu = integrate(f * Psi_nu) for every nu in the index set.
ExpansionCoefficients reference_coefficients(const QuadratureRule& rule, const RealFn& f,
                                             const MultiIndexSet& index_set);

/// ||f - approx|| / ||f|| under the rule's discrete measure. Throws when the
/// denominator vanishes.
double relative_l2_error(const QuadratureRule& rule, const RealFn& f, const RealFn& approx);

/// Residual-based truncation parameter ||A c - values/sqrt(m)||_2 used to
/// calibrate constrained solves against a reference coefficient vector.
double reference_eta(const MeasurementMatrix& A, const ExpansionCoefficients& c,
                     const Eigen::VectorXd& values);

/// Smallest level at which two successive integrals of f^2 agree to rel_tol,
/// scanning level = min_level..max_level. Throws budget_error if the scan
/// exhausts max_level without stabilizing.
int auto_level(int d, const RealFn& f, int min_level = 2, int max_level = 20,
               double rel_tol = 1e-10, std::uint64_t node_cap = 5'000'000);

/// CSV: one node per row, d coordinates then the weight.
void write_rule_csv(std::ostream& out, const QuadratureRule& rule);

}  // namespace fapprox
