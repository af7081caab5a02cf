#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "fapprox/legendre.hpp"
#include "fapprox/multi_index.hpp"

namespace fapprox {

/// Convex recovery formulations over the normalized system (A, f):
///   qcbp:     minimize ||z||_{1,u}  s.t. ||A z - f||_2 <= eta
///   lasso:    minimize ||z||_{1,u} + mu ||A z - f||_2^2
///   srlasso:  minimize ||z||_{1,u} + mu ||A z - f||_2
enum class CsVariant { qcbp, lasso, srlasso };

const char* to_string(CsVariant v);
CsVariant cs_variant_from_string(const std::string& name);

struct CsProblem {
  MeasurementMatrix A;
  Eigen::VectorXd rhs;    // already scaled by 1/sqrt(m)
  WeightVector weights;   // empty means uniform ones
  CsVariant variant = CsVariant::qcbp;
  double eta = 0.0;       // qcbp only; >= 0
  double mu = 0.0;        // lasso / srlasso only; > 0
};

struct SolverOptions {
  std::int64_t max_iterations = 100'000;
  double stop_tolerance = 1e-8;  // relative iterate change
  double step_scale = 0.9;       // in (0,1); steps tau = sigma = step_scale/||A||
};

struct CsSolution {
  ExpansionCoefficients coefficients;
  double residual_norm = 0.0;          // ||A c - f||_2 recomputed at exit
  std::vector<double> objective_trace; // objective at each convergence check
  std::int64_t iterations = 0;
  bool converged = false;
  double wall_seconds = 0.0;
};

/// Spectral norm estimate by power iteration on A^T A (relative tolerance
/// 1e-6), biased up by 1% so step sizes stay safe. Throws on a zero matrix.
double operator_norm(const Eigen::MatrixXd& A);

/// Proximal map of z -> sum_i t_i |z_i|: entrywise sign(z) max(|z|-t, 0).
Eigen::VectorXd weighted_soft_threshold(const Eigen::VectorXd& z, const Eigen::VectorXd& thresholds);

/// Solves the selected formulation by primal-dual proximal splitting. Throws
/// divergence_error if iterates become non-finite.
CsSolution solve(const CsProblem& problem, const SolverOptions& opts = {});

/// Residual-free penalty scale (12 sqrt(42) / 35) * s for the srlasso
/// formulation; depends only on the hyperbolic-cross degree s.
double mu_theoretical(int s);

/// Largest deviation of restricted Gram spectra from 1 over all supports S
/// with weighted cardinality |S|_u <= K(s). Exhaustive; feasible only for
/// small systems (n <= 25, s <= 4 by default).
double lower_rip_constant(const MeasurementMatrix& A, int s, int max_cols = 25, int max_s = 4);

/// JSON: index-labeled coefficients, residual, iterations, converged, wall time.
void write_solution_json(std::ostream& out, const CsSolution& solution);

}  // namespace fapprox
