#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <span>
#include <utility>

#include "fapprox/multi_index.hpp"

namespace fapprox {

/// Orthonormal Legendre polynomial psi_nu(x) = sqrt(2 nu + 1) P_nu(x) on
/// [-1,1], evaluated by the three-term recurrence. Throws std::domain_error
/// for |x| > 1.
double legendre_1d(int nu, double x);

/// Fills column k of `out` with psi_k(x), k = 0..max_degree, one recurrence
/// sweep per point. `xs` and rows of `out` correspond.
void legendre_1d_table(std::span<const double> xs, int max_degree, Eigen::MatrixXd& out);

/// Tensor basis function Psi_nu(x) = prod_j psi_{nu_j}(x_j).
double tensor_eval(const MultiIndex& nu, std::span<const double> x);

/// Expansion coefficients aligned one-to-one with an index set.
struct ExpansionCoefficients {
  MultiIndexSet index_set;
  Eigen::VectorXd values;
};

/// Sum_nu c_nu Psi_nu(x).
double eval_expansion(const ExpansionCoefficients& c, std::span<const double> x);

/// Normalized sampling matrix A(i, nu) = Psi_nu(x_i) / sqrt(m) together with
/// the sample points (rows of `points`) and the column index set.
struct MeasurementMatrix {
  Eigen::MatrixXd entries;  // m x n
  Eigen::MatrixXd points;   // m x d
  MultiIndexSet index_set;

  Eigen::Index rows() const { return entries.rows(); }
  Eigen::Index cols() const { return entries.cols(); }
};

/// Builds the normalized system (A, f) with A(i, nu) = Psi_nu(x_i)/sqrt(m)
/// and f_i = values_i/sqrt(m). Throws on empty inputs, points outside
/// [-1,1]^d, or mismatched lengths.
std::pair<MeasurementMatrix, Eigen::VectorXd> assemble_system(const Eigen::MatrixXd& points,
                                                              const Eigen::VectorXd& values,
                                                              const MultiIndexSet& index_set);

/// Column label "nu1:nu2:...:nud" used by the CSV writers.
std::string index_label(const MultiIndex& nu);

/// CSV with a header row of index labels followed by matrix rows.
void write_matrix_csv(std::ostream& out, const MeasurementMatrix& A);
/// CSV with header "index,value", one coefficient per row.
void write_coefficients_csv(std::ostream& out, const ExpansionCoefficients& c);

}  // namespace fapprox
