#include "fapprox/legendre.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fapprox {

namespace {

inline void check_domain(double x) {
  if (!(x >= -1.0 && x <= 1.0))
    throw std::domain_error("legendre: evaluation point outside [-1,1]");
}

// Unnormalized P_nu(x) with P_nu(1) = 1 via
// (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}.
inline double legendre_p(int nu, double x) {
  if (nu == 0) return 1.0;
  double pm = 1.0, p = x;
  for (int k = 1; k < nu; ++k) {
    const double pn = ((2.0 * k + 1.0) * x * p - k * pm) / (k + 1.0);
    pm = p;
    p = pn;
  }
  return p;
}

}  // namespace

double legendre_1d(int nu, double x) {
  if (nu < 0) throw std::invalid_argument("legendre_1d: negative degree");
  check_domain(x);
  return std::sqrt(2.0 * nu + 1.0) * legendre_p(nu, x);
}

void legendre_1d_table(std::span<const double> xs, int max_degree, Eigen::MatrixXd& out) {
  if (max_degree < 0) throw std::invalid_argument("legendre_1d_table: negative degree");
  out.resize(static_cast<Eigen::Index>(xs.size()), max_degree + 1);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    check_domain(x);
    double pm = 1.0, p = x;
    out(i, 0) = 1.0;
    if (max_degree >= 1) out(i, 1) = std::sqrt(3.0) * x;
    for (int k = 1; k < max_degree; ++k) {
      const double pn = ((2.0 * k + 1.0) * x * p - k * pm) / (k + 1.0);
      pm = p;
      p = pn;
      out(i, k + 1) = std::sqrt(2.0 * (k + 1.0) + 1.0) * pn;
    }
  }
}

double tensor_eval(const MultiIndex& nu, std::span<const double> x) {
  if (nu.size() != x.size()) throw std::invalid_argument("tensor_eval: dimension mismatch");
  double v = 1.0;
  for (std::size_t j = 0; j < nu.size(); ++j) v *= legendre_1d(nu[j], x[j]);
  return v;
}

double eval_expansion(const ExpansionCoefficients& c, std::span<const double> x) {
  if (static_cast<int>(x.size()) != c.index_set.dim)
    throw std::invalid_argument("eval_expansion: dimension mismatch");
  if (c.values.size() != static_cast<Eigen::Index>(c.index_set.size()))
    throw std::invalid_argument("eval_expansion: coefficients not aligned with index set");

  // One recurrence table per call keeps high-degree sets cheap.
  int max_degree = 0;
  for (const auto& nu : c.index_set.indices)
    for (int v : nu) max_degree = std::max(max_degree, v);
  Eigen::MatrixXd table;
  legendre_1d_table(x, max_degree, table);

  double sum = 0.0;
  for (std::size_t i = 0; i < c.index_set.size(); ++i) {
    const auto& nu = c.index_set.indices[i];
    double prod = 1.0;
    for (std::size_t j = 0; j < nu.size(); ++j) prod *= table(static_cast<Eigen::Index>(j), nu[j]);
    sum += c.values(static_cast<Eigen::Index>(i)) * prod;
  }
  return sum;
}

std::pair<MeasurementMatrix, Eigen::VectorXd> assemble_system(const Eigen::MatrixXd& points,
                                                              const Eigen::VectorXd& values,
                                                              const MultiIndexSet& index_set) {
  const Eigen::Index m = points.rows();
  const Eigen::Index n = static_cast<Eigen::Index>(index_set.size());
  if (m == 0 || n == 0) throw std::invalid_argument("assemble_system: empty samples or index set");
  if (points.cols() != index_set.dim)
    throw std::invalid_argument("assemble_system: point dimension mismatch");
  if (values.size() != m) throw std::invalid_argument("assemble_system: values/points mismatch");

  int max_degree = 0;
  for (const auto& nu : index_set.indices)
    for (int v : nu) max_degree = std::max(max_degree, v);

  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  MeasurementMatrix A;
  A.entries.resize(m, n);
  A.points = points;
  A.index_set = index_set;

  // Row-major by sample; every entry depends only on its own (i, nu).
  Eigen::MatrixXd table;  // (d x (max_degree+1)) per sample point
  std::vector<double> x(index_set.dim);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (int j = 0; j < index_set.dim; ++j) x[static_cast<std::size_t>(j)] = points(i, j);
    legendre_1d_table(x, max_degree, table);
    for (Eigen::Index col = 0; col < n; ++col) {
      const auto& nu = index_set.indices[static_cast<std::size_t>(col)];
      double prod = 1.0;
      for (std::size_t j = 0; j < nu.size(); ++j)
        prod *= table(static_cast<Eigen::Index>(j), nu[j]);
      A.entries(i, col) = prod * scale;
    }
  }
  return {std::move(A), values * scale};
}

std::string index_label(const MultiIndex& nu) {
  std::ostringstream oss;
  for (std::size_t j = 0; j < nu.size(); ++j) {
    if (j) oss << ':';
    oss << nu[j];
  }
  return oss.str();
}

void write_matrix_csv(std::ostream& out, const MeasurementMatrix& A) {
  for (std::size_t c = 0; c < A.index_set.size(); ++c) {
    if (c) out << ',';
    out << index_label(A.index_set.indices[c]);
  }
  out << '\n';
  out.precision(17);
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (j) out << ',';
      out << A.entries(i, j);
    }
    out << '\n';
  }
}

void write_coefficients_csv(std::ostream& out, const ExpansionCoefficients& c) {
  out << "index,value\n";
  out.precision(17);
  for (std::size_t i = 0; i < c.index_set.size(); ++i)
    out << index_label(c.index_set.indices[i]) << ',' << c.values(static_cast<Eigen::Index>(i))
        << '\n';
}

}  // namespace fapprox
