#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <sstream>

#include "fapprox/cs.hpp"
#include "fapprox/errors.hpp"
#include "fapprox/rng.hpp"
#include "fapprox/targets.hpp"

using namespace fapprox;

namespace {

// Measurement wrapper around an arbitrary matrix (solver tests that do not
// need genuine polynomial columns).
MeasurementMatrix wrap(const Eigen::MatrixXd& entries) {
  MeasurementMatrix A;
  A.entries = entries;
  std::vector<MultiIndex> idx;
  for (Eigen::Index j = 0; j < entries.cols(); ++j) idx.push_back({static_cast<int>(j)});
  A.index_set = make_index_set(1, std::move(idx));
  A.points = Eigen::MatrixXd::Zero(entries.rows(), 1);
  return A;
}

CsProblem qcbp(const Eigen::MatrixXd& entries, const Eigen::VectorXd& f, double eta) {
  CsProblem p;
  p.A = wrap(entries);
  p.rhs = f;
  p.variant = CsVariant::qcbp;
  p.eta = eta;
  return p;
}

}  // namespace

TEST_CASE("operator norm of simple matrices") {
  // returned value carries the deliberate 1% upper bias
  CHECK(operator_norm(Eigen::MatrixXd::Identity(5, 5)) / 1.01 ==
        doctest::Approx(1.0).epsilon(1e-4));
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 1.0;
  CHECK(operator_norm(d) / 1.01 == doctest::Approx(3.0).epsilon(1e-4));
  CHECK_THROWS_AS(operator_norm(Eigen::MatrixXd::Zero(3, 3)), std::invalid_argument);
}

TEST_CASE("operator norm matches the dense SVD oracle") {
  RngStream rng(123);
  Eigen::MatrixXd A(50, 100);
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) A(i, j) = rng.normal();
  const double svd = Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()(0);
  CHECK(operator_norm(A) / 1.01 == doctest::Approx(svd).epsilon(1e-4));
}

TEST_CASE("weighted soft threshold") {
  Eigen::VectorXd z(2), t(2);
  z << 3.0, -0.5;
  t << 1.0, 1.0;
  const auto y = weighted_soft_threshold(z, t);
  CHECK(y(0) == 2.0);
  CHECK(y(1) == 0.0);
  CHECK_THROWS_AS(weighted_soft_threshold(z, Eigen::VectorXd::Ones(3)), std::invalid_argument);
}

TEST_CASE("soft threshold minimizes the prox objective (grid oracle)") {
  RngStream rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::VectorXd z(2), t(2);
    z << 4.0 * rng.uniform01() - 2.0, 4.0 * rng.uniform01() - 2.0;
    t << 0.2 + rng.uniform01(), 0.2 + rng.uniform01();
    const auto y = weighted_soft_threshold(z, t);
    auto objective = [&](double a, double b) {
      return 0.5 * ((a - z(0)) * (a - z(0)) + (b - z(1)) * (b - z(1))) +
             t(0) * std::abs(a) + t(1) * std::abs(b);
    };
    const double at_prox = objective(y(0), y(1));
    for (double a = -2.5; a <= 2.5; a += 0.01)
      for (double b = -2.5; b <= 2.5; b += 0.01)
        CHECK(at_prox <= objective(a, b) + 1e-9);
  }
}

TEST_CASE("identity system with zero tolerance returns the data") {
  Eigen::VectorXd f(4);
  f << 0.5, -1.0, 2.0, 0.1;
  const auto solution = solve(qcbp(Eigen::MatrixXd::Identity(4, 4), f, 0.0));
  CHECK(solution.converged);
  CHECK((solution.coefficients.values - f).norm() <= 1e-6);
}

TEST_CASE("planted lower-set recovery with equality constraints") {
  const auto set = hyperbolic_cross(2, 10);
  const int m = 80;
  const Eigen::MatrixXd points = sample_uniform(2, m, 77);

  // plant on a small lower set (prefix of the canonical order is lower here)
  Eigen::VectorXd c_star = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(set.size()));
  RngStream rng(8);
  for (int i = 0; i < 5; ++i) c_star(i) = rng.normal();

  auto [A, rhs_zero] = assemble_system(points, Eigen::VectorXd::Zero(m), set);
  const Eigen::VectorXd f = A.entries * c_star;

  CsProblem problem;
  problem.A = A;
  problem.rhs = f;
  problem.weights = legendre_weights(set);
  problem.variant = CsVariant::qcbp;
  problem.eta = 0.0;
  const auto solution = solve(problem);
  CHECK(solution.converged);
  CHECK((solution.coefficients.values - c_star).norm() <= 1e-5);
}

TEST_CASE("constrained solutions are feasible at exit") {
  // residual bound within eta plus the documented tolerance slack, on
  // representative smooth-target instances
  const auto set = hyperbolic_cross(2, 8);
  for (std::uint64_t seed : {1ull, 2ull}) {
    const int m = 120;
    const Eigen::MatrixXd points = sample_uniform(2, m, seed);
    Eigen::VectorXd values(m);
    for (int i = 0; i < m; ++i)
      values(i) = std::exp(-(std::cos(points(i, 0)) + std::cos(points(i, 1))) / 16.0);
    auto [A, rhs] = assemble_system(points, values, set);

    CsProblem p;
    p.rhs = rhs;
    p.weights = legendre_weights(set);
    p.variant = CsVariant::qcbp;
    p.eta = 1e-3;
    p.A = std::move(A);
    SolverOptions opts;
    const auto solution = solve(p, opts);
    CHECK(solution.residual_norm <= p.eta + 10.0 * opts.stop_tolerance * rhs.norm());
    CHECK(!solution.objective_trace.empty());
  }
}

TEST_CASE("square-root lasso with a huge penalty behaves like basis pursuit") {
  RngStream rng(31);
  Eigen::MatrixXd A(30, 12);
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) A(i, j) = rng.normal() / std::sqrt(30.0);
  Eigen::VectorXd c0 = Eigen::VectorXd::Zero(12);
  c0(2) = 1.4;
  c0(7) = -0.6;
  CsProblem p;
  p.A = wrap(A);
  p.rhs = A * c0;
  p.variant = CsVariant::srlasso;
  p.mu = 1e6;
  const auto solution = solve(p);
  CHECK(solution.residual_norm <= 1e-4);
}

TEST_CASE("penalized objectives never exceed the zero vector or the reference") {
  // noisy data keep the optimal residual away from the norm kink
  const auto set = hyperbolic_cross(1, 15);
  const Eigen::MatrixXd points = sample_uniform(1, 60, 4);
  Eigen::VectorXd values(60);
  for (int i = 0; i < 60; ++i) values(i) = std::exp(points(i, 0));
  values = add_noise(values, 1e-2, 4);
  auto [A, rhs] = assemble_system(points, values, set);
  const auto u = legendre_weights(set);

  for (CsVariant variant : {CsVariant::lasso, CsVariant::srlasso}) {
    CsProblem p;
    p.A = A;
    p.rhs = rhs;
    p.weights = u;
    p.variant = variant;
    p.mu = variant == CsVariant::lasso ? 50.0 : mu_theoretical(15);
    const auto solution = solve(p);

    auto objective = [&](const Eigen::VectorXd& z) {
      double l1 = 0.0;
      for (Eigen::Index i = 0; i < z.size(); ++i) l1 += u[static_cast<std::size_t>(i)] * std::abs(z(i));
      const double r = (A.entries * z - rhs).norm();
      return l1 + (variant == CsVariant::lasso ? p.mu * r * r : p.mu * r);
    };
    const double at_solution = objective(solution.coefficients.values);
    CHECK(at_solution <=
          objective(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(set.size()))) + 1e-8);
    // least-squares reference is feasible competition as well
    const Eigen::VectorXd ls = A.entries.colPivHouseholderQr().solve(rhs);
    CHECK(at_solution <= objective(ls) + 1e-8);
  }
}

TEST_CASE("positive homogeneity of the constrained program") {
  RngStream rng(99);
  Eigen::MatrixXd A(40, 20);
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) A(i, j) = rng.normal() / std::sqrt(40.0);
  Eigen::VectorXd f(40);
  for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = rng.normal();
  const double eta = 0.1 * f.norm();

  const auto base = solve(qcbp(A, f, eta));
  const double alpha = 3.5;
  const auto scaled = solve(qcbp(A, alpha * f, alpha * eta));
  CHECK((scaled.coefficients.values - alpha * base.coefficients.values).norm() <=
        1e-4 * std::max(1.0, alpha * base.coefficients.values.norm()));
}

TEST_CASE("unweighted variant equals the all-ones weighted variant bitwise") {
  RngStream rng(15);
  Eigen::MatrixXd A(25, 10);
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) A(i, j) = rng.normal() / 5.0;
  Eigen::VectorXd f(25);
  for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = rng.normal();

  CsProblem p1 = qcbp(A, f, 0.05);
  CsProblem p2 = p1;
  p2.weights.values.assign(10, 1.0);
  const auto s1 = solve(p1);
  const auto s2 = solve(p2);
  CHECK(s1.coefficients.values == s2.coefficients.values);
  CHECK(s1.iterations == s2.iterations);
}

TEST_CASE("divergence surfaces as a typed error") {
  Eigen::VectorXd f(3);
  f << 1.0, std::numeric_limits<double>::quiet_NaN(), 0.0;
  CHECK_THROWS_AS(solve(qcbp(Eigen::MatrixXd::Identity(3, 3), f, 0.0)), divergence_error);
}

TEST_CASE("theoretical penalty scale") {
  // mu(1)^2 * 35^2 = 144 * 42 exactly, and mu is linear in s
  const double mu1 = mu_theoretical(1);
  CHECK(mu1 * mu1 * 1225.0 == doctest::Approx(6048.0).epsilon(1e-12));
  CHECK(mu_theoretical(10) == doctest::Approx(10.0 * mu1).epsilon(1e-14));
  CHECK_THROWS_AS(mu_theoretical(0), std::invalid_argument);
}

TEST_CASE("lower restricted isometry of trivial systems") {
  // orthonormal columns: zero deviation
  const auto I = wrap(Eigen::MatrixXd::Identity(6, 6));
  CHECK(lower_rip_constant(I, 2) <= 1e-12);

  // single column of norm sqrt(1 + delta): deviation exactly delta
  const double delta = 0.37;
  Eigen::MatrixXd col(4, 1);
  col << std::sqrt(1.0 + delta), 0.0, 0.0, 0.0;
  CHECK(lower_rip_constant(wrap(col), 1) == doctest::Approx(delta).epsilon(1e-10));
}

TEST_CASE("lower restricted isometry matches the exhaustive eigen-oracle") {
  const auto set = hyperbolic_cross(2, 4);  // 12 columns
  const int m = 100;
  auto [A, rhs] = assemble_system(sample_uniform(2, m, 2024), Eigen::VectorXd::Zero(m), set);

  const double estimate = lower_rip_constant(A, 2);

  // oracle: every support with weighted cardinality <= K(2)
  const double budget = intrinsic_lower_sparsity(2, 2);
  const auto u = legendre_weights(set);
  const Eigen::MatrixXd gram = A.entries.transpose() * A.entries;
  const int n = static_cast<int>(set.size());
  double expected = 0.0;
  for (int mask = 1; mask < (1 << n); ++mask) {
    double weight = 0.0;
    std::vector<int> support;
    for (int j = 0; j < n; ++j)
      if (mask & (1 << j)) {
        weight += u[static_cast<std::size_t>(j)] * u[static_cast<std::size_t>(j)];
        support.push_back(j);
      }
    if (weight > budget) continue;
    Eigen::MatrixXd g(support.size(), support.size());
    for (std::size_t a = 0; a < support.size(); ++a)
      for (std::size_t b = 0; b < support.size(); ++b)
        g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
            gram(support[a], support[b]);
    const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues();
    expected = std::max({expected, std::abs(eig.maxCoeff() - 1.0), std::abs(1.0 - eig.minCoeff())});
  }
  CHECK(estimate == doctest::Approx(expected).epsilon(1e-12));

  CHECK_THROWS_AS(lower_rip_constant(A, 5), budget_error);
}

TEST_CASE("solution serializes to json") {
  Eigen::VectorXd f(2);
  f << 1.0, 2.0;
  const auto solution = solve(qcbp(Eigen::MatrixXd::Identity(2, 2), f, 0.0));
  std::ostringstream out;
  write_solution_json(out, solution);
  CHECK(out.str().find("\"converged\": true") != std::string::npos);
  CHECK(out.str().find("\"coefficients\"") != std::string::npos);
}
