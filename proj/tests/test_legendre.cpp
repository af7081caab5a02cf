#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fapprox/legendre.hpp"
#include "fapprox/rng.hpp"

using namespace fapprox;

namespace {

// Explicit classical polynomials P_0..P_4, the recurrence oracle.
double explicit_p(int nu, double x) {
  switch (nu) {
    case 0: return 1.0;
    case 1: return x;
    case 2: return (3.0 * x * x - 1.0) / 2.0;
    case 3: return (5.0 * x * x * x - 3.0 * x) / 2.0;
    case 4: return (35.0 * x * x * x * x - 30.0 * x * x + 3.0) / 8.0;
    default: return 0.0;
  }
}

}  // namespace

TEST_CASE("degree zero is the constant one") {
  for (double x : {-1.0, -0.3, 0.0, 0.9, 1.0}) CHECK(legendre_1d(0, x) == 1.0);
}

TEST_CASE("normalization point x = 1") {
  CHECK(legendre_1d(2, 1.0) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
  CHECK(legendre_1d(7, 1.0) == doctest::Approx(std::sqrt(15.0)).epsilon(1e-13));
}

TEST_CASE("value against the explicit quadratic") {
  // sqrt(5) * (3*0 - 1)/2
  CHECK(legendre_1d(2, 0.0) == doctest::Approx(-1.118033988749895).epsilon(1e-14));
}

TEST_CASE("recurrence agrees with explicit formulas up to degree 4") {
  for (int nu = 0; nu <= 4; ++nu)
    for (int i = 0; i <= 40; ++i) {
      const double x = -1.0 + i / 20.0;
      const double expected = std::sqrt(2.0 * nu + 1.0) * explicit_p(nu, x);
      CHECK(legendre_1d(nu, x) == doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("domain is the closed unit interval") {
  CHECK_THROWS_AS(legendre_1d(3, 1.0 + 1e-12), std::domain_error);
  CHECK_THROWS_AS(legendre_1d(3, -2.0), std::domain_error);
  CHECK_THROWS_AS(legendre_1d(-1, 0.5), std::invalid_argument);
}

TEST_CASE("sup bound sqrt(2 nu + 1) holds on a fine grid") {
  const int grid = 10'000;
  std::vector<double> xs(grid + 1);
  for (int i = 0; i <= grid; ++i) xs[static_cast<std::size_t>(i)] = -1.0 + 2.0 * i / grid;
  Eigen::MatrixXd table;
  legendre_1d_table(xs, 200, table);
  for (int nu = 0; nu <= 200; ++nu) {
    const double bound = std::sqrt(2.0 * nu + 1.0);
    CHECK(table.col(nu).cwiseAbs().maxCoeff() <= bound * (1.0 + 1e-12));
  }
}

TEST_CASE("parity") {
  for (int nu : {1, 2, 3, 10, 31, 100})
    for (double x : {0.13, 0.5, 0.77, 0.999}) {
      const double sign = nu % 2 == 0 ? 1.0 : -1.0;
      CHECK(legendre_1d(nu, -x) == doctest::Approx(sign * legendre_1d(nu, x)).epsilon(1e-15));
    }
}

TEST_CASE("tensor evaluation") {
  const double origin[2] = {0.0, 0.0};
  CHECK(tensor_eval({0, 0}, origin) == 1.0);
  const double corner[2] = {1.0, 1.0};
  CHECK(tensor_eval({1, 1}, corner) == doctest::Approx(3.0).epsilon(1e-14));
  const double mixed[2] = {0.0, 0.7};
  CHECK(tensor_eval({2, 0}, mixed) == doctest::Approx(-1.118033988749895).epsilon(1e-14));
  CHECK_THROWS_AS(tensor_eval({1, 2, 3}, mixed), std::invalid_argument);
}

TEST_CASE("expansion evaluation matches a directly-built polynomial") {
  RngStream rng(42);
  const auto set = hyperbolic_cross(2, 8);
  ExpansionCoefficients c;
  c.index_set = set;
  c.values.resize(static_cast<Eigen::Index>(set.size()));
  for (Eigen::Index i = 0; i < c.values.size(); ++i) c.values(i) = rng.normal();

  for (int rep = 0; rep < 100; ++rep) {
    const double x[2] = {rng.uniform_open(-1.0, 1.0), rng.uniform_open(-1.0, 1.0)};
    double direct = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i)
      direct += c.values(static_cast<Eigen::Index>(i)) * tensor_eval(set.indices[i], x);
    CHECK(eval_expansion(c, x) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("unit and zero expansions") {
  const auto set = hyperbolic_cross(3, 4);
  ExpansionCoefficients c{set, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(set.size()))};
  const double x[3] = {0.2, -0.4, 0.9};
  CHECK(eval_expansion(c, x) == 0.0);
  c.values(0) = 1.0;  // canonical order puts the zero index first
  CHECK(eval_expansion(c, x) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("system assembly normalization") {
  // single sample, constant basis
  Eigen::MatrixXd point(1, 1);
  point << 0.3;
  Eigen::VectorXd value(1);
  value << 2.0;
  const auto one = make_index_set(1, {{0}});
  auto [A1, f1] = assemble_system(point, value, one);
  CHECK(A1.entries(0, 0) == 1.0);
  CHECK(f1(0) == 2.0);

  // four samples: the psi_0 column is 1/sqrt(4)
  Eigen::MatrixXd points(4, 1);
  points << -0.5, 0.0, 0.25, 0.75;
  auto [A4, f4] = assemble_system(points, Eigen::VectorXd::Ones(4), one);
  for (int i = 0; i < 4; ++i) CHECK(A4.entries(i, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("assembled entries obey the weight envelope") {
  RngStream rng(3);
  const auto set = hyperbolic_cross(2, 10);
  const auto u = legendre_weights(set);
  const int m = 40;
  Eigen::MatrixXd points(m, 2);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < 2; ++j) points(i, j) = rng.uniform_open(-1.0, 1.0);
  auto [A, f] = assemble_system(points, Eigen::VectorXd::Zero(m), set);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      CHECK(std::abs(A.entries(i, j)) <= u[static_cast<std::size_t>(j)] * scale * (1.0 + 1e-12));
}

TEST_CASE("assembly rejects empty input") {
  const auto set = hyperbolic_cross(1, 3);
  CHECK_THROWS_AS(assemble_system(Eigen::MatrixXd(0, 1), Eigen::VectorXd(0), set),
                  std::invalid_argument);
  MultiIndexSet empty{1, -1, {}};
  CHECK_THROWS_AS(
      assemble_system(Eigen::MatrixXd::Zero(2, 1), Eigen::VectorXd::Zero(2), empty),
      std::invalid_argument);
}

TEST_CASE("csv writers carry index labels") {
  const auto set = hyperbolic_cross(2, 3);
  ExpansionCoefficients c{set, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(set.size()))};
  std::ostringstream out;
  write_coefficients_csv(out, c);
  CHECK(out.str().find("0:0,1") != std::string::npos);
  CHECK(out.str().find("1:1,1") != std::string::npos);
  CHECK(index_label({3, 0, 7}) == "3:0:7");
}
