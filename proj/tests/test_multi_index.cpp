#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "fapprox/errors.hpp"
#include "fapprox/legendre.hpp"
#include "fapprox/multi_index.hpp"
#include "fapprox/rng.hpp"

using namespace fapprox;

namespace {

// Exhaustive box-enumeration oracle for the hyperbolic cross.
std::vector<MultiIndex> hc_box_oracle(int d, int s) {
  std::vector<MultiIndex> out;
  MultiIndex nu(static_cast<std::size_t>(d), 0);
  std::function<void(int)> rec = [&](int coord) {
    if (coord == d) {
      long prod = 1;
      for (int v : nu) prod *= v + 1;
      if (prod <= s + 1) out.push_back(nu);
      return;
    }
    for (int v = 0; v <= s; ++v) {
      nu[static_cast<std::size_t>(coord)] = v;
      rec(coord + 1);
    }
  };
  rec(0);
  return out;
}

// Full downward-closure check by direct predecessor enumeration.
bool is_lower_oracle(const std::vector<MultiIndex>& indices) {
  auto member = [&](const MultiIndex& mu) {
    return std::find(indices.begin(), indices.end(), mu) != indices.end();
  };
  for (const auto& nu : indices) {
    MultiIndex mu(nu.size(), 0);
    std::function<bool(std::size_t)> all_below = [&](std::size_t j) -> bool {
      if (j == nu.size()) return member(mu);
      for (int v = 0; v <= nu[j]; ++v) {
        mu[j] = v;
        if (!all_below(j + 1)) return false;
      }
      return true;
    };
    if (!all_below(0)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("hyperbolic cross in one dimension is the degree range") {
  const auto set = hyperbolic_cross(1, 4);
  REQUIRE(set.size() == 5);
  for (int nu = 0; nu <= 4; ++nu) CHECK(set.contains({nu}));
}

TEST_CASE("hyperbolic cross d=2 s=3 matches the box oracle") {
  const auto set = hyperbolic_cross(2, 3);
  auto expected = hc_box_oracle(2, 3);
  std::sort(expected.begin(), expected.end(), graded_lex_less);
  REQUIRE(set.size() == 8);
  CHECK(set.indices == expected);
}

TEST_CASE("hyperbolic cross matches the box oracle over a sweep") {
  for (int d = 1; d <= 3; ++d)
    for (int s = 1; s <= 6; ++s) {
      const auto set = hyperbolic_cross(d, s);
      auto expected = hc_box_oracle(d, s);
      std::sort(expected.begin(), expected.end(), graded_lex_less);
      CHECK(set.indices == expected);
      CHECK(hc_cardinality(d, s) == set.size());
    }
}

TEST_CASE("degree search recovers the reported cardinalities") {
  const auto d2 = find_hc_degree(2, 3001);
  CHECK(d2.exact);
  CHECK(d2.degree == 474);
  const auto d8 = find_hc_degree(8, 3023);
  CHECK(d8.exact);
  CHECK(hc_cardinality(8, d8.degree) == 3023);
}

TEST_CASE("cardinality cap rejects oversized requests") {
  CHECK_THROWS_AS(hyperbolic_cross(8, 100, 1000), budget_error);
  CHECK_THROWS_AS(hyperbolic_cross(0, 1), std::invalid_argument);
}

TEST_CASE("lower-set predicate") {
  CHECK(is_lower(make_index_set(2, {{0, 0}})));
  CHECK_FALSE(is_lower(make_index_set(2, {{1, 0}})));
  CHECK(is_lower(hyperbolic_cross(3, 5)));
  // removing an interior element breaks closure
  auto set = hyperbolic_cross(2, 4);
  std::vector<MultiIndex> holed;
  for (const auto& nu : set.indices)
    if (nu != MultiIndex{1, 0}) holed.push_back(nu);
  CHECK_FALSE(is_lower(make_index_set(2, holed)));
}

TEST_CASE("lower-set predicate agrees with the exhaustive oracle on random subsets") {
  RngStream rng(7);
  const auto domain = hyperbolic_cross(2, 6);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<MultiIndex> subset;
    for (const auto& nu : domain.indices)
      if (rng.uniform01() < 0.5) subset.push_back(nu);
    if (subset.empty()) subset.push_back(MultiIndex{0, 0});
    const auto set = make_index_set(2, subset);
    CHECK(is_lower(set) == is_lower_oracle(set.indices));
  }
}

TEST_CASE("legendre weights") {
  CHECK(legendre_weight({0, 0}) == 1.0);
  CHECK(legendre_weight({1, 2}) == doctest::Approx(std::sqrt(15.0)).epsilon(1e-14));
  CHECK(legendre_weight({3}) == doctest::Approx(std::sqrt(7.0)).epsilon(1e-14));
}

TEST_CASE("legendre weight equals the sup norm of the basis function") {
  // sup attained at the corner x = (1,...,1); scan a fine grid to confirm
  const auto set = hyperbolic_cross(2, 6);
  const auto u = legendre_weights(set);
  for (std::size_t i = 0; i < set.size(); i += 7) {
    const auto& nu = set.indices[i];
    double sup = 0.0;
    for (int a = 0; a <= 60; ++a)
      for (int b = 0; b <= 60; ++b) {
        const double x[2] = {-1.0 + a / 30.0, -1.0 + b / 30.0};
        sup = std::max(sup, std::abs(tensor_eval(nu, x)));
      }
    CHECK(sup <= u[i] * (1.0 + 1e-12));
    CHECK(sup >= u[i] * (1.0 - 1e-3));
  }
}

TEST_CASE("weighted cardinality") {
  const auto single = make_index_set(2, {{0, 0}});
  CHECK(weighted_cardinality(single, legendre_weights(single)) == 1.0);

  // 1D prefix of length s has weighted cardinality s^2
  for (int s = 1; s <= 12; ++s) {
    std::vector<MultiIndex> prefix;
    for (int nu = 0; nu < s; ++nu) prefix.push_back({nu});
    const auto set = make_index_set(1, prefix);
    CHECK(weighted_cardinality(set, legendre_weights(set)) ==
          doctest::Approx(static_cast<double>(s) * s).epsilon(1e-12));
  }

  const MultiIndexSet empty{1, -1, {}};
  CHECK(weighted_cardinality(empty, WeightVector{}) == 0.0);

  const auto set = hyperbolic_cross(2, 3);
  CHECK_THROWS_AS(weighted_cardinality(set, WeightVector{{1.0, 2.0}}), std::invalid_argument);
}

TEST_CASE("intrinsic lower sparsity in one dimension is s^2") {
  for (int s = 1; s <= 10; ++s)
    CHECK(intrinsic_lower_sparsity(1, s) == doctest::Approx(s * s).epsilon(1e-12));
}

TEST_CASE("intrinsic lower sparsity small cases and brute-force oracle") {
  CHECK(intrinsic_lower_sparsity(2, 1) == doctest::Approx(1.0));

  // brute force over all subsets of the cross of size <= s
  for (int s = 2; s <= 4; ++s) {
    const auto domain = hyperbolic_cross(2, s);
    const auto u = legendre_weights(domain);
    const int n = static_cast<int>(domain.size());
    double best = 0.0;
    std::vector<int> chosen;
    std::function<void(int)> rec = [&](int start) {
      if (!chosen.empty()) {
        std::vector<MultiIndex> subset;
        for (int p : chosen) subset.push_back(domain.indices[static_cast<std::size_t>(p)]);
        if (is_lower_oracle(subset)) {
          double w = 0.0;
          for (int p : chosen) w += u[static_cast<std::size_t>(p)] * u[static_cast<std::size_t>(p)];
          best = std::max(best, w);
        }
      }
      if (static_cast<int>(chosen.size()) == s) return;
      for (int p = start; p < n; ++p) {
        chosen.push_back(p);
        rec(p + 1);
        chosen.pop_back();
      }
    };
    rec(0);
    CHECK(intrinsic_lower_sparsity(2, s) == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("intrinsic lower sparsity respects the budget caps") {
  CHECK_THROWS_AS(intrinsic_lower_sparsity(2, 21), budget_error);
  CHECK_THROWS_AS(intrinsic_lower_sparsity(5, 3), budget_error);
}

TEST_CASE("sparsity bracket s^2/4 <= K(s) <= s^2") {
  for (int d = 1; d <= 3; ++d)
    for (int s = 1; s <= 8; ++s) {
      const double K = intrinsic_lower_sparsity(d, s);
      CHECK(K >= s * s / 4.0);
      CHECK(K <= static_cast<double>(s) * s + 1e-9);
    }
}

TEST_CASE("cardinality bounds dominate the true count") {
  for (int d : {1, 2, 4, 8})
    for (int s = 1; s <= 12; ++s) {
      const auto n = static_cast<double>(hc_cardinality(d, s));
      const auto b = hc_cardinality_bounds(d, s);
      CHECK(n <= b.cubic);
      CHECK(n <= b.power_log_dim);
      CHECK(n <= b.factorial);
    }
  // the small-s example: actual 5 at (d=1, s=4) sits far below the cubic bound
  CHECK(hc_cardinality(1, 4) == 5);
  CHECK(5.0 <= hc_cardinality_bounds(1, 4).cubic);
}

TEST_CASE("cardinality is monotone in degree and dimension") {
  for (int d = 1; d <= 6; ++d)
    for (int s = 1; s <= 20; ++s) {
      CHECK(hc_cardinality(d, s) <= hc_cardinality(d, s + 1));
      CHECK(hc_cardinality(d, s) <= hc_cardinality(d + 1, s));
    }
}

TEST_CASE("hyperbolic crosses are lower sets across the sweep") {
  for (int d = 1; d <= 8; ++d)
    for (int s : {1, 2, 5, 17, 40, 100}) {
      if (hc_cardinality(d, s) > 200'000) continue;
      CHECK(is_lower(hyperbolic_cross(d, s)));
    }
}

TEST_CASE("text serialization round-trips") {
  const auto set = hyperbolic_cross(3, 7);
  std::stringstream ss;
  write_index_set(ss, set);
  const auto back = read_index_set(ss);
  CHECK(back.dim == set.dim);
  CHECK(back.degree == set.degree);
  CHECK(back.indices == set.indices);
}

TEST_CASE("canonical order is graded lexicographic") {
  const auto set = hyperbolic_cross(2, 3);
  const std::vector<MultiIndex> expected = {{0, 0}, {0, 1}, {1, 0}, {0, 2},
                                            {1, 1}, {2, 0}, {0, 3}, {3, 0}};
  CHECK(set.indices == expected);
  CHECK(set.position({1, 1}) == 4);
  CHECK(set.position({2, 1}) == -1);
}
