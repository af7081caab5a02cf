#include "fapprox/quadrature.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "fapprox/errors.hpp"

namespace fapprox {

namespace {

constexpr int kMaxLevel1d = 20;

// Number of nodes a 1D level adds on top of the previous one (nested family).
inline std::uint64_t level_increment(int level) {
  if (level == 0) return 1;
  if (level == 1) return 2;
  return 1ull << (level - 1);
}

// Clenshaw-Curtis weights for nodes cos(pi j / N), j = 0..N, N = 2^level,
// already normalized to the uniform probability measure on (-1,1).
// The cosine sums are a DCT-I of the 1/(4k^2-1) profile.
std::vector<double> cc_weights(int level) {
  const int N = 1 << level;
  const int M = N / 2;
  std::vector<double> profile(static_cast<std::size_t>(M) + 1, 0.0);
  for (int k = 1; k <= M; ++k)
    profile[static_cast<std::size_t>(k)] = 1.0 / (4.0 * k * k - 1.0);

  std::vector<double> sums(static_cast<std::size_t>(M) + 1);
  fftw_plan plan = fftw_plan_r2r_1d(M + 1, profile.data(), sums.data(), FFTW_REDFT00,
                                    FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  // weights are symmetric, w_j = w_{N-j}; endpoints share c_j = 1
  std::vector<double> w(static_cast<std::size_t>(N) + 1);
  for (int j = 0; j <= M; ++j) {
    const double cj = (j == 0) ? 1.0 : 2.0;
    // probability normalization: classical weights sum to 2
    const double wj = (cj / N) * (1.0 - sums[static_cast<std::size_t>(j)]) / 2.0;
    w[static_cast<std::size_t>(j)] = wj;
    w[static_cast<std::size_t>(N - j)] = wj;
  }
  return w;
}

// Node j of the level-l rule expressed at a common reference level, so that
// coinciding nodes of nested rules carry identical integer keys (and thus
// bit-identical coordinates).
inline std::int64_t node_key(int level, int j, int ref_level) {
  if (level == 0) return 1ll << (ref_level - 1);  // the midpoint 0
  return static_cast<std::int64_t>(j) << (ref_level - level);
}

inline double node_coordinate(std::int64_t key, int ref_level) {
  const std::int64_t n = 1ll << ref_level;
  // exact midpoint and exact mirror symmetry; dyadic divisions keep the
  // cosine argument bit-identical across nested levels
  if (2 * key == n) return 0.0;
  if (2 * key > n) return -node_coordinate(n - key, ref_level);
  return std::cos(std::numbers::pi * static_cast<double>(key) / static_cast<double>(n));
}

struct KeyHash {
  std::size_t operator()(const std::vector<std::int64_t>& key) const {
    std::size_t h = 0x9e3779b97f4a7c15ull;
    for (auto v : key) h = (h ^ static_cast<std::size_t>(v)) * 0x100000001b3ull;
    return h;
  }
};

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
  return r;
}

}  // namespace

QuadratureRule cc_rule_1d(int level) {
  if (level < 0 || level > kMaxLevel1d)
    throw std::invalid_argument("cc_rule_1d: level outside [0,20]");
  QuadratureRule rule;
  rule.dim = 1;
  rule.level = level;
  if (level == 0) {
    rule.nodes = Eigen::MatrixXd::Zero(1, 1);
    rule.weights = Eigen::VectorXd::Ones(1);
    return rule;
  }
  const int N = 1 << level;
  const auto w = cc_weights(level);
  rule.nodes.resize(N + 1, 1);
  rule.weights.resize(N + 1);
  for (int j = 0; j <= N; ++j) {
    rule.nodes(j, 0) = node_coordinate(node_key(level, j, level), level);
    rule.weights(j) = w[static_cast<std::size_t>(j)];
  }
  return rule;
}

std::uint64_t smolyak_node_count(int d, int level) {
  if (d < 1 || level < 0) throw std::invalid_argument("smolyak_node_count: bad arguments");
  // sum over |l| <= level of prod_j level_increment(l_j)
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(level) + 1, 0);
  counts[0] = 1;  // d = 0 base: empty product
  for (int dim = 1; dim <= d; ++dim) {
    std::vector<std::uint64_t> next(static_cast<std::size_t>(level) + 1, 0);
    for (int total = 0; total <= level; ++total)
      for (int l = 0; l <= total; ++l)
        next[static_cast<std::size_t>(total)] +=
            level_increment(l) * counts[static_cast<std::size_t>(total - l)];
    counts = std::move(next);
  }
  std::uint64_t sum = 0;
  for (auto c : counts) sum += c;
  return sum;
}

QuadratureRule smolyak_rule(int d, int level, std::uint64_t node_cap) {
  if (d < 1) throw std::invalid_argument("smolyak_rule: d must be >= 1");
  if (level < 0 || level > kMaxLevel1d)
    throw std::invalid_argument("smolyak_rule: level outside [0,20]");
  if (smolyak_node_count(d, level) > node_cap)
    throw budget_error("smolyak_rule: node cap exceeded");

  const int ref_level = std::max(level, 1);
  std::vector<QuadratureRule> rules_1d;
  for (int l = 0; l <= level; ++l) rules_1d.push_back(cc_rule_1d(l));

  std::unordered_map<std::vector<std::int64_t>, double, KeyHash> acc;
  acc.reserve(static_cast<std::size_t>(smolyak_node_count(d, level)) * 2);

  // combination technique over levels max(0, L-d+1) <= |l| <= L
  std::vector<int> lv(static_cast<std::size_t>(d), 0);
  std::vector<std::int64_t> key(static_cast<std::size_t>(d), 0);

  std::function<void(int, int)> tensor_levels = [&](int coord, int remaining) {
    if (coord == d - 1) {
      for (int l = 0; l <= remaining; ++l) {
        lv[static_cast<std::size_t>(coord)] = l;
        const int q = level - (remaining - l);
        // q = |l|; only the top d bands contribute
        if (q < level - d + 1) continue;
        const double coeff = ((level - q) % 2 == 0 ? 1.0 : -1.0) *
                             static_cast<double>(binomial(d - 1, level - q));
        // accumulate the tensor product of the selected 1D rules
        std::function<void(int, double)> tensor_nodes = [&](int c, double wprod) {
          if (c == d) {
            acc[key] += coeff * wprod;
            return;
          }
          const auto& r = rules_1d[static_cast<std::size_t>(lv[static_cast<std::size_t>(c)])];
          for (Eigen::Index j = 0; j < r.size(); ++j) {
            key[static_cast<std::size_t>(c)] =
                node_key(r.level, static_cast<int>(j), ref_level);
            tensor_nodes(c + 1, wprod * r.weights(j));
          }
        };
        tensor_nodes(0, 1.0);
      }
      return;
    }
    for (int l = 0; l <= remaining; ++l) {
      lv[static_cast<std::size_t>(coord)] = l;
      tensor_levels(coord + 1, remaining - l);
    }
  };
  tensor_levels(0, level);

  std::vector<std::pair<std::vector<std::int64_t>, double>> entries(acc.begin(), acc.end());
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  QuadratureRule rule;
  rule.dim = d;
  rule.level = level;
  rule.nodes.resize(static_cast<Eigen::Index>(entries.size()), d);
  rule.weights.resize(static_cast<Eigen::Index>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    for (int c = 0; c < d; ++c)
      rule.nodes(static_cast<Eigen::Index>(i), c) =
          node_coordinate(entries[i].first[static_cast<std::size_t>(c)], ref_level);
    rule.weights(static_cast<Eigen::Index>(i)) = entries[i].second;
  }
  return rule;
}

QuadratureRule qmc_rule(int d, Eigen::Index points) {
  if (d < 1 || points < 1) throw std::invalid_argument("qmc_rule: bad arguments");
  static constexpr int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  if (d > static_cast<int>(std::size(primes)))
    throw std::invalid_argument("qmc_rule: dimension too large for the Halton bases");

  QuadratureRule rule;
  rule.dim = d;
  rule.level = -1;
  rule.qmc = true;
  rule.nodes.resize(points, d);
  rule.weights = Eigen::VectorXd::Constant(points, 1.0 / static_cast<double>(points));
  for (Eigen::Index i = 0; i < points; ++i) {
    for (int j = 0; j < d; ++j) {
      // radical inverse of (i+1) in base primes[j]
      const int base = primes[j];
      double inv = 1.0 / base, value = 0.0;
      for (std::uint64_t k = static_cast<std::uint64_t>(i) + 1; k > 0; k /= base) {
        value += static_cast<double>(k % base) * inv;
        inv /= base;
      }
      rule.nodes(i, j) = 2.0 * value - 1.0;
    }
  }
  return rule;
}

double pairwise_sum(const Eigen::VectorXd& v) {
  std::function<double(Eigen::Index, Eigen::Index)> reduce = [&](Eigen::Index lo,
                                                                 Eigen::Index hi) -> double {
    const Eigen::Index n = hi - lo;
    if (n <= 8) {
      double s = 0.0;
      for (Eigen::Index i = lo; i < hi; ++i) s += v(i);
      return s;
    }
    const Eigen::Index mid = lo + n / 2;
    return reduce(lo, mid) + reduce(mid, hi);
  };
  if (v.size() == 0) return 0.0;
  return reduce(0, v.size());
}

double integrate(const QuadratureRule& rule, const RealFn& g) {
  Eigen::VectorXd contrib(rule.size());
  std::vector<double> x(static_cast<std::size_t>(rule.dim));
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    for (int c = 0; c < rule.dim; ++c) x[static_cast<std::size_t>(c)] = rule.nodes(i, c);
    contrib(i) = rule.weights(i) * g(x);
  }
  return pairwise_sum(contrib);
}

ExpansionCoefficients reference_coefficients(const QuadratureRule& rule, const RealFn& f,
                                             const MultiIndexSet& index_set) {
  if (rule.dim != index_set.dim)
    throw std::invalid_argument("reference_coefficients: dimension mismatch");
  int max_degree = 0;
  for (const auto& nu : index_set.indices)
    for (int v : nu) max_degree = std::max(max_degree, v);

  // Nodes are processed in fixed-size chunks (bounded memory for large
  // rules); chunk subtotals are themselves reduced pairwise, so the result
  // is a fixed summation tree independent of any schedule.
  constexpr Eigen::Index kChunk = 4096;
  const Eigen::Index n = rule.size();
  const auto n_cols = static_cast<Eigen::Index>(index_set.size());
  const Eigen::Index n_chunks = (n + kChunk - 1) / kChunk;

  Eigen::MatrixXd subtotals(n_chunks, n_cols);
  Eigen::MatrixXd basis(kChunk, n_cols);
  Eigen::VectorXd fw(kChunk);
  Eigen::MatrixXd table;
  std::vector<double> x(static_cast<std::size_t>(rule.dim));
  for (Eigen::Index chunk = 0; chunk < n_chunks; ++chunk) {
    const Eigen::Index lo = chunk * kChunk;
    const Eigen::Index len = std::min(kChunk, n - lo);
    for (Eigen::Index i = 0; i < len; ++i) {
      for (int c = 0; c < rule.dim; ++c) x[static_cast<std::size_t>(c)] = rule.nodes(lo + i, c);
      fw(i) = rule.weights(lo + i) * f(x);
      legendre_1d_table(x, max_degree, table);
      for (Eigen::Index k = 0; k < n_cols; ++k) {
        const auto& nu = index_set.indices[static_cast<std::size_t>(k)];
        double prod = 1.0;
        for (std::size_t j = 0; j < nu.size(); ++j)
          prod *= table(static_cast<Eigen::Index>(j), nu[j]);
        basis(i, k) = prod;
      }
    }
    for (Eigen::Index k = 0; k < n_cols; ++k)
      subtotals(chunk, k) = pairwise_sum(fw.head(len).cwiseProduct(basis.col(k).head(len)));
  }

  ExpansionCoefficients out;
  out.index_set = index_set;
  out.values.resize(n_cols);
  for (Eigen::Index k = 0; k < n_cols; ++k) out.values(k) = pairwise_sum(subtotals.col(k));
  return out;
}

double relative_l2_error(const QuadratureRule& rule, const RealFn& f, const RealFn& approx) {
  Eigen::VectorXd num(rule.size()), den(rule.size());
  std::vector<double> x(static_cast<std::size_t>(rule.dim));
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    for (int c = 0; c < rule.dim; ++c) x[static_cast<std::size_t>(c)] = rule.nodes(i, c);
    const double fv = f(x), av = approx(x);
    num(i) = rule.weights(i) * (fv - av) * (fv - av);
    den(i) = rule.weights(i) * fv * fv;
  }
  const double d2 = pairwise_sum(den);
  if (!(d2 > 0.0)) throw std::invalid_argument("relative_l2_error: ||f|| vanishes on the rule");
  return std::sqrt(std::max(0.0, pairwise_sum(num))) / std::sqrt(d2);
}

double reference_eta(const MeasurementMatrix& A, const ExpansionCoefficients& c,
                     const Eigen::VectorXd& values) {
  if (c.values.size() != A.cols() || values.size() != A.rows())
    throw std::invalid_argument("reference_eta: shape mismatch");
  if (c.index_set.dim != A.index_set.dim || c.index_set.indices != A.index_set.indices)
    throw std::invalid_argument("reference_eta: index set mismatch");
  const double scale = 1.0 / std::sqrt(static_cast<double>(A.rows()));
  return (A.entries * c.values - values * scale).norm();
}

int auto_level(int d, const RealFn& f, int min_level, int max_level, double rel_tol,
               std::uint64_t node_cap) {
  double prev = 0.0;
  bool have_prev = false;
  for (int level = std::max(0, min_level - 1); level <= max_level; ++level) {
    const QuadratureRule rule = smolyak_rule(d, level, node_cap);
    const double val = integrate(rule, [&](std::span<const double> x) {
      const double v = f(x);
      return v * v;
    });
    if (have_prev && level >= min_level &&
        std::abs(val - prev) <= rel_tol * std::max(std::abs(val), 1e-300))
      return level;
    prev = val;
    have_prev = true;
  }
  throw budget_error("auto_level: integral did not stabilize before max_level");
}

void write_rule_csv(std::ostream& out, const QuadratureRule& rule) {
  out.precision(17);
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    for (int c = 0; c < rule.dim; ++c) out << rule.nodes(i, c) << ',';
    out << rule.weights(i) << '\n';
  }
}

}  // namespace fapprox
