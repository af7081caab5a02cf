#include "fapprox/harness.hpp"

#include <algorithm>
#include <atomic>
#include <iostream>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "fapprox/errors.hpp"
#include "fapprox/rng.hpp"

namespace fapprox {

int default_quad_level(int dim) {
  switch (dim) {
    case 1: return 12;
    case 2: return 9;
    case 3: return 8;
    case 4: return 7;
    case 5: return 6;
    case 6: return 6;
    default: return 5;
  }
}

std::uint64_t dataset_seed(std::uint64_t base_seed, int trial, int m) {
  RngStream stream = RngStream(base_seed).derive(
      "dataset", (static_cast<std::uint64_t>(trial) << 32) | static_cast<std::uint64_t>(m));
  return stream.next();
}

Eigen::VectorXd target_values_on_rule(const QuadratureRule& rule, const RealFn& f) {
  Eigen::VectorXd values(rule.size());
  std::vector<double> x(static_cast<std::size_t>(rule.dim));
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    for (int c = 0; c < rule.dim; ++c) x[static_cast<std::size_t>(c)] = rule.nodes(i, c);
    values(i) = f(x);
  }
  return values;
}

Eigen::VectorXd expansion_values_on_rule(const QuadratureRule& rule,
                                         const ExpansionCoefficients& coeffs) {
  if (rule.dim != coeffs.index_set.dim)
    throw std::invalid_argument("expansion_values_on_rule: dimension mismatch");
  int max_degree = 0;
  for (const auto& nu : coeffs.index_set.indices)
    for (int v : nu) max_degree = std::max(max_degree, v);

  Eigen::VectorXd values(rule.size());
  Eigen::MatrixXd table;
  std::vector<double> x(static_cast<std::size_t>(rule.dim));
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    for (int c = 0; c < rule.dim; ++c) x[static_cast<std::size_t>(c)] = rule.nodes(i, c);
    legendre_1d_table(x, max_degree, table);
    double sum = 0.0;
    for (std::size_t k = 0; k < coeffs.index_set.size(); ++k) {
      const auto& nu = coeffs.index_set.indices[k];
      double prod = 1.0;
      for (std::size_t j = 0; j < nu.size(); ++j)
        prod *= table(static_cast<Eigen::Index>(j), nu[j]);
      sum += coeffs.values(static_cast<Eigen::Index>(k)) * prod;
    }
    values(i) = sum;
  }
  return values;
}

double relative_l2_error_from_values(const QuadratureRule& rule, const Eigen::VectorXd& f_values,
                                     const Eigen::VectorXd& approx_values) {
  if (f_values.size() != rule.size() || approx_values.size() != rule.size())
    throw std::invalid_argument("relative_l2_error_from_values: size mismatch");
  const Eigen::ArrayXd w = rule.weights.array();
  const double den = pairwise_sum((w * f_values.array().square()).matrix());
  if (!(den > 0.0))
    throw std::invalid_argument("relative_l2_error_from_values: ||f|| vanishes");
  const double num =
      pairwise_sum((w * (f_values - approx_values).array().square()).matrix());
  return std::sqrt(std::max(0.0, num)) / std::sqrt(den);
}

namespace {

// Network output on every rule node, evaluated in blocks to bound memory.
Eigen::VectorXd network_values_on_rule(const QuadratureRule& rule, const NetworkParams& params) {
  constexpr Eigen::Index kBlock = 32'768;
  Eigen::VectorXd values(rule.size());
  for (Eigen::Index lo = 0; lo < rule.size(); lo += kBlock) {
    const Eigen::Index n = std::min<Eigen::Index>(kBlock, rule.size() - lo);
    values.segment(lo, n) = forward_batch(params, rule.nodes.middleRows(lo, n));
  }
  return values;
}

struct CsContext {
  MultiIndexSet candidate_set;
  WeightVector weights;  // empty when unweighted
  ExpansionCoefficients reference;
  double mu = 0.0;
};

ResultRecord fit_cs(const CsMethodSpec& method, const CsContext& ctx, const DataSet& data,
                    const QuadratureRule& rule, const Eigen::VectorXd& f_values) {
  auto [A, rhs] = assemble_system(data.points, data.values, ctx.candidate_set);

  CsProblem problem;
  problem.rhs = rhs;
  problem.weights = ctx.weights;
  problem.variant = method.variant;
  if (method.variant == CsVariant::qcbp)
    problem.eta = method.eta >= 0.0 ? method.eta : reference_eta(A, ctx.reference, data.values);
  else
    problem.mu = ctx.mu;
  problem.A = std::move(A);

  ResultRecord record;
  try {
    CsSolution solution = solve(problem, method.solver);
    record.rel_error = relative_l2_error_from_values(
        rule, f_values, expansion_values_on_rule(rule, solution.coefficients));
    record.wall_seconds = solution.wall_seconds;
    record.iterations = solution.iterations;
    record.residual = solution.residual_norm;
    record.stop_reason = solution.converged ? "converged" : "max_iterations";
  } catch (const divergence_error& e) {
    record.rel_error = std::numeric_limits<double>::quiet_NaN();
    record.iterations = e.iterations;
    record.stop_reason = "divergence";
    record.diverged = true;
  }
  return record;
}

ResultRecord fit_dnn(const DnnMethodSpec& method, const DataSet& data, const QuadratureRule& rule,
                     const Eigen::VectorXd& f_values) {
  Architecture arch = method.arch;
  arch.input_dim = data.dim();
  TrainResult trained = train(arch, data, method.config);

  ResultRecord record;
  record.rel_error =
      relative_l2_error_from_values(rule, f_values, network_values_on_rule(rule, trained.params));
  record.wall_seconds = trained.trace.wall_seconds;
  record.iterations = trained.trace.epochs;
  record.max_abs_weight = max_abs_weight(trained.params);
  record.stop_reason = to_string(trained.trace.stop_reason);
  record.diverged = trained.trace.stop_reason == StopReason::divergence;
  return record;
}

}  // namespace

std::vector<ResultRecord> run_experiment(const ExperimentSpec& spec) {
  if (spec.trials < 1) throw std::invalid_argument("run_experiment: trials must be >= 1");
  for (std::size_t i = 1; i < spec.sample_grid.size(); ++i)
    if (spec.sample_grid[i] <= spec.sample_grid[i - 1])
      throw std::invalid_argument("run_experiment: sample grid must be strictly increasing");

  const TargetFunction target = make_target(spec.target.name, spec.target.dim, spec.target.K);

  // Build the test rule first: a bad quadrature request must fail before any
  // fitting starts.
  const int sparse_level =
      spec.quad_level >= 0 ? spec.quad_level : default_quad_level(target.dim);
  const QuadratureRule rule = spec.qmc ? qmc_rule(target.dim, spec.qmc_points)
                                       : smolyak_rule(target.dim, sparse_level);
  const Eigen::VectorXd f_values = target_values_on_rule(rule, target.eval);

  // Per-method shared state (candidate sets, weights, reference coefficients).
  // References that calibrate eta come from the same rule as the error
  // metric: for discontinuous targets the sparse grid misestimates the
  // truncation residual badly, which is the reason the QMC grid exists.
  std::vector<CsContext> contexts(spec.methods.size());
  for (std::size_t k = 0; k < spec.methods.size(); ++k) {
    if (!spec.methods[k].is_cs()) continue;
    const auto& m = std::get<CsMethodSpec>(spec.methods[k].method);
    CsContext& ctx = contexts[k];
    ctx.candidate_set = hyperbolic_cross(target.dim, m.degree);
    if (m.weighted) ctx.weights = legendre_weights(ctx.candidate_set);
    ctx.reference = reference_coefficients(rule, target.eval, ctx.candidate_set);
    ctx.mu = m.mu > 0.0 ? m.mu : mu_theoretical(m.degree);
  }

  const std::size_t n_methods = spec.methods.size();
  const std::size_t n_grid = spec.sample_grid.size();
  const std::size_t n_trials = static_cast<std::size_t>(spec.trials);
  std::vector<ResultRecord> records(n_methods * n_grid * n_trials);

  // Tasks fan out over (grid point, trial); methods inside a task share the
  // data set. Records land in preassigned slots so output order never depends
  // on scheduling.
  const std::size_t n_tasks = n_grid * n_trials;
  std::atomic<std::size_t> next_task{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t task = next_task.fetch_add(1);
      if (task >= n_tasks) return;
      const std::size_t mi = task / n_trials;
      const int trial = static_cast<int>(task % n_trials);
      const int m = spec.sample_grid[mi];
      try {
        const DataSet data = make_dataset(target, m, dataset_seed(spec.base_seed, trial, m),
                                          spec.noise_sigma);
        for (std::size_t k = 0; k < n_methods; ++k) {
          ResultRecord record =
              spec.methods[k].is_cs()
                  ? fit_cs(std::get<CsMethodSpec>(spec.methods[k].method), contexts[k], data,
                           rule, f_values)
                  : fit_dnn(std::get<DnnMethodSpec>(spec.methods[k].method), data, rule,
                            f_values);
          record.method = spec.methods[k].id;
          record.m = m;
          record.trial = trial;
          records[k * n_grid * n_trials + mi * n_trials + static_cast<std::size_t>(trial)] =
              std::move(record);
        }
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  unsigned hw = std::thread::hardware_concurrency();
  const std::size_t n_workers =
      std::min(n_tasks, static_cast<std::size_t>(spec.threads > 0 ? spec.threads
                                                                  : (hw == 0 ? 1 : hw)));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return records;
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

SummaryTable summarize(const std::vector<ResultRecord>& records) {
  SummaryTable table;
  // group by (method, m) preserving first appearance
  std::vector<std::pair<std::string, int>> keys;
  for (const auto& r : records) {
    const std::pair<std::string, int> key{r.method, r.m};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  for (const auto& [method, m] : keys) {
    std::vector<double> errors, walls;
    for (const auto& r : records)
      if (r.method == method && r.m == m && std::isfinite(r.rel_error)) {
        errors.push_back(r.rel_error);
        walls.push_back(r.wall_seconds);
      }
    if (errors.empty()) {
      std::cerr << "summarize: group (" << method << ", m=" << m
                << ") has no finite errors, omitted\n";
      continue;
    }
    std::sort(errors.begin(), errors.end());

    SummaryRow row;
    row.method = method;
    row.m = m;
    row.count = static_cast<int>(errors.size());
    row.mean = pairwise_sum(Eigen::Map<const Eigen::VectorXd>(errors.data(),
                                                              static_cast<Eigen::Index>(
                                                                  errors.size()))) /
               static_cast<double>(errors.size());
    row.q25 = quantile_sorted(errors, 0.25);
    row.median = quantile_sorted(errors, 0.5);
    row.q75 = quantile_sorted(errors, 0.75);
    row.min = errors.front();
    row.max = errors.back();
    double wall = 0.0;
    for (double w : walls) wall += w;
    row.mean_wall = wall / static_cast<double>(walls.size());
    const double iqr = row.q75 - row.q25;
    for (double e : errors)
      if (e < row.q25 - 1.5 * iqr || e > row.q75 + 1.5 * iqr) row.outliers.push_back(e);
    table.rows.push_back(std::move(row));
  }
  return table;
}

DecayFit coefficient_decay_fit(const ExpansionCoefficients& coeffs, int lo, int hi) {
  if (coeffs.index_set.dim != 1)
    throw std::invalid_argument("coefficient_decay_fit: requires 1D coefficients");
  if (lo > hi) throw std::invalid_argument("coefficient_decay_fit: bad range");

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < coeffs.index_set.size(); ++i) {
    const int nu = coeffs.index_set.indices[i][0];
    const double c = std::abs(coeffs.values(static_cast<Eigen::Index>(i)));
    if (nu < lo || nu > hi || c <= 0.0) continue;
    xs.push_back(static_cast<double>(nu));
    ys.push_back(std::log(c));
  }
  if (xs.size() < 3)
    throw std::invalid_argument("coefficient_decay_fit: fewer than 3 usable points");

  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  return DecayFit{std::exp(-slope), std::exp(my - slope * mx)};
}

double best_s_term_error(const ExpansionCoefficients& coeffs, int s, bool lower_constrained,
                         std::uint64_t max_nodes) {
  if (s < 0) throw std::invalid_argument("best_s_term_error: s must be >= 0");
  const Eigen::Index n = coeffs.values.size();
  const double total = coeffs.values.squaredNorm();
  if (s >= n) return 0.0;
  if (s == 0) return std::sqrt(total);

  double kept = 0.0;
  if (!lower_constrained) {
    std::vector<double> sq(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) sq[static_cast<std::size_t>(i)] =
        coeffs.values(i) * coeffs.values(i);
    std::nth_element(sq.begin(), sq.begin() + s, sq.end(), std::greater<double>());
    for (int i = 0; i < s; ++i) kept += sq[static_cast<std::size_t>(i)];
  } else {
    for_each_lower_subset(
        coeffs.index_set, s,
        [&](const std::vector<int>& positions) {
          double energy = 0.0;
          for (int p : positions) energy += coeffs.values(p) * coeffs.values(p);
          kept = std::max(kept, energy);
        },
        max_nodes);
  }
  return std::sqrt(std::max(0.0, total - kept));
}

}  // namespace fapprox
