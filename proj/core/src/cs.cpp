#include "fapprox/cs.hpp"

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <nlohmann/json.hpp>
#include <ostream>
#include <stdexcept>

#include "fapprox/errors.hpp"
#include "fapprox/rng.hpp"

namespace fapprox {

const char* to_string(CsVariant v) {
  switch (v) {
    case CsVariant::qcbp: return "qcbp";
    case CsVariant::lasso: return "lasso";
    case CsVariant::srlasso: return "srlasso";
  }
  return "?";
}

CsVariant cs_variant_from_string(const std::string& name) {
  if (name == "qcbp") return CsVariant::qcbp;
  if (name == "lasso") return CsVariant::lasso;
  if (name == "srlasso") return CsVariant::srlasso;
  throw std::invalid_argument("unknown CS variant '" + name + "'");
}

double operator_norm(const Eigen::MatrixXd& A) {
  if (A.size() == 0 || A.norm() == 0.0)
    throw std::invalid_argument("operator_norm: zero matrix");
  RngStream rng(0x5eedULL);
  Eigen::VectorXd v(A.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
  v.normalize();

  double sigma = 0.0;
  for (int it = 0; it < 10'000; ++it) {
    Eigen::VectorXd w = A.transpose() * (A * v);
    const double norm = w.norm();
    if (norm == 0.0) break;  // v in the null space; restart direction
    v = w / norm;
    const double estimate = std::sqrt((A * v).squaredNorm());
    if (it > 0 && std::abs(estimate - sigma) <= 1e-6 * estimate) {
      sigma = estimate;
      break;
    }
    sigma = estimate;
  }
  return sigma * 1.01;  // upper bias for step-size safety
}

Eigen::VectorXd weighted_soft_threshold(const Eigen::VectorXd& z,
                                        const Eigen::VectorXd& thresholds) {
  if (z.size() != thresholds.size())
    throw std::invalid_argument("weighted_soft_threshold: size mismatch");
  Eigen::VectorXd out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double mag = std::abs(z(i)) - thresholds(i);
    out(i) = mag > 0.0 ? (z(i) > 0.0 ? mag : -mag) : 0.0;
  }
  return out;
}

namespace {

Eigen::VectorXd effective_weights(const CsProblem& p) {
  const auto n = static_cast<Eigen::Index>(p.A.index_set.size());
  if (p.weights.size() == 0) return Eigen::VectorXd::Ones(n);
  if (static_cast<Eigen::Index>(p.weights.size()) != n)
    throw std::invalid_argument("solve: weights not aligned with the index set");
  Eigen::VectorXd u(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    u(i) = p.weights[static_cast<std::size_t>(i)];
    if (!(u(i) > 0.0)) throw std::invalid_argument("solve: weights must be positive");
  }
  return u;
}

double objective(const CsProblem& p, const Eigen::VectorXd& u, const Eigen::VectorXd& z) {
  const double l1 = (u.array() * z.array().abs()).sum();
  switch (p.variant) {
    case CsVariant::qcbp: return l1;
    case CsVariant::lasso: return l1 + p.mu * (p.A.entries * z - p.rhs).squaredNorm();
    case CsVariant::srlasso: return l1 + p.mu * (p.A.entries * z - p.rhs).norm();
  }
  return l1;
}

}  // namespace

CsSolution solve(const CsProblem& problem, const SolverOptions& opts) {
  const auto t_start = std::chrono::steady_clock::now();
  if (problem.variant == CsVariant::qcbp && problem.eta < 0.0)
    throw std::invalid_argument("solve: eta must be >= 0");
  if (problem.variant != CsVariant::qcbp && !(problem.mu > 0.0))
    throw std::invalid_argument("solve: mu must be > 0");
  if (!(opts.step_scale > 0.0 && opts.step_scale < 1.0))
    throw std::invalid_argument("solve: step_scale must lie in (0,1)");
  if (opts.max_iterations < 1 || !(opts.stop_tolerance > 0.0))
    throw std::invalid_argument("solve: bad solver options");

  const Eigen::MatrixXd& A = problem.A.entries;
  const Eigen::VectorXd& f = problem.rhs;
  if (f.size() != A.rows()) throw std::invalid_argument("solve: rhs/matrix mismatch");
  const Eigen::VectorXd u = effective_weights(problem);

  const double norm_a = operator_norm(A);
  // srlasso duals live on a sphere of radius mu; balancing the steps by
  // sqrt(mu) keeps primal and dual progress comparable (tau*sigma unchanged)
  const double balance =
      problem.variant == CsVariant::srlasso ? std::sqrt(std::max(1.0, problem.mu)) : 1.0;
  double tau = opts.step_scale / (norm_a * balance);
  double sigma = opts.step_scale * balance / norm_a;
  // the lasso data term has a strongly convex conjugate, enabling the
  // accelerated step-size schedule; the other variants run at fixed steps.
  // The schedule freezes once sigma has shrunk by 1e4, past which the
  // growing primal step only amplifies dual noise.
  const double gamma = problem.variant == CsVariant::lasso ? 1.0 / (2.0 * problem.mu) : 0.0;
  const double sigma_floor = sigma * 1e-4;
  const double f_norm = f.norm();

  Eigen::VectorXd z = Eigen::VectorXd::Zero(A.cols());
  Eigen::VectorXd p = Eigen::VectorXd::Zero(A.rows());
  Eigen::VectorXd p_bar = p;
  Eigen::VectorXd z_prev_check = z;
  Eigen::VectorXd p_prev_check = p;

  CsSolution solution;
  solution.coefficients.index_set = problem.A.index_set;

  constexpr int kCheckEvery = 10;
  std::int64_t it = 0;
  bool converged = false;
  for (it = 1; it <= opts.max_iterations; ++it) {
    // primal descent step: weighted soft-thresholding
    Eigen::VectorXd z_next = weighted_soft_threshold(z - tau * (A.transpose() * p_bar), tau * u);

    // dual ascent step with the conjugate prox of the data-fit term
    Eigen::VectorXd q = p + sigma * (A * z_next);
    Eigen::VectorXd p_next;
    switch (problem.variant) {
      case CsVariant::qcbp: {
        // q - sigma * projection of q/sigma onto the ball B(f, eta)
        Eigen::VectorXd v = q / sigma - f;
        const double dist = v.norm();
        if (dist > problem.eta && dist > 0.0) v *= problem.eta / dist;
        p_next = q - sigma * (f + v);
        break;
      }
      case CsVariant::srlasso: {
        p_next = q - sigma * f;
        const double norm = p_next.norm();
        if (norm > problem.mu) p_next *= problem.mu / norm;
        break;
      }
      case CsVariant::lasso: {
        p_next = (q - sigma * f) / (1.0 + sigma / (2.0 * problem.mu));
        break;
      }
    }

    double theta = 1.0;
    if (gamma > 0.0 && sigma > sigma_floor) {
      theta = 1.0 / std::sqrt(1.0 + 2.0 * gamma * sigma);
      sigma *= theta;
      tau /= theta;
    }
    p_bar = p_next + theta * (p_next - p);
    p = std::move(p_next);
    z = std::move(z_next);

    if (it % kCheckEvery == 0 || it == opts.max_iterations) {
      if (!z.allFinite() || !p.allFinite())
        throw divergence_error("solve: non-finite iterates", it);
      solution.objective_trace.push_back(objective(problem, u, z));
      // a frozen primal with a still-moving dual is a plateau, not a
      // solution; only a joint fixed point is optimal, so watch the pair
      const double change =
          std::hypot((z - z_prev_check).norm(), (p - p_prev_check).norm() / balance);
      const double scale =
          std::max(std::hypot(z_prev_check.norm(), p_prev_check.norm() / balance), 1e-12);
      bool stop = change / scale < opts.stop_tolerance;
      if (stop && problem.variant == CsVariant::qcbp) {
        const double residual = (A * z - f).norm();
        stop = residual <= problem.eta + 10.0 * opts.stop_tolerance * f_norm;
      }
      z_prev_check = z;
      p_prev_check = p;
      if (stop) {
        converged = true;
        break;
      }
    }
  }

  solution.coefficients.values = z;
  solution.residual_norm = (A * z - f).norm();
  solution.iterations = std::min<std::int64_t>(it, opts.max_iterations);
  solution.converged = converged;
  solution.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return solution;
}

double mu_theoretical(int s) {
  if (s < 1) throw std::invalid_argument("mu_theoretical: s must be >= 1");
  return 12.0 * std::sqrt(42.0) / 35.0 * static_cast<double>(s);
}

double lower_rip_constant(const MeasurementMatrix& A, int s, int max_cols, int max_s) {
  const auto n = static_cast<int>(A.index_set.size());
  if (n > max_cols || s > max_s)
    throw budget_error("lower_rip_constant: instance exceeds the enumeration caps");
  if (s < 1) throw std::invalid_argument("lower_rip_constant: s must be >= 1");

  LowerSetSearchLimits limits;
  limits.max_s = max_s;
  limits.max_dim = 16;
  const double budget = intrinsic_lower_sparsity(A.index_set.dim, s, limits);

  const WeightVector u = legendre_weights(A.index_set);
  std::vector<double> usq(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) usq[i] = u[i] * u[i];

  const Eigen::MatrixXd gram = A.entries.transpose() * A.entries;
  double delta = 0.0;
  std::vector<int> support;

  std::function<void(int, double)> visit = [&](int start, double weight) {
    if (!support.empty()) {
      Eigen::MatrixXd g(support.size(), support.size());
      for (std::size_t a = 0; a < support.size(); ++a)
        for (std::size_t b = 0; b < support.size(); ++b)
          g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
              gram(support[a], support[b]);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g);
      delta = std::max({delta, std::abs(eig.eigenvalues().maxCoeff() - 1.0),
                        std::abs(1.0 - eig.eigenvalues().minCoeff())});
    }
    for (int i = start; i < n; ++i) {
      if (weight + usq[static_cast<std::size_t>(i)] > budget) continue;
      support.push_back(i);
      visit(i + 1, weight + usq[static_cast<std::size_t>(i)]);
      support.pop_back();
    }
  };
  visit(0, 0.0);
  return delta;
}

void write_solution_json(std::ostream& out, const CsSolution& solution) {
  nlohmann::json j;
  for (std::size_t i = 0; i < solution.coefficients.index_set.size(); ++i)
    j["coefficients"][index_label(solution.coefficients.index_set.indices[i])] =
        solution.coefficients.values(static_cast<Eigen::Index>(i));
  j["residual"] = solution.residual_norm;
  j["iterations"] = solution.iterations;
  j["converged"] = solution.converged;
  j["wall_seconds"] = solution.wall_seconds;
  out << j.dump(2) << '\n';
}

}  // namespace fapprox
