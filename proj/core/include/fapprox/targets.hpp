#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "fapprox/function.hpp"

namespace fapprox {

/// Named benchmark target on (-1,1)^d.
struct TargetFunction {
  std::string name;
  int dim = 1;
  RealFn eval;

  double operator()(std::span<const double> x) const { return eval(x); }
};

/// f(x) = log(sin(10 K x) + 2) + sin(K x), one-dimensional. Analytic, with
/// oscillation controlled by K.
TargetFunction logsin(int K);

/// f(x) = exp(-(cos x_1 + ... + cos x_d) / (8d)). Smooth and isotropic.
TargetFunction exp_cos(int d);

/// f(x) = (prod_{k<=ceil(d/2)} (1 + 4^k x_k^2) / prod_{k>ceil(d/2)} (100 + 5 x_k))^(1/d).
/// Anisotropic with slower coefficient decay.
TargetFunction rational(int d);

/// Indicator of the halfspace x_1 + ... + x_d >= 0.
TargetFunction halfspace(int d);

/// Lookup by name ("logsin", "exp_cos", "rational", "halfspace"); K is only
/// consulted for logsin.
TargetFunction make_target(const std::string& name, int d, int K = 1);

/// m i.i.d. uniform draws on the open cube (-1,1)^d, one point per row,
/// deterministic per seed. Exact endpoint draws are rejected.
Eigen::MatrixXd sample_uniform(int d, int m, std::uint64_t seed);

/// values + Gaussian noise N(0, sigma^2), deterministic per seed.
Eigen::VectorXd add_noise(const Eigen::VectorXd& values, double sigma, std::uint64_t seed);

/// Sampled training data: points (m x d), values (m), noise level and seed.
struct DataSet {
  std::string target_name;
  Eigen::MatrixXd points;
  Eigen::VectorXd values;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  Eigen::Index size() const { return values.size(); }
  int dim() const { return static_cast<int>(points.cols()); }
};

/// Draws m points, evaluates the target, optionally corrupts the values.
/// Data and noise use independent streams derived from the seed.
DataSet make_dataset(const TargetFunction& f, int m, std::uint64_t seed, double noise_sigma = 0.0);

/// CSV round-trip. Header carries name, d, sigma, seed; one row per sample:
/// d coordinates then the value.
void write_dataset_csv(std::ostream& out, const DataSet& data);
DataSet read_dataset_csv(std::istream& in);

}  // namespace fapprox
