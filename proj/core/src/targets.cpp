#include "fapprox/targets.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "fapprox/rng.hpp"

namespace fapprox {

TargetFunction logsin(int K) {
  if (K < 1) throw std::invalid_argument("logsin: K must be >= 1");
  const double k = static_cast<double>(K);
  return TargetFunction{"logsin", 1, [k](std::span<const double> x) {
                          return std::log(std::sin(10.0 * k * x[0]) + 2.0) + std::sin(k * x[0]);
                        }};
}

TargetFunction exp_cos(int d) {
  if (d < 1) throw std::invalid_argument("exp_cos: d must be >= 1");
  return TargetFunction{"exp_cos", d, [d](std::span<const double> x) {
                          double sum = 0.0;
                          for (int j = 0; j < d; ++j) sum += std::cos(x[static_cast<std::size_t>(j)]);
                          return std::exp(-sum / (8.0 * d));
                        }};
}

TargetFunction rational(int d) {
  if (d < 1) throw std::invalid_argument("rational: d must be >= 1");
  const int split = (d + 1) / 2;  // ceil(d/2)
  return TargetFunction{"rational", d, [d, split](std::span<const double> x) {
                          double num = 1.0, den = 1.0;
                          double pow4 = 1.0;
                          for (int k = 1; k <= split; ++k) {
                            pow4 *= 4.0;
                            const double xk = x[static_cast<std::size_t>(k - 1)];
                            num *= 1.0 + pow4 * xk * xk;
                          }
                          for (int k = split + 1; k <= d; ++k)
                            den *= 100.0 + 5.0 * x[static_cast<std::size_t>(k - 1)];
                          return std::pow(num / den, 1.0 / d);
                        }};
}

TargetFunction halfspace(int d) {
  if (d < 1) throw std::invalid_argument("halfspace: d must be >= 1");
  return TargetFunction{"halfspace", d, [d](std::span<const double> x) {
                          double sum = 0.0;
                          for (int j = 0; j < d; ++j) sum += x[static_cast<std::size_t>(j)];
                          return sum >= 0.0 ? 1.0 : 0.0;
                        }};
}

TargetFunction make_target(const std::string& name, int d, int K) {
  if (name == "logsin") return logsin(K);
  if (name == "exp_cos") return exp_cos(d);
  if (name == "rational") return rational(d);
  if (name == "halfspace") return halfspace(d);
  throw std::invalid_argument("make_target: unknown target '" + name + "'");
}

Eigen::MatrixXd sample_uniform(int d, int m, std::uint64_t seed) {
  if (d < 1 || m < 0) throw std::invalid_argument("sample_uniform: bad arguments");
  RngStream rng = RngStream(seed).derive("uniform-points");
  Eigen::MatrixXd points(m, d);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < d; ++j) points(i, j) = rng.uniform_open(-1.0, 1.0);
  return points;
}

Eigen::VectorXd add_noise(const Eigen::VectorXd& values, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw std::invalid_argument("add_noise: sigma must be >= 0");
  if (sigma == 0.0) return values;
  RngStream rng = RngStream(seed).derive("gaussian-noise");
  Eigen::VectorXd out = values;
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) += sigma * rng.normal();
  return out;
}

DataSet make_dataset(const TargetFunction& f, int m, std::uint64_t seed, double noise_sigma) {
  DataSet data;
  data.target_name = f.name;
  data.noise_sigma = noise_sigma;
  data.seed = seed;
  data.points = sample_uniform(f.dim, m, seed);
  data.values.resize(m);
  std::vector<double> x(static_cast<std::size_t>(f.dim));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < f.dim; ++j) x[static_cast<std::size_t>(j)] = data.points(i, j);
    data.values(i) = f.eval(x);
  }
  data.values = add_noise(data.values, noise_sigma, seed);
  return data;
}

void write_dataset_csv(std::ostream& out, const DataSet& data) {
  out << "# target=" << data.target_name << " d=" << data.dim() << " sigma=" << data.noise_sigma
      << " seed=" << data.seed << '\n';
  out.precision(17);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (Eigen::Index j = 0; j < data.points.cols(); ++j) out << data.points(i, j) << ',';
    out << data.values(i) << '\n';
  }
}

DataSet read_dataset_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind("# target=", 0) != 0)
    throw std::runtime_error("read_dataset_csv: bad header");
  DataSet data;
  int d = 0;
  {
    std::istringstream hs(header.substr(1));
    std::string tok;
    while (hs >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
      if (key == "target") data.target_name = val;
      else if (key == "d") d = std::stoi(val);
      else if (key == "sigma") data.noise_sigma = std::stod(val);
      else if (key == "seed") data.seed = std::stoull(val);
    }
  }
  if (d < 1) throw std::runtime_error("read_dataset_csv: missing dimension");
  std::vector<double> flat;
  std::string line;
  Eigen::Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    int cols = 0;
    while (std::getline(ls, cell, ',')) {
      flat.push_back(std::stod(cell));
      ++cols;
    }
    if (cols != d + 1) throw std::runtime_error("read_dataset_csv: bad row width");
    ++rows;
  }
  data.points.resize(rows, d);
  data.values.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (int j = 0; j < d; ++j) data.points(i, j) = flat[static_cast<std::size_t>(i * (d + 1) + j)];
    data.values(i) = flat[static_cast<std::size_t>(i * (d + 1) + d)];
  }
  return data;
}

}  // namespace fapprox
