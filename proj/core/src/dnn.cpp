#include "fapprox/dnn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "fapprox/rng.hpp"

namespace fapprox {

const char* to_string(Precision p) {
  return p == Precision::single ? "single" : "double";
}

Precision precision_from_string(const std::string& name) {
  if (name == "single") return Precision::single;
  if (name == "double") return Precision::double_prec;
  throw std::invalid_argument("unknown precision '" + name + "'");
}

const char* to_string(InitStrategy s) {
  switch (s) {
    case InitStrategy::normal_fixed: return "normal_fixed";
    case InitStrategy::normal_scaled: return "normal_scaled";
    case InitStrategy::uniform_scaled: return "uniform_scaled";
  }
  return "?";
}

InitStrategy init_strategy_from_string(const std::string& name) {
  if (name == "normal_fixed") return InitStrategy::normal_fixed;
  if (name == "normal_scaled") return InitStrategy::normal_scaled;
  if (name == "uniform_scaled") return InitStrategy::uniform_scaled;
  throw std::invalid_argument("unknown init strategy '" + name + "'");
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::tolerance: return "tolerance";
    case StopReason::budget: return "budget";
    case StopReason::divergence: return "divergence";
  }
  return "?";
}

Architecture NetworkParams::architecture() const {
  Architecture arch;
  arch.input_dim = static_cast<int>(weights.front().cols());
  arch.hidden_layers = static_cast<int>(weights.size()) - 2;
  arch.width = static_cast<int>(weights.front().rows());
  return arch;
}

namespace {

std::vector<std::pair<int, int>> layer_shapes(const Architecture& arch) {
  if (arch.input_dim < 1 || arch.hidden_layers < 0 || arch.width < 1)
    throw std::invalid_argument("architecture: bad dimensions");
  std::vector<std::pair<int, int>> shapes;
  shapes.emplace_back(arch.width, arch.input_dim);
  for (int l = 0; l < arch.hidden_layers; ++l) shapes.emplace_back(arch.width, arch.width);
  shapes.emplace_back(1, arch.width);
  return shapes;
}

void validate(const NetworkParams& params) {
  if (params.weights.size() < 2 || params.weights.size() != params.biases.size())
    throw std::invalid_argument("network: inconsistent layer count");
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    if (params.biases[l].size() != params.weights[l].rows())
      throw std::invalid_argument("network: bias/weight shape mismatch");
    if (!params.weights[l].allFinite() || !params.biases[l].allFinite())
      throw std::invalid_argument("network: non-finite parameter");
  }
}

// Typed mirror of NetworkParams used for the compute kernels.
template <class T>
struct Net {
  std::vector<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>> W;
  std::vector<Eigen::Vector<T, Eigen::Dynamic>> b;
};

template <class T>
Net<T> to_net(const NetworkParams& p) {
  Net<T> net;
  net.W.reserve(p.weights.size());
  net.b.reserve(p.biases.size());
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    net.W.push_back(p.weights[l].cast<T>());
    net.b.push_back(p.biases[l].cast<T>());
  }
  return net;
}

template <class T>
NetworkParams from_net(const Net<T>& net, Precision precision) {
  NetworkParams p;
  p.precision = precision;
  p.weights.reserve(net.W.size());
  p.biases.reserve(net.b.size());
  for (std::size_t l = 0; l < net.W.size(); ++l) {
    p.weights.push_back(net.W[l].template cast<double>());
    p.biases.push_back(net.b[l].template cast<double>());
  }
  return p;
}

// Loss with optional gradient; the loss reduction is identical with and
// without the backward pass so checkpoint losses can be reproduced exactly.
template <class T>
double loss_grad_impl(const Net<T>& net, const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& X,
                      const Eigen::Vector<T, Eigen::Dynamic>& y, Net<T>* grad) {
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index m = X.cols();
  const std::size_t n_layers = net.W.size();

  std::vector<Mat> pre(n_layers);   // pre-activations
  std::vector<Mat> act(n_layers);   // post-ReLU activations (last layer linear)
  const Mat* input = &X;
  for (std::size_t l = 0; l < n_layers; ++l) {
    pre[l] = (net.W[l] * (*input)).colwise() + net.b[l];
    if (l + 1 < n_layers) {
      act[l] = pre[l].cwiseMax(T(0));
      input = &act[l];
    }
  }
  const auto residual = (pre.back().row(0).transpose() - y).eval();
  const double total = static_cast<double>(residual.squaredNorm());
  const double value = total / static_cast<double>(m);
  if (grad == nullptr) return value;

  grad->W.assign(n_layers, Mat());
  grad->b.assign(n_layers, Eigen::Vector<T, Eigen::Dynamic>());
  Mat delta = (T(2) / T(m)) * residual.transpose();  // 1 x m
  for (std::size_t l = n_layers; l-- > 0;) {
    const Mat& below = (l == 0) ? X : act[l - 1];
    grad->W[l] = delta * below.transpose();
    grad->b[l] = delta.rowwise().sum();
    if (l > 0) {
      Mat up = net.W[l].transpose() * delta;
      // ReLU subgradient: 0 at 0
      delta = (pre[l - 1].array() > T(0)).template cast<T>() * up.array();
    }
  }
  return value;
}

template <class T>
Eigen::VectorXd forward_batch_impl(const Net<T>& net,
                                   const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& X) {
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  Mat a = X;
  for (std::size_t l = 0; l + 1 < net.W.size(); ++l)
    a = ((net.W[l] * a).colwise() + net.b[l]).cwiseMax(T(0));
  Mat out = (net.W.back() * a).colwise() + net.b.back();
  return out.row(0).transpose().template cast<double>();
}

struct Optimizer {
  OptimizerKind kind;
  const TrainConfig& cfg;
  AdamState adam;

  Optimizer(OptimizerKind k, const TrainConfig& c, const NetworkParams& params)
      : kind(k), cfg(c), adam(AdamState::like(params)) {}

  void step(NetworkParams& params, const NetworkParams& grad, double tau) {
    if (kind == OptimizerKind::adam)
      adam_step(params, adam, grad, tau, cfg);
    else
      sgd_step(params, grad, tau);
  }
};

}  // namespace

NetworkParams init_params(const Architecture& arch, InitStrategy strategy, std::uint64_t seed,
                          Precision precision) {
  const auto shapes = layer_shapes(arch);
  RngStream rng = RngStream(seed).derive("init");

  const double n = static_cast<double>(arch.width);
  auto draw = [&]() -> double {
    switch (strategy) {
      case InitStrategy::normal_fixed: return 0.1 * rng.normal();  // variance 0.01
      case InitStrategy::normal_scaled: return std::sqrt(2.0 / n) * rng.normal();
      case InitStrategy::uniform_scaled: return (2.0 * rng.uniform01() - 1.0) * (2.0 / n);
    }
    return 0.0;
  };
  auto store = [&](double v) {
    return precision == Precision::single ? static_cast<double>(static_cast<float>(v)) : v;
  };

  NetworkParams params;
  params.precision = precision;
  for (const auto& [rows, cols] : shapes) {
    Eigen::MatrixXd W(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) W(r, c) = store(draw());
    Eigen::VectorXd b(rows);
    for (int r = 0; r < rows; ++r) b(r) = store(draw());
    params.weights.push_back(std::move(W));
    params.biases.push_back(std::move(b));
  }
  return params;
}

double forward(const NetworkParams& params, std::span<const double> x) {
  validate(params);
  if (static_cast<Eigen::Index>(x.size()) != params.weights.front().cols())
    throw std::invalid_argument("forward: input dimension mismatch");
  Eigen::MatrixXd point(x.size(), 1);
  for (std::size_t j = 0; j < x.size(); ++j) point(static_cast<Eigen::Index>(j), 0) = x[j];
  if (params.precision == Precision::single)
    return forward_batch_impl<float>(to_net<float>(params), point.cast<float>())(0);
  return forward_batch_impl<double>(to_net<double>(params), point)(0);
}

Eigen::VectorXd forward_batch(const NetworkParams& params, const Eigen::MatrixXd& points) {
  validate(params);
  if (points.cols() != params.weights.front().cols())
    throw std::invalid_argument("forward_batch: input dimension mismatch");
  const Eigen::MatrixXd X = points.transpose();
  if (params.precision == Precision::single)
    return forward_batch_impl<float>(to_net<float>(params), X.cast<float>());
  return forward_batch_impl<double>(to_net<double>(params), X);
}

double loss(const NetworkParams& params, const Eigen::MatrixXd& points,
            const Eigen::VectorXd& values) {
  if (points.rows() != values.size() || points.rows() == 0)
    throw std::invalid_argument("loss: empty or mismatched data");
  const Eigen::MatrixXd X = points.transpose();
  if (params.precision == Precision::single)
    return loss_grad_impl<float>(to_net<float>(params), X.cast<float>(),
                                 values.cast<float>(), nullptr);
  return loss_grad_impl<double>(to_net<double>(params), X, values, nullptr);
}

std::pair<double, NetworkParams> loss_and_grad(const NetworkParams& params,
                                               const Eigen::MatrixXd& points,
                                               const Eigen::VectorXd& values) {
  if (points.rows() != values.size() || points.rows() == 0)
    throw std::invalid_argument("loss_and_grad: empty or mismatched data");
  const Eigen::MatrixXd X = points.transpose();
  if (params.precision == Precision::single) {
    Net<float> grad;
    const double value = loss_grad_impl<float>(to_net<float>(params), X.cast<float>(),
                                               values.cast<float>(), &grad);
    return {value, from_net(grad, Precision::single)};
  }
  Net<double> grad;
  const double value = loss_grad_impl<double>(to_net<double>(params), X, values, &grad);
  return {value, from_net(grad, Precision::double_prec)};
}

double lr_schedule(std::int64_t k, const TrainConfig& cfg) {
  if (k < 0 || k > cfg.k_final) throw std::invalid_argument("lr_schedule: epoch out of range");
  if (!(cfg.tau_final > 0.0 && cfg.tau_final <= cfg.tau_init))
    throw std::invalid_argument("lr_schedule: require 0 < tau_final <= tau_init");
  const double base = std::pow(cfg.tau_final / cfg.tau_init,
                               static_cast<double>(cfg.k_uf) / static_cast<double>(cfg.k_final));
  return cfg.tau_init *
         std::pow(base, static_cast<double>(k) / static_cast<double>(cfg.k_uf));
}

AdamState AdamState::like(const NetworkParams& params) {
  AdamState state;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    state.m_w.push_back(Eigen::MatrixXd::Zero(params.weights[l].rows(), params.weights[l].cols()));
    state.v_w.push_back(Eigen::MatrixXd::Zero(params.weights[l].rows(), params.weights[l].cols()));
    state.m_b.push_back(Eigen::VectorXd::Zero(params.biases[l].size()));
    state.v_b.push_back(Eigen::VectorXd::Zero(params.biases[l].size()));
  }
  return state;
}

namespace {

template <class Tensor>
void adam_update_tensor(Tensor& theta, Tensor& m, Tensor& v, const Tensor& g, double tau,
                        const TrainConfig& cfg, double bc1, double bc2, bool round_single) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
  v = cfg.beta2 * v.array().matrix() + (1.0 - cfg.beta2) * g.array().square().matrix();
  const auto mhat = (m / bc1).array();
  const auto vhat = (v / bc2).array();
  Tensor update = (tau * mhat / (vhat.sqrt() + cfg.delta)).matrix();
  if (round_single)
    theta = ((theta - update).template cast<float>()).template cast<double>();
  else
    theta -= update;
}

}  // namespace

void adam_step(NetworkParams& params, AdamState& state, const NetworkParams& grad, double tau,
               const TrainConfig& cfg) {
  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step_count));
  const bool single = params.precision == Precision::single;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    adam_update_tensor(params.weights[l], state.m_w[l], state.v_w[l], grad.weights[l], tau, cfg,
                       bc1, bc2, single);
    adam_update_tensor(params.biases[l], state.m_b[l], state.v_b[l], grad.biases[l], tau, cfg,
                       bc1, bc2, single);
  }
}

void sgd_step(NetworkParams& params, const NetworkParams& grad, double tau) {
  const bool single = params.precision == Precision::single;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    if (single) {
      params.weights[l] =
          ((params.weights[l] - tau * grad.weights[l]).cast<float>()).cast<double>();
      params.biases[l] = ((params.biases[l] - tau * grad.biases[l]).cast<float>()).cast<double>();
    } else {
      params.weights[l] -= tau * grad.weights[l];
      params.biases[l] -= tau * grad.biases[l];
    }
  }
}

TrainResult train(const Architecture& arch, const DataSet& data, const TrainConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  if (data.size() == 0) throw std::invalid_argument("train: empty data");
  if (data.dim() != arch.input_dim) throw std::invalid_argument("train: data dimension mismatch");
  if (cfg.k_final < 1 || cfg.k_uf < 1 || !(cfg.eps_tol > 0.0))
    throw std::invalid_argument("train: bad config");

  NetworkParams params = init_params(arch, cfg.init, cfg.seed, cfg.precision);
  Optimizer optimizer(cfg.optimizer, cfg, params);
  RngStream shuffle_rng = RngStream(cfg.seed).derive("shuffle");

  const int steps_per_epoch = cfg.batch == BatchMode::full ? 1
                              : cfg.batch == BatchMode::half ? 2 : 4;
  const Eigen::Index m = data.size();

  TrainResult result;
  result.params = params;
  TrainingTrace& trace = result.trace;

  auto finish = [&](StopReason reason, std::int64_t epoch) {
    trace.stop_reason = reason;
    trace.epochs = epoch;
    trace.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return std::move(result);
  };

  // Records the end-of-epoch loss, maintains the 1/8-rule checkpoints, and
  // decides stopping. Returns true when training should stop.
  auto bookkeep = [&](std::int64_t epoch, double l) {
    trace.loss.push_back(l);
    if (!std::isfinite(l)) {
      trace.stop_reason = StopReason::divergence;
      return true;
    }
    if (epoch == 0 || l <= trace.checkpoint_losses.back() / 8.0) {
      trace.checkpoint_epochs.push_back(epoch);
      trace.checkpoint_losses.push_back(l);
      trace.best_checkpoint_epoch = epoch;
      trace.best_checkpoint_loss = l;
      result.params = params;
    }
    if (l <= cfg.eps_tol) {
      trace.stop_reason = StopReason::tolerance;
      return true;
    }
    return false;
  };

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);

  if (steps_per_epoch == 1) {
    // Full batch: the gradient pass at epoch k+1 evaluates the loss at the
    // end of epoch k, so one pass per epoch suffices.
    auto [l, grad] = loss_and_grad(params, data.points, data.values);
    if (bookkeep(0, l)) return finish(trace.stop_reason, 0);
    for (std::int64_t epoch = 1; epoch <= cfg.k_final; ++epoch) {
      optimizer.step(params, grad, lr_schedule(epoch, cfg));
      auto [l_next, grad_next] = loss_and_grad(params, data.points, data.values);
      grad = std::move(grad_next);
      if (bookkeep(epoch, l_next)) return finish(trace.stop_reason, epoch);
    }
    return finish(StopReason::budget, cfg.k_final);
  }

  if (bookkeep(0, loss(params, data.points, data.values))) return finish(trace.stop_reason, 0);
  for (std::int64_t epoch = 1; epoch <= cfg.k_final; ++epoch) {
    const double tau = lr_schedule(epoch, cfg);
    // Fisher-Yates over the sample order, then contiguous splits.
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(shuffle_rng.next() % i);
      std::swap(order[i - 1], order[j]);
    }
    const Eigen::Index chunk = (m + steps_per_epoch - 1) / steps_per_epoch;
    for (int s = 0; s < steps_per_epoch; ++s) {
      const Eigen::Index lo = s * chunk;
      const Eigen::Index hi = std::min<Eigen::Index>(m, lo + chunk);
      if (lo >= hi) continue;
      Eigen::MatrixXd pts(hi - lo, data.points.cols());
      Eigen::VectorXd vals(hi - lo);
      for (Eigen::Index r = lo; r < hi; ++r) {
        pts.row(r - lo) = data.points.row(order[static_cast<std::size_t>(r)]);
        vals(r - lo) = data.values(order[static_cast<std::size_t>(r)]);
      }
      optimizer.step(params, loss_and_grad(params, pts, vals).second, tau);
    }
    if (bookkeep(epoch, loss(params, data.points, data.values)))
      return finish(trace.stop_reason, epoch);
  }
  return finish(StopReason::budget, cfg.k_final);
}

double max_abs_weight(const NetworkParams& params) {
  double best = 0.0;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    if (params.weights[l].size() > 0)
      best = std::max(best, params.weights[l].cwiseAbs().maxCoeff());
    if (params.biases[l].size() > 0)
      best = std::max(best, params.biases[l].cwiseAbs().maxCoeff());
  }
  return best;
}

void write_params_json(std::ostream& out, const NetworkParams& params) {
  nlohmann::json j;
  j["precision"] = to_string(params.precision);
  j["layers"] = nlohmann::json::array();
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    nlohmann::json layer;
    layer["rows"] = params.weights[l].rows();
    layer["cols"] = params.weights[l].cols();
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(params.weights[l].size()));
    for (Eigen::Index r = 0; r < params.weights[l].rows(); ++r)
      for (Eigen::Index c = 0; c < params.weights[l].cols(); ++c)
        w.push_back(params.weights[l](r, c));
    layer["weights"] = w;
    std::vector<double> b(params.biases[l].data(), params.biases[l].data() + params.biases[l].size());
    layer["bias"] = b;
    j["layers"].push_back(std::move(layer));
  }
  out << j.dump(2) << '\n';
}

NetworkParams read_params_json(std::istream& in) {
  nlohmann::json j;
  in >> j;
  NetworkParams params;
  params.precision = precision_from_string(j.at("precision").get<std::string>());
  for (const auto& layer : j.at("layers")) {
    const auto rows = layer.at("rows").get<Eigen::Index>();
    const auto cols = layer.at("cols").get<Eigen::Index>();
    const auto w = layer.at("weights").get<std::vector<double>>();
    const auto b = layer.at("bias").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(w.size()) != rows * cols ||
        static_cast<Eigen::Index>(b.size()) != rows)
      throw std::runtime_error("read_params_json: inconsistent layer payload");
    Eigen::MatrixXd W(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        W(r, c) = w[static_cast<std::size_t>(r * cols + c)];
    params.weights.push_back(std::move(W));
    params.biases.push_back(Eigen::Map<const Eigen::VectorXd>(b.data(), rows));
  }
  validate(params);
  return params;
}

void write_trace_csv(std::ostream& out, const TrainingTrace& trace, const TrainConfig& cfg) {
  out << "epoch,loss,lr,checkpoint\n";
  out.precision(17);
  std::size_t next_cp = 0;
  for (std::size_t k = 0; k < trace.loss.size(); ++k) {
    bool is_cp = next_cp < trace.checkpoint_epochs.size() &&
                 trace.checkpoint_epochs[next_cp] == static_cast<std::int64_t>(k);
    if (is_cp) ++next_cp;
    out << k << ',' << trace.loss[k] << ',' << lr_schedule(static_cast<std::int64_t>(k), cfg)
        << ',' << (is_cp ? 1 : 0) << '\n';
  }
}

}  // namespace fapprox
