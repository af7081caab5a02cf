#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fapprox/targets.hpp"

namespace fapprox {

enum class Precision { single, double_prec };
const char* to_string(Precision p);
Precision precision_from_string(const std::string& name);

/// Fully connected feedforward ReLU network with constant hidden width:
/// input_dim -> width -> ... -> width -> 1, `hidden_layers + 2` affine maps,
/// ReLU after every map except the last.
struct Architecture {
  int input_dim = 1;
  int hidden_layers = 1;  // L
  int width = 10;         // N

  double depth_width_ratio() const { return static_cast<double>(hidden_layers) / width; }
};

struct NetworkParams {
  std::vector<Eigen::MatrixXd> weights;  // shapes Nxd, NxN ... NxN, 1xN
  std::vector<Eigen::VectorXd> biases;
  Precision precision = Precision::double_prec;

  Architecture architecture() const;
};

enum class InitStrategy {
  normal_fixed,    // N(0, 0.01)
  normal_scaled,   // N(0, 2/width)
  uniform_scaled,  // U(-2/width, 2/width)
};
const char* to_string(InitStrategy s);
InitStrategy init_strategy_from_string(const std::string& name);

enum class OptimizerKind { adam, sgd };
enum class BatchMode { full, half, quarter };
enum class StopReason { tolerance, budget, divergence };
const char* to_string(StopReason r);

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::adam;
  double beta1 = 0.9;          // first-moment decay
  double beta2 = 0.999;        // second-moment decay
  double delta = 1e-7;         // denominator stabilizer
  double tau_init = 1e-3;
  double tau_final = 1e-6;
  std::int64_t k_final = 50'000;  // epoch budget
  std::int64_t k_uf = 1'000;      // learning-rate update frequency
  double eps_tol = 1e-8;          // loss stopping tolerance
  BatchMode batch = BatchMode::full;
  InitStrategy init = InitStrategy::normal_fixed;
  std::uint64_t seed = 0;
  Precision precision = Precision::double_prec;
};

struct TrainingTrace {
  std::vector<double> loss;  // loss[k] = full-data loss at end of epoch k
  std::vector<std::int64_t> checkpoint_epochs;
  std::vector<double> checkpoint_losses;  // strictly decreasing, ratio <= 1/8
  std::int64_t best_checkpoint_epoch = 0;
  double best_checkpoint_loss = 0.0;
  double wall_seconds = 0.0;
  StopReason stop_reason = StopReason::budget;
  std::int64_t epochs = 0;
};

struct TrainResult {
  NetworkParams params;  // snapshot of the best checkpoint
  TrainingTrace trace;
};

/// Draws every weight and bias from the selected law, deterministically per
/// seed. Single-precision parameters are rounded through float at creation.
NetworkParams init_params(const Architecture& arch, InitStrategy strategy, std::uint64_t seed,
                          Precision precision = Precision::double_prec);

/// Network output at one point; validates parameter finiteness and dimension.
double forward(const NetworkParams& params, std::span<const double> x);

/// Network output at all points (one row of `points` per sample); parameters
/// validated once. Computation runs in the parameters' precision.
Eigen::VectorXd forward_batch(const NetworkParams& params, const Eigen::MatrixXd& points);

/// Mean squared loss over the data, same reduction order as training.
double loss(const NetworkParams& params, const Eigen::MatrixXd& points,
            const Eigen::VectorXd& values);

/// Loss and its exact reverse-mode gradient (ReLU subgradient 0 at 0).
/// The gradient reuses NetworkParams as a container, always double storage.
std::pair<double, NetworkParams> loss_and_grad(const NetworkParams& params,
                                               const Eigen::MatrixXd& points,
                                               const Eigen::VectorXd& values);

/// tau_k = tau_init * b^(k / k_uf), b = (tau_final/tau_init)^(k_uf/k_final);
/// continuous in k, equals tau_final at k = k_final.
double lr_schedule(std::int64_t k, const TrainConfig& cfg);

/// Bias-corrected moment state for Adam; moments always accumulate in double.
struct AdamState {
  std::vector<Eigen::MatrixXd> m_w, v_w;
  std::vector<Eigen::VectorXd> m_b, v_b;
  std::int64_t step_count = 0;

  static AdamState like(const NetworkParams& params);
};

/// theta -= tau * mhat / (sqrt(vhat) + delta) with bias-corrected moments.
void adam_step(NetworkParams& params, AdamState& state, const NetworkParams& grad, double tau,
               const TrainConfig& cfg);

/// Plain gradient descent step theta -= tau * grad.
void sgd_step(NetworkParams& params, const NetworkParams& grad, double tau);

/// Full training loop: epoch 0 records the initial loss and checkpoint, each
/// subsequent epoch takes 1 (full), 2 (half) or 4 (quarter) optimizer steps
/// over the shuffled data and logs the full-data loss. A checkpoint is taken
/// whenever the loss falls to 1/8 of the previous checkpoint's. Training
/// stops at eps_tol (tolerance), k_final (budget) or on a non-finite loss
/// (divergence, trace preserved). Returns the best-checkpoint parameters.
TrainResult train(const Architecture& arch, const DataSet& data, const TrainConfig& cfg);

/// Largest |entry| over all weights and biases.
double max_abs_weight(const NetworkParams& params);

/// Portable JSON layout: precision + per-layer shapes and row-major entries.
void write_params_json(std::ostream& out, const NetworkParams& params);
NetworkParams read_params_json(std::istream& in);

/// CSV: epoch, loss, lr, checkpoint flag.
void write_trace_csv(std::ostream& out, const TrainingTrace& trace, const TrainConfig& cfg);

}  // namespace fapprox
