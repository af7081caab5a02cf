#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "fapprox/cs.hpp"
#include "fapprox/dnn.hpp"
#include "fapprox/quadrature.hpp"
#include "fapprox/targets.hpp"

namespace fapprox {

struct CsMethodSpec {
  CsVariant variant = CsVariant::qcbp;
  bool weighted = true;
  int degree = 10;    // hyperbolic-cross degree of the candidate set
  double eta = -1.0;  // < 0: calibrate from reference coefficients per data set
  double mu = -1.0;   // < 0: mu_theoretical(degree)
  SolverOptions solver;
};

struct DnnMethodSpec {
  Architecture arch;
  TrainConfig config;
};

struct MethodSpec {
  std::string id;
  std::variant<CsMethodSpec, DnnMethodSpec> method;

  bool is_cs() const { return std::holds_alternative<CsMethodSpec>(method); }
};

struct TargetSpec {
  std::string name = "exp_cos";
  int dim = 1;
  int K = 1;  // logsin oscillation parameter
};

struct ExperimentSpec {
  TargetSpec target;
  std::vector<MethodSpec> methods;
  std::vector<int> sample_grid;  // strictly increasing
  int trials = 5;
  std::uint64_t base_seed = 0;
  int quad_level = -1;  // < 0: per-dimension default
  bool qmc = false;     // evaluate errors on the deterministic QMC grid
  Eigen::Index qmc_points = 200'000;
  double noise_sigma = 0.0;
  std::string output_dir = "out";
  int threads = 0;  // 0: hardware concurrency
};

/// Desk-scale default testing levels per dimension.
int default_quad_level(int dim);

/// One fitted method on one data set.
struct ResultRecord {
  std::string method;
  int m = 0;
  int trial = 0;
  double rel_error = 0.0;
  double wall_seconds = 0.0;
  std::int64_t iterations = 0;  // solver iterations or training epochs
  double max_abs_weight = 0.0;  // networks only
  double residual = 0.0;        // CS only
  std::string stop_reason;
  bool diverged = false;
};

struct SummaryRow {
  std::string method;
  int m = 0;
  int count = 0;
  double mean = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double min = 0.0;
  double max = 0.0;
  double mean_wall = 0.0;
  std::vector<double> outliers;  // beyond 1.5 IQR from the quartiles
};

struct SummaryTable {
  std::vector<SummaryRow> rows;
};

/// Runs methods x sample grid x trials. Every record is produced (divergent
/// runs are flagged, never dropped); per-trial data depends only on
/// (base_seed, trial, m). The test rule is built up front so an unavailable
/// quadrature level fails before any fitting starts.
std::vector<ResultRecord> run_experiment(const ExperimentSpec& spec);

/// Deterministic per-(method, m) statistics; empty groups are skipped.
SummaryTable summarize(const std::vector<ResultRecord>& records);

/// Derived data-set seed for (base_seed, trial, m); exposed so external
/// tooling can reproduce individual trials.
std::uint64_t dataset_seed(std::uint64_t base_seed, int trial, int m);

struct DecayFit {
  double rate = 1.0;       // rho_hat = exp(-slope) of log|c_nu| vs nu
  double intercept = 0.0;  // multiplicative constant exp(intercept)
};

/// Least-squares fit of log|c_nu| against nu over degrees [lo, hi] of a
/// one-dimensional coefficient sequence. Requires >= 3 nonzero values.
DecayFit coefficient_decay_fit(const ExpansionCoefficients& coeffs, int lo, int hi);

/// l2 norm of the discarded coefficients after keeping the s largest in
/// magnitude (unconstrained) or the best lower set of cardinality <= s
/// (lower_constrained, exhaustive enumeration under a node budget).
double best_s_term_error(const ExpansionCoefficients& coeffs, int s, bool lower_constrained,
                         std::uint64_t max_nodes = 200'000'000);

/// Values of the expansion at every rule node, evaluated in fixed-size chunks.
Eigen::VectorXd expansion_values_on_rule(const QuadratureRule& rule,
                                         const ExpansionCoefficients& coeffs);

/// Values of f at every rule node.
Eigen::VectorXd target_values_on_rule(const QuadratureRule& rule, const RealFn& f);

/// Relative l2 error from precomputed node values.
double relative_l2_error_from_values(const QuadratureRule& rule, const Eigen::VectorXd& f_values,
                                     const Eigen::VectorXd& approx_values);

/// Writes records.csv, summary.csv, spec.json, and errors.svg (log-scale
/// error vs m: one polyline per method plus quartile boxplot glyphs) into
/// `dir`. Empty records produce headers-only CSVs and no SVG.
void export_report(const std::vector<ResultRecord>& records, const SummaryTable& summary,
                   const ExperimentSpec& spec, const std::string& dir);

std::vector<ResultRecord> read_records_csv(std::istream& in);
void write_records_csv(std::ostream& out, const std::vector<ResultRecord>& records);
void write_summary_csv(std::ostream& out, const SummaryTable& summary);

ExperimentSpec spec_from_json_text(const std::string& text);
std::string spec_to_json_text(const ExperimentSpec& spec);

}  // namespace fapprox
