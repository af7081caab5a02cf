// Command-line front end: fit-cs, train-dnn, benchmark, coeffs, report,
// theory-check. Exit codes: 0 success, 1 usage error, 2 numerical failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fapprox/errors.hpp"
#include "fapprox/harness.hpp"

namespace {

using namespace fapprox;

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string precision = "double";
  int quad_level = -1;
  std::string out_dir = "out";
  int trials = 5;
};

QuadratureRule test_rule_for(int dim, int quad_level, bool qmc) {
  if (qmc) return qmc_rule(dim);
  return smolyak_rule(dim, quad_level >= 0 ? quad_level : default_quad_level(dim));
}

std::filesystem::path ensure_dir(const std::string& dir) {
  std::filesystem::create_directories(dir);
  return dir;
}

int cmd_fit_cs(const GlobalOptions& g, const std::string& target_name, int dim, int K,
               const std::string& variant_name, bool unweighted, int degree, int m, double eta,
               double mu, double sigma, bool qmc) {
  const TargetFunction target = make_target(target_name, dim, K);
  const QuadratureRule rule = test_rule_for(target.dim, g.quad_level, qmc);
  const MultiIndexSet candidate = hyperbolic_cross(target.dim, degree);
  const ExpansionCoefficients reference = reference_coefficients(rule, target.eval, candidate);

  const DataSet data = make_dataset(target, m, g.seed, sigma);
  auto [A, rhs] = assemble_system(data.points, data.values, candidate);

  CsProblem problem;
  problem.variant = cs_variant_from_string(variant_name);
  if (!unweighted) problem.weights = legendre_weights(candidate);
  if (problem.variant == CsVariant::qcbp)
    problem.eta = eta >= 0.0 ? eta : reference_eta(A, reference, data.values);
  else
    problem.mu = mu > 0.0 ? mu : mu_theoretical(degree);
  problem.rhs = rhs;
  problem.A = std::move(A);

  const CsSolution solution = solve(problem);
  const double rel = relative_l2_error_from_values(
      rule, target_values_on_rule(rule, target.eval),
      expansion_values_on_rule(rule, solution.coefficients));

  const auto dir = ensure_dir(g.out_dir);
  {
    std::ofstream out(dir / "solution.json");
    write_solution_json(out, solution);
  }
  {
    std::ofstream out(dir / "coefficients.csv");
    write_coefficients_csv(out, solution.coefficients);
  }
  std::cout.precision(17);
  std::cout << "variant=" << to_string(problem.variant) << " n=" << candidate.size()
            << " m=" << m << " iterations=" << solution.iterations
            << " converged=" << (solution.converged ? "yes" : "no")
            << " residual=" << solution.residual_norm << " rel_error=" << rel << '\n';
  return 0;
}

int cmd_train_dnn(const GlobalOptions& g, const std::string& target_name, int dim, int K,
                  int layers, int width, int m, const std::string& optimizer, double tau_init,
                  double tau_final, std::int64_t k_final, std::int64_t k_uf, double eps_tol,
                  const std::string& batch, const std::string& init, double sigma, bool qmc) {
  const TargetFunction target = make_target(target_name, dim, K);
  const QuadratureRule rule = test_rule_for(target.dim, g.quad_level, qmc);

  Architecture arch{target.dim, layers, width};
  TrainConfig cfg;
  cfg.optimizer = optimizer == "sgd" ? OptimizerKind::sgd : OptimizerKind::adam;
  cfg.tau_init = tau_init;
  cfg.tau_final = tau_final;
  cfg.k_final = k_final;
  cfg.k_uf = k_uf;
  cfg.eps_tol = eps_tol;
  cfg.batch = batch == "half" ? BatchMode::half : batch == "quarter" ? BatchMode::quarter
                                                                     : BatchMode::full;
  cfg.init = init_strategy_from_string(init);
  cfg.seed = g.seed;
  cfg.precision = precision_from_string(g.precision);

  const DataSet data = make_dataset(target, m, dataset_seed(g.seed, 0, m), sigma);
  const TrainResult result = train(arch, data, cfg);

  Eigen::VectorXd approx(rule.size());
  for (Eigen::Index lo = 0; lo < rule.size(); lo += 32768) {
    const Eigen::Index n = std::min<Eigen::Index>(32768, rule.size() - lo);
    approx.segment(lo, n) = forward_batch(result.params, rule.nodes.middleRows(lo, n));
  }
  const double rel = relative_l2_error_from_values(
      rule, target_values_on_rule(rule, target.eval), approx);

  const auto dir = ensure_dir(g.out_dir);
  {
    std::ofstream out(dir / "params.json");
    write_params_json(out, result.params);
  }
  {
    std::ofstream out(dir / "trace.csv");
    write_trace_csv(out, result.trace, cfg);
  }
  std::cout.precision(17);
  std::cout << "net=" << layers << 'x' << width << " m=" << m
            << " epochs=" << result.trace.epochs << " stop=" << to_string(result.trace.stop_reason)
            << " best_loss=" << result.trace.best_checkpoint_loss
            << " max|w|=" << max_abs_weight(result.params) << " rel_error=" << rel << '\n';
  return result.trace.stop_reason == StopReason::divergence ? 2 : 0;
}

int cmd_benchmark(const GlobalOptions& g, const std::string& config_path, bool have_trials,
                  bool have_out) {
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "benchmark: cannot read config '" << config_path << "'\n";
    return 1;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  ExperimentSpec spec = spec_from_json_text(buffer.str());
  if (have_trials) spec.trials = g.trials;
  if (have_out) spec.output_dir = g.out_dir;
  if (g.quad_level >= 0) spec.quad_level = g.quad_level;

  const auto records = run_experiment(spec);
  const auto summary = summarize(records);
  export_report(records, summary, spec, spec.output_dir);

  std::cout.precision(6);
  for (const auto& row : summary.rows)
    std::cout << row.method << " m=" << row.m << " mean=" << row.mean << " median=" << row.median
              << " [q25=" << row.q25 << ", q75=" << row.q75 << "]\n";
  std::cout << "report written to " << spec.output_dir << '\n';
  return 0;
}

int cmd_coeffs(const GlobalOptions& g, const std::string& target_name, int dim, int K, int degree,
               int fit_lo, int fit_hi) {
  const TargetFunction target = make_target(target_name, dim, K);
  const QuadratureRule rule = test_rule_for(target.dim, g.quad_level, false);
  MultiIndexSet set;
  if (target.dim == 1) {
    std::vector<MultiIndex> idx;
    for (int nu = 0; nu <= degree; ++nu) idx.push_back({nu});
    set = make_index_set(1, std::move(idx));
  } else {
    set = hyperbolic_cross(target.dim, degree);
  }
  const ExpansionCoefficients coeffs = reference_coefficients(rule, target.eval, set);

  const auto dir = ensure_dir(g.out_dir);
  std::ofstream out(dir / "coefficients.csv");
  write_coefficients_csv(out, coeffs);
  std::cout << "wrote " << coeffs.index_set.size() << " coefficients\n";

  if (target.dim == 1 && fit_hi > fit_lo) {
    const DecayFit fit = coefficient_decay_fit(coeffs, fit_lo, fit_hi);
    std::cout.precision(17);
    std::cout << "decay fit over [" << fit_lo << ',' << fit_hi << "]: rate=" << fit.rate
              << " intercept=" << fit.intercept << '\n';
  }
  return 0;
}

int cmd_report(const GlobalOptions& g, const std::string& records_path) {
  std::ifstream in(records_path);
  if (!in) {
    std::cerr << "report: cannot read '" << records_path << "'\n";
    return 1;
  }
  const auto records = read_records_csv(in);
  const auto summary = summarize(records);
  const auto dir = ensure_dir(g.out_dir);
  std::ofstream out(dir / "summary.csv");
  write_summary_csv(out, summary);
  std::cout.precision(6);
  for (const auto& row : summary.rows)
    std::cout << row.method << " m=" << row.m << " mean=" << row.mean
              << " median=" << row.median << '\n';
  return 0;
}

int cmd_theory_check(const GlobalOptions& g, int d, int s, int rip_m) {
  std::cout.precision(12);
  bool ok = true;

  const auto set = hyperbolic_cross(d, s);
  const auto n = set.size();
  const bool lower = is_lower(set);
  std::cout << "hyperbolic cross d=" << d << " s=" << s << ": cardinality " << n
            << (lower ? " (lower set)" : " (NOT lower)") << '\n';
  ok = ok && lower;

  const auto bounds = hc_cardinality_bounds(d, s);
  const double counts[] = {bounds.cubic, bounds.power_log_dim, bounds.factorial};
  const char* names[] = {"cubic", "power_log_dim", "factorial"};
  for (int i = 0; i < 3; ++i) {
    const bool pass = static_cast<double>(n) <= counts[i];
    std::cout << "  bound " << names[i] << " = " << counts[i] << (pass ? "  ok" : "  FAIL")
              << '\n';
    ok = ok && pass;
  }

  const double K = intrinsic_lower_sparsity(d, s);
  const double lo = s * s / 4.0, hi = static_cast<double>(s) * s;
  const bool k_pass = K >= lo && K <= hi;
  std::cout << "K(" << s << ") = " << K << "  (range [" << lo << ", " << hi << "])"
            << (k_pass ? "  ok" : "  FAIL") << '\n';
  ok = ok && k_pass;

  if (rip_m > 0) {
    if (n > 25 || s > 4) {
      std::cout << "lower-RIP estimate skipped (instance too large: n=" << n << ", s=" << s
                << ")\n";
    } else {
      const Eigen::MatrixXd points = sample_uniform(d, rip_m, g.seed);
      const auto [A, rhs] =
          assemble_system(points, Eigen::VectorXd::Zero(rip_m), set);
      const double delta = lower_rip_constant(A, s);
      std::cout << "lower-RIP constant estimate (m=" << rip_m << "): " << delta << '\n';
    }
  }
  std::cout << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse polynomial and ReLU network function-approximation bench"};
  app.require_subcommand(1);
  // global flags may appear after the subcommand name
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "base random seed");
  app.add_option("--precision", g.precision, "single|double")
      ->check(CLI::IsMember({"single", "double"}));
  app.add_option("--quad-level", g.quad_level, "override test quadrature level");
  auto* out_opt = app.add_option("--out", g.out_dir, "output directory");
  auto* trials_opt = app.add_option("--trials", g.trials, "trial count override");

  // fit-cs
  std::string target_name = "exp_cos", variant_name = "qcbp", optimizer = "adam";
  std::string batch = "full", init = "normal_fixed";
  int dim = 1, K = 1, degree = 10, m = 100, layers = 5, width = 50;
  int fit_lo = 0, fit_hi = 0, s_param = 5, rip_m = 0;
  double eta = -1.0, mu = -1.0, sigma = 0.0;
  double tau_init = 1e-3, tau_final = 1e-6, eps_tol = 1e-8;
  std::int64_t k_final = 20'000, k_uf = 1'000;
  bool unweighted = false, qmc = false;
  std::string config_path, records_path;

  auto* fit = app.add_subcommand("fit-cs", "solve one CS recovery instance");
  fit->fallthrough();
  fit->add_option("--target", target_name, "logsin|exp_cos|rational|halfspace");
  fit->add_option("--d", dim, "dimension");
  fit->add_option("--K", K, "logsin parameter");
  fit->add_option("--variant", variant_name, "qcbp|lasso|srlasso")
      ->check(CLI::IsMember({"qcbp", "lasso", "srlasso"}));
  fit->add_flag("--unweighted", unweighted, "use all-ones weights");
  fit->add_option("--degree", degree, "hyperbolic cross degree");
  fit->add_option("--m", m, "sample count");
  fit->add_option("--eta", eta, "qcbp residual bound (<0: calibrate)");
  fit->add_option("--mu", mu, "lasso/srlasso penalty (<0: theoretical)");
  fit->add_option("--sigma", sigma, "noise standard deviation");
  fit->add_flag("--qmc", qmc, "use the QMC test grid");

  auto* tr = app.add_subcommand("train-dnn", "train one ReLU network");
  tr->fallthrough();
  tr->add_option("--target", target_name);
  tr->add_option("--d", dim);
  tr->add_option("--K", K);
  tr->add_option("--layers", layers, "hidden layers");
  tr->add_option("--width", width, "nodes per hidden layer");
  tr->add_option("--m", m, "sample count");
  tr->add_option("--optimizer", optimizer)->check(CLI::IsMember({"adam", "sgd"}));
  tr->add_option("--tau-init", tau_init);
  tr->add_option("--tau-final", tau_final);
  tr->add_option("--k-final", k_final, "epoch budget");
  tr->add_option("--k-uf", k_uf, "learning-rate update frequency");
  tr->add_option("--eps-tol", eps_tol, "loss stopping tolerance");
  tr->add_option("--batch", batch)->check(CLI::IsMember({"full", "half", "quarter"}));
  tr->add_option("--init", init)
      ->check(CLI::IsMember({"normal_fixed", "normal_scaled", "uniform_scaled"}));
  tr->add_option("--sigma", sigma, "noise standard deviation");
  tr->add_flag("--qmc", qmc, "use the QMC test grid");

  auto* bench = app.add_subcommand("benchmark", "run a full experiment from a JSON config");
  bench->fallthrough();
  bench->add_option("--config", config_path, "experiment JSON")->required();

  auto* coeffs = app.add_subcommand("coeffs", "reference coefficients and decay fit");
  coeffs->fallthrough();
  coeffs->add_option("--target", target_name);
  coeffs->add_option("--d", dim);
  coeffs->add_option("--K", K);
  coeffs->add_option("--degree", degree, "max degree (1D) or HC degree");
  coeffs->add_option("--fit-lo", fit_lo, "decay-fit range start");
  coeffs->add_option("--fit-hi", fit_hi, "decay-fit range end");

  auto* rep = app.add_subcommand("report", "re-summarize stored records");
  rep->fallthrough();
  rep->add_option("--records", records_path, "records.csv path")->required();

  auto* theory = app.add_subcommand("theory-check", "index-set and sparsity diagnostics");
  theory->fallthrough();
  theory->add_option("--d", dim);
  theory->add_option("--s", s_param, "hyperbolic cross degree");
  theory->add_option("--rip-m", rip_m, "sample count for the lower-RIP estimate (0: skip)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
      return app.exit(e);
    std::cerr << e.what() << "\n\n" << app.help() << '\n';
    return 1;
  }

  try {
    if (*fit)
      return cmd_fit_cs(g, target_name, dim, K, variant_name, unweighted, degree, m, eta, mu,
                        sigma, qmc);
    if (*tr)
      return cmd_train_dnn(g, target_name, dim, K, layers, width, m, optimizer, tau_init,
                           tau_final, k_final, k_uf, eps_tol, batch, init, sigma, qmc);
    if (*bench) return cmd_benchmark(g, config_path, trials_opt->count() > 0, out_opt->count() > 0);
    if (*coeffs) return cmd_coeffs(g, target_name, dim, K, degree, fit_lo, fit_hi);
    if (*rep) return cmd_report(g, records_path);
    if (*theory) return cmd_theory_check(g, dim, s_param, rip_m);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
