#include <benchmark/benchmark.h>

#include "fapprox/cs.hpp"
#include "fapprox/dnn.hpp"
#include "fapprox/harness.hpp"
#include "fapprox/quadrature.hpp"
#include "fapprox/targets.hpp"

using namespace fapprox;

namespace {

void BM_HyperbolicCross(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const int s = static_cast<int>(state.range(1));
  for (auto _ : state) {
    auto set = hyperbolic_cross(d, s);
    benchmark::DoNotOptimize(set);
  }
  state.SetLabel("n=" + std::to_string(hc_cardinality(d, s)));
}
BENCHMARK(BM_HyperbolicCross)->Args({2, 474})->Args({4, 90})->Args({8, 26});

void BM_IntrinsicLowerSparsity(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const int s = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(intrinsic_lower_sparsity(d, s));
}
BENCHMARK(BM_IntrinsicLowerSparsity)->Args({2, 12})->Args({4, 8})->Args({4, 12});

void BM_LegendreTable(benchmark::State& state) {
  std::vector<double> xs(1000);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = -1.0 + 2.0 * i / (xs.size() - 1.0);
  Eigen::MatrixXd table;
  for (auto _ : state) {
    legendre_1d_table(xs, static_cast<int>(state.range(0)), table);
    benchmark::DoNotOptimize(table);
  }
}
BENCHMARK(BM_LegendreTable)->Arg(30)->Arg(100)->Arg(300);

void BM_AssembleSystem(benchmark::State& state) {
  const auto set = hyperbolic_cross(4, 19);
  const int m = static_cast<int>(state.range(0));
  const auto points = sample_uniform(4, m, 1);
  const Eigen::VectorXd values = Eigen::VectorXd::Ones(m);
  for (auto _ : state) {
    auto system = assemble_system(points, values, set);
    benchmark::DoNotOptimize(system);
  }
}
BENCHMARK(BM_AssembleSystem)->Arg(100)->Arg(500);

void BM_SmolyakRule(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const int level = static_cast<int>(state.range(1));
  for (auto _ : state) {
    auto rule = smolyak_rule(d, level);
    benchmark::DoNotOptimize(rule);
  }
  state.SetLabel("nodes=" + std::to_string(smolyak_node_count(d, level)));
}
BENCHMARK(BM_SmolyakRule)->Args({2, 9})->Args({4, 7})->Args({8, 5});

void BM_CcWeights1d(benchmark::State& state) {
  const int level = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto rule = cc_rule_1d(level);
    benchmark::DoNotOptimize(rule);
  }
}
BENCHMARK(BM_CcWeights1d)->Arg(10)->Arg(16);

void BM_SolveQcbpPlanted(benchmark::State& state) {
  const auto set = hyperbolic_cross(2, 30);
  const int m = 200;
  auto [A, rhs0] = assemble_system(sample_uniform(2, m, 7), Eigen::VectorXd::Zero(m), set);
  Eigen::VectorXd c_star = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(set.size()));
  for (int i = 0; i < 10; ++i) c_star(i) = 1.0 / (i + 1.0);
  CsProblem problem;
  problem.rhs = A.entries * c_star;
  problem.A = std::move(A);
  problem.weights = legendre_weights(set);
  problem.variant = CsVariant::qcbp;
  problem.eta = 0.0;
  for (auto _ : state) {
    auto solution = solve(problem);
    benchmark::DoNotOptimize(solution);
  }
}
BENCHMARK(BM_SolveQcbpPlanted)->Unit(benchmark::kMillisecond);

void BM_LossAndGrad(benchmark::State& state) {
  const auto data = make_dataset(logsin(1), 500, 3);
  const Architecture arch{1, static_cast<int>(state.range(0)), static_cast<int>(state.range(1))};
  const auto params = init_params(arch, InitStrategy::normal_fixed, 0);
  for (auto _ : state) {
    auto lg = loss_and_grad(params, data.points, data.values);
    benchmark::DoNotOptimize(lg);
  }
}
BENCHMARK(BM_LossAndGrad)->Args({5, 50})->Args({10, 100});

void BM_ReferenceCoefficients(benchmark::State& state) {
  const auto rule = smolyak_rule(2, 7);
  const auto set = hyperbolic_cross(2, 20);
  const auto f = exp_cos(2);
  for (auto _ : state) {
    auto coeffs = reference_coefficients(rule, f.eval, set);
    benchmark::DoNotOptimize(coeffs);
  }
}
BENCHMARK(BM_ReferenceCoefficients)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
