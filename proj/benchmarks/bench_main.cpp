#include <benchmark/benchmark.h>

#include "driftdecomp/dataset.hpp"
#include "driftdecomp/fp_solver.hpp"
#include "driftdecomp/mlp.hpp"
#include "driftdecomp/poisson.hpp"
#include "driftdecomp/reference.hpp"
#include "driftdecomp/training.hpp"

using namespace driftdecomp;

namespace {

Grid2D grid(int n) { return Grid2D::square(4.0, n); }

void BM_FokkerPlanckStep(benchmark::State& state) {
  const Grid2D g = grid(static_cast<int>(state.range(0)));
  const FokkerPlanckSolver solver(g, driftdecomp::benchmark("double-well").drift_spec(), {1e-4, 2.0, 0.0});
  ScalarField f = gaussian_density(g, {0.5, -0.5}, 0.01);
  for (auto _ : state) {
    solver.advance(f, 1);
    benchmark::DoNotOptimize(f.values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.size()));
}
BENCHMARK(BM_FokkerPlanckStep)->Arg(41)->Arg(80)->Arg(160);

void BM_SmoothGaussian(benchmark::State& state) {
  const Grid2D g = grid(80);
  const ScalarField f = gaussian_density(g, {0.5, -0.5}, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(smooth_gaussian(f, 0.1));
}
BENCHMARK(BM_SmoothGaussian);

void BM_MlpForwardBatch(benchmark::State& state) {
  const Mlp net = Mlp::glorot_uniform({2, 50, 50, 2}, 1);
  const Eigen::MatrixXd x = grid_nodes(grid(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(net.forward_batch(x));
  state.SetItemsProcessed(state.iterations() * x.cols());
}
BENCHMARK(BM_MlpForwardBatch)->Arg(41)->Arg(80);

void BM_Phase1LossAndGradient(benchmark::State& state) {
  CorpusSpec spec;
  spec.count = 5;
  const Corpus c = build_corpus(driftdecomp::benchmark("double-well").drift_spec(), {1e-4, 2.0, 0.0}, grid(80), spec);
  const Mlp net = Mlp::glorot_uniform({2, 50, 50, 2}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(phase1_loss_and_gradient(net, c.pairs));
}
BENCHMARK(BM_Phase1LossAndGradient)->Unit(benchmark::kMillisecond);

void BM_Phase2LossAndGradient(benchmark::State& state) {
  const Grid2D g = grid(80);
  const Benchmark bench = driftdecomp::benchmark("double-well");
  const VectorField b = sample(g, [&](double x, double y) { return bench.drift(x, y); });
  const Mlp net = Mlp::glorot_uniform({2, 50, 50, 1}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(phase2_loss_and_gradient(net, b));
}
BENCHMARK(BM_Phase2LossAndGradient)->Unit(benchmark::kMillisecond);

void BM_PoissonOracle(benchmark::State& state) {
  const Grid2D g = grid(static_cast<int>(state.range(0)));
  const Benchmark bench = driftdecomp::benchmark("double-well");
  const VectorField b = sample(g, [&](double x, double y) { return bench.drift(x, y); });
  for (auto _ : state) benchmark::DoNotOptimize(decompose_with_oracle(b));
}
BENCHMARK(BM_PoissonOracle)->Arg(80)->Arg(160)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
