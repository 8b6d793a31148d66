#include <benchmark/benchmark.h>

#include "rtomo/forward.hpp"
#include "rtomo/greens.hpp"
#include "rtomo/objective.hpp"
#include "rtomo/proxtv.hpp"
#include "rtomo/scene.hpp"

#include <random>

using namespace rtomo;

namespace {

std::vector<GreenOperators> make_bank(int n, OperatorStorage storage, double hz = 300e6) {
  return build_operator_bank(Grid::unit_square(n), default_acquisition(), FrequencySchedule({hz}), SourceSpec::flat(5),
                             storage);
}

Eigen::VectorXcd random_field(Eigen::Index n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Eigen::VectorXcd x(n);
  for (auto& v : x) v = {g(rng), g(rng)};
  return x;
}

void BM_GreenApply(benchmark::State& state, OperatorStorage storage) {
  const int n = static_cast<int>(state.range(0));
  const auto bank = make_bank(n, storage);
  const Eigen::VectorXcd x = random_field(n * n);
  for (auto _ : state) benchmark::DoNotOptimize(bank[0].G.apply(x));
  state.SetComplexityN(n * n);
}
BENCHMARK_CAPTURE(BM_GreenApply, dense, OperatorStorage::dense)->RangeMultiplier(2)->Range(8, 32);
BENCHMARK_CAPTURE(BM_GreenApply, fft, OperatorStorage::fft)->RangeMultiplier(2)->Range(8, 128);

void BM_ProxNNTV(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const TVOperator D(n, n);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.3, 1.0);
  Eigen::VectorXd w(n * n);
  for (auto& v : w) v = u(rng);
  const double tau = 0.5 * D.tv(w);
  for (auto _ : state) benchmark::DoNotOptimize(prox_nn_tv(D, w, tau));
}
BENCHMARK(BM_ProxNNTV)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Gradient(benchmark::State& state, LinearSolver solver) {
  const int n = static_cast<int>(state.range(0));
  const auto bank = make_bank(n, OperatorStorage::automatic);
  ForwardOptions opts;
  opts.solver = solver;
  const ContrastImage truth = layered_phantom(n, 1.0);
  const ScatteredData data = simulate(bank, truth, opts);
  const Eigen::VectorXd f = 0.5 * truth.values;
  for (auto _ : state) benchmark::DoNotOptimize(gradient(f, {0}, data, bank, opts));
}
BENCHMARK_CAPTURE(BM_Gradient, dense_lu, LinearSolver::dense_lu)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Gradient, gmres, LinearSolver::gmres)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
