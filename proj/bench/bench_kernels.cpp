// Serial vs OpenMP timings of the dense kernels.

#include <benchmark/benchmark.h>

#include <random>

#include "layered_ot/kernels.hpp"

using namespace layered_ot;
using kernels::Exec;

namespace {

DiscreteMeasure cloud(std::uint64_t seed, std::size_t n, std::size_t dim) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Point> pts(n, Point(dim));
  for (auto& p : pts)
    for (double& v : p) v = u(rng);
  return DiscreteMeasure(pts, std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Exec exec_of(const benchmark::State& s) { return s.range(1) ? Exec::parallel : Exec::serial; }

void BM_TabulateCost(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = cloud(1, n, 3), b = cloud(2, n, 3);
  const auto cost = CostModel::power(3.0);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::tabulate_cost(cost, a, b, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n));
}

void BM_TabulateCost3(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = cloud(3, n, 2), b = cloud(4, n, 2), c = cloud(5, n, 2);
  const auto cost = CostModel::surplus3();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::tabulate_cost3(cost, a, b, c, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n * n));
}

void BM_ReduceLast(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto t = kernels::tabulate_cost3(CostModel::surplus3(), cloud(6, n, 2), cloud(7, n, 2), cloud(8, n, 2));
  const std::vector<double> phi(n, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::reduce_last(t, phi, true, exec_of(state)));
}

void BM_ScanTwoCycles(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto c = kernels::tabulate_cost(CostModel::quadratic(), cloud(9, n, 2), cloud(10, n, 2));
  std::vector<std::pair<int, int>> support;
  for (std::size_t i = 0; i < n; ++i) support.emplace_back(static_cast<int>(i), static_cast<int>((i * 7) % n));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::scan_two_cycles(c, support, false, 1e-12, exec_of(state)));
}

}  // namespace

BENCHMARK(BM_TabulateCost)->ArgsProduct({{256, 1024}, {0, 1}})->ArgNames({"n", "parallel"});
BENCHMARK(BM_TabulateCost3)->ArgsProduct({{32, 96}, {0, 1}})->ArgNames({"n", "parallel"});
BENCHMARK(BM_ReduceLast)->ArgsProduct({{32, 96}, {0, 1}})->ArgNames({"n", "parallel"});
BENCHMARK(BM_ScanTwoCycles)->ArgsProduct({{500, 2000}, {0, 1}})->ArgNames({"n", "parallel"});

BENCHMARK_MAIN();
