#include <benchmark/benchmark.h>

#include "sepnmf/linalg.hpp"
#include "sepnmf/lowrank.hpp"
#include "sepnmf/mvee.hpp"
#include "sepnmf/random.hpp"
#include "sepnmf/select.hpp"
#include "sepnmf/spa.hpp"
#include "sepnmf/synth.hpp"

namespace {

using sepnmf::Index;

// SPA cost grows linearly in the column count for fixed d and k.
void BM_SpaSelect(benchmark::State& state) {
  const Index m = static_cast<Index>(state.range(0));
  sepnmf::Rng rng(1);
  const sepnmf::Matrix a = rng.gaussian_matrix(50, m);
  for (auto _ : state) benchmark::DoNotOptimize(sepnmf::spa_select(a, 10));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SpaSelect)->RangeMultiplier(2)->Range(1 << 10, 1 << 15)->Complexity(benchmark::oN);

void BM_SpaRankApprox(benchmark::State& state) {
  const auto inst = sepnmf::generate_instance(100, static_cast<Index>(state.range(0)), 10, 1.0, 3);
  for (auto _ : state) benchmark::DoNotOptimize(sepnmf::spa_rank_approx(inst.a, 10, 10));
}
BENCHMARK(BM_SpaRankApprox)->Arg(1000)->Arg(5000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_SvdTruncated(benchmark::State& state) {
  const auto inst = sepnmf::generate_instance(100, static_cast<Index>(state.range(0)), 10, 1.0, 3);
  for (auto _ : state) benchmark::DoNotOptimize(sepnmf::svd_truncated(inst.a, 10));
}
BENCHMARK(BM_SvdTruncated)->Arg(1000)->Arg(5000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_SolveMvee(benchmark::State& state) {
  sepnmf::Rng rng(5);
  const sepnmf::Matrix p = rng.gaussian_matrix(static_cast<Index>(state.range(0)),
                                               static_cast<Index>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(sepnmf::solve_mvee(p));
}
BENCHMARK(BM_SolveMvee)->Args({5, 400})->Args({10, 2000})->Args({10, 20000})->Unit(benchmark::kMillisecond);

void BM_Selector(benchmark::State& state, const char* name) {
  const auto inst = sepnmf::generate_instance(50, 2000, 10, 0.5, 9);
  for (auto _ : state) benchmark::DoNotOptimize(sepnmf::run_selector(name, inst.a, 10));
}
BENCHMARK_CAPTURE(BM_Selector, spa, "spa")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Selector, pspa, "pspa")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Selector, mpspa, "mpspa")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Selector, erspa, "erspa")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
