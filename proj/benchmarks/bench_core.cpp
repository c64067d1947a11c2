#include "kktstab/conditions.hpp"
#include "kktstab/cones.hpp"
#include "kktstab/kkt.hpp"
#include "kktstab/linalg.hpp"
#include "kktstab/model.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace kktstab;

namespace {

Mat random_symmetric(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = normal(rng);
  return 0.5 * (a + a.transpose());
}

void BM_SymEig(benchmark::State& state) {
  const Mat a = random_symmetric(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(sym_eig(a));
}
BENCHMARK(BM_SymEig)->Arg(2)->Arg(3)->Arg(5)->Arg(8);

void BM_ProjectPsd(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Cone c = Cone::psd(n);
  const Vec z = svec(random_symmetric(n, 2));
  for (auto _ : state) benchmark::DoNotOptimize(project(c, z));
}
BENCHMARK(BM_ProjectPsd)->Arg(2)->Arg(3)->Arg(5)->Arg(8);

void BM_SolveExample4(benchmark::State& state) {
  const Fixture fx = builtin_fixture("example4");
  const Perturbation pert = fx.direction.scaled(1e-3);
  const KKTPoint start{fx.reference.x, fx.reference.y};
  for (auto _ : state) benchmark::DoNotOptimize(solve_kkt(fx.program, pert, start));
}
BENCHMARK(BM_SolveExample4)->Unit(benchmark::kMicrosecond);

void BM_KernelProbeExample4(benchmark::State& state) {
  const Fixture fx = builtin_fixture("example4");
  for (auto _ : state) benchmark::DoNotOptimize(kernel_probe(fx.program, fx.reference.x, fx.reference.y));
}
BENCHMARK(BM_KernelProbeExample4)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
