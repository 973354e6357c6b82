// OpenMP kernels against their serial references.
//
//   bench_kernels --benchmark_filter=Jacobi
//   OMP_NUM_THREADS=4 bench_kernels

#include <random>

#include <benchmark/benchmark.h>

#include "blockgivens/blockdiag.hpp"
#include "blockgivens/randmat.hpp"
#include "blockgivens/svd.hpp"

using namespace blockgivens;

namespace {

Matrix random_matrix(Index m, Index n, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0, 0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix M(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) M(i, j) = u(rng);
  return M;
}

void jacobi(benchmark::State& state, JacobiOrdering ordering) {
  const Index n = state.range(0);
  const Matrix M = random_matrix(n, n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(singular_values(M, {ordering, 80}));
  state.SetComplexityN(n);
}

void BM_JacobiParallel(benchmark::State& s) { jacobi(s, JacobiOrdering::parallel_round_robin); }
void BM_JacobiSerial(benchmark::State& s) { jacobi(s, JacobiOrdering::serial_cyclic); }
BENCHMARK(BM_JacobiParallel)->RangeMultiplier(2)->Range(16, 256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_JacobiSerial)->RangeMultiplier(2)->Range(16, 256)->Unit(benchmark::kMillisecond);

void gram(benchmark::State& state, Execution exec) {
  std::vector<Index> l(20);
  for (std::size_t j = 0; j < l.size(); ++j) l[j] = Index(5 + 2 * j);
  const RandomColumnModel model = binary_model(500, l, 3);
  const int trials = int(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(empirical_gram(model, trials, exec).G_hat);
  state.SetItemsProcessed(state.iterations() * trials);
}

void BM_EmpiricalGramParallel(benchmark::State& s) { gram(s, Execution::parallel); }
void BM_EmpiricalGramSerial(benchmark::State& s) { gram(s, Execution::serial); }
BENCHMARK(BM_EmpiricalGramParallel)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EmpiricalGramSerial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_BlockDiagonalize(benchmark::State& state) {
  const Index n = state.range(0);
  Matrix R = random_matrix(2 * n, n, 2);
  R.leftCols(n / 4) *= 10.0;
  BlockDiagOptions o;
  o.detail = TraceDetail::light;
  o.accumulate = false;
  const BlockPartition p(R, n / 4);
  for (auto _ : state) benchmark::DoNotOptimize(block_diagonalize(p, o).Ainf);
}
BENCHMARK(BM_BlockDiagonalize)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
