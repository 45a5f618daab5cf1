#include <benchmark/benchmark.h>

#include "csmatrap/kernels.hpp"
#include "csmatrap/traps.hpp"

using namespace csmatrap;

namespace {

const StateGraph& states() {
  static const StateGraph sg = enumerate_states(gen_grid(4, 5));
  return sg;
}

const TrapForest& forest() {
  static const TrapForest f = find_traps(states());
  return f;
}

void BM_ThroughputSerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(kernels::link_throughputs_serial(states(), 53.5));
}
void BM_ThroughputParallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(kernels::link_throughputs(states(), 53.5));
}
void BM_ColumnCountsSerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(kernels::link_column_counts_serial(states()));
}
void BM_ColumnCountsParallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(kernels::link_column_counts(states()));
}
void BM_TrapProbSerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(kernels::trap_probabilities_serial(forest(), states(), 53.5));
}
void BM_TrapProbParallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(kernels::trap_probabilities(forest(), states(), 53.5));
}

}  // namespace

BENCHMARK(BM_ThroughputSerial);
BENCHMARK(BM_ThroughputParallel);
BENCHMARK(BM_ColumnCountsSerial);
BENCHMARK(BM_ColumnCountsParallel);
BENCHMARK(BM_TrapProbSerial);
BENCHMARK(BM_TrapProbParallel);

BENCHMARK_MAIN();
