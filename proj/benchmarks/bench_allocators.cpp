#include <benchmark/benchmark.h>

#include "layeralloc/exact.hpp"
#include "layeralloc/heuristic.hpp"
#include "layeralloc/profiling.hpp"
#include "layeralloc/simulator.hpp"
#include "layeralloc/workload.hpp"

using namespace layeralloc;

namespace {

// BERT with `encoders` encoders on `devices` sampled devices.
AllocationProblem bert_problem(std::size_t encoders, std::size_t devices) {
  BertSpec bert;
  bert.num_encoders = encoders;
  FleetSpec fleet;
  fleet.device_count = devices;
  fleet.seed = 42;
  return AllocationProblem(bert_layer_profiles(bert), sample_fleet(fleet), kDefaultSecondsPerFlop);
}

void BM_Heuristic(benchmark::State& state) {
  const auto p = bert_problem(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(heuristic_allocate(p));
  state.counters["L"] = static_cast<double>(p.layer_count());
}

void BM_OptimalDp(benchmark::State& state) {
  const auto p = bert_problem(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(optimal_dp(p));
  state.counters["L"] = static_cast<double>(p.layer_count());
}

void BM_OptimalExhaustive(benchmark::State& state) {
  const auto p = bert_problem(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(optimal_exhaustive(p));
  state.counters["partitions"] = static_cast<double>(count_partitions(p.layer_count(), p.device_count()));
}

void BM_OptimalPermuted(benchmark::State& state) {
  const auto p = bert_problem(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(optimal_permuted(p));
}

void BM_Training(benchmark::State& state) {
  const auto p = bert_problem(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const auto pi = heuristic_allocate(p).partition;
  for (auto _ : state) benchmark::DoNotOptimize(run_training(p, pi));
}

}  // namespace

// {encoders, devices}: the three scaling scales plus desk-scale sizes.
BENCHMARK(BM_Heuristic)->Args({8, 8})->Args({40, 15})->Args({80, 31})->Args({160, 63});
BENCHMARK(BM_OptimalDp)->Args({8, 8})->Args({40, 15})->Args({80, 31})->Args({160, 63});
BENCHMARK(BM_OptimalExhaustive)->Args({2, 4})->Args({4, 5})->Args({7, 5});
BENCHMARK(BM_OptimalPermuted)->Args({4, 4})->Args({4, 6})->Args({7, 8});
BENCHMARK(BM_Training)->Args({80, 15})->Args({160, 63});

BENCHMARK_MAIN();
