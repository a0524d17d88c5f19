#include "layeralloc/workload.hpp"

#include <algorithm>
#include <numeric>

namespace layeralloc {

double segment_flops(const AllocationProblem& problem, std::size_t begin, std::size_t end) {
  const auto layers = problem.layers();
  if (begin > end || end > layers.size()) {
    throw ContractError("segment_flops: invalid layer range");
  }
  double sum = 0.0;
  for (std::size_t j = begin; j < end; ++j) sum += layers[j].flops();
  return sum;
}

std::uint64_t segment_memory(const AllocationProblem& problem, std::size_t begin,
                             std::size_t end) {
  const auto layers = problem.layers();
  if (begin > end || end > layers.size()) {
    throw ContractError("segment_memory: invalid layer range");
  }
  std::uint64_t sum = 0;
  for (std::size_t j = begin; j < end; ++j) sum += layers[j].mem_bytes();
  return sum;
}

double device_workload(const AllocationProblem& problem, const PartitionIndex& pi,
                       std::size_t device) {
  problem.check(pi);
  if (device >= problem.device_count()) {
    throw ContractError("device_workload: device index " + std::to_string(device) +
                        " out of range");
  }
  const double flops = segment_flops(problem, pi.bounds()[device], pi.bounds()[device + 1]);
  return stage_cost(problem.devices()[device], flops, problem.seconds_per_flop());
}

std::vector<double> device_workloads(const AllocationProblem& problem, const PartitionIndex& pi) {
  problem.check(pi);
  std::vector<double> w(problem.device_count());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = device_workload(problem, pi, i);
  return w;
}

double objective(const AllocationProblem& problem, const PartitionIndex& pi) {
  const auto w = device_workloads(problem, pi);
  return *std::max_element(w.begin(), w.end());
}

std::uint64_t allocated_memory(const AllocationProblem& problem, const PartitionIndex& pi,
                               std::size_t device) {
  problem.check(pi);
  return segment_memory(problem, pi.first_layer(device), pi.last_layer(device) + 1);
}

std::vector<bool> memory_feasible(const AllocationProblem& problem, const PartitionIndex& pi) {
  problem.check(pi);
  std::vector<bool> ok(problem.device_count());
  for (std::size_t i = 0; i < ok.size(); ++i) {
    ok[i] = allocated_memory(problem, pi, i) <= problem.devices()[i].mem_bytes();
  }
  return ok;
}

bool all_memory_feasible(const AllocationProblem& problem, const PartitionIndex& pi) {
  const auto ok = memory_feasible(problem, pi);
  return std::all_of(ok.begin(), ok.end(), [](bool b) { return b; });
}

PartitionIndex even_allocation(std::size_t layer_count, std::size_t device_count) {
  if (device_count == 0) {
    throw ContractError("even_allocation: need at least one device");
  }
  if (layer_count < device_count) {
    throw InfeasibleError("even_allocation: " + std::to_string(layer_count) +
                          " layers cannot give each of " + std::to_string(device_count) +
                          " devices a layer");
  }
  const std::size_t base = layer_count / device_count;
  const std::size_t extra = layer_count % device_count;
  std::vector<std::size_t> bounds(device_count + 1, 0);
  for (std::size_t i = 0; i < device_count; ++i) {
    bounds[i + 1] = bounds[i] + base + (i < extra ? 1 : 0);
  }
  return PartitionIndex(std::move(bounds));
}

AllocationResult evaluate(const AllocationProblem& problem, const PartitionIndex& pi,
                          Strategy strategy) {
  auto w = device_workloads(problem, pi);
  const double q = *std::max_element(w.begin(), w.end());
  std::vector<std::size_t> order(problem.device_count());
  std::iota(order.begin(), order.end(), std::size_t{0});
  return AllocationResult{pi, std::move(w), q, all_memory_feasible(problem, pi), strategy,
                          std::move(order)};
}

AllocationResult even_allocate(const AllocationProblem& problem) {
  return evaluate(problem, even_allocation(problem.layer_count(), problem.device_count()),
                  Strategy::Even);
}

}  // namespace layeralloc
