#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "layeralloc/types.hpp"

namespace layeralloc {

/// Cost of running a block of layers whose FLOPs sum to `flops_sum` on
/// `device`: dt * spf * sum + ct. Every solver evaluates stage cost through
/// this one expression so that objectives compare bit-for-bit.
inline double stage_cost(const DeviceProfile& device, double flops_sum,
                         double seconds_per_flop) noexcept {
  return device.bench_time() * seconds_per_flop * flops_sum + device.comm_latency();
}

/// Sum of layer FLOPs in [begin, end), accumulated left to right.
double segment_flops(const AllocationProblem& problem, std::size_t begin, std::size_t end);
std::uint64_t segment_memory(const AllocationProblem& problem, std::size_t begin,
                             std::size_t end);

double device_workload(const AllocationProblem& problem, const PartitionIndex& pi,
                       std::size_t device);
std::vector<double> device_workloads(const AllocationProblem& problem, const PartitionIndex& pi);

/// Min-max objective q = max_i w_i.
double objective(const AllocationProblem& problem, const PartitionIndex& pi);

std::uint64_t allocated_memory(const AllocationProblem& problem, const PartitionIndex& pi,
                               std::size_t device);
/// Element i is true iff device i's layers fit into its memory.
std::vector<bool> memory_feasible(const AllocationProblem& problem, const PartitionIndex& pi);
bool all_memory_feasible(const AllocationProblem& problem, const PartitionIndex& pi);

/// floor(L/D) layers per device; the first L mod D devices take one extra.
/// Throws InfeasibleError when L < D.
PartitionIndex even_allocation(std::size_t layer_count, std::size_t device_count);

/// Packages `pi` as a result: workloads, objective and memory feasibility.
AllocationResult evaluate(const AllocationProblem& problem, const PartitionIndex& pi,
                          Strategy strategy);

/// Even allocation for `problem`, reported even when it overflows memory
/// (feasible=false in that case).
AllocationResult even_allocate(const AllocationProblem& problem);

}  // namespace layeralloc
