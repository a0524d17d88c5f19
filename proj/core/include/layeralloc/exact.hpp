#pragma once

#include <cstddef>
#include <cstdint>

#include "layeralloc/types.hpp"

namespace layeralloc {

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;
inline constexpr std::size_t kDefaultPermutedMaxDevices = 8;

/// Number of contiguous partitions of L layers over D devices, C(L-1, D-1),
/// saturated at UINT64_MAX.
std::uint64_t count_partitions(std::size_t layer_count, std::size_t device_count);

/// Exact min-max allocation over contiguous partitions in the given device
/// order. Dynamic program over (device, first layer) suffixes, O(D L^2).
/// Among optimal partitions the lexicographically smallest is returned.
/// Throws InfeasibleError if no memory-feasible partition exists.
AllocationResult optimal_dp(const AllocationProblem& problem);

/// Brute-force oracle: enumerates every contiguous partition in
/// lexicographic order. Throws RefusalError when C(L-1, D-1) exceeds `cap`.
AllocationResult optimal_exhaustive(const AllocationProblem& problem,
                                    std::uint64_t cap = kDefaultEnumerationCap);

/// Optimum over all device orderings as well as partitions. The result's
/// device_order gives the device running each pipeline stage; workloads are
/// listed in stage order. Ties keep the lexicographically first ordering.
/// Throws RefusalError when D > max_devices.
AllocationResult optimal_permuted(const AllocationProblem& problem,
                                  std::size_t max_devices = kDefaultPermutedMaxDevices);

}  // namespace layeralloc
