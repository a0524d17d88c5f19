#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "layeralloc/types.hpp"

namespace layeralloc {

struct HeuristicConfig {
  /// Upper bound on fine-tuning passes.
  std::size_t max_iter = 100;
  /// Upper bound on coarse-allocation sweeps; unset means 10 * D.
  std::optional<std::size_t> coarse_max_sweeps;

  void validate() const;
  std::size_t coarse_sweeps_for(std::size_t device_count) const;
};

/// Shifts partition boundaries, starting from `initial`, until every device's
/// layers fit its memory. A device over budget hands its top layer to the
/// next device; a device with strict slack pulls the next device's first
/// layer. Throws InfeasibleError when a whole sweep leaves the partition
/// unchanged while memory is still violated, or the sweep cap is hit.
PartitionIndex coarse_allocate(const AllocationProblem& problem, const PartitionIndex& initial,
                               const HeuristicConfig& cfg = {});
/// Same, starting from the even allocation.
PartitionIndex coarse_allocate(const AllocationProblem& problem, const HeuristicConfig& cfg = {});

enum class MoveKind {
  Take,  // device i took the first layer of device i+1
  Give,  // device i gave its last layer to device i+1
};

struct FineTuneMove {
  std::size_t pass = 0;
  std::size_t device = 0;
  MoveKind kind = MoveKind::Take;
  double target = 0.0;
  std::vector<std::size_t> bounds_before;
};

struct FineTuneTrace {
  PartitionIndex partition;
  std::vector<FineTuneMove> moves;
  std::size_t passes = 0;
};

/// Moves single boundary layers between neighbouring devices toward the mean
/// workload. The target is recomputed at the start of each pass; moves are
/// applied immediately and must keep both devices within memory and leave
/// the shrinking device with at least one layer. Stops after a pass that
/// changes nothing or after cfg.max_iter passes.
PartitionIndex fine_tune(const AllocationProblem& problem, const PartitionIndex& pi,
                         const HeuristicConfig& cfg = {});
/// fine_tune, additionally recording every accepted move.
FineTuneTrace fine_tune_traced(const AllocationProblem& problem, const PartitionIndex& pi,
                               const HeuristicConfig& cfg = {});

/// coarse_allocate followed by fine_tune. Propagates InfeasibleError.
AllocationResult heuristic_allocate(const AllocationProblem& problem,
                                    const HeuristicConfig& cfg = {});

}  // namespace layeralloc
