#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "layeralloc/profiling.hpp"
#include "layeralloc/types.hpp"

namespace layeralloc {

inline constexpr double kDefaultBackwardRatio = 2.0;

/// Timing of one sequential forward + backward pass through the pipeline.
///
/// The link between stage i and stage i+1 costs ct_{i+1} in each direction.
/// stage_time[i] is the device's compute plus the latency of its inbound
/// link (both directions), so the stage times sum to the makespan.
struct IterationTiming {
  std::vector<double> forward_per_device;
  std::vector<double> backward_per_device;
  std::vector<double> comm_per_hop;  // size D-1, same cost on the way back
  std::vector<double> stage_time;
  double total_forward = 0.0;
  double total_backward = 0.0;
  double makespan_sequential = 0.0;
  double stage_time_max = 0.0;
};

/// Thrown when asked to simulate a partition that would run out of memory.
class MemoryViolationError : public InfeasibleError {
 public:
  MemoryViolationError(std::size_t device, std::uint64_t needed, std::uint64_t available);
  std::size_t device() const noexcept { return device_; }

 private:
  std::size_t device_;
};

/// Simulates one iteration. `problem.seconds_per_flop()` is ignored in
/// favour of `seconds_per_flop`. Throws MemoryViolationError if any device
/// is over its memory budget.
IterationTiming simulate_iteration(const AllocationProblem& problem, const PartitionIndex& pi,
                                   double seconds_per_flop = kDefaultSecondsPerFlop,
                                   double backward_ratio = kDefaultBackwardRatio);

struct TrainingOptions {
  std::size_t iterations = 30;
  double seconds_per_flop = kDefaultSecondsPerFlop;
  double backward_ratio = kDefaultBackwardRatio;
  /// Per-device, per-iteration compute noise: a factor uniform in
  /// [1 - jitter, 1 + jitter]. Zero disables it.
  double jitter = 0.0;
  std::uint64_t jitter_seed = 0;

  void validate() const;
};

struct Aggregate {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double total = 0.0;
};

struct TrainingTiming {
  std::vector<IterationTiming> iterations;
  Aggregate forward;
  Aggregate backward;
  Aggregate makespan;
  Aggregate stage_time_max;
};

TrainingTiming run_training(const AllocationProblem& problem, const PartitionIndex& pi,
                            const TrainingOptions& options = {});

}  // namespace layeralloc
