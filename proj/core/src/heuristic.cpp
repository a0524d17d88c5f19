#include "layeralloc/heuristic.hpp"

#include <numeric>

#include "layeralloc/workload.hpp"

namespace layeralloc {
namespace {

// The algorithms mutate a raw boundary vector in place; a PartitionIndex is
// only rebuilt at the end (which re-validates the invariants).
using Bounds = std::vector<std::size_t>;

std::size_t layers_on(const Bounds& b, std::size_t device) { return b[device + 1] - b[device]; }

std::uint64_t memory_of(const AllocationProblem& problem, const Bounds& b, std::size_t device) {
  return segment_memory(problem, b[device], b[device + 1]);
}

double workload_of(const AllocationProblem& problem, const Bounds& b, std::size_t device) {
  return stage_cost(problem.devices()[device], segment_flops(problem, b[device], b[device + 1]),
                    problem.seconds_per_flop());
}

bool memory_satisfied(const AllocationProblem& problem, const Bounds& b) {
  for (std::size_t i = 0; i < problem.device_count(); ++i) {
    if (memory_of(problem, b, i) > problem.devices()[i].mem_bytes()) return false;
  }
  return true;
}

}  // namespace

void HeuristicConfig::validate() const {
  if (max_iter < 1) throw ContractError("HeuristicConfig: max_iter must be >= 1");
  if (coarse_max_sweeps && *coarse_max_sweeps < 1) {
    throw ContractError("HeuristicConfig: coarse_max_sweeps must be >= 1");
  }
}

std::size_t HeuristicConfig::coarse_sweeps_for(std::size_t device_count) const {
  return coarse_max_sweeps.value_or(10 * device_count);
}

PartitionIndex coarse_allocate(const AllocationProblem& problem, const PartitionIndex& initial,
                               const HeuristicConfig& cfg) {
  cfg.validate();
  problem.check(initial);
  const auto devices = problem.devices();
  const auto layers = problem.layers();
  const std::size_t d = problem.device_count();
  Bounds b(initial.bounds().begin(), initial.bounds().end());

  std::vector<std::uint64_t> am(d);
  for (std::size_t i = 0; i < d; ++i) am[i] = memory_of(problem, b, i);

  const std::size_t max_sweeps = cfg.coarse_sweeps_for(d);
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    if (memory_satisfied(problem, b)) return PartitionIndex(std::move(b));

    const Bounds snapshot = b;
    for (std::size_t i = 0; i + 1 < d; ++i) {
      // Over budget: hand the top layer to the next device.
      while (am[i] > devices[i].mem_bytes() && layers_on(b, i) > 1) {
        const std::uint64_t moved = layers[b[i + 1] - 1].mem_bytes();
        b[i + 1] -= 1;
        am[i] -= moved;
        am[i + 1] += moved;
      }
      // Strict slack: pull the next device's first layer.
      while (layers_on(b, i + 1) > 1 &&
             devices[i].mem_bytes() > am[i] + layers[b[i + 1]].mem_bytes()) {
        const std::uint64_t moved = layers[b[i + 1]].mem_bytes();
        b[i + 1] += 1;
        am[i] += moved;
        am[i + 1] -= moved;
      }
    }
    if (b == snapshot) {
      throw InfeasibleError("Cannot fulfill memory requirement: coarse allocation stalled at " +
                            to_string(PartitionIndex(b)));
    }
  }
  if (memory_satisfied(problem, b)) return PartitionIndex(std::move(b));
  throw InfeasibleError("Cannot fulfill memory requirement: coarse allocation did not settle within " +
                        std::to_string(max_sweeps) + " sweeps");
}

PartitionIndex coarse_allocate(const AllocationProblem& problem, const HeuristicConfig& cfg) {
  return coarse_allocate(problem, even_allocation(problem.layer_count(), problem.device_count()),
                         cfg);
}

FineTuneTrace fine_tune_traced(const AllocationProblem& problem, const PartitionIndex& pi,
                               const HeuristicConfig& cfg) {
  cfg.validate();
  problem.check(pi);
  const auto devices = problem.devices();
  const auto layers = problem.layers();
  const double spf = problem.seconds_per_flop();
  const std::size_t d = problem.device_count();
  Bounds b(pi.bounds().begin(), pi.bounds().end());
  if (!memory_satisfied(problem, b)) {
    throw ContractError("fine_tune: starting partition " + to_string(pi) +
                        " is not memory-feasible");
  }

  FineTuneTrace trace{pi, {}, 0};
  for (std::size_t pass = 0; pass < cfg.max_iter; ++pass) {
    double total = 0.0;
    for (std::size_t i = 0; i < d; ++i) total += workload_of(problem, b, i);
    const double target = total / static_cast<double>(d);

    const Bounds snapshot = b;
    for (std::size_t i = 0; i + 1 < d; ++i) {
      const double this_w = workload_of(problem, b, i);
      const std::size_t first_next = b[i + 1];
      const std::size_t last_this = b[i + 1] - 1;

      const bool can_take =
          this_w < target && layers_on(b, i + 1) > 1 &&
          memory_of(problem, b, i) + layers[first_next].mem_bytes() <= devices[i].mem_bytes();
      if (can_take) {
        trace.moves.push_back({pass, i, MoveKind::Take, target, b});
        b[i + 1] += 1;
        continue;
      }

      const double next_w = workload_of(problem, b, i + 1);
      const double last_layer_w = devices[i].bench_time() * spf * layers[last_this].flops();
      const bool can_give =
          next_w < target && this_w - last_layer_w > target && layers_on(b, i) > 1 &&
          memory_of(problem, b, i + 1) + layers[last_this].mem_bytes() <= devices[i + 1].mem_bytes();
      if (can_give) {
        trace.moves.push_back({pass, i, MoveKind::Give, target, b});
        b[i + 1] -= 1;
      }
    }
    trace.passes = pass + 1;
    if (b == snapshot) break;
  }

  if (!memory_satisfied(problem, b)) {
    throw InvariantViolation("fine_tune produced a memory-infeasible partition");
  }
  trace.partition = PartitionIndex(std::move(b));
  return trace;
}

PartitionIndex fine_tune(const AllocationProblem& problem, const PartitionIndex& pi,
                         const HeuristicConfig& cfg) {
  return fine_tune_traced(problem, pi, cfg).partition;
}

AllocationResult heuristic_allocate(const AllocationProblem& problem, const HeuristicConfig& cfg) {
  const PartitionIndex coarse = coarse_allocate(problem, cfg);
  auto result = evaluate(problem, fine_tune(problem, coarse, cfg), Strategy::Heuristic);
  if (!result.feasible) {
    throw InvariantViolation("heuristic allocation is not memory-feasible");
  }
  return result;
}

}  // namespace layeralloc
