#pragma once

// Re-verifies a fine-tuning trace from the outside, using only the public
// workload and memory functions. Returns an empty string when every recorded
// move was allowed and the final partition is a fixed point (or the pass
// budget ran out), otherwise a description of the first discrepancy.

#include <cstddef>
#include <string>
#include <vector>

#include "layeralloc/heuristic.hpp"
#include "layeralloc/workload.hpp"

namespace layeralloc::testing {

struct Guards {
  bool take = false;
  bool give = false;
};

inline double mean_workload(const AllocationProblem& p, const PartitionIndex& pi) {
  double total = 0.0;
  for (double w : device_workloads(p, pi)) total += w;
  return total / static_cast<double>(p.device_count());
}

inline Guards evaluate_guards(const AllocationProblem& p, const PartitionIndex& pi, std::size_t i,
                              double target) {
  const auto layers = p.layers();
  const auto devices = p.devices();
  const double this_w = device_workload(p, pi, i);
  const double next_w = device_workload(p, pi, i + 1);
  const std::size_t first_next = pi.first_layer(i + 1);
  const std::size_t last_this = pi.last_layer(i);
  Guards g;
  g.take = this_w < target && pi.layers_on(i + 1) > 1 &&
           allocated_memory(p, pi, i) + layers[first_next].mem_bytes() <= devices[i].mem_bytes();
  const double last_w = devices[i].bench_time() * p.seconds_per_flop() * layers[last_this].flops();
  g.give = next_w < target && this_w - last_w > target && pi.layers_on(i) > 1 &&
           allocated_memory(p, pi, i + 1) + layers[last_this].mem_bytes() <= devices[i + 1].mem_bytes();
  return g;
}

inline std::string replay_fine_tune(const AllocationProblem& p, const PartitionIndex& start,
                                    const FineTuneTrace& trace, std::size_t max_iter) {
  std::vector<std::size_t> b(start.bounds().begin(), start.bounds().end());
  std::vector<std::size_t> pass_start = b;
  std::size_t current_pass = 0;
  double target = mean_workload(p, start);

  for (std::size_t k = 0; k < trace.moves.size(); ++k) {
    const auto& m = trace.moves[k];
    const std::string where = "move " + std::to_string(k) + ": ";
    const bool next_pass = k > 0 && m.pass == current_pass + 1;
    if (m.pass != current_pass && !next_pass) return where + "pass index skipped or went backwards";
    if (m.pass != current_pass) {
      current_pass = m.pass;
      pass_start = b;
      target = mean_workload(p, PartitionIndex(pass_start));
    }
    if (m.bounds_before != b) return where + "bounds_before does not match replayed state";
    if (m.target != target) return where + "target is not the pass-start mean workload";
    if (m.device + 1 >= p.device_count()) return where + "device out of range";

    const PartitionIndex pi(b);
    const Guards g = evaluate_guards(p, pi, m.device, target);
    if (m.kind == MoveKind::Take) {
      if (!g.take) return where + "take guard does not hold";
      b[m.device + 1] += 1;
    } else {
      if (g.take) return where + "give recorded where take had priority";
      if (!g.give) return where + "give guard does not hold";
      b[m.device + 1] -= 1;
    }
    const PartitionIndex after(b);
    if (!all_memory_feasible(p, after)) return where + "move broke memory feasibility";
  }

  if (PartitionIndex(b) != trace.partition) return "final partition differs from replayed moves";
  if (trace.passes > max_iter) return "more passes than max_iter";
  if (trace.passes < max_iter) {
    // Converged: a whole pass over the final partition must accept nothing.
    const double final_target = mean_workload(p, trace.partition);
    for (std::size_t i = 0; i + 1 < p.device_count(); ++i) {
      const Guards g = evaluate_guards(p, trace.partition, i, final_target);
      if (g.take || g.give) {
        return "stopped early but boundary " + std::to_string(i) + " still has an allowed move";
      }
    }
  }
  return {};
}

}  // namespace layeralloc::testing
