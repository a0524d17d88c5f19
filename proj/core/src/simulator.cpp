#include "layeralloc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "layeralloc/workload.hpp"
#include "rng.hpp"

namespace layeralloc {
namespace {

void require_memory(const AllocationProblem& problem, const PartitionIndex& pi) {
  problem.check(pi);
  for (std::size_t i = 0; i < problem.device_count(); ++i) {
    const std::uint64_t needed = allocated_memory(problem, pi, i);
    const std::uint64_t available = problem.devices()[i].mem_bytes();
    if (needed > available) throw MemoryViolationError(i, needed, available);
  }
}

IterationTiming simulate_scaled(const AllocationProblem& problem, const PartitionIndex& pi,
                                double spf, double beta, std::span<const double> compute_scale) {
  const std::size_t d = problem.device_count();
  const auto devices = problem.devices();
  IterationTiming t;
  t.forward_per_device.resize(d);
  t.backward_per_device.resize(d);
  t.comm_per_hop.resize(d - 1);
  t.stage_time.resize(d);

  for (std::size_t i = 0; i < d; ++i) {
    const double flops = segment_flops(problem, pi.bounds()[i], pi.bounds()[i + 1]);
    t.forward_per_device[i] = devices[i].bench_time() * spf * flops * compute_scale[i];
    t.backward_per_device[i] = beta * t.forward_per_device[i];
  }
  for (std::size_t h = 0; h + 1 < d; ++h) t.comm_per_hop[h] = devices[h + 1].comm_latency();

  for (double f : t.forward_per_device) t.total_forward += f;
  for (double c : t.comm_per_hop) t.total_forward += c;
  for (double b : t.backward_per_device) t.total_backward += b;
  for (double c : t.comm_per_hop) t.total_backward += c;
  t.makespan_sequential = t.total_forward + t.total_backward;

  for (std::size_t i = 0; i < d; ++i) {
    const double inbound = i == 0 ? 0.0 : 2.0 * t.comm_per_hop[i - 1];
    t.stage_time[i] = t.forward_per_device[i] + t.backward_per_device[i] + inbound;
  }
  t.stage_time_max = *std::max_element(t.stage_time.begin(), t.stage_time.end());
  return t;
}

void validate_rates(double spf, double beta) {
  if (!(spf > 0.0) || !std::isfinite(spf)) {
    throw ContractError("simulator: seconds_per_flop must be positive and finite");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw ContractError("simulator: backward_ratio must be non-negative and finite");
  }
}

Aggregate aggregate(const std::vector<IterationTiming>& runs, double IterationTiming::*field) {
  Aggregate a{0.0, std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
              0.0};
  for (const auto& r : runs) {
    const double v = r.*field;
    a.total += v;
    a.min = std::min(a.min, v);
    a.max = std::max(a.max, v);
  }
  // Identical iterations must report exactly that value as the mean.
  a.mean = a.min == a.max ? a.min : a.total / static_cast<double>(runs.size());
  return a;
}

}  // namespace

MemoryViolationError::MemoryViolationError(std::size_t device, std::uint64_t needed,
                                           std::uint64_t available)
    : InfeasibleError("device " + std::to_string(device) + " needs " + std::to_string(needed) +
                      " bytes but has " + std::to_string(available) +
                      "; training would fail with insufficient memory"),
      device_(device) {}

IterationTiming simulate_iteration(const AllocationProblem& problem, const PartitionIndex& pi,
                                   double seconds_per_flop, double backward_ratio) {
  validate_rates(seconds_per_flop, backward_ratio);
  require_memory(problem, pi);
  const std::vector<double> unit(problem.device_count(), 1.0);
  return simulate_scaled(problem, pi, seconds_per_flop, backward_ratio, unit);
}

void TrainingOptions::validate() const {
  if (iterations < 1) throw ContractError("run_training: iterations must be >= 1");
  validate_rates(seconds_per_flop, backward_ratio);
  if (!(jitter >= 0.0 && jitter < 1.0)) {
    throw ContractError("run_training: jitter must lie in [0, 1)");
  }
}

TrainingTiming run_training(const AllocationProblem& problem, const PartitionIndex& pi,
                            const TrainingOptions& options) {
  options.validate();
  require_memory(problem, pi);

  TrainingTiming out;
  out.iterations.reserve(options.iterations);
  std::vector<double> scale(problem.device_count(), 1.0);
  detail::SeededRng rng(options.jitter_seed);
  for (std::size_t it = 0; it < options.iterations; ++it) {
    if (options.jitter > 0.0) {
      for (double& s : scale) s = rng.uniform(1.0 - options.jitter, 1.0 + options.jitter);
    }
    out.iterations.push_back(
        simulate_scaled(problem, pi, options.seconds_per_flop, options.backward_ratio, scale));
  }
  out.forward = aggregate(out.iterations, &IterationTiming::total_forward);
  out.backward = aggregate(out.iterations, &IterationTiming::total_backward);
  out.makespan = aggregate(out.iterations, &IterationTiming::makespan_sequential);
  out.stage_time_max = aggregate(out.iterations, &IterationTiming::stage_time_max);
  return out;
}

}  // namespace layeralloc
