#include "layeralloc/exact.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>

#include "layeralloc/workload.hpp"

namespace layeralloc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::uint64_t> memory_prefix(const AllocationProblem& problem) {
  const auto layers = problem.layers();
  std::vector<std::uint64_t> prefix(layers.size() + 1, 0);
  for (std::size_t j = 0; j < layers.size(); ++j) prefix[j + 1] = prefix[j] + layers[j].mem_bytes();
  return prefix;
}

// Reported objectives are always recomputed through evaluate(); a mismatch
// with the solver's internal value means the two cost paths diverged.
AllocationResult finish(const AllocationProblem& problem, std::vector<std::size_t> bounds,
                        Strategy strategy, double expected_objective) {
  auto result = evaluate(problem, PartitionIndex(std::move(bounds)), strategy);
  if (!result.feasible || result.objective != expected_objective) {
    throw InvariantViolation("exact solver: recomputed objective disagrees with search value");
  }
  return result;
}

}  // namespace

std::uint64_t count_partitions(std::size_t layer_count, std::size_t device_count) {
  if (device_count == 0 || layer_count < device_count) return 0;
  const std::uint64_t n = layer_count - 1;
  std::uint64_t k = device_count - 1;
  k = std::min(k, n - k);
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t c = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // c * (n-k+i) / i is integral; cancel the gcd first so the product is exact.
    const std::uint64_t g = std::gcd(c, i);
    const std::uint64_t factor = (n - k + i) / (i / g);
    c /= g;
    if (c > kMax / factor) return kMax;
    c *= factor;
  }
  return c;
}

AllocationResult optimal_dp(const AllocationProblem& problem) {
  const auto layers = problem.layers();
  const auto devices = problem.devices();
  const double spf = problem.seconds_per_flop();
  const std::size_t n_layers = problem.layer_count();
  const std::size_t n_dev = problem.device_count();
  const auto mem = memory_prefix(problem);

  // best[i][s]: min over partitions of layers [s, L) across devices i..D-1 of
  // the largest stage cost. best[D][L] = -inf terminates the recursion.
  const std::size_t stride = n_layers + 1;
  std::vector<double> best((n_dev + 1) * stride, kInf);
  auto at = [&](std::size_t i, std::size_t s) -> double& { return best[i * stride + s]; };
  at(n_dev, n_layers) = -kInf;

  for (std::size_t i = n_dev; i-- > 0;) {
    const std::size_t devices_after = n_dev - 1 - i;
    const std::size_t last_end = n_layers - devices_after;
    const std::uint64_t cap = devices[i].mem_bytes();
    for (std::size_t s = i; s < last_end; ++s) {
      double flops = 0.0;
      double best_here = kInf;
      for (std::size_t e = s + 1; e <= last_end; ++e) {
        if (mem[e] - mem[s] > cap) break;
        flops += layers[e - 1].flops();
        const double rest = at(i + 1, e);
        if (rest == kInf) continue;
        best_here = std::min(best_here, std::max(stage_cost(devices[i], flops, spf), rest));
      }
      at(i, s) = best_here;
    }
  }

  const double q = at(0, 0);
  if (q == kInf) {
    throw InfeasibleError("optimal_dp: no memory-feasible contiguous partition exists");
  }

  // Smallest feasible boundary at every step yields the lexicographically
  // smallest optimal partition.
  std::vector<std::size_t> bounds{0};
  std::size_t s = 0;
  for (std::size_t i = 0; i < n_dev; ++i) {
    const std::size_t last_end = n_layers - (n_dev - 1 - i);
    double flops = 0.0;
    std::optional<std::size_t> chosen;
    for (std::size_t e = s + 1; e <= last_end; ++e) {
      if (mem[e] - mem[s] > devices[i].mem_bytes()) break;
      flops += layers[e - 1].flops();
      const double rest = at(i + 1, e);
      if (rest == kInf) continue;
      if (std::max(stage_cost(devices[i], flops, spf), rest) <= q) {
        chosen = e;
        break;
      }
    }
    if (!chosen) throw InvariantViolation("optimal_dp: reconstruction lost the optimum");
    bounds.push_back(*chosen);
    s = *chosen;
  }
  return finish(problem, std::move(bounds), Strategy::OptimalDp, q);
}

AllocationResult optimal_exhaustive(const AllocationProblem& problem, std::uint64_t cap) {
  const std::size_t n_layers = problem.layer_count();
  const std::size_t n_dev = problem.device_count();
  const std::uint64_t count = count_partitions(n_layers, n_dev);
  if (count > cap) {
    throw RefusalError("optimal_exhaustive: " + std::to_string(count) +
                       " partitions exceed the enumeration cap of " + std::to_string(cap));
  }

  const auto devices = problem.devices();
  const double spf = problem.seconds_per_flop();

  // bounds[1..D-1] are the interior cuts, enumerated in lexicographic order.
  std::vector<std::size_t> bounds(n_dev + 1);
  bounds[0] = 0;
  bounds[n_dev] = n_layers;
  for (std::size_t k = 1; k < n_dev; ++k) bounds[k] = k;

  std::optional<std::vector<std::size_t>> best_bounds;
  double best_q = kInf;
  while (true) {
    bool fits = true;
    double q = -kInf;
    for (std::size_t i = 0; i < n_dev && fits; ++i) {
      if (segment_memory(problem, bounds[i], bounds[i + 1]) > devices[i].mem_bytes()) {
        fits = false;
        break;
      }
      q = std::max(q, stage_cost(devices[i], segment_flops(problem, bounds[i], bounds[i + 1]), spf));
    }
    if (fits && q < best_q) {
      best_q = q;
      best_bounds = bounds;
    }

    // Advance to the next combination of interior cuts.
    std::size_t k = n_dev - 1;
    while (k >= 1 && bounds[k] == n_layers - (n_dev - k)) --k;
    if (k == 0) break;
    ++bounds[k];
    for (std::size_t m = k + 1; m < n_dev; ++m) bounds[m] = bounds[m - 1] + 1;
  }

  if (!best_bounds) {
    throw InfeasibleError("optimal_exhaustive: no memory-feasible contiguous partition exists");
  }
  return finish(problem, std::move(*best_bounds), Strategy::OptimalExhaustive, best_q);
}

AllocationResult optimal_permuted(const AllocationProblem& problem, std::size_t max_devices) {
  const std::size_t n_dev = problem.device_count();
  if (n_dev > max_devices) {
    throw RefusalError("optimal_permuted: " + std::to_string(n_dev) +
                       " devices exceed the permutation cap of " + std::to_string(max_devices));
  }
  std::vector<std::size_t> order(n_dev);
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::optional<AllocationResult> best;
  do {
    try {
      auto r = optimal_dp(problem.reordered(order));
      if (!best || r.objective < best->objective) {
        r.device_order = order;
        best = std::move(r);
      }
    } catch (const InfeasibleError&) {
      // This ordering cannot hold the model; other orderings may.
    }
  } while (std::next_permutation(order.begin(), order.end()));

  if (!best) {
    throw InfeasibleError("optimal_permuted: no device ordering admits a memory-feasible partition");
  }
  best->strategy = Strategy::OptimalPermuted;
  return std::move(*best);
}

}  // namespace layeralloc
