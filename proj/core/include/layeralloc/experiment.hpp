#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "layeralloc/exact.hpp"
#include "layeralloc/heuristic.hpp"
#include "layeralloc/profiling.hpp"
#include "layeralloc/simulator.hpp"
#include "layeralloc/types.hpp"

namespace layeralloc {

/// One seeded experiment: a BERT model on a sampled fleet, compared across
/// allocation strategies.
struct ScenarioConfig {
  std::string name = "scenario";
  BertSpec bert;
  FleetSpec fleet;
  std::vector<Strategy> strategies{Strategy::Even, Strategy::Heuristic};
  std::size_t iterations = 30;
  double calib = kDefaultSecondsPerFlop;
  double beta = kDefaultBackwardRatio;
  HeuristicConfig heuristic;
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;
  std::size_t permuted_max_devices = kDefaultPermutedMaxDevices;

  void validate() const;
};

enum class OutcomeStatus { Ok, Infeasible, Refused };
std::string_view to_string(OutcomeStatus s) noexcept;

struct StrategyOutcome {
  Strategy strategy = Strategy::Even;
  OutcomeStatus status = OutcomeStatus::Ok;
  std::string message;
  /// Present whenever an allocation was produced, including an even
  /// allocation that overflows memory.
  std::optional<AllocationResult> allocation;
  /// Present only for runnable (memory-feasible) allocations.
  std::optional<TrainingTiming> timing;

  /// (even - this) / even * 100 on several bases; empty when either side
  /// did not run.
  std::optional<double> reduction_makespan_pct;  // per-iteration mean
  std::optional<double> reduction_total_pct;     // summed over all iterations
  std::optional<double> reduction_stage_max_pct;
  std::optional<double> reduction_objective_pct;

  bool ok() const noexcept { return status == OutcomeStatus::Ok; }
};

struct ComparisonReport {
  std::string scenario;
  std::uint64_t seed = 0;
  std::size_t devices = 0;
  std::size_t layers = 0;
  std::size_t iterations = 0;
  std::vector<StrategyOutcome> outcomes;
  /// Counterexamples to expected-but-unproven orderings.
  std::vector<std::string> warnings;

  const StrategyOutcome* find(Strategy s) const noexcept;
  bool all_infeasible() const noexcept;
};

/// Builds profiles, samples the fleet, runs every strategy and simulates
/// training for each feasible allocation. A strategy that cannot run is
/// marked infeasible or refused; the rest of the scenario proceeds.
///
/// Throws InvariantViolation if an exact solver is beaten by a heuristic or
/// the two exact routes disagree.
ComparisonReport run_scenario(const ScenarioConfig& config);

/// Runs scenarios concurrently; the result order matches the input order.
std::vector<ComparisonReport> run_scenarios(std::span<const ScenarioConfig> configs);

/// Fleet seed shared by every preset that uses `nodes` compute nodes.
std::uint64_t preset_fleet_seed(std::uint64_t seed, std::size_t nodes) noexcept;

/// Fixed 80-encoder model on 16, 32 and 64 nodes (D = nodes - 1).
std::vector<ScenarioConfig> preset_strong_scaling(std::uint64_t seed);
/// 40/80/160 encoders on 16/32/64 nodes.
std::vector<ScenarioConfig> preset_weak_scaling(std::uint64_t seed);
/// "strong" or "weak"; throws ContractError otherwise.
std::vector<ScenarioConfig> preset_by_name(std::string_view name, std::uint64_t seed);

/// Reads either a single scenario object or {"scenarios": [...]}. Fields
/// left out keep their ScenarioConfig defaults. Throws ContractError.
std::vector<ScenarioConfig> parse_scenarios_json(std::string_view text);
std::string scenarios_to_json(std::span<const ScenarioConfig> configs, int indent = 2);

}  // namespace layeralloc
