#include <doctest.h>

#include <limits>
#include <vector>

#include "layeralloc/heuristic.hpp"
#include "layeralloc/workload.hpp"
#include "support/guard_replay.hpp"
#include "support/instances.hpp"

using namespace layeralloc;

namespace {

constexpr std::uint64_t kHuge = std::numeric_limits<std::uint64_t>::max() / 4;

AllocationProblem make_problem(const std::vector<double>& flops, const std::vector<std::uint64_t>& mem,
                               const std::vector<double>& dt, const std::vector<std::uint64_t>& dm) {
  std::vector<LayerProfile> layers;
  for (std::size_t j = 0; j < flops.size(); ++j) layers.emplace_back(flops[j], mem.empty() ? 1 : mem[j]);
  std::vector<DeviceProfile> devices;
  for (std::size_t i = 0; i < dt.size(); ++i) devices.emplace_back(dt[i], dm.empty() ? kHuge : dm[i]);
  return AllocationProblem(std::move(layers), std::move(devices));
}

}  // namespace

TEST_CASE("coarse_allocate sheds layers from an over-budget device") {
  auto p = make_problem({1, 1, 1}, {6, 6, 4}, {1, 1}, {10, 10});
  CHECK(coarse_allocate(p, PartitionIndex({0, 2, 3})) == PartitionIndex({0, 1, 3}));
}

TEST_CASE("coarse_allocate keeps the even allocation when memory is plentiful") {
  auto p = make_problem({5, 1, 9, 2, 2, 7, 3}, {3, 1, 4, 1, 5, 9, 2}, {1, 4, 2}, {});
  CHECK(coarse_allocate(p) == even_allocation(7, 3));
}

TEST_CASE("coarse_allocate raises when no sweep makes progress") {
  auto p = make_problem({1, 1}, {9, 9}, {1, 1}, {8, 8});
  CHECK_THROWS_AS(coarse_allocate(p), InfeasibleError);
  try {
    coarse_allocate(p);
  } catch (const InfeasibleError& e) {
    CHECK(std::string(e.what()).find("memory") != std::string::npos);
  }
}

TEST_CASE("coarse_allocate absorbs into a device with strict slack") {
  // Device 1 is over budget with [1,4); device 0 has room for two more.
  auto p = make_problem({1, 1, 1, 1}, {1, 2, 2, 2}, {1, 1}, {5, 4});
  const auto pi = coarse_allocate(p, PartitionIndex({0, 1, 4}));
  CHECK(all_memory_feasible(p, pi));
  CHECK(pi == PartitionIndex({0, 2, 4}));
}

TEST_CASE("fine_tune on the four-layer example is a fixed point") {
  // Target 5: the take guard fails (7 is not below 5) and the give guard
  // fails (7 - 3 = 4 does not exceed 5), so no move is accepted.
  auto p = make_problem({4, 3, 2, 1}, {}, {1, 1}, {});
  const auto trace = fine_tune_traced(p, PartitionIndex({0, 2, 4}));
  CHECK(trace.partition == PartitionIndex({0, 2, 4}));
  CHECK(trace.moves.empty());
  CHECK(trace.passes == 1);
  CHECK(objective(p, trace.partition) == 7.0);
}

TEST_CASE("fine_tune leaves a balanced homogeneous partition after one pass") {
  auto p = make_problem({2, 2, 2, 2, 2, 2}, {}, {1, 1, 1}, {});
  const auto trace = fine_tune_traced(p, even_allocation(6, 3));
  CHECK(trace.partition == even_allocation(6, 3));
  CHECK(trace.passes == 1);
}

TEST_CASE("fine_tune moves layers towards the faster device") {
  // dt = [1, 2], six unit layers: even gives w = [3, 6], mean 4.5.
  // Pass 1 takes a layer onto device 0 ([0,4,6], w = [4, 4]); pass 2 is idle.
  auto p = make_problem({1, 1, 1, 1, 1, 1}, {}, {1, 2}, {});
  const auto trace = fine_tune_traced(p, even_allocation(6, 2));
  CHECK(trace.partition == PartitionIndex({0, 4, 6}));
  REQUIRE(trace.moves.size() == 1);
  CHECK(trace.moves[0].kind == MoveKind::Take);
  CHECK(trace.moves[0].target == 4.5);
  CHECK(trace.passes == 2);
}

TEST_CASE("fine_tune respects max_iter") {
  auto p = make_problem({1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1}, {}, {1, 5, 1}, {});
  HeuristicConfig cfg;
  cfg.max_iter = 0;
  CHECK_THROWS_AS(fine_tune(p, even_allocation(12, 3), cfg), ContractError);
  cfg.max_iter = 1;
  const auto trace = fine_tune_traced(p, even_allocation(12, 3), cfg);
  CHECK(trace.passes == 1);
  for (const auto& m : trace.moves) CHECK(m.pass == 0);
}

TEST_CASE("fine_tune requires a memory-feasible start") {
  auto p = make_problem({1, 1, 1}, {6, 6, 4}, {1, 1}, {10, 10});
  CHECK_THROWS_AS(fine_tune(p, PartitionIndex({0, 2, 3})), ContractError);
}

TEST_CASE("HeuristicConfig validates its caps") {
  HeuristicConfig cfg;
  CHECK(cfg.coarse_sweeps_for(15) == 150);
  cfg.coarse_max_sweeps = 0;
  CHECK_THROWS_AS(cfg.validate(), ContractError);
  cfg.coarse_max_sweeps = 3;
  CHECK(cfg.coarse_sweeps_for(15) == 3);
}

TEST_CASE("heuristic_allocate on homogeneous devices matches even") {
  auto p = make_problem({3, 3, 3, 3, 3, 3, 3, 3}, {}, {2, 2, 2, 2}, {});
  const auto r = heuristic_allocate(p);
  CHECK(r.partition == even_allocation(8, 4));
  CHECK(r.strategy == Strategy::Heuristic);
  CHECK(r.feasible);
}

TEST_CASE("heuristic_allocate with one layer per device") {
  auto p = make_problem({9, 1, 4, 2}, {}, {1, 3, 2, 5}, {});
  CHECK(heuristic_allocate(p).partition == PartitionIndex({0, 1, 2, 3, 4}));
}

TEST_CASE("heuristic_allocate repairs an even allocation that overflows memory") {
  auto p = make_problem({1, 1, 1, 1}, {5, 5, 1, 1}, {1, 1}, {8, 8});
  CHECK_FALSE(even_allocate(p).feasible);
  const auto r = heuristic_allocate(p);
  CHECK(r.feasible);
  CHECK(r.partition == PartitionIndex({0, 1, 4}));
}

TEST_CASE("property: heuristic output is valid and feasible, or memory is infeasible") {
  std::size_t feasible = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto p = testing::random_instance(seed);
    PartitionIndex coarse({0, 1});
    try {
      coarse = coarse_allocate(p);
    } catch (const InfeasibleError&) {
      continue;
    }
    CAPTURE(seed);
    REQUIRE(all_memory_feasible(p, coarse));
    const auto trace = fine_tune_traced(p, coarse);
    CHECK(trace.partition.layer_count() == p.layer_count());
    CHECK(trace.partition.device_count() == p.device_count());
    CHECK(all_memory_feasible(p, trace.partition));
    CHECK(testing::replay_fine_tune(p, coarse, trace, HeuristicConfig{}.max_iter) == "");
    CHECK(heuristic_allocate(p).partition == trace.partition);
    ++feasible;
  }
  CHECK(feasible > 500);
}

TEST_CASE("property: heuristic is deterministic") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto p = testing::bert_slice_instance(seed);
    const auto a = heuristic_allocate(p);
    const auto b = heuristic_allocate(p);
    CHECK(a.partition == b.partition);
    CHECK(a.workloads == b.workloads);
  }
}
