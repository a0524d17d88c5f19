#include <doctest.h>

#include <limits>
#include <vector>

#include "layeralloc/exact.hpp"
#include "layeralloc/heuristic.hpp"
#include "layeralloc/workload.hpp"
#include "support/instances.hpp"

using namespace layeralloc;

namespace {

constexpr std::uint64_t kHuge = std::numeric_limits<std::uint64_t>::max() / 4;

AllocationProblem make_problem(const std::vector<double>& flops, const std::vector<std::uint64_t>& mem,
                               const std::vector<double>& dt, const std::vector<std::uint64_t>& dm = {},
                               const std::vector<double>& ct = {}) {
  std::vector<LayerProfile> layers;
  for (std::size_t j = 0; j < flops.size(); ++j) layers.emplace_back(flops[j], mem.empty() ? 1 : mem[j]);
  std::vector<DeviceProfile> devices;
  for (std::size_t i = 0; i < dt.size(); ++i) {
    devices.emplace_back(dt[i], dm.empty() ? kHuge : dm[i], ct.empty() ? 0.0 : ct[i]);
  }
  return AllocationProblem(std::move(layers), std::move(devices));
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  std::vector<std::uint64_t> row(k + 1, 0);
  row[0] = 1;
  for (std::uint64_t i = 1; i <= n; ++i) {
    for (std::uint64_t j = std::min(i, k); j > 0; --j) row[j] += row[j - 1];
  }
  return row[k];
}

}  // namespace

TEST_CASE("optimal_dp on the four-layer example") {
  auto p = make_problem({4, 3, 2, 1}, {}, {1, 1}, {});
  const auto r = optimal_dp(p);
  CHECK(r.partition == PartitionIndex({0, 1, 4}));
  CHECK(r.objective == 6.0);
  CHECK(r.workloads == std::vector<double>{4, 6});
  CHECK(r.strategy == Strategy::OptimalDp);
}

TEST_CASE("optimal_dp with a single device") {
  auto p = make_problem({1, 2, 3, 4}, {}, {1.5}, {}, {0.25});
  const auto r = optimal_dp(p);
  CHECK(r.partition == PartitionIndex({0, 4}));
  CHECK(r.objective == 1.5 * 10 + 0.25);
}

TEST_CASE("exact solvers report infeasibility") {
  auto p = make_problem({1, 1}, {9, 9}, {1, 1}, {8, 8});
  CHECK_THROWS_AS(optimal_dp(p), InfeasibleError);
  CHECK_THROWS_AS(optimal_exhaustive(p), InfeasibleError);
  CHECK_THROWS_AS(optimal_permuted(p), InfeasibleError);
}

TEST_CASE("optimal_exhaustive examples") {
  auto five = make_problem({1, 2, 3, 4, 5}, {}, {1, 2, 3, 4, 5}, {});
  CHECK(optimal_exhaustive(five).partition == PartitionIndex({0, 1, 2, 3, 4, 5}));

  auto heavy = make_problem({1, 1, 1, 1, 1, 5}, {}, {1, 1}, {});
  const auto r = optimal_exhaustive(heavy);
  CHECK(r.partition == PartitionIndex({0, 5, 6}));
  CHECK(r.objective == 5.0);
  CHECK(optimal_dp(heavy).partition == r.partition);
}

TEST_CASE("optimal_exhaustive refuses above the cap") {
  std::vector<double> flops(30, 1.0);
  auto p = make_problem(flops, {}, {1, 1, 1, 1, 1, 1}, {});
  CHECK(count_partitions(30, 6) == 118755);
  CHECK_THROWS_AS(optimal_exhaustive(p, 1000), RefusalError);
  try {
    optimal_exhaustive(p, 1000);
  } catch (const RefusalError& e) {
    CHECK(std::string(e.what()).find("1000") != std::string::npos);
  }
  CHECK_NOTHROW(optimal_exhaustive(p, 118755));
}

TEST_CASE("count_partitions") {
  CHECK(count_partitions(20, 5) == 3876);
  CHECK(count_partitions(5, 5) == 1);
  CHECK(count_partitions(7, 1) == 1);
  CHECK(count_partitions(3, 4) == 0);
  for (std::uint64_t l = 1; l <= 40; ++l) {
    for (std::uint64_t d = 1; d <= l; ++d) CHECK(count_partitions(l, d) == binomial(l - 1, d - 1));
  }
  CHECK(count_partitions(403, 200) == std::numeric_limits<std::uint64_t>::max());
}

TEST_CASE("optimal_permuted puts the heavy layer on the fast device") {
  auto p = make_problem({1, 5}, {}, {1, 3}, {});
  CHECK(optimal_dp(p).objective == 15.0);
  const auto r = optimal_permuted(p);
  CHECK(r.objective == 5.0);
  CHECK(r.device_order == std::vector<std::size_t>{1, 0});
  CHECK(r.workloads == std::vector<double>{3, 5});
  CHECK(r.strategy == Strategy::OptimalPermuted);
}

TEST_CASE("optimal_permuted on symmetric inputs equals optimal_dp") {
  auto homogeneous = make_problem({3, 1, 4, 1, 5, 9, 2, 6}, {}, {2, 2, 2}, {});
  CHECK(optimal_permuted(homogeneous).objective == optimal_dp(homogeneous).objective);
  CHECK(optimal_permuted(homogeneous).device_order == std::vector<std::size_t>{0, 1, 2});

  auto single = make_problem({3, 1, 4}, {}, {2}, {});
  CHECK(optimal_permuted(single).objective == optimal_dp(single).objective);
}

TEST_CASE("optimal_permuted refuses too many devices") {
  std::vector<double> flops(12, 1.0);
  auto p = make_problem(flops, {}, std::vector<double>(9, 1.0), {});
  CHECK_THROWS_AS(optimal_permuted(p), RefusalError);
  CHECK_THROWS_AS(optimal_permuted(p, 4), RefusalError);
}

TEST_CASE("property: dp and exhaustive agree exactly, including the tie-break") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto p = testing::random_instance(seed + 10'000);
    CAPTURE(seed);
    bool dp_ok = true;
    AllocationResult dp{PartitionIndex({0, 1})};
    try {
      dp = optimal_dp(p);
    } catch (const InfeasibleError&) {
      dp_ok = false;
    }
    if (!dp_ok) {
      CHECK_THROWS_AS(optimal_exhaustive(p), InfeasibleError);
      continue;
    }
    const auto ex = optimal_exhaustive(p);
    CHECK(dp.objective == ex.objective);
    CHECK(dp.partition == ex.partition);
  }
}

TEST_CASE("property: solver dominance chain") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto p = testing::random_instance(seed + 20'000);
    CAPTURE(seed);
    double dp_q = 0;
    try {
      dp_q = optimal_dp(p).objective;
    } catch (const InfeasibleError&) {
      continue;
    }
    if (p.device_count() <= 5) CHECK(optimal_permuted(p).objective <= dp_q);
    const auto even = even_allocate(p);
    if (even.feasible) CHECK(dp_q <= even.objective);
    try {
      const double h = heuristic_allocate(p).objective;
      CHECK(dp_q <= h);
    } catch (const InfeasibleError&) {
      // Coarse allocation can stall where a partition still exists.
    }
  }
}

TEST_CASE("property: more memory never hurts") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto p = testing::random_instance(seed + 30'000);
    CAPTURE(seed);
    double before = std::numeric_limits<double>::infinity();
    try {
      before = optimal_dp(p).objective;
    } catch (const InfeasibleError&) {
    }
    std::mt19937_64 rng(seed);
    std::vector<DeviceProfile> devices(p.devices().begin(), p.devices().end());
    const std::size_t target = testing::uniform_int(rng, 0, devices.size() - 1);
    devices[target] = DeviceProfile(devices[target].bench_time(),
                                    devices[target].mem_bytes() + testing::uniform_int(rng, 1, 20),
                                    devices[target].comm_latency());
    AllocationProblem more({p.layers().begin(), p.layers().end()}, std::move(devices));
    double after = std::numeric_limits<double>::infinity();
    try {
      after = optimal_dp(more).objective;
    } catch (const InfeasibleError&) {
    }
    CHECK(after <= before);
  }
}
