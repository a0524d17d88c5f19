#pragma once

// Seeded random instance generators shared by the unit, property and
// acceptance suites.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "layeralloc/profiling.hpp"
#include "layeralloc/types.hpp"

namespace layeralloc::testing {

inline std::size_t uniform_int(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  // Modulo bias is irrelevant at these ranges and keeps draws portable.
  return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

struct RandomInstanceSpec {
  std::size_t max_layers = 20;
  std::size_t max_devices = 5;
  std::uint64_t max_layer_flops = 100;  // flops are integers in [1, max]
  std::uint64_t max_layer_mem = 10;
  /// Probability that device memory is drawn tight enough to bind.
  double tight_memory_fraction = 0.5;
  double max_comm_latency = 20.0;
};

/// Small instance with integer FLOPs (so every summation order is exact),
/// integer bench times in [1, 5] and, half the time, binding memory.
inline AllocationProblem random_instance(std::uint64_t seed, const RandomInstanceSpec& spec = {}) {
  std::mt19937_64 rng(seed);
  const std::size_t d = uniform_int(rng, 1, spec.max_devices);
  const std::size_t l = uniform_int(rng, d, spec.max_layers);
  std::vector<LayerProfile> layers;
  std::uint64_t total_mem = 0;
  for (std::size_t j = 0; j < l; ++j) {
    const auto flops = static_cast<double>(uniform_int(rng, 1, spec.max_layer_flops));
    const auto mem = uniform_int(rng, 1, spec.max_layer_mem);
    total_mem += mem;
    layers.emplace_back(flops, mem);
  }
  const bool tight = static_cast<double>(rng() % 1000) / 1000.0 < spec.tight_memory_fraction;
  std::vector<DeviceProfile> devices;
  for (std::size_t i = 0; i < d; ++i) {
    const double dt = static_cast<double>(uniform_int(rng, 1, 5));
    const std::uint64_t fair = (total_mem + d - 1) / d;
    const std::uint64_t mem = tight ? uniform_int(rng, std::max<std::uint64_t>(fair / 2, 1), fair * 2)
                                    : total_mem;
    const double ct = static_cast<double>(uniform_int(rng, 0, 1000)) / 1000.0 * spec.max_comm_latency;
    devices.emplace_back(dt, mem, ct);
  }
  return AllocationProblem(std::move(layers), std::move(devices));
}

/// Desk-scale analogue of the scaling experiments: a BERT model with 1-7
/// encoders (8 to 38 layers) on 2-8 devices whose slowness follows the
/// fleet sampler's truncated normal on [1, 7]. Memory does not bind.
inline AllocationProblem bert_slice_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  BertSpec bert;
  bert.num_encoders = uniform_int(rng, 1, 7);
  const std::size_t l = bert_layer_count(bert.num_encoders);
  FleetSpec fleet;
  fleet.device_count = uniform_int(rng, 2, std::min<std::size_t>(8, l));
  fleet.seed = rng();
  fleet.mem_bytes_base = 1ull << 40;
  return AllocationProblem(bert_layer_profiles(bert), sample_fleet(fleet), kDefaultSecondsPerFlop);
}

}  // namespace layeralloc::testing
