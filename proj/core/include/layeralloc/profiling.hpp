#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "layeralloc/types.hpp"

namespace layeralloc {

/// Shape of a BERT-style encoder stack. Defaults are BERT-Large with a
/// 128-token sequence, batch 32 and a 3-way classification head.
struct BertSpec {
  std::size_t num_encoders = 24;
  std::size_t hidden = 1024;
  std::size_t heads = 16;
  std::size_t intermediate = 4096;
  std::size_t seq_len = 128;
  std::size_t batch = 32;
  std::size_t vocab_size = 30522;
  std::size_t max_positions = 512;
  std::size_t type_vocab = 2;
  std::size_t num_labels = 3;

  void validate() const;
};

/// Every encoder is split into five discrete units, plus embedding, pooler
/// and classifier: 5E + 3 layers.
constexpr std::size_t bert_layer_count(std::size_t num_encoders) noexcept {
  return 5 * num_encoders + 3;
}

/// Per-layer forward FLOPs and training memory, in model order:
/// embedding, then per encoder {qkv, attention, attention_output,
/// intermediate, output}, then pooler and classifier.
///
/// Memory is 4 bytes x (4 x parameters + input floats + output floats): the
/// weights, their gradients and two Adam moments, plus the tensors kept for
/// the backward pass.
std::vector<LayerProfile> bert_layer_profiles(const BertSpec& spec);

std::uint64_t bert_parameter_count(const BertSpec& spec);

/// Distribution of a synthetic heterogeneous fleet.
///
/// Each device draws slow_down from normal(mean, std) truncated to
/// [min, max] by resampling; its bench time is base_bench_time * (1 +
/// slow_down). Memory and latency are the bases scaled by a uniform factor
/// in [1 - jitter, 1 + jitter].
struct FleetSpec {
  std::size_t device_count = 15;
  std::uint64_t seed = 0;
  double slow_down_min = 1.0;
  double slow_down_max = 7.0;
  double slow_down_mean = 4.0;
  double slow_down_std = 1.5;
  double base_bench_time = 1.0;
  std::uint64_t mem_bytes_base = 16ull << 30;
  double mem_jitter = 0.05;
  double comm_latency_base = 0.01;
  double comm_jitter = 0.1;

  void validate() const;
};

/// The raw penalty factors, in device order, that sample_fleet would use.
std::vector<double> sample_slow_downs(const FleetSpec& spec);
std::vector<DeviceProfile> sample_fleet(const FleetSpec& spec);

/// The standard device benchmark: ten 3x3 convolutions, 256 -> 256 channels
/// with padding 1, on a (32, 256, 64, 64) input.
std::vector<LayerProfile> cnn_benchmark_profiles();

inline constexpr double kDefaultSecondsPerFlop = 1e-12;

/// Modelled wall time of `iterations` forward passes over `bench` on
/// `device`: iterations * sum(flops) * seconds_per_flop * bench_time.
double simulate_device_benchmark(const DeviceProfile& device, std::span<const LayerProfile> bench,
                                 std::size_t iterations,
                                 double seconds_per_flop = kDefaultSecondsPerFlop);

}  // namespace layeralloc
