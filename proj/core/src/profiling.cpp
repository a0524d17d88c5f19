#include "layeralloc/profiling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rng.hpp"

namespace layeralloc {
namespace {

constexpr std::uint64_t kBytesPerFloat = 4;
// weights + gradients + two Adam moments
constexpr std::uint64_t kParamStateCopies = 4;
constexpr std::size_t kMaxResampleAttempts = 1'000'000;

LayerProfile make_layer(std::string name, double flops, std::uint64_t params,
                        std::uint64_t input_floats, std::uint64_t output_floats) {
  const std::uint64_t floats = kParamStateCopies * params + input_floats + output_floats;
  return LayerProfile(std::move(name), flops, kBytesPerFloat * floats);
}

struct EncoderParams {
  std::uint64_t qkv, attention_output, intermediate, output;
};

EncoderParams encoder_params(const BertSpec& s) {
  const std::uint64_t h = s.hidden, i = s.intermediate;
  return {
      3 * (h * h + h),
      h * h + h + 2 * h,  // dense + LayerNorm
      h * i + i,
      i * h + h + 2 * h,  // dense + LayerNorm
  };
}

std::uint64_t embedding_params(const BertSpec& s) {
  return (s.vocab_size + s.max_positions + s.type_vocab) * s.hidden + 2 * s.hidden;
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw ContractError(std::string("FleetSpec: ") + what + " must be finite");
}

}  // namespace

void BertSpec::validate() const {
  if (num_encoders < 1 || hidden < 1 || heads < 1 || intermediate < 1 || seq_len < 1 ||
      batch < 1 || vocab_size < 1 || max_positions < 1 || type_vocab < 1 || num_labels < 1) {
    throw ContractError("BertSpec: all dimensions must be >= 1");
  }
  if (hidden % heads != 0) {
    throw ContractError("BertSpec: hidden (" + std::to_string(hidden) +
                        ") must be divisible by heads (" + std::to_string(heads) + ")");
  }
  if (seq_len > max_positions) {
    throw ContractError("BertSpec: seq_len exceeds max_positions");
  }
}

std::uint64_t bert_parameter_count(const BertSpec& spec) {
  spec.validate();
  const auto enc = encoder_params(spec);
  const std::uint64_t h = spec.hidden;
  const std::uint64_t per_encoder = enc.qkv + enc.attention_output + enc.intermediate + enc.output;
  const std::uint64_t pooler = h * h + h;
  const std::uint64_t classifier = h * spec.num_labels + spec.num_labels;
  return embedding_params(spec) + spec.num_encoders * per_encoder + pooler + classifier;
}

std::vector<LayerProfile> bert_layer_profiles(const BertSpec& spec) {
  spec.validate();
  const double b = static_cast<double>(spec.batch);
  const double n = static_cast<double>(spec.seq_len);
  const double h = static_cast<double>(spec.hidden);
  const double i = static_cast<double>(spec.intermediate);
  const double c = static_cast<double>(spec.num_labels);

  const std::uint64_t bn = spec.batch * spec.seq_len;
  const std::uint64_t bnh = bn * spec.hidden;
  const std::uint64_t bni = bn * spec.intermediate;
  const std::uint64_t scores = spec.batch * spec.heads * spec.seq_len * spec.seq_len;
  const std::uint64_t bh = spec.batch * spec.hidden;
  const auto enc = encoder_params(spec);

  std::vector<LayerProfile> layers;
  layers.reserve(bert_layer_count(spec.num_encoders));

  // Token, position and segment lookups summed: two adds per output element.
  layers.push_back(make_layer("embedding", 2.0 * b * n * h, embedding_params(spec), bn, bnh));

  for (std::size_t e = 0; e < spec.num_encoders; ++e) {
    const std::string p = "encoder" + std::to_string(e) + ".";
    layers.push_back(make_layer(p + "qkv", 3.0 * 2.0 * b * n * h * h, enc.qkv, bnh, 3 * bnh));
    // QK^T and softmax(.)V, each 2*b*n^2*h; the score matrix is kept for backward.
    layers.push_back(
        make_layer(p + "attention", 2.0 * (2.0 * b * n * n * h), 0, 3 * bnh, bnh + scores));
    layers.push_back(
        make_layer(p + "attention_output", 2.0 * b * n * h * h, enc.attention_output, bnh, bnh));
    layers.push_back(
        make_layer(p + "intermediate", 2.0 * b * n * h * i, enc.intermediate, bnh, bni));
    layers.push_back(make_layer(p + "output", 2.0 * b * n * i * h, enc.output, bni, bnh));
  }

  // Pooler and classifier only see the first token.
  layers.push_back(make_layer("pooler", 2.0 * b * h * h, spec.hidden * spec.hidden + spec.hidden,
                              bh, bh));
  layers.push_back(make_layer("classifier", 2.0 * b * h * c,
                              spec.hidden * spec.num_labels + spec.num_labels, bh,
                              spec.batch * spec.num_labels));
  return layers;
}

void FleetSpec::validate() const {
  if (device_count < 1) throw ContractError("FleetSpec: device_count must be >= 1");
  require_finite(slow_down_min, "slow_down_min");
  require_finite(slow_down_max, "slow_down_max");
  require_finite(slow_down_mean, "slow_down_mean");
  require_finite(slow_down_std, "slow_down_std");
  require_finite(base_bench_time, "base_bench_time");
  require_finite(comm_latency_base, "comm_latency_base");
  if (!(slow_down_min >= 1.0 && slow_down_min <= slow_down_max)) {
    throw ContractError("FleetSpec: need 1 <= slow_down_min <= slow_down_max");
  }
  if (slow_down_std < 0.0) throw ContractError("FleetSpec: slow_down_std must be >= 0");
  if (slow_down_std == 0.0 && (slow_down_mean < slow_down_min || slow_down_mean > slow_down_max)) {
    throw ContractError("FleetSpec: degenerate distribution lies outside [min, max]");
  }
  if (!(base_bench_time > 0.0)) throw ContractError("FleetSpec: base_bench_time must be > 0");
  if (mem_bytes_base == 0) throw ContractError("FleetSpec: mem_bytes_base must be > 0");
  if (comm_latency_base < 0.0) throw ContractError("FleetSpec: comm_latency_base must be >= 0");
  if (!(mem_jitter >= 0.0 && mem_jitter < 1.0) || !(comm_jitter >= 0.0 && comm_jitter < 1.0)) {
    throw ContractError("FleetSpec: jitter fractions must lie in [0, 1)");
  }
}

std::vector<double> sample_slow_downs(const FleetSpec& spec) {
  spec.validate();
  std::vector<double> out(spec.device_count);
  if (spec.slow_down_min == spec.slow_down_max) {
    std::fill(out.begin(), out.end(), spec.slow_down_min);
    return out;
  }
  if (spec.slow_down_std == 0.0) {
    std::fill(out.begin(), out.end(), spec.slow_down_mean);
    return out;
  }
  detail::SeededRng rng(spec.seed);
  for (double& v : out) {
    std::size_t attempts = 0;
    do {
      if (++attempts > kMaxResampleAttempts) {
        throw ContractError("FleetSpec: truncation window holds too little probability mass");
      }
      v = rng.normal(spec.slow_down_mean, spec.slow_down_std);
    } while (v < spec.slow_down_min || v > spec.slow_down_max);
  }
  return out;
}

std::vector<DeviceProfile> sample_fleet(const FleetSpec& spec) {
  const auto slow = sample_slow_downs(spec);
  detail::SeededRng jitter(detail::mix_seed(spec.seed));
  std::vector<DeviceProfile> fleet;
  fleet.reserve(slow.size());
  for (double s : slow) {
    const double mem_scale = jitter.uniform(1.0 - spec.mem_jitter, 1.0 + spec.mem_jitter);
    const double comm_scale = jitter.uniform(1.0 - spec.comm_jitter, 1.0 + spec.comm_jitter);
    const auto mem = static_cast<std::uint64_t>(
        std::llround(static_cast<double>(spec.mem_bytes_base) * mem_scale));
    fleet.emplace_back(spec.base_bench_time * (1.0 + s), std::max<std::uint64_t>(mem, 1),
                       spec.comm_latency_base * comm_scale);
  }
  return fleet;
}

std::vector<LayerProfile> cnn_benchmark_profiles() {
  constexpr std::uint64_t batch = 32, channels = 256, height = 64, width = 64, kernel = 3;
  constexpr std::uint64_t activations = batch * channels * height * width;
  constexpr std::uint64_t params = channels * channels * kernel * kernel + channels;
  constexpr double flops = 2.0 * batch * height * width * kernel * kernel * channels * channels;
  std::vector<LayerProfile> layers;
  layers.reserve(10);
  for (int k = 0; k < 10; ++k) {
    layers.push_back(make_layer("conv" + std::to_string(k), flops, params, activations, activations));
  }
  return layers;
}

double simulate_device_benchmark(const DeviceProfile& device, std::span<const LayerProfile> bench,
                                 std::size_t iterations, double seconds_per_flop) {
  if (iterations < 1) throw ContractError("simulate_device_benchmark: iterations must be >= 1");
  if (bench.empty()) throw ContractError("simulate_device_benchmark: empty benchmark");
  if (!(seconds_per_flop > 0.0)) {
    throw ContractError("simulate_device_benchmark: seconds_per_flop must be > 0");
  }
  double flops = 0.0;
  for (const auto& layer : bench) flops += layer.flops();
  return static_cast<double>(iterations) * flops * seconds_per_flop * device.bench_time();
}

}  // namespace layeralloc
