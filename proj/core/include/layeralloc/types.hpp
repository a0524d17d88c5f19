#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace layeralloc {

/// Thrown when a caller breaks a documented precondition or type invariant.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// No allocation satisfies the memory constraints (or L < D).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solver declined to run because the instance exceeds a configured cap.
class RefusalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal consistency check failed. Always a bug.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Forward-pass cost and peak training memory of one discrete model layer.
class LayerProfile {
 public:
  LayerProfile(std::string name, double flops, std::uint64_t mem_bytes);
  LayerProfile(double flops, std::uint64_t mem_bytes) : LayerProfile("", flops, mem_bytes) {}

  const std::string& name() const noexcept { return name_; }
  double flops() const noexcept { return flops_; }
  std::uint64_t mem_bytes() const noexcept { return mem_bytes_; }

  friend bool operator==(const LayerProfile&, const LayerProfile&) = default;

 private:
  std::string name_;
  double flops_;
  std::uint64_t mem_bytes_;
};

/// Benchmark-derived description of one worker device.
///
/// `bench_time` is the time the device needs for the standard benchmark and
/// acts as a relative slowness multiplier on layer FLOPs. `comm_latency` is
/// the measured point-to-point latency charged once per device.
class DeviceProfile {
 public:
  DeviceProfile(double bench_time, std::uint64_t mem_bytes, double comm_latency = 0.0);

  double bench_time() const noexcept { return bench_time_; }
  std::uint64_t mem_bytes() const noexcept { return mem_bytes_; }
  double comm_latency() const noexcept { return comm_latency_; }

  friend bool operator==(const DeviceProfile&, const DeviceProfile&) = default;

 private:
  double bench_time_;
  std::uint64_t mem_bytes_;
  double comm_latency_;
};

/// Monotone boundary array of length D+1. Device i owns layers
/// [bounds[i], bounds[i+1]). Every device owns at least one layer.
class PartitionIndex {
 public:
  explicit PartitionIndex(std::vector<std::size_t> bounds);

  std::size_t device_count() const noexcept { return bounds_.size() - 1; }
  std::size_t layer_count() const noexcept { return bounds_.back(); }

  /// First layer held by `device` (the model's z_i).
  std::size_t first_layer(std::size_t device) const;
  /// Last layer held by `device` (the model's y_i).
  std::size_t last_layer(std::size_t device) const;
  std::size_t layers_on(std::size_t device) const;

  std::span<const std::size_t> bounds() const noexcept { return bounds_; }

  friend auto operator<=>(const PartitionIndex&, const PartitionIndex&) = default;
  friend bool operator==(const PartitionIndex&, const PartitionIndex&) = default;

 private:
  void check_device(std::size_t device) const;

  std::vector<std::size_t> bounds_;
};

std::string to_string(const PartitionIndex& pi);

/// Ordered layers and ordered devices to be matched by a contiguous partition.
///
/// `seconds_per_flop` converts bench-time-scaled FLOPs into the same unit as
/// `comm_latency`. It defaults to 1 so that small hand instances read as
/// plain arithmetic.
class AllocationProblem {
 public:
  AllocationProblem(std::vector<LayerProfile> layers, std::vector<DeviceProfile> devices,
                    double seconds_per_flop = 1.0);

  std::span<const LayerProfile> layers() const noexcept { return layers_; }
  std::span<const DeviceProfile> devices() const noexcept { return devices_; }
  std::size_t layer_count() const noexcept { return layers_.size(); }
  std::size_t device_count() const noexcept { return devices_.size(); }
  double seconds_per_flop() const noexcept { return seconds_per_flop_; }

  /// Throws ContractError unless `pi` has this problem's D and L.
  void check(const PartitionIndex& pi) const;

  /// Same layers, devices reordered so that stage k is device order[k].
  AllocationProblem reordered(std::span<const std::size_t> order) const;

 private:
  std::vector<LayerProfile> layers_;
  std::vector<DeviceProfile> devices_;
  double seconds_per_flop_;
};

enum class Strategy { Even, Heuristic, OptimalDp, OptimalExhaustive, OptimalPermuted };

std::string_view to_string(Strategy s) noexcept;
/// Accepts the spellings produced by to_string. Throws ContractError otherwise.
Strategy parse_strategy(std::string_view text);

struct AllocationResult {
  PartitionIndex partition;
  std::vector<double> workloads;
  double objective = 0.0;
  bool feasible = false;
  Strategy strategy = Strategy::Even;
  /// Stage k of the pipeline runs on device device_order[k]. Identity for
  /// every strategy except OptimalPermuted.
  std::vector<std::size_t> device_order;
};

}  // namespace layeralloc
