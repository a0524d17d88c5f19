#include "layeralloc/types.hpp"

#include <cmath>
#include <sstream>

namespace layeralloc {

LayerProfile::LayerProfile(std::string name, double flops, std::uint64_t mem_bytes)
    : name_(std::move(name)), flops_(flops), mem_bytes_(mem_bytes) {
  if (!(flops_ > 0.0) || !std::isfinite(flops_)) {
    throw ContractError("LayerProfile: flops must be positive and finite");
  }
  if (mem_bytes_ == 0) {
    throw ContractError("LayerProfile: mem_bytes must be positive");
  }
}

DeviceProfile::DeviceProfile(double bench_time, std::uint64_t mem_bytes, double comm_latency)
    : bench_time_(bench_time), mem_bytes_(mem_bytes), comm_latency_(comm_latency) {
  if (!(bench_time_ > 0.0) || !std::isfinite(bench_time_)) {
    throw ContractError("DeviceProfile: bench_time must be positive and finite");
  }
  if (mem_bytes_ == 0) {
    throw ContractError("DeviceProfile: mem_bytes must be positive");
  }
  if (!(comm_latency_ >= 0.0) || !std::isfinite(comm_latency_)) {
    throw ContractError("DeviceProfile: comm_latency must be non-negative and finite");
  }
}

PartitionIndex::PartitionIndex(std::vector<std::size_t> bounds) : bounds_(std::move(bounds)) {
  if (bounds_.size() < 2) {
    throw ContractError("PartitionIndex: need at least one device (D+1 >= 2 bounds)");
  }
  if (bounds_.front() != 0) {
    throw ContractError("PartitionIndex: bounds[0] must be 0");
  }
  for (std::size_t i = 0; i + 1 < bounds_.size(); ++i) {
    if (bounds_[i + 1] <= bounds_[i]) {
      throw ContractError("PartitionIndex: bounds must be strictly increasing, got " +
                          to_string(*this));
    }
  }
}

void PartitionIndex::check_device(std::size_t device) const {
  if (device >= device_count()) {
    throw ContractError("PartitionIndex: device index " + std::to_string(device) +
                        " out of range for D=" + std::to_string(device_count()));
  }
}

std::size_t PartitionIndex::first_layer(std::size_t device) const {
  check_device(device);
  return bounds_[device];
}

std::size_t PartitionIndex::last_layer(std::size_t device) const {
  check_device(device);
  return bounds_[device + 1] - 1;
}

std::size_t PartitionIndex::layers_on(std::size_t device) const {
  check_device(device);
  return bounds_[device + 1] - bounds_[device];
}

std::string to_string(const PartitionIndex& pi) {
  std::ostringstream os;
  os << '[';
  const auto b = pi.bounds();
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (i != 0) os << ',';
    os << b[i];
  }
  os << ']';
  return os.str();
}

AllocationProblem::AllocationProblem(std::vector<LayerProfile> layers,
                                     std::vector<DeviceProfile> devices, double seconds_per_flop)
    : layers_(std::move(layers)), devices_(std::move(devices)), seconds_per_flop_(seconds_per_flop) {
  if (devices_.empty()) {
    throw ContractError("AllocationProblem: at least one device is required");
  }
  if (layers_.empty()) {
    throw ContractError("AllocationProblem: at least one layer is required");
  }
  if (!(seconds_per_flop_ > 0.0) || !std::isfinite(seconds_per_flop_)) {
    throw ContractError("AllocationProblem: seconds_per_flop must be positive and finite");
  }
  if (layers_.size() < devices_.size()) {
    throw InfeasibleError("AllocationProblem: " + std::to_string(layers_.size()) +
                          " layers cannot cover " + std::to_string(devices_.size()) +
                          " devices with at least one layer each");
  }
}

void AllocationProblem::check(const PartitionIndex& pi) const {
  if (pi.device_count() != device_count() || pi.layer_count() != layer_count()) {
    throw ContractError("partition " + to_string(pi) + " does not match problem with D=" +
                        std::to_string(device_count()) + ", L=" + std::to_string(layer_count()));
  }
}

AllocationProblem AllocationProblem::reordered(std::span<const std::size_t> order) const {
  if (order.size() != devices_.size()) {
    throw ContractError("reordered: order must list every device exactly once");
  }
  std::vector<bool> seen(devices_.size(), false);
  std::vector<DeviceProfile> devices;
  devices.reserve(order.size());
  for (std::size_t idx : order) {
    if (idx >= devices_.size() || seen[idx]) {
      throw ContractError("reordered: order must be a permutation of device indices");
    }
    seen[idx] = true;
    devices.push_back(devices_[idx]);
  }
  return AllocationProblem(layers_, std::move(devices), seconds_per_flop_);
}

std::string_view to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::Even: return "even";
    case Strategy::Heuristic: return "heuristic";
    case Strategy::OptimalDp: return "optimal-dp";
    case Strategy::OptimalExhaustive: return "optimal-exhaustive";
    case Strategy::OptimalPermuted: return "optimal-permuted";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view text) {
  for (Strategy s : {Strategy::Even, Strategy::Heuristic, Strategy::OptimalDp,
                     Strategy::OptimalExhaustive, Strategy::OptimalPermuted}) {
    if (to_string(s) == text) return s;
  }
  throw ContractError("unknown strategy '" + std::string(text) + "'");
}

}  // namespace layeralloc
