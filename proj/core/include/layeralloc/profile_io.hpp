#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "layeralloc/types.hpp"

namespace layeralloc {

struct ProfileSet {
  std::vector<LayerProfile> layers;
  std::vector<DeviceProfile> devices;
};

/// Serialises to
///   {"layers": [{"name", "flops", "mem_bytes"}, ...],
///    "devices": [{"bench_time", "mem_bytes", "comm_latency"}, ...]}
/// with keys in that order.
std::string profiles_to_json(const ProfileSet& profiles, int indent = 2);

/// Parses the document written by profiles_to_json. A missing "name" is
/// read as empty and a missing "comm_latency" as 0; everything else is
/// required. Throws ContractError on malformed input or invariant breaches.
ProfileSet profiles_from_json(std::string_view text);

}  // namespace layeralloc
