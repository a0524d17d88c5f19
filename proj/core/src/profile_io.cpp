#include "layeralloc/profile_io.hpp"

#include <json.hpp>

namespace layeralloc {

using ordered_json = nlohmann::ordered_json;

std::string profiles_to_json(const ProfileSet& profiles, int indent) {
  ordered_json doc;
  doc["layers"] = ordered_json::array();
  for (const auto& l : profiles.layers) {
    doc["layers"].push_back({{"name", l.name()}, {"flops", l.flops()}, {"mem_bytes", l.mem_bytes()}});
  }
  doc["devices"] = ordered_json::array();
  for (const auto& d : profiles.devices) {
    doc["devices"].push_back({{"bench_time", d.bench_time()},
                              {"mem_bytes", d.mem_bytes()},
                              {"comm_latency", d.comm_latency()}});
  }
  return doc.dump(indent);
}

ProfileSet profiles_from_json(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ContractError(std::string("profiles: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ContractError("profiles: top level must be an object");

  ProfileSet out;
  try {
    for (const auto& l : doc.at("layers")) {
      out.layers.emplace_back(l.value("name", std::string{}), l.at("flops").get<double>(),
                              l.at("mem_bytes").get<std::uint64_t>());
    }
    for (const auto& d : doc.at("devices")) {
      out.devices.emplace_back(d.at("bench_time").get<double>(),
                               d.at("mem_bytes").get<std::uint64_t>(),
                               d.value("comm_latency", 0.0));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ContractError(std::string("profiles: schema error: ") + e.what());
  }
  return out;
}

}  // namespace layeralloc
