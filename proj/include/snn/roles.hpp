#pragma once

#include <string>

#include "json.hpp"
#include "report.hpp"

namespace snn {

// Roles sidecar: roles and groups are stored by label so the file stays
// valid for any network that keeps the labels (e.g. after assign-latencies).
inline nlohmann::json roles_to_json(const BuildReport& rep) {
  nlohmann::json j;
  j["roles"] = nlohmann::json::object();
  for (const auto& [name, id] : rep.roles)
    if (rep.network.neuron(id).label != name) j["roles"][name] = rep.network.neuron(id).label;
  j["groups"] = nlohmann::json::object();
  for (const auto& [name, ids] : rep.groups) {
    auto& arr = j["groups"][name] = nlohmann::json::array();
    for (auto id : ids) arr.push_back(rep.network.neuron(id).label);
  }
  j["params"] = rep.params;
  j["notes"] = rep.notes;
  return j;
}

inline BuildReport report_from_json(Network net, const nlohmann::json& j) {
  BuildReport rep{std::move(net), {}, {}, {}, {}};
  name_all(rep);
  if (j.contains("roles"))
    for (const auto& [name, label] : j["roles"].items()) rep.roles[name] = rep.network.id(label.get<std::string>());
  if (j.contains("groups"))
    for (const auto& [name, labels] : j["groups"].items()) {
      auto& ids = rep.groups[name];
      for (const auto& l : labels) ids.push_back(rep.network.id(l.get<std::string>()));
    }
  if (j.contains("params")) rep.params = j["params"].get<std::map<std::string, double>>();
  if (j.contains("notes")) rep.notes = j["notes"].get<std::map<std::string, std::string>>();
  return rep;
}

}  // namespace snn
