#pragma once

#include <map>
#include <string>
#include <vector>

#include "network.hpp"

namespace snn {

// A compiled circuit plus a name map from construction roles to neuron ids.
struct BuildReport {
  Network network;
  std::map<std::string, NeuronId> roles;
  std::map<std::string, std::vector<NeuronId>> groups;
  std::map<std::string, double> params;
  std::map<std::string, std::string> notes;

  NeuronId role(const std::string& name) const {
    auto it = roles.find(name);
    if (it == roles.end()) throw std::out_of_range("no role '" + name + "'");
    return it->second;
  }
  const std::vector<NeuronId>& group(const std::string& name) const {
    auto it = groups.find(name);
    if (it == groups.end()) throw std::out_of_range("no group '" + name + "'");
    return it->second;
  }
  double param(const std::string& name) const { return params.at(name); }
};

// every labelled neuron becomes a role under its own label
inline void name_all(BuildReport& rep) {
  for (NeuronId i = 0; i < rep.network.size(); ++i) rep.roles[rep.network.neuron(i).label] = i;
}

}  // namespace snn
