#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace snn {

using NeuronId = std::uint32_t;

enum class Kind { input, output, auxiliary };
enum class Gate { deterministic, stochastic };
enum class Sign { excitatory, inhibitory };
enum class Mode { synchronous, asynchronous };

struct Neuron {
  std::string label;
  Kind kind = Kind::auxiliary;
  Gate gate = Gate::deterministic;
  Sign sign = Sign::excitatory;
  double bias = 0.0;
  // stochastic gates draw coin (seed, coin_key, index); index is the round,
  // or the phase count of the network's phase clock when phase_coins is set
  std::uint64_t coin_key = 0;
  bool phase_coins = false;
};

struct Synapse {
  NeuronId source = 0;
  NeuronId target = 0;
  double weight = 0.0;
  int latency = 1;
};

// Phase counter used by phase-keyed coins: at round r the index is
// 1 + #{rounds p in [1, r - lag] where `neuron` fired}.
struct PhaseClock {
  NeuronId neuron = 0;
  int lag = 1;
};

// Immutable network. Neuron ids are dense ranks 0..size()-1.
class Network {
 public:
  Network() = default;

  Network(Mode mode, std::vector<Neuron> neurons, std::vector<Synapse> synapses,
          std::optional<PhaseClock> clock = std::nullopt)
      : mode_(mode), neurons_(std::move(neurons)), synapses_(std::move(synapses)), clock_(clock) {
    std::sort(synapses_.begin(), synapses_.end(), [](const Synapse& a, const Synapse& b) {
      return a.source != b.source ? a.source < b.source : a.target < b.target;
    });
    index();
  }

  Mode mode() const { return mode_; }
  std::size_t size() const { return neurons_.size(); }
  const std::vector<Neuron>& neurons() const { return neurons_; }
  const Neuron& neuron(NeuronId id) const { return neurons_.at(id); }
  const std::vector<Synapse>& synapses() const { return synapses_; }
  const std::optional<PhaseClock>& phase_clock() const { return clock_; }

  // largest latency on any synapse (1 for an edgeless network)
  int max_latency() const { return max_latency_; }

  // incoming synapses of u, as indices into synapses()
  const std::vector<std::uint32_t>& incoming(NeuronId u) const { return in_.at(u); }

  std::optional<NeuronId> find(const std::string& label) const {
    auto it = by_label_.find(label);
    if (it == by_label_.end()) return std::nullopt;
    return it->second;
  }

  NeuronId id(const std::string& label) const {
    auto found = find(label);
    if (!found) throw std::out_of_range("no neuron labelled '" + label + "'");
    return *found;
  }

  std::vector<NeuronId> of_kind(Kind k) const {
    std::vector<NeuronId> out;
    for (NeuronId i = 0; i < neurons_.size(); ++i)
      if (neurons_[i].kind == k) out.push_back(i);
    return out;
  }

  std::size_t count_kind(Kind k) const { return of_kind(k).size(); }

  std::size_t count_gate(Gate g) const {
    return static_cast<std::size_t>(std::count_if(neurons_.begin(), neurons_.end(),
                                                  [g](const Neuron& n) { return n.gate == g; }));
  }

  bool deterministic() const { return count_gate(Gate::stochastic) == 0; }

 private:
  void index() {
    in_.assign(neurons_.size(), {});
    max_latency_ = 1;
    for (std::uint32_t e = 0; e < synapses_.size(); ++e) {
      const auto& s = synapses_[e];
      if (s.target < neurons_.size()) in_[s.target].push_back(e);
      max_latency_ = std::max(max_latency_, s.latency);
    }
    by_label_.clear();
    for (NeuronId i = 0; i < neurons_.size(); ++i) by_label_.emplace(neurons_[i].label, i);
  }

  Mode mode_ = Mode::synchronous;
  std::vector<Neuron> neurons_;
  std::vector<Synapse> synapses_;
  std::optional<PhaseClock> clock_;
  std::vector<std::vector<std::uint32_t>> in_;
  std::unordered_map<std::string, NeuronId> by_label_;
  int max_latency_ = 1;
};

struct Violation {
  std::string kind;  // sign, input-in-degree, self-loop-latency, dangling, latency, bias, ...
  std::string message;
};

using ValidationReport = std::vector<Violation>;

inline const char* to_string(Kind k) {
  switch (k) {
    case Kind::input: return "input";
    case Kind::output: return "output";
    default: return "auxiliary";
  }
}
inline const char* to_string(Gate g) { return g == Gate::stochastic ? "stochastic" : "deterministic"; }
inline const char* to_string(Sign s) { return s == Sign::inhibitory ? "inhibitory" : "excitatory"; }
inline const char* to_string(Mode m) { return m == Mode::asynchronous ? "asynchronous" : "synchronous"; }

inline ValidationReport validate(const Network& net) {
  ValidationReport out;
  const auto n = net.size();
  auto name = [&](NeuronId id) {
    return id < n ? net.neuron(id).label : "#" + std::to_string(id);
  };
  std::map<std::string, int> labels;
  for (NeuronId i = 0; i < n; ++i) {
    const auto& u = net.neuron(i);
    if (!std::isfinite(u.bias)) out.push_back({"bias", "non-finite bias on " + u.label});
    if (u.kind == Kind::input && u.gate == Gate::stochastic)
      out.push_back({"input-gate", "input neuron " + u.label + " is stochastic"});
    if (++labels[u.label] == 2) out.push_back({"label", "duplicate label " + u.label});
  }
  if (net.phase_clock() && net.phase_clock()->neuron >= n)
    out.push_back({"dangling", "phase clock refers to a missing neuron"});
  const Synapse* prev = nullptr;
  for (const auto& s : net.synapses()) {
    std::string edge = name(s.source) + "->" + name(s.target);
    if (s.source >= n || s.target >= n) {
      out.push_back({"dangling", "synapse " + edge + " refers to a missing neuron"});
      continue;
    }
    if (prev && prev->source == s.source && prev->target == s.target)
      out.push_back({"duplicate", "parallel synapse " + edge});
    prev = &s;
    const auto& src = net.neuron(s.source);
    if (!std::isfinite(s.weight)) out.push_back({"weight", "non-finite weight on " + edge});
    if (src.sign == Sign::inhibitory && s.weight > 0)
      out.push_back({"sign", "inhibitory " + src.label + " has positive edge " + edge});
    if (src.sign == Sign::excitatory && s.weight < 0)
      out.push_back({"sign", "excitatory " + src.label + " has negative edge " + edge});
    if (net.neuron(s.target).kind == Kind::input)
      out.push_back({"input-in-degree", "synapse " + edge + " targets an input neuron"});
    if (s.latency < 1) out.push_back({"latency", "latency below 1 on " + edge});
    if (net.mode() == Mode::synchronous && s.latency != 1)
      out.push_back({"latency", "synchronous network has latency " + std::to_string(s.latency) + " on " + edge});
    if (net.mode() == Mode::asynchronous && s.source == s.target && s.latency != 1)
      out.push_back({"self-loop-latency", "self-loop on " + src.label + " has latency " + std::to_string(s.latency)});
  }
  return out;
}

inline bool valid(const Network& net) { return validate(net).empty(); }

// Incremental construction; labels must be unique.
class NetworkBuilder {
 public:
  NeuronId add(const std::string& label, Kind kind, Sign sign, double bias,
               Gate gate = Gate::deterministic) {
    if (ids_.count(label)) throw std::invalid_argument("duplicate label " + label);
    NeuronId id = static_cast<NeuronId>(neurons_.size());
    Neuron u;
    u.label = label;
    u.kind = kind;
    u.gate = gate;
    u.sign = sign;
    u.bias = bias;
    u.coin_key = id;
    neurons_.push_back(u);
    ids_[label] = id;
    return id;
  }

  NeuronId input(const std::string& label, Sign sign = Sign::excitatory) {
    return add(label, Kind::input, sign, 0.0);
  }
  NeuronId aux(const std::string& label, double bias, Sign sign = Sign::excitatory) {
    return add(label, Kind::auxiliary, sign, bias);
  }
  NeuronId inhibitor(const std::string& label, double bias) {
    return add(label, Kind::auxiliary, Sign::inhibitory, bias);
  }
  NeuronId output(const std::string& label, double bias, Sign sign = Sign::excitatory) {
    return add(label, Kind::output, sign, bias);
  }

  // adds w to an existing edge instead of creating a parallel one
  void connect(NeuronId from, NeuronId to, double w, int latency = 1) {
    auto key = std::make_pair(from, to);
    auto it = edge_.find(key);
    if (it != edge_.end()) {
      synapses_[it->second].weight += w;
      return;
    }
    edge_[key] = synapses_.size();
    synapses_.push_back({from, to, w, latency});
  }

  Neuron& at(NeuronId id) { return neurons_.at(id); }
  NeuronId id(const std::string& label) const { return ids_.at(label); }
  bool has(const std::string& label) const { return ids_.count(label) > 0; }
  std::size_t size() const { return neurons_.size(); }
  void set_phase_clock(PhaseClock c) { clock_ = c; }

  Network build(Mode mode = Mode::synchronous) const {
    return Network(mode, neurons_, synapses_, clock_);
  }

 private:
  std::vector<Neuron> neurons_;
  std::vector<Synapse> synapses_;
  std::map<std::pair<NeuronId, NeuronId>, std::size_t> edge_;
  std::map<std::string, NeuronId> ids_;
  std::optional<PhaseClock> clock_;
};

}  // namespace snn
