#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "coins.hpp"
#include "network.hpp"
#include "report.hpp"
#include "timer.hpp"

namespace snn {

// neurons on the layer-1 ring between a_{1,1} and a_{1,2}
inline int async_ring_chain(int L) { return std::max(4 * L, L * L + L); }

// smallest k with 2^{k-1} * (ring edges) >= t
inline int async_timer_layers(std::uint64_t t, int L) {
  const std::uint64_t ring = static_cast<std::uint64_t>(async_ring_chain(L)) + 2;
  int k = 1;
  while ((ring << (k - 1)) < t) ++k;
  return k;
}

// rounds from the start spike to the first a_{k,2} spike, worst case over
// latencies in [1, L] (the best case is (ring edges) * 2^{k-1})
inline std::uint64_t async_divider_upper(int k, int L) {
  const std::uint64_t ring = static_cast<std::uint64_t>(async_ring_chain(L)) + 2;
  return static_cast<std::uint64_t>(L) * (ring << (k - 1)) + static_cast<std::uint64_t>(k) * L;
}

struct AsyncDivider {
  CountingLayers layers;
  std::vector<NeuronId> gates, mirrors;
  std::vector<NeuronId> neurons;  // everything the divider owns
  NeuronId out = 0;               // a_{k,2}
};

// Ring plus k-1 halving layers; start -> a_{1,1} with weight 3.
// Layer 1 is a ring through a chain of neurons, so a_{1,2} fires with a
// fixed period of at least the ring length. Layer i >= 2 halves the rate of
// a_{i-1,2}: a pulse sets the latch a_{i,1} only through the gate s_i, which
// is closed by k_i (delayed inhibitory mirror of a_{i,1}) while the latch is
// on, and a pulse that finds the latch on fires a_{i,2} and clears it through
// d_i. The chain of L-2 neurons after s_i makes the latch's own signal reach
// a_{i,2} after the pulse that set it.
inline AsyncDivider add_async_divider(NetworkBuilder& b, std::optional<NeuronId> start, int k, int L,
                                      const std::string& prefix) {
  AsyncDivider D;
  auto chain = [&](NeuronId from, int len, const std::string& name) {
    NeuronId prev = from;
    for (int j = 1; j <= len; ++j) {
      NeuronId u = b.aux(prefix + name + "[" + std::to_string(j) + "]", 1);
      b.connect(prev, u, 1);
      D.neurons.push_back(u);
      prev = u;
    }
    return prev;
  };

  NeuronId a11 = b.aux(prefix + layer_name("a", 1, 1), 1);
  NeuronId a12 = b.aux(prefix + layer_name("a", 1, 2), 1);
  D.neurons.push_back(a11);
  D.neurons.push_back(a12);
  if (start) b.connect(*start, a11, 3);
  NeuronId end1 = chain(a11, async_ring_chain(L), "h_1");
  b.connect(end1, a12, 1);
  b.connect(a12, a11, 1);
  D.layers.first.push_back(a11);
  D.layers.second.push_back(a12);

  for (int i = 2; i <= k; ++i) {
    NeuronId prev = D.layers.second.back();
    NeuronId a1 = b.aux(prefix + layer_name("a", i, 1), 1);
    NeuronId a2 = b.aux(prefix + layer_name("a", i, 2), 2);
    NeuronId d = b.inhibitor(prefix + indexed("d", i), 1);
    NeuronId m = b.inhibitor(prefix + indexed("k", i), 1);
    NeuronId g = b.aux(prefix + indexed("s", i), 1);
    for (auto u : {a1, a2, d, m, g}) D.neurons.push_back(u);
    b.connect(prev, g, 1);
    b.connect(m, g, -1);
    NeuronId end = chain(g, std::max(0, L - 2), indexed("h", i));
    b.connect(end, a1, 1);
    b.connect(a1, a1, 1);
    b.connect(d, a1, -1);
    b.connect(a1, m, 1);
    b.connect(prev, a2, 1);
    b.connect(a1, a2, 1);
    b.connect(a2, d, 1);
    D.layers.first.push_back(a1);
    D.layers.second.push_back(a2);
    D.layers.reset.push_back(d);
    D.gates.push_back(g);
    D.mirrors.push_back(m);
  }
  D.out = D.layers.second.back();
  return D;
}

// Shuts a divider down after its first output: latch q holds, inhibitor r
// silences every divider neuron while q is on. Returns (q, r).
inline std::pair<NeuronId, NeuronId> add_divider_stop(NetworkBuilder& b, const AsyncDivider& D,
                                                     const std::string& prefix) {
  NeuronId q = b.aux(prefix + "q", 1);
  NeuronId r = b.inhibitor(prefix + "r", 1);
  b.connect(D.out, q, 1);
  b.connect(q, q, 1);
  b.connect(q, r, 1);
  for (auto u : D.neurons) b.connect(r, u, -5);
  return {q, r};
}

// Timer for bounded edge latencies: after x fires, y fires once, somewhere
// in [t, 5Lt].
inline BuildReport build_det_timer_async(std::uint64_t t, int L) {
  if (L < 1) throw std::invalid_argument("latency bound must be at least 1");
  if (t < 4ULL * L) throw std::invalid_argument("async timer needs t >= 4L");
  const int k = async_timer_layers(t, L);

  NetworkBuilder b;
  NeuronId x = b.input("x");
  NeuronId y = b.output("y", 1);
  AsyncDivider D = add_async_divider(b, x, k, L, "");
  b.connect(D.out, y, 1);
  auto [q, r] = add_divider_stop(b, D, "");

  BuildReport rep{b.build(Mode::asynchronous), {}, {}, {}, {}};
  name_all(rep);
  rep.groups["first"] = D.layers.first;
  rep.groups["second"] = D.layers.second;
  rep.groups["reset"] = D.layers.reset;
  rep.groups["gates"] = D.gates;
  rep.groups["mirrors"] = D.mirrors;
  rep.groups["timer"] = D.neurons;
  rep.roles["stop"] = r;
  rep.roles["hold"] = q;
  rep.params["t"] = static_cast<double>(t);
  rep.params["L"] = L;
  rep.params["layers"] = k;
  rep.params["ring"] = async_ring_chain(L) + 2;
  rep.params["upper"] = static_cast<double>(async_divider_upper(k, L));
  return rep;
}

enum class LatencyKind { uniform, random_in, adversarial_sync_timer };

struct LatencyPolicy {
  LatencyKind kind = LatencyKind::uniform;
  int L = 1;
  std::uint64_t seed = 0;

  static LatencyPolicy uniform(int L) { return {LatencyKind::uniform, L, 0}; }
  static LatencyPolicy random_in(int L, std::uint64_t seed) { return {LatencyKind::random_in, L, seed}; }
  static LatencyPolicy adversarial_sync_timer() { return {LatencyKind::adversarial_sync_timer, 2, 0}; }
};

// Returns an asynchronous copy of net with latencies set by the policy;
// self-loops keep latency 1.
inline Network assign_latencies(const Network& net, const LatencyPolicy& policy) {
  if (policy.L < 1) throw std::invalid_argument("latency bound must be at least 1");
  std::vector<Synapse> syn = net.synapses();
  switch (policy.kind) {
    case LatencyKind::uniform:
      for (auto& s : syn) s.latency = s.source == s.target ? 1 : policy.L;
      break;
    case LatencyKind::random_in: {
      CoinPlan coins(policy.seed);
      for (std::size_t e = 0; e < syn.size(); ++e) {
        auto& s = syn[e];
        s.latency = s.source == s.target ? 1 : 1 + static_cast<int>(coins.bits(e, 0) % policy.L);
      }
      break;
    }
    case LatencyKind::adversarial_sync_timer: {
      std::vector<std::pair<NeuronId, NeuronId>> slow;
      for (int i = 2;; ++i) {
        auto prev = net.find(layer_name("a", i - 1, 2));
        auto cur = net.find(layer_name("a", i, 2));
        if (!prev || !cur) break;
        slow.emplace_back(*prev, *cur);
      }
      if (slow.empty()) throw std::invalid_argument("network has no a_{i-1,2} -> a_{i,2} edges");
      for (auto& s : syn) {
        s.latency = 1;
        for (auto [u, v] : slow)
          if (s.source == u && s.target == v) s.latency = 2;
      }
      break;
    }
  }
  std::vector<Neuron> neurons;
  for (NeuronId i = 0; i < net.size(); ++i) neurons.push_back(net.neuron(i));
  return Network(Mode::asynchronous, std::move(neurons), std::move(syn), net.phase_clock());
}

}  // namespace snn
