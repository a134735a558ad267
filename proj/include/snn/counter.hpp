#pragma once

#include <cstdint>
#include <stdexcept>

#include "report.hpp"
#include "simulate.hpp"
#include "timer.hpp"

namespace snn {

struct CounterParams {
  std::uint64_t t = 2;
};

// layers needed to hold counts up to t
inline int counter_layers(std::uint64_t t) {
  int k = 1;
  while (k < 63 && (1ULL << k) <= t) ++k;
  return k;
}

// Binary spike counter: a_{i,1} holds bit i of the number of x spikes.
// Builds into b under prefix so that larger circuits can embed it.
inline CountingLayers add_det_counter(NetworkBuilder& b, NeuronId x, int layers, const std::string& prefix = "",
                                      double input_weight = 4) {
  CountingLayers L;
  NeuronId a11 = b.aux(prefix + layer_name("a", 1, 1), 1);
  NeuronId a12 = b.aux(prefix + layer_name("a", 1, 2), 2);
  NeuronId d1 = b.inhibitor(prefix + indexed("d", 1), 2);
  b.connect(x, a11, input_weight);
  b.connect(a11, a11, 1);
  b.connect(d1, a11, -1);
  b.connect(x, a12, 1);
  b.connect(a11, a12, 1);
  b.connect(d1, a12, -2);
  b.connect(x, d1, 1);
  b.connect(a11, d1, 1);
  b.connect(d1, d1, -2);
  L.first.push_back(a11);
  L.second.push_back(a12);
  L.reset.push_back(d1);
  if (layers >= 2) add_upper_layers(b, L, 2, layers, prefix, false);
  return L;
}

inline BuildReport build_det_counter(const CounterParams& p) {
  if (p.t < 2) throw std::invalid_argument("counter needs t >= 2");
  const int k = counter_layers(p.t);
  NetworkBuilder b;
  NeuronId x = b.input("x");
  auto L = add_det_counter(b, x, k);
  std::vector<NeuronId> ys;
  for (int i = 1; i <= k; ++i) {
    NeuronId y = b.output(indexed("y", i), 1);
    b.connect(L.first[i - 1], y, 1);
    ys.push_back(y);
  }
  BuildReport rep{b.build(), {}, {}, {}, {}};
  name_all(rep);
  rep.groups["first"] = L.first;
  rep.groups["second"] = L.second;
  rep.groups["reset"] = L.reset;
  rep.groups["y"] = ys;
  rep.params["t"] = static_cast<double>(p.t);
  rep.params["layers"] = k;
  return rep;
}

// sum of 2^{i-1} over the a_{i,1} that fired in the given round
inline std::uint64_t decode_counter(const ExecutionTrace& trace, const BuildReport& rep, std::uint64_t round) {
  if (round >= trace.rounds()) throw std::out_of_range("round outside the trace");
  const auto& bits = rep.group("first");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (trace.fired(round, bits[i])) v |= 1ULL << i;
  return v;
}

// update delay bound: counts settle by the last spike plus floor(log2 n) + 1
inline std::uint64_t counter_delay(std::uint64_t n) {
  std::uint64_t d = 1;
  while (n >>= 1) ++d;
  return d;
}

}  // namespace snn
