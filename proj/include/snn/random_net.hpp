#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "coins.hpp"
#include "network.hpp"

namespace snn {

// Integer weights and biases keep potentials exact, so sums taken in a
// different synapse order (as in a synchronized copy) decide ties alike.
struct RandomNetSpec {
  int n = 10;              // auxiliary neurons
  int inputs = 2;
  double density = 0.3;    // probability of each possible edge
  int weight_max = 3;      // |w| drawn from 1..weight_max
  int bias_min = -1;
  int bias_max = 3;
  double inhibitory = 0.3;  // fraction of inhibitory neurons
  int stochastic = 0;       // the first `stochastic` auxiliaries get stochastic gates
  std::uint64_t seed = 0;
};

class Draws {
 public:
  explicit Draws(std::uint64_t seed) : coins_(seed) {}
  double uniform() { return coins_(0, next_++); }
  std::uint64_t bits() { return coins_.bits(1, next_++); }
  int in(int lo, int hi) { return lo + static_cast<int>(bits() % static_cast<std::uint64_t>(hi - lo + 1)); }

 private:
  CoinPlan coins_;
  std::uint64_t next_ = 0;
};

inline Network random_network(const RandomNetSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("random net needs at least one auxiliary neuron");
  if (spec.inputs < 0 || spec.weight_max < 1 || spec.bias_min > spec.bias_max)
    throw std::invalid_argument("bad random net spec");
  Draws d(spec.seed);
  NetworkBuilder b;
  std::vector<NeuronId> sources, aux;
  for (int i = 1; i <= spec.inputs; ++i) {
    Sign s = d.uniform() < spec.inhibitory ? Sign::inhibitory : Sign::excitatory;
    sources.push_back(b.input("x" + std::to_string(i), s));
  }
  for (int i = 1; i <= spec.n; ++i) {
    Sign s = d.uniform() < spec.inhibitory ? Sign::inhibitory : Sign::excitatory;
    Gate g = i <= spec.stochastic ? Gate::stochastic : Gate::deterministic;
    NeuronId u = b.add("v" + std::to_string(i), Kind::auxiliary, s, d.in(spec.bias_min, spec.bias_max), g);
    sources.push_back(u);
    aux.push_back(u);
  }
  for (auto src : sources)
    for (auto dst : aux)
      if (d.uniform() < spec.density) {
        double w = d.in(1, spec.weight_max);
        b.connect(src, dst, b.at(src).sign == Sign::inhibitory ? -w : w);
      }
  return b.build();
}

}  // namespace snn
