#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "coins.hpp"
#include "counter.hpp"
#include "report.hpp"
#include "simulate.hpp"
#include "timer.hpp"

namespace snn {

struct ApproxCounterParams {
  std::uint64_t t = 1000;
  double delta = 0.1;
  double alpha = 0;    // 0: 1 + delta
  std::uint64_t s = 0;  // 0: ceil(1 / (delta (alpha - 1)))
};

struct ApproxCounterLayout {
  double alpha;
  std::uint64_t s;        // requested small-count threshold
  int small_layers;       // the small counter overflows at 2^small_layers spikes
  std::uint64_t s_eff;    // = 2^small_layers
  std::uint64_t init;     // exponent loaded at the handoff
  int ac_layers;
  int wait_bits;
  int outputs;
};

inline ApproxCounterLayout approx_counter_layout(const ApproxCounterParams& p) {
  if (!(p.delta > 0 && p.delta < 1)) throw std::invalid_argument("delta must lie in (0,1)");
  if (!(1 / p.delta < static_cast<double>(p.t))) throw std::invalid_argument("need 1/delta < t");
  ApproxCounterLayout L{};
  L.alpha = p.alpha ? p.alpha : 1 + p.delta;
  if (!(L.alpha > 1)) throw std::invalid_argument("alpha must exceed 1");
  L.s = p.s ? p.s : static_cast<std::uint64_t>(std::ceil(1 / (p.delta * (L.alpha - 1)) - 1e-9));
  if (L.s < 2) throw std::invalid_argument("small-count threshold must be at least 2");
  L.small_layers = 1;
  while ((1ULL << L.small_layers) < L.s) ++L.small_layers;
  L.s_eff = 1ULL << L.small_layers;
  // alpha^init ~ s_eff (alpha - 1) + 1, the chain's mean after s_eff spikes
  L.init = static_cast<std::uint64_t>(
      std::ceil(std::log(static_cast<double>(L.s_eff) * (L.alpha - 1) + 1) / std::log(L.alpha) - 1e-9));
  const auto top = static_cast<std::uint64_t>(std::ceil(std::log(static_cast<double>(p.t)) / std::log(L.alpha)));
  L.ac_layers = counter_layers(std::max(top, L.init + 1));
  L.wait_bits = 1;
  while ((1 << L.wait_bits) <= L.ac_layers) ++L.wait_bits;
  L.outputs = std::max(L.small_layers, time_input_bits(p.t) + 2);
  return L;
}

// Morris-style approximate counter. Exact small counter up to s_eff spikes,
// then a counter of the exponent z incremented with probability 1/(1+alpha^z)
// through the single stochastic neuron a*. A wait timer blocks increments
// while the exponent counter settles; c'' holds the last settled value for
// the outputs.
inline BuildReport build_approx_counter(const ApproxCounterParams& p) {
  const auto Lo = approx_counter_layout(p);
  const double log2a = std::log2(Lo.alpha);
  const double lna = std::log(Lo.alpha);

  NetworkBuilder b;
  NeuronId x = b.input("x");

  // small counter and the switch to the large-count stage
  auto SC = add_det_counter(b, x, Lo.small_layers, "sc.");
  const NeuronId full = SC.second.back();
  NeuronId vI = b.aux("v_I", 1);
  b.connect(full, vI, 1);
  b.connect(vI, vI, 1);
  NeuronId vr = b.inhibitor("v_r", 1);
  b.connect(vI, vr, 1);
  b.connect(full, vr, 1);
  for (std::size_t i = 0; i < SC.first.size(); ++i)
    for (auto u : {SC.first[i], SC.second[i], SC.reset[i]}) b.connect(vr, u, -5);

  // exponent counter fed by x_ac
  NeuronId xac = b.aux("x_ac", 3);
  NeuronId xac_twin = b.inhibitor("x_ac'", 3);
  auto AC = add_det_counter(b, xac, Lo.ac_layers, "ac.");
  for (int i = 1; i <= Lo.ac_layers; ++i)
    if ((Lo.init >> (i - 1)) & 1ULL) b.connect(full, AC.first[i - 1], 5);

  NeuronId astar = b.add("a*", Kind::auxiliary, Sign::excitatory, 0.0, Gate::stochastic);
  std::vector<NeuronId> inhibit_copy;
  for (int i = 1; i <= Lo.ac_layers; ++i) {
    NeuronId h = b.inhibitor("ac." + indexed("h", i), 1);
    b.connect(AC.first[i - 1], h, 1);
    b.connect(h, astar, -std::ldexp(lna, i - 1));
    inhibit_copy.push_back(h);
  }
  for (auto u : {xac, xac_twin}) {
    b.connect(astar, u, 1);
    b.connect(x, u, 1);
    b.connect(vI, u, 1);
  }
  b.connect(xac_twin, xac, -5);

  // wait timer with time bits q_i sampled from c_{2^{i-1}}
  std::vector<NeuronId> q;
  for (int i = 1; i <= Lo.wait_bits; ++i) {
    NeuronId qi = b.aux("wt." + indexed("q", i), 1);
    b.connect(AC.first[(1 << (i - 1)) - 1], qi, 1);
    b.connect(qi, qi, 1);
    q.push_back(qi);
  }
  const std::uint64_t wait_max = std::max<std::uint64_t>(2, (1ULL << Lo.wait_bits) - 1);
  auto WT = add_param_timer(b, xac, q, wait_max, "wt.");
  for (auto qi : q) b.connect(WT.reset, qi, -2);
  NeuronId gr = b.inhibitor("g_r", 1);
  b.connect(xac, gr, 2);
  b.connect(WT.y, gr, 1);
  for (auto r : WT.stops) b.connect(r, gr, -1);
  b.connect(gr, xac, -5);
  b.connect(gr, xac_twin, -5);
  // g: one round after any stop of the wait timer
  NeuronId g = b.aux("g", 1);
  for (int i = 1; i <= WT.layers; ++i) {
    NeuronId e = b.aux("wt." + indexed("e", i), 1);
    NeuronId pulse = i == 1 ? xac : b.id("wt." + layer_name("a", i - 1, 2));
    b.connect(pulse, e, 1);
    b.connect(WT.late[i - 1], e, -1);
    b.connect(e, g, 1);
  }
  NeuronId clr = b.inhibitor("c_clr", 1);
  b.connect(g, clr, 1);

  std::vector<NeuronId> c1, c2;
  for (int i = 1; i <= Lo.ac_layers; ++i) {
    NeuronId a = b.aux(indexed("c'", i), 2);
    b.connect(AC.first[i - 1], a, 1);
    b.connect(g, a, 1);
    NeuronId h = b.aux(indexed("c''", i), 1);
    b.connect(a, h, 2);
    b.connect(h, h, 1);
    b.connect(clr, h, -1);
    if ((Lo.init >> (i - 1)) & 1ULL) b.connect(full, h, 2);
    c1.push_back(a);
    c2.push_back(h);
  }

  // outputs: exact bits while v_I is silent, y_i = [log2(alpha) z - log2(alpha-1) >= i] after
  const double gate = std::max(0.0, -std::log2(Lo.alpha - 1)) + 1;
  std::vector<NeuronId> ys;
  for (int i = 1; i <= Lo.outputs; ++i) {
    const double bias = i + std::log2(Lo.alpha - 1) + gate;
    NeuronId y = b.output(indexed("y", i), bias);
    b.connect(vI, y, gate);
    for (int j = 1; j <= Lo.ac_layers; ++j) b.connect(c2[j - 1], y, std::ldexp(log2a, j - 1));
    if (i <= Lo.small_layers) b.connect(SC.first[i - 1], y, bias);
    ys.push_back(y);
  }

  BuildReport rep{b.build(), {}, {}, {}, {}};
  name_all(rep);
  rep.roles["sc_full"] = full;
  rep.roles["wt.g"] = g;
  for (int i = 1; i <= Lo.ac_layers; ++i) rep.roles[indexed("c", i)] = AC.first[i - 1];
  rep.groups["y"] = ys;
  rep.groups["small"] = SC.first;
  rep.groups["ac"] = AC.first;
  rep.groups["hold"] = c2;
  rep.groups["q"] = q;
  rep.params["t"] = static_cast<double>(p.t);
  rep.params["delta"] = p.delta;
  rep.params["alpha"] = Lo.alpha;
  rep.params["s"] = static_cast<double>(Lo.s);
  rep.params["s_eff"] = static_cast<double>(Lo.s_eff);
  rep.params["init"] = static_cast<double>(Lo.init);
  rep.params["ac_layers"] = Lo.ac_layers;
  rep.params["wait_max"] = static_cast<double>(wait_max);
  return rep;
}

// Exact positional value while the small counter is in use, 2^{S+1}-2 for the
// largest fired output index S afterwards.
inline std::uint64_t decode_estimate(const ExecutionTrace& trace, const BuildReport& rep, std::uint64_t round) {
  if (round >= trace.rounds()) throw std::out_of_range("round outside the trace");
  const auto& ys = rep.group("y");
  const bool large = round > 0 && trace.fired(round - 1, rep.role("v_I"));
  if (!large) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < ys.size(); ++i)
      if (trace.fired(round, ys[i])) v |= 1ULL << i;
    return v;
  }
  int S = 0;
  for (std::size_t i = 0; i < ys.size(); ++i)
    if (trace.fired(round, ys[i])) S = static_cast<int>(i) + 1;
  return (2ULL << S) - 2;
}

// exponent held by the counter a*-loop, read from its settled copy c''
inline std::uint64_t decode_exponent(const ExecutionTrace& trace, const BuildReport& rep, std::uint64_t round) {
  const auto& h = rep.group("hold");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < h.size(); ++i)
    if (trace.fired(round, h[i])) v |= 1ULL << i;
  return v;
}

struct MorrisChainState {
  std::uint64_t z = 0;
  std::uint64_t n = 0;
};

// plain chain: z <- z + 1 with probability 1/(1 + alpha^z), n times
inline MorrisChainState morris_oracle(std::uint64_t n, double alpha, std::uint64_t init_z, std::uint64_t seed) {
  CoinPlan coins(seed);
  MorrisChainState st{init_z, 0};
  for (std::uint64_t i = 0; i < n; ++i) {
    const double p = 1 / (1 + std::pow(alpha, static_cast<double>(st.z)));
    if (coins(0, i) < p) ++st.z;
    ++st.n;
  }
  return st;
}

}  // namespace snn
