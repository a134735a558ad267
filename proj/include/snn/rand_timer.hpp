#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "counter.hpp"
#include "report.hpp"
#include "timer.hpp"

namespace snn {

struct RandTimerParams {
  std::uint64_t t = 2;
  double delta = 0.05;
  std::uint64_t ell = 0;      // 0: ceil(chernoff_constant * ln(1/delta))
  std::uint64_t t_prime = 0;  // improved timer only; 0: ceil(t / phase length)
  double chernoff_constant = 24;
  double bias_constant = 3;
};

inline std::uint64_t population_size(const RandTimerParams& p) {
  if (p.ell) return p.ell;
  if (!(p.delta > 0 && p.delta < 1)) throw std::invalid_argument("delta must lie in (0,1)");
  return static_cast<std::uint64_t>(std::ceil(p.chernoff_constant * std::log(1 / p.delta)));
}

namespace detail {

// Pr[Bin(n, p) >= k]
inline double binomial_upper_tail(std::uint64_t n, double p, double k) {
  double sum = 0;
  const double lp = std::log(p), lq = std::log1p(-p);
  for (std::uint64_t j = static_cast<std::uint64_t>(std::ceil(k)); j <= n; ++j)
    sum += std::exp(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) + j * lp + (n - j) * lq);
  return std::min(sum, 1.0);
}

}  // namespace detail

// Smallest population for which both failure modes of the population timer
// (too few neurons alive after t-1 rounds, enough alive after 2t-1 rounds)
// have exact binomial probability at most delta/2.
inline std::uint64_t size_population(std::uint64_t t, double delta, std::uint64_t limit = 100000) {
  if (t < 2 || !(delta > 0 && delta < 1)) throw std::invalid_argument("need t >= 2 and delta in (0,1)");
  const double q = 1 - 1 / static_cast<double>(t);
  const double early = std::pow(q, static_cast<double>(t - 1));
  const double late = std::pow(q, static_cast<double>(2 * t - 1));
  for (std::uint64_t ell = 2; ell <= limit; ++ell) {
    const double quorum = static_cast<double>(ell) / (2 * std::exp(1.0));
    const double miss = 1 - detail::binomial_upper_tail(ell, early, quorum);
    const double linger = detail::binomial_upper_tail(ell, late, quorum);
    if (miss <= delta / 2 && linger <= delta / 2) return ell;
  }
  throw std::runtime_error("no population size below the limit");
}

// Population of l stochastic neurons that each keep firing with probability
// 1 - 1/t; y fires while at least l/2e of them fired in the previous round.
inline BuildReport build_rand_basic(const RandTimerParams& p) {
  if (p.t < 2) throw std::invalid_argument("randomized timer needs t >= 2");
  if (!(p.delta > 0 && p.delta < 1)) throw std::invalid_argument("delta must lie in (0,1)");
  const std::uint64_t ell = population_size(p);
  const double t = static_cast<double>(p.t);
  const double bias = p.bias_constant * std::log(t * static_cast<double>(ell) / p.delta);
  const double w = std::log(t - 1) + bias;
  const double quorum = static_cast<double>(ell) / (2 * std::exp(1.0));

  NetworkBuilder b;
  NeuronId x = b.input("x");
  NeuronId y = b.output("y", quorum);
  b.connect(x, y, quorum);
  std::vector<NeuronId> pop;
  for (std::uint64_t i = 1; i <= ell; ++i) {
    NeuronId a = b.add(indexed("a", static_cast<int>(i)), Kind::auxiliary, Sign::excitatory, bias, Gate::stochastic);
    b.connect(x, a, w);
    b.connect(a, a, w);
    b.connect(a, y, 1);
    pop.push_back(a);
  }
  BuildReport rep{b.build(), {}, {}, {}, {}};
  name_all(rep);
  rep.groups["population"] = pop;
  rep.params["t"] = t;
  rep.params["delta"] = p.delta;
  rep.params["ell"] = static_cast<double>(ell);
  rep.params["bias"] = bias;
  rep.params["quorum"] = quorum;
  rep.params["chernoff_constant"] = p.chernoff_constant;
  rep.params["bias_constant"] = p.bias_constant;
  return rep;
}

namespace detail {

inline int bits_for(std::uint64_t v) {
  int m = 0;
  while (v >> m) ++m;
  return std::max(m, 1);
}

}  // namespace detail

// Single stochastic neuron a* re-sampled over time. Each phase replays one
// round of the population timer: a* attempts once per two-round slot, as
// many times as it fired in the previous phase, and y fires while that count
// is at least l/2e.
//
// Phase layout, E = round the phase clock's last layer fires:
//   E+1   cleanup inhibitor clears register, held count and phase counter;
//         copy neurons read the phase counter; delay d fires
//   E+2   held count q and countdown register loaded; phase clock restarted
//   E+3+2j  clock tick (a_{1,2}) j = 0,1,...; borrow gates and z_1 fire one
//         round later, a* attempts and the register decrements the round after
inline BuildReport build_rand_improved(const RandTimerParams& p) {
  if (p.t < 2) throw std::invalid_argument("randomized timer needs t >= 2");
  if (!(p.delta > 0 && p.delta < 1)) throw std::invalid_argument("delta must lie in (0,1)");
  const std::uint64_t ell = population_size(p);
  if (ell < 2) throw std::invalid_argument("population size must be at least 2");
  const int m = detail::bits_for(ell);

  // phase clock: smallest exact timer covering 2l attempt rounds plus the
  // counter's settling time and the load/handoff rounds
  const std::uint64_t min_phase = 2 * ell + static_cast<std::uint64_t>(m) + 4;
  int k = 1;
  while ((1ULL << k) + k < min_phase) ++k;
  const std::uint64_t phase = (1ULL << k) + k;
  if (p.t < phase && p.t_prime == 0) throw std::invalid_argument("t is shorter than one phase");
  const std::uint64_t t_prime = p.t_prime ? p.t_prime : (p.t + phase - 1) / phase;
  if (t_prime < 2) throw std::invalid_argument("phase count t' must be at least 2");

  const double bias = p.bias_constant * std::log(static_cast<double>(ell) * static_cast<double>(p.t) / p.delta);
  const double quorum = static_cast<double>(ell) / (2 * std::exp(1.0));

  NetworkBuilder b;
  NeuronId x = b.input("x");
  NeuronId y = b.output("y", quorum);
  NeuronId x1 = b.inhibitor("x_1", 1);
  NeuronId x2 = b.aux("x_2", 1);
  b.connect(x, x1, 1);
  b.connect(x, x2, 1);

  // phase clock
  CountingLayers G;
  NeuronId g11 = b.aux("g." + layer_name("a", 1, 1), 1);
  NeuronId g12 = b.aux("g." + layer_name("a", 1, 2), 1);
  G.first.push_back(g11);
  G.second.push_back(g12);
  b.connect(g12, g11, 1);
  b.connect(g11, g12, 1);
  if (k >= 2) add_upper_layers(b, G, 2, k, "g.", false);
  NeuronId g_end = G.second.back();
  NeuronId g_clean = k >= 2 ? G.reset.back() : b.inhibitor("g.e", 1);
  if (k == 1) b.connect(g11, g_clean, 1);
  NeuronId d = b.aux("d", 1);
  b.connect(g_end, d, 1);
  b.connect(d, g11, 3);
  b.connect(x2, g11, 6);
  const NeuronId tick = g12;

  // held count and countdown register with inhibitory twins
  std::vector<NeuronId> q, reg, twin, down, up;
  for (int i = 1; i <= m; ++i) {
    NeuronId qi = b.aux(indexed("q", i), 1);
    b.connect(qi, qi, 1);
    q.push_back(qi);
    NeuronId ri = b.aux(indexed("v", i), 1);
    NeuronId ni = b.inhibitor(indexed("n", i), 1);
    b.connect(ri, ri, 1);
    b.connect(ri, ni, 1);
    reg.push_back(ri);
    twin.push_back(ni);
  }
  for (int i = 1; i <= m; ++i) {
    // lowest set bit goes down
    NeuronId ki = b.inhibitor(indexed("k", i), 2);
    b.connect(tick, ki, 1);
    b.connect(reg[i - 1], ki, 1);
    for (int l = 1; l < i; ++l) b.connect(twin[l - 1], ki, -2);
    b.connect(ki, reg[i - 1], -1);
    b.connect(ki, twin[i - 1], -1);
    // bits below the lowest set bit go up
    NeuronId ui = b.aux(indexed("u", i), m + 1);
    b.connect(tick, ui, m);
    for (int h = i + 1; h <= m; ++h) b.connect(reg[h - 1], ui, 1);
    for (int l = 1; l <= i; ++l) b.connect(twin[l - 1], ui, -(m + 1));
    b.connect(ui, reg[i - 1], 1);
    b.connect(ui, twin[i - 1], 1);
    down.push_back(ki);
    up.push_back(ui);
  }
  NeuronId z1 = b.aux("z_1", m + 1);
  b.connect(tick, z1, m);
  for (auto r : reg) b.connect(r, z1, 1);

  NeuronId astar = b.add("a*", Kind::auxiliary, Sign::excitatory, bias, Gate::stochastic);
  b.connect(z1, astar, std::log(static_cast<double>(t_prime) - 1) + bias);

  // phase counter on a*, copied into q and the register at phase end
  const int counter_bits = counter_layers(ell);
  auto C = add_det_counter(b, astar, counter_bits, "pc.");
  std::vector<NeuronId> copies;
  for (int i = 1; i <= m; ++i) {
    NeuronId ci = b.aux(indexed("c", i), 2);
    if (i <= counter_bits) b.connect(C.first[i - 1], ci, 1);
    b.connect(g_end, ci, 1);
    for (auto u : {q[i - 1], reg[i - 1], twin[i - 1]}) b.connect(ci, u, 1);
    copies.push_back(ci);
  }

  // start: x_2 loads l, x_1 clears the rest
  for (int i = 1; i <= m; ++i)
    if ((ell >> (i - 1)) & 1ULL)
      for (auto u : {q[i - 1], reg[i - 1], twin[i - 1]}) b.connect(x2, u, 6);

  std::vector<NeuronId> cleared;
  for (std::size_t i = 0; i < G.first.size(); ++i) {
    cleared.push_back(G.first[i]);
    cleared.push_back(G.second[i]);
  }
  for (std::size_t i = 1; i < G.reset.size(); ++i) cleared.push_back(G.reset[i - 1]);
  for (auto v : {&q, &reg, &twin, &down, &up})
    for (auto u : *v) cleared.push_back(u);
  cleared.push_back(z1);
  cleared.push_back(astar);
  for (std::size_t i = 0; i < C.first.size(); ++i) {
    cleared.push_back(C.first[i]);
    cleared.push_back(C.second[i]);
    cleared.push_back(C.reset[i]);
  }
  for (auto u : copies) cleared.push_back(u);
  cleared.push_back(d);
  cleared.push_back(g_end);
  if (g_clean != g_end) cleared.push_back(g_clean);
  for (auto u : cleared) {
    b.connect(x1, u, -4);
    // copies, d and the clock's end pair must survive their own phase end
    bool keep = u == d || u == g_end || u == g_clean;
    for (auto c : copies) keep = keep || u == c;
    if (!keep && u != astar) b.connect(g_clean, u, -5);
  }

  const double qw = quorum;
  b.connect(x, y, qw);
  b.connect(x2, y, qw);
  b.connect(d, y, qw);
  for (int i = 1; i <= m; ++i) b.connect(q[i - 1], y, static_cast<double>(1ULL << (i - 1)));

  BuildReport rep{b.build(), {}, {}, {}, {}};
  name_all(rep);
  rep.roles["tick"] = tick;
  rep.roles["phase_end"] = g_end;
  rep.roles["cleanup"] = g_clean;
  rep.groups["held"] = q;
  rep.groups["register"] = reg;
  rep.groups["copies"] = copies;
  rep.groups["phase_counter"] = C.first;
  rep.params["t"] = static_cast<double>(p.t);
  rep.params["delta"] = p.delta;
  rep.params["ell"] = static_cast<double>(ell);
  rep.params["ell_prime"] = static_cast<double>(phase);
  rep.params["t_prime"] = static_cast<double>(t_prime);
  rep.params["bias"] = bias;
  rep.params["quorum"] = quorum;
  rep.params["chernoff_constant"] = p.chernoff_constant;
  rep.params["bias_constant"] = p.bias_constant;
  return rep;
}

// a* firing counts per phase after an x spike at x_round; phase i spans the
// rounds after phase start i-1 up to the next. Returns also whether a* ever
// fired without z_1 having fired the round before.
struct PhaseCounts {
  std::vector<std::uint64_t> counts;
  bool spurious = false;
};

inline PhaseCounts improved_phase_counts(const BuildReport& rep, std::uint64_t phases, std::uint64_t seed,
                                         std::uint64_t x_round = 0) {
  const auto& net = rep.network;
  const NeuronId astar = rep.role("a*"), z1 = rep.role("z_1"), end = rep.role("phase_end");
  const std::uint64_t len = static_cast<std::uint64_t>(rep.param("ell_prime"));
  PhaseCounts out;
  out.counts.assign(phases, 0);
  std::uint64_t phase = 0;
  bool z_prev = false;
  simulate(net, spikes(rep.role("x"), {x_round}), x_round + (phases + 1) * len + 4, seed,
           [&](std::uint64_t r, const State& s) {
             if (s[astar]) {
               if (!z_prev) out.spurious = true;
               if (r > x_round && phase < phases) ++out.counts[phase];
             }
             z_prev = s[z1];
             if (r > x_round && s[end]) ++phase;
             return phase < phases;
           });
  return out;
}

}  // namespace snn
