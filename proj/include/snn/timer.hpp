#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "network.hpp"
#include "report.hpp"
#include "simulate.hpp"

namespace snn {

enum class Exactness { exact, relaxed };

struct TimerParams {
  std::uint64_t t = 2;
  Exactness exactness = Exactness::relaxed;
};

inline std::string layer_name(const char* base, int i, int j) {
  return std::string(base) + "_{" + std::to_string(i) + "," + std::to_string(j) + "}";
}
inline std::string indexed(const char* base, int i) { return std::string(base) + "_" + std::to_string(i); }

// k with 2^k + k == t, or -1
inline int exact_timer_layers(std::uint64_t t) {
  for (int k = 1; k < 62; ++k) {
    std::uint64_t v = (1ULL << k) + k;
    if (v == t) return k;
    if (v > t) break;
  }
  return -1;
}

inline int relaxed_timer_layers(std::uint64_t t) {
  int k = 1;
  while ((1ULL << k) + k < t) ++k;
  return k;
}

// Counting layers shared by the timer and counter circuits. Layer i >= 2
// toggles a_{i,1} on every spike of a_{i-1,2} and fires a_{i,2}, d_i on every
// second one.
struct CountingLayers {
  std::vector<NeuronId> first;   // a_{i,1}, index i-1
  std::vector<NeuronId> second;  // a_{i,2}
  std::vector<NeuronId> reset;   // d_i, entry 0 is d_1 when present
};

inline void add_upper_layers(NetworkBuilder& b, CountingLayers& L, int from, int to, const std::string& prefix,
                             bool last_inhibitory) {
  for (int i = from; i <= to; ++i) {
    const bool last = i == to;
    NeuronId a1 = b.aux(prefix + layer_name("a", i, 1), 1);
    NeuronId a2 = b.aux(prefix + layer_name("a", i, 2), 2,
                        last && last_inhibitory ? Sign::inhibitory : Sign::excitatory);
    NeuronId d = b.inhibitor(prefix + indexed("d", i), 2);
    NeuronId prev = L.second.back();
    b.connect(prev, a1, 1);
    b.connect(a1, a1, 1);
    b.connect(d, a1, -1);
    b.connect(prev, a2, 1);
    b.connect(a1, a2, 1);
    b.connect(prev, d, 1);
    b.connect(a1, d, 1);
    L.first.push_back(a1);
    L.second.push_back(a2);
    L.reset.push_back(d);
  }
}

// Deterministic timer. Exact mode: t = 2^k + k and y fires exactly t rounds
// after each x spike. Relaxed mode: smallest such k, with counting layers
// 2..k preloaded from the control neuron so that y fires t or t+1 rounds.
inline BuildReport build_det_timer(const TimerParams& p) {
  if (p.t < 2) throw std::invalid_argument("timer needs t >= 2");
  int k = exact_timer_layers(p.t);
  if (p.exactness == Exactness::exact && k < 0)
    throw std::invalid_argument("t = " + std::to_string(p.t) + " is not of the form 2^k + k");
  std::uint64_t preload = 0;
  if (k < 0) {
    k = relaxed_timer_layers(p.t);
    preload = ((1ULL << k) + k - p.t) / 2;
  }

  NetworkBuilder b;
  NeuronId x = b.input("x");
  NeuronId y = b.output("y", 1);
  CountingLayers L;
  NeuronId a11 = b.aux(layer_name("a", 1, 1), 1);
  NeuronId a12 = b.aux(layer_name("a", 1, 2), 1);
  L.first.push_back(a11);
  L.second.push_back(a12);
  b.connect(x, a11, 3);
  b.connect(a12, a11, 1);
  b.connect(a11, a12, 1);
  if (k >= 2) add_upper_layers(b, L, 2, k, "", false);

  // The inhibitory twin of the last a_{k,2} (d_k, or a dedicated twin when
  // k = 1) resets the counting neurons; y is stopped one round later through
  // the relay s so that it fires through round t0 + 2^k + k.
  NeuronId last = L.second.back();
  NeuronId reset_all = k >= 2 ? L.reset.back() : b.inhibitor("e", 1);
  if (k == 1) b.connect(a11, reset_all, 1);
  NeuronId stop = b.inhibitor("s", 1);
  b.connect(last, stop, 1);
  std::vector<NeuronId> counting;
  for (int i = 0; i < k; ++i) {
    counting.push_back(L.first[i]);
    counting.push_back(L.second[i]);
  }
  for (auto u : counting) b.connect(reset_all, u, -2);

  b.connect(x, y, 2);
  b.connect(y, y, 1);
  b.connect(stop, y, -1);

  NeuronId r = b.inhibitor("r", 1);
  b.connect(x, r, 1);
  for (NeuronId u = 0; u < b.size(); ++u) {
    if (u == x || u == y || u == a12 || u == r) continue;
    b.connect(r, u, -2);
  }
  NeuronId c = b.aux("c", 1);
  b.connect(x, c, 1);
  b.connect(c, y, 3);
  b.connect(c, a12, 3);
  for (int i = 2; i <= k; ++i)
    if ((preload >> (i - 2)) & 1ULL) b.connect(c, L.first[i - 1], 3);

  BuildReport rep{b.build(), {}, {}, {}, {}};
  name_all(rep);
  rep.groups["counting"] = counting;
  rep.groups["first"] = L.first;
  rep.groups["second"] = L.second;
  rep.groups["reset"] = L.reset;
  rep.roles["stop"] = stop;
  rep.roles["last"] = last;
  rep.params["t"] = static_cast<double>(p.t);
  rep.params["k"] = k;
  rep.params["preload"] = static_cast<double>(preload);
  rep.params["duration"] = static_cast<double>((1ULL << k) + k - 2 * preload);
  rep.notes["weights"] = "x->a_{1,1} 3; reset r -2; control c -> y, a_{1,2} +3; reset twin -> counting -2; relay s -> y -1";
  return rep;
}

// number of binary time inputs for parameters up to t_max
inline int time_input_bits(std::uint64_t t_max) {
  int b = 0;
  while (t_max >> b) ++b;
  return b;
}

// Timer whose duration t' <= t_max is read from binary time inputs z_j held
// by the schedule. Layer i may stop the timer when 2^{i-1}+i-1 >= t'; the
// stop lands when a_{i-1,2} first fires, so y fires 2^{i-1}+i-1 rounds for the
// smallest such i.
struct ParamTimer {
  NeuronId y = 0;
  NeuronId reset = 0;
  int layers = 0;
  std::vector<NeuronId> counting, late, stops;
};

inline int param_timer_layers(std::uint64_t t_max) {
  int K = 1;
  while ((1ULL << (K - 1)) + K - 1 < t_max) ++K;
  return K;
}

// Adds the parametrised timer to b: trigger x, excitatory time bits z (bit j
// worth 2^{j-1}), output y. Extra stop targets receive the same -1 as y.
inline ParamTimer add_param_timer(NetworkBuilder& b, NeuronId x, const std::vector<NeuronId>& z,
                                  std::uint64_t t_max, const std::string& prefix = "") {
  ParamTimer P;
  const int K = param_timer_layers(t_max);
  P.layers = K;
  P.y = b.aux(prefix + "y", 1);
  CountingLayers L;
  NeuronId a11 = b.aux(prefix + layer_name("a", 1, 1), 1);
  NeuronId a12 = b.aux(prefix + layer_name("a", 1, 2), 1);
  L.first.push_back(a11);
  L.second.push_back(a12);
  b.connect(x, a11, 3);
  b.connect(a12, a11, 1);
  b.connect(a11, a12, 1);
  if (K - 1 >= 2) add_upper_layers(b, L, 2, K - 1, prefix, false);
  for (std::size_t i = 0; i < L.first.size(); ++i) {
    P.counting.push_back(L.first[i]);
    P.counting.push_back(L.second[i]);
  }

  b.connect(x, P.y, 2);
  b.connect(P.y, P.y, 1);

  for (int i = 1; i <= K; ++i) {
    // fires while t' >= 2^{i-1} + i, i.e. while layer i is too early to stop
    NeuronId n = b.inhibitor(prefix + indexed("n", i), static_cast<double>((1ULL << (i - 1)) + i));
    for (std::size_t j = 1; j <= z.size(); ++j) b.connect(z[j - 1], n, static_cast<double>(1ULL << (j - 1)));
    NeuronId ri = b.inhibitor(prefix + indexed("r", i), 1);
    b.connect(i == 1 ? x : L.second[i - 2], ri, 1);
    b.connect(n, ri, -1);
    b.connect(ri, P.y, -1);
    for (auto u : P.counting) b.connect(ri, u, -2);
    P.late.push_back(n);
    P.stops.push_back(ri);
  }

  P.reset = b.inhibitor(prefix + "r", 1);
  b.connect(x, P.reset, 1);
  for (auto u : P.counting)
    if (u != a12) b.connect(P.reset, u, -2);
  for (auto d : L.reset) b.connect(P.reset, d, -2);
  return P;
}

// Timer whose duration t' <= t_max is read from binary time inputs z_j held
// by the schedule. Layer i may stop the timer when 2^{i-1}+i-1 >= t'; the
// stop lands when a_{i-1,2} first fires, so y fires 2^{i-1}+i-1 rounds for the
// smallest such i.
inline BuildReport build_det_timer_param(std::uint64_t t_max) {
  if (t_max < 2) throw std::invalid_argument("parametrised timer needs t_max >= 2");
  const int bits = time_input_bits(t_max);
  NetworkBuilder b;
  NeuronId x = b.input("x");
  std::vector<NeuronId> z;
  for (int j = 1; j <= bits; ++j) z.push_back(b.input(indexed("z", j)));
  auto P = add_param_timer(b, x, z, t_max);
  b.at(P.y).kind = Kind::output;

  BuildReport rep{b.build(), {}, {}, {}, {}};
  name_all(rep);
  rep.groups["z"] = z;
  rep.groups["counting"] = P.counting;
  rep.groups["late"] = P.late;
  rep.groups["stops"] = P.stops;
  rep.params["t_max"] = static_cast<double>(t_max);
  rep.params["layers"] = P.layers;
  return rep;
}

// rounds y fires for parameter t' in build_det_timer_param
inline std::uint64_t param_timer_duration(std::uint64_t t_prime) {
  for (int i = 1;; ++i) {
    std::uint64_t v = (1ULL << (i - 1)) + i - 1;
    if (v >= t_prime) return v;
  }
}

// Holds the binary encoding of t' on the z inputs and fires x at the given rounds.
inline InputSchedule param_timer_schedule(const BuildReport& rep, std::uint64_t t_prime,
                                          const std::vector<std::uint64_t>& x_rounds) {
  if (t_prime > static_cast<std::uint64_t>(rep.param("t_max")))
    throw std::invalid_argument("t' exceeds the timer's t_max");
  for (auto r : x_rounds)
    if (r < 1) throw std::invalid_argument("time inputs need one round to settle before x fires");
  InputSchedule s = spikes(rep.role("x"), x_rounds);
  const auto& z = rep.group("z");
  for (std::size_t j = 0; j < z.size(); ++j)
    if ((t_prime >> j) & 1ULL) s.hold(z[j]);
  return s;
}

enum class PigeonholeVerdict { locked_on, stopped_early, needs_more_neurons_ok };

inline const char* to_string(PigeonholeVerdict v) {
  switch (v) {
    case PigeonholeVerdict::locked_on: return "locked_on";
    case PigeonholeVerdict::stopped_early: return "stopped_early";
    default: return "needs_more_neurons_ok";
  }
}

// Runs a deterministic one-input one-output candidate after a single x spike
// at round 0 until its non-input state repeats, then extrapolates y.
inline PigeonholeVerdict pigeonhole_demo(const Network& net, std::uint64_t t, std::uint64_t seed = 0) {
  if (!net.deterministic()) throw std::invalid_argument("pigeonhole demo needs a deterministic network");
  auto inputs = net.of_kind(Kind::input);
  auto outputs = net.of_kind(Kind::output);
  if (inputs.size() != 1 || outputs.size() != 1)
    throw std::invalid_argument("pigeonhole demo needs one input and one output");
  const NeuronId y = outputs.front();
  std::vector<NeuronId> tracked;
  for (NeuronId u = 0; u < net.size(); ++u)
    if (net.neuron(u).kind != Kind::input) tracked.push_back(u);
  const std::size_t n = tracked.size() - 1;
  const std::uint64_t horizon = std::min<std::uint64_t>(kMaxHorizon, t + (n < 40 ? (2ULL << n) : kMaxHorizon) + 2);

  InputSchedule sched = spikes(inputs.front(), {0});
  std::unordered_map<std::string, std::uint64_t> seen;
  std::vector<std::uint8_t> yfire;
  std::string key(tracked.size(), '0');
  std::uint64_t lo = 0, hi = 0;
  bool found = false;
  simulate(net, sched, horizon, seed, [&](std::uint64_t r, const State& s) {
    yfire.push_back(s[y]);
    if (r == 0) return true;
    for (std::size_t i = 0; i < tracked.size(); ++i) key[i] = s[tracked[i]] ? '1' : '0';
    auto [it, fresh] = seen.emplace(key, r);
    if (!fresh) {
      lo = it->second;
      hi = r;
      found = true;
      return false;
    }
    return true;
  });
  if (!found) throw std::runtime_error("no repeated state within the horizon");
  const std::uint64_t period = hi - lo;
  auto y_at = [&](std::uint64_t r) -> bool {
    if (r < hi) return yfire[r];
    return yfire[lo + (r - lo) % period];
  };
  for (std::uint64_t r = 1; r <= t; ++r)
    if (!y_at(r)) return PigeonholeVerdict::stopped_early;
  for (std::uint64_t r = lo; r < hi; ++r)
    if (yfire[r]) return PigeonholeVerdict::locked_on;
  return PigeonholeVerdict::needs_more_neurons_ok;
}

}  // namespace snn
