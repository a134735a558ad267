#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "async.hpp"
#include "coins.hpp"
#include "network.hpp"
#include "report.hpp"
#include "simulate.hpp"

namespace snn {

struct SynchronizerConfig {
  int L = 1;
  int c_pg = 0;             // 0: smallest value satisfying the phase invariant
  int c_delay = 2;          // delay module parameter c_delay * L^2
  int reset_chain_len = 0;  // 0: L
  double inhibit_weight = 0;  // R1 -> v_out; 0: 1 + sum of v_out's positive inputs
};

// Rounds after a pulse by which every in-copy has seen the new out-copies
// (delay module output, copy into v_out, out-copy mirror, arrival at v_in)
// and R2 has cleared the delay copies. This is the c2 * L^3 term.
inline std::uint64_t sync_settle_rounds(int L, int c_delay) {
  const int k = async_timer_layers(static_cast<std::uint64_t>(c_delay) * L * L, L);
  const std::uint64_t lat = static_cast<std::uint64_t>(L);
  std::uint64_t delay_out = lat * (4 * lat + 1) + async_divider_upper(k, L);
  return delay_out + lat * lat + 4 * lat + 1;
}

inline double sync_c2(int L, int c_delay) {
  return static_cast<double>(sync_settle_rounds(L, c_delay)) / std::pow(static_cast<double>(L), 3);
}

inline int smallest_c_pg(int L, int c_delay) {
  const std::uint64_t L3 = static_cast<std::uint64_t>(L) * L * L;
  return static_cast<int>((sync_settle_rounds(L, c_delay) + 2ULL * L) / L3 + 1);
}

inline SynchronizerConfig resolve(SynchronizerConfig c) {
  if (c.L < 1) throw std::invalid_argument("latency bound must be at least 1");
  if (c.c_delay < 1) throw std::invalid_argument("c_delay must be at least 1");
  if (c.reset_chain_len == 0) c.reset_chain_len = c.L;
  if (c.reset_chain_len < c.L) throw std::invalid_argument("reset chains need at least L neurons");
  if (c.c_pg == 0) c.c_pg = smallest_c_pg(c.L, c.c_delay);
  const std::uint64_t L3 = static_cast<std::uint64_t>(c.L) * c.L * c.L;
  if (static_cast<std::uint64_t>(c.c_pg) * L3 <= sync_settle_rounds(c.L, c.c_delay) + 2ULL * c.L)
    throw std::invalid_argument("c_pg * L^3 must exceed c2 * L^3 + 2L = " +
                                std::to_string(sync_settle_rounds(c.L, c.c_delay) + 2ULL * c.L));
  return c;
}

// Labels used for the copies of a synchronous neuron v.
inline std::string in_copy(const std::string& v) { return v + ".in"; }
inline std::string delay_copy(const std::string& v) { return v + ".delay"; }
inline std::string out_copy(const std::string& v) { return v + ".out"; }
inline std::string out_mirror(const std::string& v) { return v + ".out_inh"; }

// Asynchronous simulation of a synchronous network. Every non-input v keeps
// its label and becomes AND(v.in, g); v.in carries v's incoming weights and
// bias, fed by the out-copies of v's in-neighbours (inputs feed it directly).
// Latencies are all 1 here; assign them with assign_latencies afterwards.
// Run from initial_state(report), which starts the pulse generator's ring
// at round 0; the first spike of g closes phase 1.
inline BuildReport synchronize(const Network& sync, SynchronizerConfig config) {
  if (sync.mode() != Mode::synchronous) throw std::invalid_argument("synchronize needs a synchronous network");
  auto problems = validate(sync);
  if (!problems.empty()) throw std::invalid_argument("invalid network: " + problems.front().message);
  const SynchronizerConfig c = resolve(config);
  const int L = c.L;

  NetworkBuilder b;
  std::vector<NeuronId> presenter(sync.size());
  for (NeuronId u = 0; u < sync.size(); ++u) {
    const auto& nu = sync.neuron(u);
    if (nu.kind != Kind::input) continue;
    presenter[u] = b.input(nu.label, nu.sign);
  }

  std::vector<NeuronId> global;
  auto track = [&](const std::vector<NeuronId>& v) { global.insert(global.end(), v.begin(), v.end()); };

  // pulse generator: free-running divider, one spike per phase
  const std::uint64_t L3 = static_cast<std::uint64_t>(L) * L * L;
  const int k_pg = std::max(2, async_timer_layers(static_cast<std::uint64_t>(c.c_pg) * L3, L));
  AsyncDivider pg = add_async_divider(b, std::nullopt, k_pg, L, "pg.");
  track(pg.neurons);
  const NeuronId g = pg.out;

  auto reset_chain = [&](NeuronId from, const std::string& name) {
    NeuronId prev = from;
    for (int j = 1; j <= c.reset_chain_len; ++j) {
      std::string label = name + "[" + std::to_string(j) + "]";
      NeuronId u = j == c.reset_chain_len ? b.inhibitor(label, 1) : b.aux(label, 1);
      b.connect(prev, u, 1);
      global.push_back(u);
      prev = u;
    }
    return prev;
  };
  const NeuronId r1 = reset_chain(g, "r1");

  // delay module: restarted by g through a chain of 4L, stopped after one output
  const int k_d = async_timer_layers(static_cast<std::uint64_t>(c.c_delay) * L * L, L);
  NeuronId start = g;
  for (int j = 1; j <= 4 * L; ++j) {
    NeuronId u = b.aux("dly.w[" + std::to_string(j) + "]", 1);
    b.connect(start, u, 1);
    global.push_back(u);
    start = u;
  }
  AsyncDivider dly = add_async_divider(b, start, k_d, L, "dly.");
  track(dly.neurons);
  auto [dq, dr] = add_divider_stop(b, dly, "dly.");
  NeuronId clear = b.inhibitor("dly.clear", 1);
  b.connect(g, clear, 1);
  b.connect(clear, dq, -2);
  global.insert(global.end(), {dq, dr, clear});
  const NeuronId D = dly.out;
  const NeuronId r2 = reset_chain(D, "r2");

  std::vector<NeuronId> shared, ins, delays, outs, mirrors;
  std::vector<NeuronId> v_in(sync.size());
  for (NeuronId u = 0; u < sync.size(); ++u) {
    const auto& nu = sync.neuron(u);
    if (nu.kind == Kind::input) continue;
    NeuronId vi = b.add(in_copy(nu.label), Kind::auxiliary, Sign::excitatory, nu.bias, nu.gate);
    b.at(vi).coin_key = nu.coin_key;
    b.at(vi).phase_coins = nu.gate == Gate::stochastic;
    NeuronId v = b.add(nu.label, nu.kind, Sign::excitatory, 2);
    NeuronId vd = b.aux(delay_copy(nu.label), 1);
    NeuronId vo = b.aux(out_copy(nu.label), 2);
    b.connect(vi, v, 1);
    b.connect(g, v, 1);
    b.connect(v, vd, 1);
    b.connect(vd, vd, 1);
    b.connect(r2, vd, -3);
    b.connect(D, vo, 1);
    b.connect(vd, vo, 1);
    b.connect(vo, vo, 2);
    const double W = c.inhibit_weight > 0 ? c.inhibit_weight : 1 + 1 + 1 + 2;
    b.connect(r1, vo, -W);
    NeuronId pres = vo;
    if (nu.sign == Sign::inhibitory) {
      pres = b.inhibitor(out_mirror(nu.label), 1);
      b.connect(vo, pres, 1);
      mirrors.push_back(pres);
    }
    v_in[u] = vi;
    presenter[u] = pres;
    shared.push_back(v);
    ins.push_back(vi);
    delays.push_back(vd);
    outs.push_back(vo);
  }
  for (const auto& s : sync.synapses()) b.connect(presenter[s.source], v_in[s.target], s.weight);
  b.set_phase_clock({g, L});

  BuildReport rep{b.build(Mode::asynchronous), {}, {}, {}, {}};
  name_all(rep);
  rep.roles["g"] = g;
  rep.roles["delay"] = D;
  rep.roles["r1"] = r1;
  rep.roles["r2"] = r2;
  rep.groups["shared"] = shared;
  rep.groups["in"] = ins;
  rep.groups["delay_copy"] = delays;
  rep.groups["out"] = outs;
  rep.groups["out_mirror"] = mirrors;
  rep.groups["global"] = global;
  rep.groups["initial"] = {pg.layers.first.front()};
  rep.params["L"] = L;
  rep.params["c_pg"] = c.c_pg;
  rep.params["c_delay"] = c.c_delay;
  rep.params["c2"] = sync_c2(L, c.c_delay);
  rep.params["pg_layers"] = k_pg;
  rep.params["delay_layers"] = k_d;
  rep.params["phase_lo"] = static_cast<double>(static_cast<std::uint64_t>(c.c_pg) * L3);
  rep.params["phase_hi"] = 5.0 * L * static_cast<double>(static_cast<std::uint64_t>(c.c_pg) * L3);
  rep.params["added"] = static_cast<double>(rep.network.count_kind(Kind::auxiliary)) -
                        static_cast<double>(sync.count_kind(Kind::auxiliary));
  return rep;
}

// Round-0 state the synchronized network starts from.
inline State initial_state(const BuildReport& rep) {
  State s(rep.network.size(), 0);
  for (auto u : rep.group("initial")) s[u] = 1;
  return s;
}

struct PhaseSchedule {
  std::vector<std::uint64_t> pulses;  // pulses[0] = 0 starts the run, pulses[p] = p-th spike of g
  std::map<NeuronId, int> g_latency;  // l(g, v) for every v that g feeds

  std::size_t phases() const { return pulses.empty() ? 0 : pulses.size() - 1; }
  // t(v, p): round in which v receives the pulse that closes phase p
  std::uint64_t arrival(NeuronId v, std::size_t p) const {
    return p == 0 ? 0 : pulses.at(p) + g_latency.at(v);
  }
};

inline PhaseSchedule extract_phases(const ExecutionTrace& trace, const Network& net, NeuronId g) {
  PhaseSchedule s;
  s.pulses = {0};
  for (auto r : trace.firing_rounds(g))
    if (r > 0) s.pulses.push_back(r);
  if (s.pulses.size() < 2) throw std::runtime_error("pulse generator never fired within the horizon");
  for (const auto& e : net.synapses())
    if (e.source == g) s.g_latency[e.target] = e.latency;
  return s;
}

inline PhaseSchedule extract_phases(const ExecutionTrace& trace, const BuildReport& rep) {
  return extract_phases(trace, rep.network, rep.role("g"));
}

struct SimilarityVerdict {
  bool pass = true;
  std::string neuron;
  std::size_t phase = 0;
  bool sync_fired = false;
  std::size_t phases_checked = 0;
};

// v fires in round p of the synchronous run iff it fires during phase p of
// the asynchronous one, i.e. in rounds (t(v,p-1), t(v,p)].
inline SimilarityVerdict check_similar_execution(const Network& sync, const ExecutionTrace& trace_sync,
                                                 const Network& async, const ExecutionTrace& trace_async,
                                                 const PhaseSchedule& schedule,
                                                 const std::vector<std::string>& shared) {
  SimilarityVerdict out;
  std::size_t P = std::min<std::size_t>(schedule.phases(), trace_sync.rounds() - 1);
  struct Pair {
    std::string label;
    NeuronId s, a;
  };
  std::vector<Pair> pairs;
  for (const auto& label : shared) {
    NeuronId a = async.id(label);
    if (!schedule.g_latency.count(a)) throw std::invalid_argument(label + " gets no pulse");
    pairs.push_back({label, sync.id(label), a});
    while (P > 0 && schedule.arrival(a, P) > trace_async.last_round()) --P;
  }
  for (std::size_t p = 1; p <= P; ++p)
    for (const auto& [label, s, a] : pairs) {
      bool in_sync = trace_sync.fired(p, s);
      bool in_async = false;
      for (auto r = schedule.arrival(a, p - 1) + 1; r <= schedule.arrival(a, p) && !in_async; ++r)
        in_async = trace_async.fired(r, a);
      if (in_sync != in_async) return {false, label, p, in_sync, p - 1};
    }
  out.phases_checked = P;
  return out;
}

// Sync round p and async phase p read the same coin because v.in keeps v's
// coin key and phase-indexes it; the plan is just the shared seed.
inline CoinPlan coin_plan_for_sync_replay(const Network&, std::uint64_t seed) { return CoinPlan(seed); }

inline std::vector<std::string> shared_labels(const Network& sync) {
  std::vector<std::string> out;
  for (const auto& n : sync.neurons())
    if (n.kind != Kind::input) out.push_back(n.label);
  return out;
}

// Runs the synchronized network from its initial state until g has closed
// `phases` phases and every neuron has received that pulse.
inline ExecutionTrace run_phases(const Network& async, const BuildReport& rep, const InputSchedule& inputs,
                                 std::size_t phases, std::uint64_t seed) {
  const NeuronId g = rep.role("g");
  const State init = initial_state(rep);
  const auto cap = static_cast<std::uint64_t>((phases + 1) * (rep.param("phase_hi") + 2 * async.max_latency()));
  const std::uint64_t horizon = std::min<std::uint64_t>(cap, kMaxHorizon);
  ExecutionTrace trace(async.size(), inputs, seed);
  std::size_t seen = 0;
  std::optional<std::uint64_t> stop;
  simulate(
      async, inputs, horizon, seed,
      [&](std::uint64_t r, const State& s) {
        trace.push(s);
        if (r > 0 && s[g] && ++seen == phases) stop = r + async.max_latency();
        return !stop || r < *stop;
      },
      &init);
  return trace;
}

// Inputs that hold their level for the whole run.
inline InputSchedule held_inputs(const Network& net, const std::vector<std::string>& on) {
  InputSchedule s;
  for (const auto& label : on) s.hold(net.id(label));
  return s;
}

// -- NOT gate under input latency ------------------------------------------

inline Network not_gate() {
  NetworkBuilder b;
  NeuronId x = b.input("x", Sign::inhibitory);
  NeuronId y = b.output("y", 0);
  b.connect(x, y, -1);
  return b.build();
}

struct NaiveNotResult {
  bool indistinguishable = false;  // all non-input states agree over rounds 0..L-1
  bool wrong = false;              // y fires in rounds 1..L+1 although x fired
  std::vector<std::uint64_t> y_yes, y_no;
};

// The plain synchronous NOT gate run with latency L on x -> y: one run where
// x fires in rounds 0..L+1, one where x stays silent.
inline NaiveNotResult naive_not_gate(int L) {
  Network net = assign_latencies(not_gate(), LatencyPolicy::uniform(L));
  const NeuronId x = net.id("x"), y = net.id("y");
  InputSchedule yes;
  for (int r = 0; r <= L + 1; ++r) yes.fire(x, r);
  InputSchedule no;
  auto ty = run(net, yes, 2 * L + 2);
  auto tn = run(net, no, 2 * L + 2);
  NaiveNotResult out;
  out.indistinguishable = true;
  for (int r = 0; r < L; ++r)
    for (NeuronId u = 0; u < net.size(); ++u)
      if (u != x && ty.fired(r, u) != tn.fired(r, u)) out.indistinguishable = false;
  for (int r = 1; r <= L + 1; ++r)
    if (ty.fired(r, y)) out.wrong = true;
  out.y_yes = ty.firing_rounds(y);
  out.y_no = tn.firing_rounds(y);
  return out;
}

struct SyncNotResult {
  bool correct = true;
  std::size_t phases = 0;
  SimilarityVerdict yes, no;
};

// Synchronized NOT gate: latency L on the input edge into y.in, other
// latencies drawn from [1, L]. Per phase, y must fire iff x is off.
inline SyncNotResult synchronized_not_gate(int L, std::size_t phases, std::uint64_t seed) {
  Network sync = not_gate();
  BuildReport rep = synchronize(sync, {L});
  Network async = assign_latencies(rep.network, LatencyPolicy::random_in(L, seed));
  std::vector<Synapse> syn = async.synapses();
  const NeuronId x = async.id("x"), yin = async.id(in_copy("y"));
  for (auto& s : syn)
    if (s.source == x && s.target == yin) s.latency = L;
  async = Network(Mode::asynchronous, async.neurons(), std::move(syn), async.phase_clock());

  SyncNotResult out;
  for (bool x_on : {true, false}) {
    std::vector<std::string> on;
    if (x_on) on.push_back("x");
    auto ts = run(sync, held_inputs(sync, on), phases + 1, seed);
    auto ta = run_phases(async, rep, held_inputs(async, on), phases, seed);
    auto sched = extract_phases(ta, async, rep.role("g"));
    auto v = check_similar_execution(sync, ts, async, ta, sched, {"y"});
    const NeuronId y = async.id("y");
    for (std::size_t p = 1; p <= sched.phases(); ++p)
      if (ta.fired(sched.arrival(y, p), y) == x_on) out.correct = false;
    out.correct = out.correct && v.pass && v.phases_checked == phases;
    out.phases = v.phases_checked;
    (x_on ? out.yes : out.no) = v;
  }
  return out;
}

}  // namespace snn
