#include <gtest/gtest.h>

#include <cmath>

#include "snn/snn.hpp"

using namespace snn;

namespace {

struct Outcome {
  SimilarityVerdict verdict;
  PhaseSchedule schedule;
  ExecutionTrace sync_trace, async_trace;
  Network async;
  BuildReport rep;
};

Outcome replay(const Network& sync, int L, std::uint64_t lat_seed, const std::vector<std::string>& on,
               std::size_t phases, std::uint64_t seed) {
  Outcome o;
  o.rep = synchronize(sync, {L});
  o.async = assign_latencies(o.rep.network, LatencyPolicy::random_in(L, lat_seed));
  o.sync_trace = run(sync, held_inputs(sync, on), phases + 1, seed);
  o.async_trace = run_phases(o.async, o.rep, held_inputs(o.async, on), phases, seed);
  o.schedule = extract_phases(o.async_trace, o.async, o.rep.role("g"));
  o.verdict = check_similar_execution(sync, o.sync_trace, o.async, o.async_trace, o.schedule, shared_labels(sync));
  return o;
}

std::vector<std::string> inputs_for(std::size_t i) {
  std::vector<std::string> on;
  if (i % 2) on.push_back("x1");
  if (i % 3) on.push_back("x2");
  return on;
}

int latency(const Network& net, NeuronId u, NeuronId v) {
  for (const auto& e : net.synapses())
    if (e.source == u && e.target == v) return e.latency;
  return -1;
}

Network with_latency(const Network& net, NeuronId u, NeuronId v, int L) {
  std::vector<Synapse> syn = net.synapses();
  for (auto& s : syn)
    if (s.source == u && s.target == v) s.latency = L;
  return Network(Mode::asynchronous, net.neurons(), std::move(syn), net.phase_clock());
}

// z = x and not y
Network and_not() {
  NetworkBuilder b;
  auto x = b.input("x");
  auto y = b.input("y", Sign::inhibitory);
  auto z = b.output("z", 1);
  b.connect(x, z, 1);
  b.connect(y, z, -1);
  return b.build();
}

}  // namespace

TEST(SynchronizerConfig, ResolveDefaultsAndErrors) {
  for (int L = 1; L <= 6; ++L) {
    auto c = resolve({L});
    EXPECT_EQ(c.reset_chain_len, L);
    EXPECT_GT(static_cast<std::uint64_t>(c.c_pg) * L * L * L, sync_settle_rounds(L, 2) + 2ULL * L);
    EXPECT_THROW(resolve({L, c.c_pg - 1}), std::invalid_argument) << "L=" << L;
  }
  EXPECT_THROW(resolve({0}), std::invalid_argument);
  EXPECT_THROW(resolve({2, 0, 0}), std::invalid_argument);
  EXPECT_THROW(resolve({3, 0, 2, 2}), std::invalid_argument);
}

TEST(Synchronizer, RejectsAsyncOrInvalidInput) {
  Network s = random_network({.n = 4, .seed = 3});
  EXPECT_THROW(synchronize(assign_latencies(s, LatencyPolicy::uniform(2)), {2}), std::invalid_argument);
  NetworkBuilder b;
  auto x = b.input("x");
  auto u = b.aux("u", 1, Sign::inhibitory);
  b.connect(x, u, 1);
  b.connect(u, u, 1);  // inhibitory neuron with a positive weight
  EXPECT_THROW(synchronize(Network(Mode::synchronous, b.build().neurons(), b.build().synapses()), {2}),
               std::exception);
}

TEST(Synchronizer, CopiesAndValidity) {
  Network s = random_network({.n = 10, .stochastic = 3, .seed = 11});
  auto rep = synchronize(s, {3});
  const Network& a = rep.network;
  EXPECT_TRUE(valid(a));
  for (const auto& n : s.neurons()) {
    if (n.kind == Kind::input) {
      EXPECT_EQ(a.neuron(a.id(n.label)).kind, Kind::input);
      continue;
    }
    const auto& vin = a.neuron(a.id(in_copy(n.label)));
    EXPECT_EQ(vin.bias, n.bias) << n.label;
    EXPECT_EQ(vin.gate, n.gate);
    if (n.gate == Gate::stochastic) {
      EXPECT_EQ(vin.coin_key, n.coin_key);
      EXPECT_TRUE(vin.phase_coins);
    }
    EXPECT_NO_THROW(a.id(delay_copy(n.label)));
    EXPECT_NO_THROW(a.id(out_copy(n.label)));
    EXPECT_EQ(a.neuron(a.id(n.label)).bias, 2);
    if (n.sign == Sign::inhibitory) {
      EXPECT_NO_THROW(a.id(out_mirror(n.label)));
    }
  }
}

TEST(Synchronizer, SizeOverheadRegression) {
  // added = 3 per non-input + 1 per inhibitory + a global part depending only on L
  const std::map<int, double> global{{1, 31}, {2, 50}, {3, 79}, {4, 106}};
  for (auto [L, want] : global)
    for (std::uint64_t i = 0; i < 20; ++i) {
      Network s = random_network({.n = static_cast<int>(1 + i % 15), .seed = trial_seed(3, i)});
      double inh = 0;
      for (const auto& n : s.neurons())
        if (n.kind != Kind::input && n.sign == Sign::inhibitory) ++inh;
      auto rep = synchronize(s, {L});
      EXPECT_EQ(rep.param("added") - 3.0 * static_cast<double>(s.count_kind(Kind::auxiliary)) - inh, want)
          << "L=" << L;
      EXPECT_EQ(rep.network.size(), s.size() + static_cast<std::size_t>(rep.param("added")));
      // global part stays within c L log L + c' L
      EXPECT_LE(want, 20 * L * std::log2(L + 1.0) + 20 * L);
    }
}

TEST(Synchronizer, LatencyOneMatchesSynchronousRun) {
  for (std::uint64_t i = 0; i < 20; ++i) {
    Network s = random_network({.n = static_cast<int>(1 + i % 15), .seed = trial_seed(77, i)});
    auto o = replay(s, 1, trial_seed(99, i), inputs_for(i), 30, trial_seed(5, i));
    EXPECT_TRUE(o.verdict.pass) << "net " << i << " " << o.verdict.neuron << " phase " << o.verdict.phase;
    EXPECT_EQ(o.verdict.phases_checked, 30u);
  }
}

TEST(Synchronizer, RandomTenNeuronNetAtThree) {
  Network s = random_network({.n = 10, .seed = 2024});
  auto o = replay(s, 3, 8, {"x1"}, 30, 1);
  EXPECT_TRUE(o.verdict.pass) << o.verdict.neuron << " phase " << o.verdict.phase;
  EXPECT_EQ(o.verdict.phases_checked, 30u);
}

TEST(Synchronizer, StochasticCorpusSmall) {
  for (int L : {2, 3})
    for (std::uint64_t i = 0; i < 10; ++i) {
      Network s = random_network({.n = static_cast<int>(2 + i % 10), .stochastic = 2, .seed = trial_seed(31, i)});
      auto o = replay(s, L, trial_seed(32, i), inputs_for(i), 20, trial_seed(33, i));
      EXPECT_TRUE(o.verdict.pass) << "L=" << L << " net " << i << " " << o.verdict.neuron;
      EXPECT_EQ(o.verdict.phases_checked, 20u);
    }
}

TEST(Synchronizer, PhaseGapsInWindow) {
  for (int L = 1; L <= 4; ++L) {
    Network s = random_network({.n = 6, .seed = static_cast<std::uint64_t>(L)});
    auto o = replay(s, L, 40 + L, {"x1"}, 12, 1);
    for (std::size_t p = 2; p <= o.schedule.phases(); ++p) {
      const auto gap = static_cast<double>(o.schedule.pulses[p] - o.schedule.pulses[p - 1]);
      EXPECT_GE(gap, o.rep.param("phase_lo")) << "L=" << L;
      EXPECT_LE(gap, o.rep.param("phase_hi")) << "L=" << L;
    }
  }
}

TEST(Synchronizer, InterlockOrdering) {
  // per phase: R1 reaches v_out before D does, R2 reaches v_delay after D reaches v_out
  for (int L = 1; L <= 4; ++L)
    for (std::uint64_t i = 0; i < 6; ++i) {
      Network s = random_network({.n = static_cast<int>(1 + i % 8), .seed = trial_seed(3, i)});
      auto o = replay(s, L, trial_seed(4, i), {"x1"}, 10, 1);
      const Network& a = o.async;
      const NeuronId r1 = o.rep.role("r1"), r2 = o.rep.role("r2"), D = o.rep.role("delay");
      auto r1f = o.async_trace.firing_rounds(r1), r2f = o.async_trace.firing_rounds(r2),
           df = o.async_trace.firing_rounds(D);
      ASSERT_GE(df.size(), 5u);
      for (std::size_t p = 0; p < df.size() && p < r1f.size() && p < r2f.size(); ++p)
        for (const auto& label : shared_labels(s)) {
          const NeuronId vo = a.id(out_copy(label)), vd = a.id(delay_copy(label));
          const auto d_at = df[p] + latency(a, D, vo);
          EXPECT_LT(r1f[p] + latency(a, r1, vo), d_at) << "L=" << L << " phase " << p;
          EXPECT_GT(r2f[p] + latency(a, r2, vd), d_at) << "L=" << L << " phase " << p;
        }
    }
}

TEST(Synchronizer, AndNotUnderSkewedLatency) {
  // x reaches z faster than y: a plain net glitches, the synchronized one does not
  const int L = 3;
  Network s = and_not();
  Network naive = with_latency(assign_latencies(s, LatencyPolicy::uniform(1)), s.id("y"), s.id("z"), L);
  auto tn = run(naive, held_inputs(naive, {"x", "y"}), 10);
  EXPECT_TRUE(tn.fired(1, naive.id("z")));

  auto rep = synchronize(s, {L});
  Network a = assign_latencies(rep.network, LatencyPolicy::random_in(L, 5));
  a = with_latency(a, a.id("x"), a.id(in_copy("z")), 1);
  a = with_latency(a, a.id("y"), a.id(in_copy("z")), L);
  auto ta = run_phases(a, rep, held_inputs(a, {"x", "y"}), 15, 0);
  auto sched = extract_phases(ta, a, rep.role("g"));
  ASSERT_GE(sched.phases(), 15u);
  EXPECT_TRUE(ta.firing_rounds(a.id("z")).empty());
  auto ts = run(s, held_inputs(s, {"x", "y"}), 16);
  EXPECT_TRUE(check_similar_execution(s, ts, a, ta, sched, {"z"}).pass);
}

TEST(Synchronizer, ExtractPhasesNeedsAPulse) {
  auto rep = synchronize(random_network({.n = 3, .seed = 1}), {2});
  auto tr = run(rep.network, {}, 3);
  EXPECT_THROW(extract_phases(tr, rep), std::runtime_error);
}

TEST(Synchronizer, SharedGeneratorSharesBoundaries) {
  // same L, same input count, uniform latencies: the pulse rounds coincide
  auto r1 = synchronize(random_network({.n = 4, .seed = 1}), {2});
  auto r2 = synchronize(random_network({.n = 9, .seed = 2}), {2});
  Network a1 = assign_latencies(r1.network, LatencyPolicy::uniform(2));
  Network a2 = assign_latencies(r2.network, LatencyPolicy::uniform(2));
  auto s1 = extract_phases(run_phases(a1, r1, {}, 6, 0), a1, r1.role("g"));
  auto s2 = extract_phases(run_phases(a2, r2, {}, 6, 0), a2, r2.role("g"));
  EXPECT_EQ(s1.pulses, s2.pulses);
}

TEST(Synchronizer, DetectsDivergence) {
  Network s = random_network({.n = 6, .seed = 21});
  auto o = replay(s, 2, 3, {"x1"}, 8, 1);
  ASSERT_TRUE(o.verdict.pass);
  // erase v's phase-3 spikes, or add one if it was silent
  const std::string label = shared_labels(s).front();
  const NeuronId v = o.async.id(label);
  const auto lo = o.schedule.arrival(v, 2), hit = o.schedule.arrival(v, 3);
  const bool was = o.sync_trace.fired(3, s.id(label));
  ExecutionTrace bad(o.async_trace.neurons(), {}, 0);
  for (std::uint64_t r = 0; r < o.async_trace.rounds(); ++r) {
    State st = o.async_trace.state(r);
    if (was && r > lo && r <= hit) st[v] = 0;
    if (!was && r == hit) st[v] = 1;
    bad.push(st);
  }
  auto verdict = check_similar_execution(s, o.sync_trace, o.async, bad, o.schedule, {label});
  EXPECT_FALSE(verdict.pass);
  EXPECT_EQ(verdict.neuron, label);
  EXPECT_EQ(verdict.phase, 3u);
}

TEST(Synchronizer, DeterministicNetIgnoresSeed) {
  Network s = random_network({.n = 8, .seed = 5});
  auto a = replay(s, 2, 7, {"x2"}, 10, 1);
  auto b = replay(s, 2, 7, {"x2"}, 10, 999);
  EXPECT_EQ(a.async_trace, b.async_trace);
  EXPECT_EQ(a.sync_trace, b.sync_trace);
}

TEST(Synchronizer, StochasticCoinsFollowTheSeed) {
  NetworkBuilder b;
  b.input("x1");
  b.add("v", Kind::output, Sign::excitatory, 0, Gate::stochastic);
  Network s = b.build();
  int differ = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto o = replay(s, 2, 1, {}, 16, seed);
    EXPECT_TRUE(o.verdict.pass) << "seed " << seed;
    auto other = run(s, {}, 17, seed + 100);
    if (!(other == o.sync_trace)) ++differ;
  }
  EXPECT_GT(differ, 5);
}

TEST(NotGate, NaiveFailsSynchronizedHolds) {
  for (int L : {2, 8}) {
    auto n = naive_not_gate(L);
    EXPECT_TRUE(n.indistinguishable);
    EXPECT_TRUE(n.wrong);
    auto sy = synchronized_not_gate(L, 6, 1);
    EXPECT_TRUE(sy.correct) << "L=" << L;
    EXPECT_EQ(sy.phases, 6u);
  }
}
