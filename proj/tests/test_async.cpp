#include <gtest/gtest.h>

#include <cmath>

#include "snn/snn.hpp"

using namespace snn;

TEST(AsyncTimer, RejectsBadParams) {
  EXPECT_THROW(build_det_timer_async(7, 2), std::invalid_argument);
  EXPECT_THROW(build_det_timer_async(100, 0), std::invalid_argument);
  EXPECT_NO_THROW(build_det_timer_async(8, 2));
}

TEST(AsyncTimer, ValidAndSmall) {
  for (int L = 1; L <= 4; ++L)
    for (std::uint64_t t : {64ULL, 128ULL, 1024ULL, 1ULL << 16}) {
      if (t < 4ULL * L) continue;
      auto rep = build_det_timer_async(t, L);
      EXPECT_TRUE(valid(rep.network));
      EXPECT_EQ(rep.network.mode(), Mode::asynchronous);
      // O(L log t) plus the L^2 ring at large L
      const double bound = 6 * (L + 2) * std::log2(static_cast<double>(t)) + L * L + 10;
      EXPECT_LE(static_cast<double>(rep.network.size()), bound) << "t=" << t << " L=" << L;
    }
}

TEST(AsyncTimer, UnitLatencyMatchesSynchronousRun) {
  auto rep = build_det_timer_async(128, 1);
  std::vector<Neuron> ns(rep.network.neurons().begin(), rep.network.neurons().end());
  Network sync(Mode::synchronous, ns, {rep.network.synapses().begin(), rep.network.synapses().end()});
  auto s = spikes(rep.role("x"), {0, 300});
  EXPECT_EQ(run(rep.network, s, 1500), run(sync, s, 1500));
  EXPECT_EQ(run(assign_latencies(rep.network, LatencyPolicy::uniform(1)), s, 1500), run(sync, s, 1500));
}

TEST(AsyncTimer, WindowUnderRandomLatencies) {
  const std::uint64_t t = 128;
  for (int L = 1; L <= 4; ++L) {
    auto rep = build_det_timer_async(t, L);
    for (std::uint64_t s = 0; s < 100; ++s) {
      auto net = assign_latencies(rep.network, LatencyPolicy::random_in(L, trial_seed(11, s)));
      auto y = run(net, spikes(rep.role("x"), {0}), 6 * L * t).firing_rounds(rep.role("y"));
      ASSERT_EQ(y.size(), 1u) << "L=" << L << " seed " << s;
      EXPECT_GE(y[0], t);
      EXPECT_LE(y[0], 5 * L * t);
      EXPECT_LE(y[0], static_cast<std::uint64_t>(rep.param("upper")) + 1);
    }
  }
}

TEST(AsyncTimer, LayerRecurrence) {
  const std::uint64_t t = 512;
  for (int L = 1; L <= 4; ++L) {
    auto rep = build_det_timer_async(t, L);
    const int k = static_cast<int>(rep.param("layers"));
    const auto ring = static_cast<std::uint64_t>(async_ring_chain(L));
    for (std::uint64_t s = 0; s < 40; ++s) {
      auto net = assign_latencies(rep.network, LatencyPolicy::random_in(L, trial_seed(12, s)));
      auto tr = run(net, spikes(rep.role("x"), {0}), 6 * L * t);
      std::vector<std::vector<std::uint64_t>> f;
      for (int i = 1; i <= k; ++i) f.push_back(tr.firing_rounds(net.id(layer_name("a", i, 2))));
      ASSERT_FALSE(f[0].empty());
      EXPECT_GE(f[0][0], ring + 2);
      EXPECT_LE(f[0][0], L * (ring + 2));
      for (int i = 2; i <= k; ++i) {
        const auto& prev = f[i - 2];
        const auto& cur = f[i - 1];
        ASSERT_GE(prev.size(), 2u);
        ASSERT_FALSE(cur.empty());
        const std::uint64_t tau = prev[1] - prev[0];
        EXPECT_GE(cur[0], prev[0] + tau + 1);
        EXPECT_LE(cur[0], prev[0] + tau + L * L + L);
        if (cur.size() >= 2) {
          EXPECT_GE(cur[1] - cur[0], 2 * tau);
          EXPECT_LE(cur[1] - cur[0], 2 * tau + L * L + L);
        }
      }
    }
  }
}

TEST(AsyncTimer, FiresOnceAfterOneInput) {
  auto rep = build_det_timer_async(64, 2);
  auto net = assign_latencies(rep.network, LatencyPolicy::random_in(2, 5));
  auto y = run(net, spikes(rep.role("x"), {0}), 3000).firing_rounds(rep.role("y"));
  EXPECT_EQ(y.size(), 1u);
}

TEST(Latencies, SelfLoopsStayOne) {
  Network net = random_network({.n = 12, .density = 0.5, .seed = 4});
  for (auto p : {LatencyPolicy::uniform(5), LatencyPolicy::random_in(5, 1)}) {
    auto a = assign_latencies(net, p);
    EXPECT_TRUE(valid(a));
    for (const auto& s : a.synapses()) {
      EXPECT_GE(s.latency, 1);
      EXPECT_LE(s.latency, 5);
      if (s.source == s.target) {
        EXPECT_EQ(s.latency, 1);
      }
    }
  }
}

TEST(Latencies, RandomIsDeterministic) {
  Network net = random_network({.n = 12, .density = 0.5, .seed = 4});
  auto a = assign_latencies(net, LatencyPolicy::random_in(3, 9));
  auto b = assign_latencies(net, LatencyPolicy::random_in(3, 9));
  auto c = assign_latencies(net, LatencyPolicy::random_in(3, 10));
  EXPECT_EQ(to_text(a), to_text(b));
  EXPECT_NE(to_text(a), to_text(c));
}

TEST(Latencies, AdversarialNeedsTimerRoles) {
  EXPECT_THROW(assign_latencies(random_network({.n = 4}), LatencyPolicy::adversarial_sync_timer()),
               std::invalid_argument);
}

TEST(Latencies, AdversarialBreaksSyncTimer) {
  for (int k = 3; k <= 10; ++k) {
    const std::uint64_t t = (1ULL << k) + k;
    auto rep = build_det_timer({t, Exactness::exact});
    auto net = assign_latencies(rep.network, LatencyPolicy::adversarial_sync_timer());
    auto y = run(net, spikes(rep.role("x"), {0}), 2 * t).firing_rounds(rep.role("y"));
    ASSERT_FALSE(y.empty());
    EXPECT_LE(y.back(), 4 * std::log2(static_cast<double>(t))) << "t=" << t;
    EXPECT_LT(y.size(), t);
  }
}
