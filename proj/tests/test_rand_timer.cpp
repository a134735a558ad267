#include <gtest/gtest.h>

#include <cmath>

#include "snn/snn.hpp"

using namespace snn;

namespace {

// one round of potentials with the given neurons firing in the previous round
double pot_after(const Network& net, NeuronId u, const std::vector<NeuronId>& fired) {
  std::vector<State> h{State(net.size(), 0)};
  for (auto v : fired) h[0][v] = 1;
  return potential(net, h, u);
}

// exact law of the survivor chain X_1 ~ Bin(l, q), X_{i+1} | X_i ~ Bin(X_i, q)
std::vector<std::vector<double>> survivor_law(std::uint64_t ell, double q, std::size_t phases) {
  auto binom = [](std::uint64_t n, std::uint64_t k, double p) {
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                    static_cast<double>(k) * std::log(p) + static_cast<double>(n - k) * std::log1p(-p));
  };
  std::vector<std::vector<double>> law;
  std::vector<double> cur(ell + 1, 0.0);
  cur[ell] = 1;
  for (std::size_t i = 0; i < phases; ++i) {
    std::vector<double> next(ell + 1, 0.0);
    for (std::uint64_t j = 0; j <= ell; ++j)
      for (std::uint64_t k = 0; k <= j; ++k) next[k] += cur[j] * binom(j, k, q);
    law.push_back(next);
    cur = next;
  }
  return law;
}

}  // namespace

TEST(RandBasic, PopulationAndValidity) {
  auto rep = build_rand_basic({.t = 64, .delta = 0.05});
  EXPECT_TRUE(valid(rep.network));
  EXPECT_EQ(rep.network.count_gate(Gate::stochastic), static_cast<std::size_t>(std::ceil(24 * std::log(20.0))));
  EXPECT_EQ(rep.group("population").size(), 72u);
}

TEST(RandBasic, ContinueProbability) {
  for (std::uint64_t t : {10ULL, 64ULL, 1000ULL}) {
    auto rep = build_rand_basic({.t = t, .delta = 0.05});
    const NeuronId a = rep.group("population")[0];
    EXPECT_NEAR(fire_probability(pot_after(rep.network, a, {a})), 1 - 1.0 / static_cast<double>(t), 1e-9);
    EXPECT_NEAR(fire_probability(pot_after(rep.network, a, {rep.role("x")})), 1 - 1.0 / static_cast<double>(t),
                1e-9);
    // spontaneous firing stays below delta / (t l)
    EXPECT_LT(fire_probability(pot_after(rep.network, a, {})), 0.05 / (static_cast<double>(t) * 72));
  }
}

TEST(RandBasic, OutputFiresAfterInput) {
  auto rep = build_rand_basic({.t = 32, .delta = 0.1});
  for (std::uint64_t s = 0; s < 200; ++s) {
    auto tr = run(rep.network, spikes(rep.role("x"), {5}), 6, s);
    ASSERT_TRUE(tr.fired(6, rep.role("y")));
  }
}

TEST(RandBasic, SingleNeuronSurvival) {
  // Pr[a fires in rounds 1..t] = (1 - 1/t)^t
  const std::uint64_t t = 10;
  auto rep = build_rand_basic({.t = t, .delta = 0.05, .ell = 2});
  const NeuronId a = rep.group("population")[0];
  auto r = montecarlo("survival", 20000, 17, [&](std::uint64_t, std::uint64_t s) {
    auto tr = run(rep.network, spikes(rep.role("x"), {0}), t, s);
    for (std::uint64_t q = 1; q <= t; ++q)
      if (!tr.fired(q, a)) return false;
    return true;
  });
  const double p = std::pow(0.9, 10.0);
  EXPECT_NEAR(r.estimate, p, 4 * std::sqrt(p * (1 - p) / 20000));
}

TEST(RandBasic, ReliabilityShort) {
  auto rep = build_rand_basic({.t = 32, .delta = 0.05, .ell = size_population(32, 0.05)});
  auto fires = montecarlo("fires", 300, 3, [&](std::uint64_t, std::uint64_t s) {
    return timer_fires_t(rep.network, rep.role("x"), rep.role("y"), 32, s);
  });
  auto stops = montecarlo("stops", 300, 4, [&](std::uint64_t, std::uint64_t s) {
    return timer_stops_2t(rep.network, rep.role("x"), rep.role("y"), 32, s);
  });
  EXPECT_GE(fires.hi, 0.95);
  EXPECT_GE(stops.hi, 0.95);
}

TEST(RandBasic, SizePopulationMeetsBothTails) {
  const std::uint64_t ell = size_population(64, 0.05);
  EXPECT_GT(ell, 2u);
  EXPECT_EQ(size_population(64, 0.05), ell);
  EXPECT_THROW(size_population(1, 0.05), std::invalid_argument);
  EXPECT_THROW(build_rand_basic({.t = 64, .delta = 1.5}), std::invalid_argument);
}

TEST(RandImproved, OneStochasticNeuron) {
  for (double delta : {0.1, 0.01, 1e-6}) {
    auto rep = build_rand_improved({.t = 10000, .delta = delta});
    EXPECT_TRUE(valid(rep.network));
    EXPECT_EQ(rep.network.count_gate(Gate::stochastic), 1u);
    EXPECT_GE(rep.param("t_prime") * rep.param("ell_prime"), 10000.0);
  }
}

TEST(RandImproved, AuxiliaryCountRegression) {
  auto rep = build_rand_improved({.t = 10000, .delta = 1e-6});
  EXPECT_EQ(rep.network.count_kind(Kind::auxiliary), 115u);
}

TEST(RandImproved, SizeGrowsWithLogOfPopulation) {
  // at fixed t the size is linear in the bit length of l
  for (double delta : {0.1, 0.01, 1e-3, 1e-4, 1e-6, 1e-9, 1e-15}) {
    auto rep = build_rand_improved({.t = 100000, .delta = delta});
    const auto bits = std::floor(std::log2(rep.param("ell"))) + 1;
    EXPECT_LE(static_cast<double>(rep.network.count_kind(Kind::auxiliary)), 14 * bits + 10) << "delta " << delta;
  }
}

TEST(RandImproved, AttemptProbability) {
  auto rep = build_rand_improved({.t = 1000, .delta = 0.1, .ell = 16, .t_prime = 8});
  const NeuronId a = rep.role("a*");
  EXPECT_NEAR(fire_probability(pot_after(rep.network, a, {rep.role("z_1")})), 1 - 1.0 / 8, 1e-9);
  EXPECT_LT(fire_probability(pot_after(rep.network, a, {})), 1e-6);
}

TEST(RandImproved, RejectsShortT) { EXPECT_THROW(build_rand_improved({.t = 10, .delta = 0.1}), std::invalid_argument); }

TEST(RandImproved, PhaseCountsAreBinomialChain) {
  auto rep = build_rand_improved({.t = 1000, .delta = 0.1, .ell = 16, .t_prime = 8});
  const std::size_t P = 4;
  const int trials = 4000;
  auto law = survivor_law(16, 1 - 1.0 / 8, P);
  std::vector<std::vector<double>> hist(P, std::vector<double>(17, 0));
  int kept = 0;
  for (int s = 0; s < trials; ++s) {
    auto pc = improved_phase_counts(rep, P, trial_seed(5, s));
    if (pc.spurious) continue;
    ++kept;
    for (std::size_t i = 0; i < P; ++i) hist[i][pc.counts[i]] += 1;
  }
  ASSERT_GT(kept, trials * 9 / 10);
  for (std::size_t i = 0; i < P; ++i) {
    double tv = 0;
    for (int c = 0; c <= 16; ++c) tv += std::abs(hist[i][c] / kept - law[i][c]);
    EXPECT_LE(tv / 2, 0.05) << "phase " << i + 1;
  }
}

TEST(RandImproved, FiresThroughTAndRestarts) {
  auto rep = build_rand_improved({.t = 2000, .delta = 0.01});
  const auto t = static_cast<std::uint64_t>(rep.param("t"));
  const NeuronId x = rep.role("x"), y = rep.role("y");
  auto once = montecarlo("fires", 60, 8, [&](std::uint64_t, std::uint64_t s) {
    return timer_fires_t(rep.network, x, y, t, s);
  });
  EXPECT_GE(once.estimate, 0.9);
  // second spike mid-count: y stays on through x2 + t
  const std::uint64_t x2 = t / 2 + 7;
  auto twice = montecarlo("restart", 60, 9, [&](std::uint64_t, std::uint64_t s) {
    auto tr = run(rep.network, spikes(x, {0, x2}), x2 + t, s);
    for (std::uint64_t r = 1; r <= x2 + t; ++r)
      if (!tr.fired(r, y)) return false;
    return true;
  });
  EXPECT_GE(twice.estimate, 0.9);
}
