#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "approx_counter.hpp"
#include "coins.hpp"
#include "report.hpp"
#include "simulate.hpp"

namespace snn {

struct Interval {
  double lo = 0, hi = 1;
};

// Wilson score interval, 95% by default
inline Interval wilson(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054) {
  if (trials == 0) throw std::invalid_argument("wilson interval needs at least one trial");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  return {std::max(0.0, std::min(p, centre - half)), std::min(1.0, std::max(p, centre + half))};
}

struct MonteCarloResult {
  std::string property;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double estimate = 0;
  double lo = 0, hi = 1;
  std::uint64_t seed = 0;
};

inline const char* csv_header() { return "property,trials,successes,estimate,lo,hi,seed"; }

inline std::string csv_row(const MonteCarloResult& r) {
  std::ostringstream os;
  os.precision(6);
  os << r.property << ',' << r.trials << ',' << r.successes << ',' << r.estimate << ',' << r.lo << ',' << r.hi
     << ',' << r.seed;
  return os.str();
}

inline std::string summary_line(const MonteCarloResult& r) {
  std::ostringstream os;
  os.precision(4);
  os << r.property << ": " << r.successes << "/" << r.trials << " = " << r.estimate << " [" << r.lo << ", "
     << r.hi << "] seed " << r.seed;
  return os.str();
}

// Runs trial(i, trial_seed(seed, i)) -> bool for i < trials on `threads`
// workers. Each outcome is stored by index, so the thread count never
// changes the result.
template <class Trial>
MonteCarloResult montecarlo(const std::string& property, std::uint64_t trials, std::uint64_t seed, Trial&& trial,
                            unsigned threads = 0) {
  if (trials == 0) throw std::invalid_argument("trials must be positive");
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, trials));
  std::vector<std::uint8_t> ok(trials, 0);
  auto work = [&](unsigned w) {
    for (std::uint64_t i = w; i < trials; i += threads) ok[i] = trial(i, trial_seed(seed, i)) ? 1 : 0;
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  MonteCarloResult r;
  r.property = property;
  r.trials = trials;
  r.successes = static_cast<std::uint64_t>(std::count(ok.begin(), ok.end(), 1));
  r.estimate = static_cast<double>(r.successes) / static_cast<double>(trials);
  auto ci = wilson(r.successes, trials);
  r.lo = ci.lo;
  r.hi = ci.hi;
  r.seed = seed;
  return r;
}

// -- single-trial properties ---------------------------------------------

// y fires in every round x_round+1 .. x_round+t after one x spike
inline bool timer_fires_t(const Network& net, NeuronId x, NeuronId y, std::uint64_t t, std::uint64_t seed,
                          std::uint64_t x_round = 0) {
  bool ok = true;
  simulate(net, spikes(x, {x_round}), x_round + t, seed, [&](std::uint64_t r, const State& s) {
    if (r > x_round && !s[y]) ok = false;
    return ok;
  });
  return ok;
}

// y silent in rounds x_round+2t .. x_round+4t after one x spike
inline bool timer_stops_2t(const Network& net, NeuronId x, NeuronId y, std::uint64_t t, std::uint64_t seed,
                           std::uint64_t x_round = 0) {
  bool ok = true;
  simulate(net, spikes(x, {x_round}), x_round + 4 * t, seed, [&](std::uint64_t r, const State& s) {
    if (r >= x_round + 2 * t && s[y]) ok = false;
    return ok;
  });
  return ok;
}

struct ApproxWindowTrial {
  std::uint64_t decoded = 0;
  bool in_window = false;
};

// n x spikes every `gap` rounds; decode after the last update settles and
// compare against [n/2 - 2, 4n - 1]
inline ApproxWindowTrial approx_count_window(const BuildReport& rep, std::uint64_t n, std::uint64_t seed,
                                             std::uint64_t gap = 2, std::uint64_t settle = 60) {
  const NeuronId x = rep.role("x");
  InputSchedule s;
  for (std::uint64_t i = 0; i < n; ++i) s.fire(x, i * gap);
  const std::uint64_t end = (n ? (n - 1) * gap : 0) + settle;
  auto trace = run(rep.network, s, end, seed);
  ApproxWindowTrial out;
  out.decoded = decode_estimate(trace, rep, end);
  const double d = static_cast<double>(out.decoded), nn = static_cast<double>(n);
  out.in_window = d >= nn / 2 - 2 && d <= 4 * nn - 1;
  return out;
}

// Morris chain settings for counts past the small counter: s spikes counted
// exactly, then the exponent starts at init = ceil(log_alpha(1/delta + 1)).
struct MorrisSetup {
  double alpha = 1.5;
  double delta = 0.5;
  std::uint64_t s = 4;
  std::uint64_t init = 3;

  static MorrisSetup from_alpha(double alpha) {
    MorrisSetup m;
    m.alpha = alpha;
    m.delta = alpha - 1;
    m.s = static_cast<std::uint64_t>(std::ceil(1 / (m.delta * (alpha - 1)) - 1e-9));
    m.init = static_cast<std::uint64_t>(std::ceil(std::log(1 / m.delta + 1) / std::log(alpha) - 1e-9));
    return m;
  }
  // bracket for E[alpha^{z_n}]
  double mean_lo(std::uint64_t n) const { return static_cast<double>(n) * (alpha - 1) * (1 - delta) + 1; }
  double mean_hi(std::uint64_t n) const { return static_cast<double>(n) * (alpha - 1) + 1; }
  double value(std::uint64_t n, std::uint64_t seed) const {
    auto st = morris_oracle(n > s ? n - s : 0, alpha, init, seed);
    return std::pow(alpha, static_cast<double>(st.z));
  }
};

// one chain lands within half of the mean bracket: alpha^{z_n} in [lo/2, 3hi/2]
inline bool morris_within_half(const MorrisSetup& m, std::uint64_t n, std::uint64_t seed) {
  const double v = m.value(n, seed);
  return v >= m.mean_lo(n) / 2 && v <= 1.5 * m.mean_hi(n);
}

}  // namespace snn
