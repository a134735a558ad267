#pragma once

#include <cstdint>

namespace snn {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-mode coins: the value for (key, index) is a pure function of the
// seed, so coins can be drawn in any order and replayed across executions.
class CoinPlan {
 public:
  CoinPlan() = default;
  explicit CoinPlan(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t bits(std::uint64_t key, std::uint64_t index) const {
    std::uint64_t h = splitmix64(seed_ ^ 0x5851f42d4c957f2dULL);
    h = splitmix64(h ^ key);
    return splitmix64(h ^ (index * 0xd1342543de82ef95ULL));
  }

  // uniform in [0,1) with 53 random bits
  double operator()(std::uint64_t key, std::uint64_t index) const {
    return static_cast<double>(bits(key, index) >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t seed_ = 0;
};

// Seed of the i-th trial in a Monte Carlo batch.
inline std::uint64_t trial_seed(std::uint64_t base, std::uint64_t trial) {
  return splitmix64(base ^ splitmix64(trial + 0x2545f4914f6cdd1dULL));
}

}  // namespace snn
