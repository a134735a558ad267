#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "coins.hpp"
#include "network.hpp"

namespace snn {

using State = std::vector<std::uint8_t>;

inline constexpr std::uint64_t kMaxHorizon = 1ULL << 24;

struct InsufficientHistory : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input firing pattern: one-off events per round plus inputs held on in every round.
struct InputSchedule {
  std::map<std::uint64_t, std::vector<NeuronId>> events;
  std::vector<NeuronId> held;
  std::uint64_t horizon = 0;

  InputSchedule& fire(NeuronId x, std::uint64_t round) {
    events[round].push_back(x);
    horizon = std::max(horizon, round);
    return *this;
  }
  InputSchedule& hold(NeuronId x) {
    held.push_back(x);
    return *this;
  }
  bool fires(NeuronId x, std::uint64_t round) const {
    for (auto h : held)
      if (h == x) return true;
    auto it = events.find(round);
    if (it == events.end()) return false;
    for (auto v : it->second)
      if (v == x) return true;
    return false;
  }
};

inline InputSchedule spikes(NeuronId x, const std::vector<std::uint64_t>& rounds) {
  InputSchedule s;
  for (auto r : rounds) s.fire(x, r);
  return s;
}

// Sigmoid with temperature 1, evaluated without overflow on either side.
inline double fire_probability(double pot) {
  double p;
  if (pot >= 0) {
    p = 1.0 / (1.0 + std::exp(-pot));
  } else {
    double e = std::exp(pot);
    p = e / (1.0 + e);
  }
  return p < 1e-300 ? 0.0 : p;
}

// history[history.size() - k] is the state k rounds before the evaluated one.
inline double potential(const Network& net, std::span<const State> history, NeuronId u) {
  if (history.size() < static_cast<std::size_t>(net.max_latency()))
    throw InsufficientHistory("potential needs " + std::to_string(net.max_latency()) +
                              " past states, got " + std::to_string(history.size()));
  double pot = -net.neuron(u).bias;
  for (auto e : net.incoming(u)) {
    const auto& s = net.synapses()[e];
    if (history[history.size() - s.latency][s.source]) pot += s.weight;
  }
  return pot;
}

inline bool decide(const Neuron& u, double pot, const CoinPlan& coins, std::uint64_t index) {
  if (u.gate == Gate::deterministic) return pot >= 0;
  return coins(u.coin_key, index) < fire_probability(pot);
}

// One round of Eq.-(1)/(2) style dynamics from an explicit history window.
inline State step(const Network& net, std::span<const State> history, const InputSchedule& schedule,
                  std::uint64_t round, const CoinPlan& coins, std::optional<std::uint64_t> phase = {}) {
  State next(net.size(), 0);
  for (NeuronId u = 0; u < net.size(); ++u) {
    const auto& nu = net.neuron(u);
    if (nu.kind == Kind::input) {
      next[u] = schedule.fires(u, round);
      continue;
    }
    double pot = potential(net, history, u);
    std::uint64_t index = nu.phase_coins && phase ? *phase : round;
    next[u] = decide(nu, pot, coins, index);
  }
  return next;
}

// Dense time-indexed firing record, one bit per neuron per round.
class ExecutionTrace {
 public:
  ExecutionTrace() = default;
  ExecutionTrace(std::size_t neurons, InputSchedule schedule, std::uint64_t seed)
      : n_(neurons), words_((neurons + 63) / 64), schedule_(std::move(schedule)), seed_(seed) {}

  std::size_t neurons() const { return n_; }
  std::uint64_t rounds() const { return words_ ? bits_.size() / words_ : count_; }
  std::uint64_t last_round() const { return rounds() - 1; }
  const InputSchedule& schedule() const { return schedule_; }
  std::uint64_t seed() const { return seed_; }

  void push(const State& s) {
    ++count_;
    std::size_t base = bits_.size();
    bits_.resize(base + words_, 0);
    for (std::size_t i = 0; i < n_; ++i)
      if (s[i]) bits_[base + i / 64] |= 1ULL << (i % 64);
  }

  bool fired(std::uint64_t round, NeuronId u) const {
    return (bits_.at(round * words_ + u / 64) >> (u % 64)) & 1ULL;
  }

  State state(std::uint64_t round) const {
    State s(n_, 0);
    for (std::size_t i = 0; i < n_; ++i) s[i] = fired(round, static_cast<NeuronId>(i));
    return s;
  }

  std::vector<std::uint64_t> firing_rounds(NeuronId u) const {
    std::vector<std::uint64_t> out;
    for (std::uint64_t r = 0; r < rounds(); ++r)
      if (fired(r, u)) out.push_back(r);
    return out;
  }

  bool operator==(const ExecutionTrace& o) const { return n_ == o.n_ && bits_ == o.bits_; }

 private:
  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::uint64_t count_ = 0;
  std::vector<std::uint64_t> bits_;
  InputSchedule schedule_;
  std::uint64_t seed_ = 0;
};

// Stepping engine keeping a ring of the last max(L, clock lag)+1 states.
// Rounds before 0 count as silent.
class Simulator {
 public:
  Simulator(const Network& net, const InputSchedule& schedule, CoinPlan coins,
            const State* initial = nullptr)
      : net_(net), schedule_(schedule), coins_(coins) {
    auto report = validate(net);
    if (!report.empty()) throw std::invalid_argument("invalid network: " + report.front().message);
    depth_ = net.max_latency();
    if (net.phase_clock()) depth_ = std::max(depth_, net.phase_clock()->lag);
    depth_ += 1;
    ring_.assign(depth_, State(net.size(), 0));
    build_tables();
    State& s0 = ring_[0];
    if (initial) {
      if (initial->size() != net.size()) throw std::invalid_argument("initial state has wrong length");
      s0 = *initial;
    }
    for (auto x : inputs_) s0[x] = schedule_.fires(x, 0);
  }

  std::uint64_t round() const { return round_; }
  const State& state() const { return ring_[round_ % depth_]; }

  // state k rounds ago (0 = current); silent before round 0
  const State& back(int k) const {
    if (k >= depth_) throw InsufficientHistory("ring holds " + std::to_string(depth_) + " states");
    if (static_cast<std::uint64_t>(k) > round_) return silent_;
    return ring_[(round_ - k) % depth_];
  }

  std::uint64_t phase() const { return phase_; }

  void advance() {
    const std::uint64_t r = round_ + 1;
    if (net_.phase_clock()) {
      const auto& c = *net_.phase_clock();
      if (r >= static_cast<std::uint64_t>(c.lag) + 1) {
        const State& s = back(c.lag - 1);  // round r - lag
        if (s[c.neuron]) ++phase_;
      }
    }
    State& next = ring_[r % depth_];
    for (NeuronId u = 0; u < net_.size(); ++u) {
      const auto& nu = net_.neuron(u);
      if (nu.kind == Kind::input) continue;
      double pot = -nu.bias;
      for (std::uint32_t e = off_[u]; e < off_[u + 1]; ++e) {
        const int lat = lat_[e];
        if (static_cast<std::uint64_t>(lat) > r) continue;
        if (ring_[(r - lat) % depth_][src_[e]]) pot += w_[e];
      }
      scratch_[u] = decide(nu, pot, coins_, nu.phase_coins ? phase_ : r);
    }
    for (auto x : inputs_) scratch_[x] = 0;
    std::swap(next, scratch_);
    if (!schedule_.held.empty() || !schedule_.events.empty())
      for (auto x : inputs_) next[x] = schedule_.fires(x, r);
    round_ = r;
  }

 private:
  void build_tables() {
    const auto n = net_.size();
    off_.assign(n + 1, 0);
    for (NeuronId u = 0; u < n; ++u) {
      off_[u + 1] = off_[u] + static_cast<std::uint32_t>(net_.incoming(u).size());
      if (net_.neuron(u).kind == Kind::input) inputs_.push_back(u);
    }
    for (NeuronId u = 0; u < n; ++u)
      for (auto e : net_.incoming(u)) {
        const auto& s = net_.synapses()[e];
        src_.push_back(s.source);
        w_.push_back(s.weight);
        lat_.push_back(s.latency);
      }
    scratch_.assign(n, 0);
    silent_.assign(n, 0);
  }

  const Network& net_;
  const InputSchedule& schedule_;
  CoinPlan coins_;
  int depth_ = 2;
  std::vector<State> ring_;
  State scratch_, silent_;
  std::vector<std::uint32_t> off_;
  std::vector<NeuronId> src_, inputs_;
  std::vector<double> w_;
  std::vector<int> lat_;
  std::uint64_t round_ = 0;
  std::uint64_t phase_ = 1;
};

// Runs rounds 0..horizon, calling visit(round, state) for each; stops early
// when visit returns false.
template <class Visit>
void simulate(const Network& net, const InputSchedule& schedule, std::uint64_t horizon,
              std::uint64_t seed, Visit&& visit, const State* initial = nullptr) {
  if (horizon > kMaxHorizon) throw std::invalid_argument("horizon exceeds 2^24 rounds");
  Simulator sim(net, schedule, CoinPlan(seed), initial);
  if (!visit(std::uint64_t{0}, sim.state())) return;
  for (std::uint64_t r = 1; r <= horizon; ++r) {
    sim.advance();
    if (!visit(r, sim.state())) return;
  }
}

inline ExecutionTrace run(const Network& net, const InputSchedule& schedule, std::uint64_t horizon,
                          std::uint64_t seed = 0, const State* initial = nullptr) {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  ExecutionTrace trace(net.size(), schedule, seed);
  simulate(
      net, schedule, horizon, seed,
      [&](std::uint64_t, const State& s) {
        trace.push(s);
        return true;
      },
      initial);
  return trace;
}

// First pair of rounds (tau < tau') in [first, last] whose states agree on subset.
inline std::optional<std::pair<std::uint64_t, std::uint64_t>> detect_state_cycle(
    const ExecutionTrace& trace, const std::vector<NeuronId>& subset, std::uint64_t first = 0,
    std::optional<std::uint64_t> last = std::nullopt) {
  if (trace.rounds() == 0) throw std::invalid_argument("empty trace");
  std::uint64_t end = last ? std::min(*last, trace.last_round()) : trace.last_round();
  std::unordered_map<std::string, std::uint64_t> seen;
  std::string key(subset.size(), '0');
  for (std::uint64_t r = first; r <= end; ++r) {
    for (std::size_t i = 0; i < subset.size(); ++i) key[i] = trace.fired(r, subset[i]) ? '1' : '0';
    auto [it, fresh] = seen.emplace(key, r);
    if (!fresh) return std::make_pair(it->second, r);
  }
  return std::nullopt;
}

}  // namespace snn
