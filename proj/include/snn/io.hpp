#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "network.hpp"
#include "simulate.hpp"

namespace snn {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Canonical text form:
//   snn 1
//   mode <synchronous|asynchronous>
//   [clock <id> <lag>]
//   neurons <N>
//   <id> <label> <kind> <gate> <sign> <bias> [<coin key> <phase|round>]
//   synapses <M>
//   <source> <target> <weight> <latency>
// Fields are tab separated; coin columns appear only for stochastic gates.
inline void write_network(std::ostream& os, const Network& net) {
  os << "snn 1\n";
  os << "mode\t" << to_string(net.mode()) << "\n";
  if (net.phase_clock()) os << "clock\t" << net.phase_clock()->neuron << "\t" << net.phase_clock()->lag << "\n";
  os << "neurons\t" << net.size() << "\n";
  for (NeuronId i = 0; i < net.size(); ++i) {
    const auto& u = net.neuron(i);
    os << i << "\t" << u.label << "\t" << to_string(u.kind) << "\t" << to_string(u.gate) << "\t"
       << to_string(u.sign) << "\t" << format_real(u.bias);
    if (u.gate == Gate::stochastic) os << "\t" << u.coin_key << "\t" << (u.phase_coins ? "phase" : "round");
    os << "\n";
  }
  os << "synapses\t" << net.synapses().size() << "\n";
  for (const auto& s : net.synapses())
    os << s.source << "\t" << s.target << "\t" << format_real(s.weight) << "\t" << s.latency << "\n";
}

inline std::string to_text(const Network& net) {
  std::ostringstream os;
  write_network(os, net);
  return os.str();
}

namespace detail {

inline std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, '\t')) out.push_back(cur);
  return out;
}

inline double parse_real(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ParseError("bad number '" + s + "'");
  }
  if (used != s.size()) throw ParseError("bad number '" + s + "'");
  return v;
}

inline unsigned long long parse_uint(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
    throw ParseError("bad integer '" + s + "'");
  return std::stoull(s);
}

inline std::string next_line(std::istream& is) {
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return line;
  }
  throw ParseError("unexpected end of input");
}

}  // namespace detail

inline Network read_network(std::istream& is) {
  using namespace detail;
  if (next_line(is) != "snn 1") throw ParseError("missing 'snn 1' header");
  auto f = fields(next_line(is));
  if (f.size() != 2 || f[0] != "mode") throw ParseError("missing mode line");
  Mode mode;
  if (f[1] == "synchronous") mode = Mode::synchronous;
  else if (f[1] == "asynchronous") mode = Mode::asynchronous;
  else throw ParseError("unknown mode " + f[1]);

  std::optional<PhaseClock> clock;
  f = fields(next_line(is));
  if (!f.empty() && f[0] == "clock") {
    if (f.size() != 3) throw ParseError("bad clock line");
    clock = PhaseClock{static_cast<NeuronId>(parse_uint(f[1])), static_cast<int>(parse_uint(f[2]))};
    f = fields(next_line(is));
  }
  if (f.size() != 2 || f[0] != "neurons") throw ParseError("missing neurons section");
  const auto n = parse_uint(f[1]);
  std::vector<Neuron> neurons;
  for (unsigned long long i = 0; i < n; ++i) {
    f = fields(next_line(is));
    if (f.size() != 6 && f.size() != 8) throw ParseError("neuron record needs 6 or 8 fields");
    if (parse_uint(f[0]) != i) throw ParseError("neurons must be listed by ascending id");
    Neuron u;
    u.label = f[1];
    if (f[2] == "input") u.kind = Kind::input;
    else if (f[2] == "output") u.kind = Kind::output;
    else if (f[2] == "auxiliary") u.kind = Kind::auxiliary;
    else throw ParseError("unknown kind " + f[2]);
    if (f[3] == "deterministic") u.gate = Gate::deterministic;
    else if (f[3] == "stochastic") u.gate = Gate::stochastic;
    else throw ParseError("unknown gate " + f[3]);
    if (f[4] == "excitatory") u.sign = Sign::excitatory;
    else if (f[4] == "inhibitory") u.sign = Sign::inhibitory;
    else throw ParseError("unknown sign " + f[4]);
    u.bias = parse_real(f[5]);
    u.coin_key = i;
    if (f.size() == 8) {
      u.coin_key = parse_uint(f[6]);
      if (f[7] != "phase" && f[7] != "round") throw ParseError("coin index must be phase or round");
      u.phase_coins = f[7] == "phase";
    }
    neurons.push_back(u);
  }
  f = fields(next_line(is));
  if (f.size() != 2 || f[0] != "synapses") throw ParseError("missing synapses section");
  const auto m = parse_uint(f[1]);
  std::vector<Synapse> synapses;
  for (unsigned long long e = 0; e < m; ++e) {
    f = fields(next_line(is));
    if (f.size() != 4) throw ParseError("synapse record needs 4 fields");
    Synapse s;
    s.source = static_cast<NeuronId>(parse_uint(f[0]));
    s.target = static_cast<NeuronId>(parse_uint(f[1]));
    s.weight = parse_real(f[2]);
    s.latency = static_cast<int>(parse_uint(f[3]));
    synapses.push_back(s);
  }
  return Network(mode, std::move(neurons), std::move(synapses), clock);
}

inline Network from_text(const std::string& text) {
  std::istringstream is(text);
  return read_network(is);
}

// round<TAB>bitstring, bit i = neuron with id i
inline void write_trace_bits(std::ostream& os, const ExecutionTrace& trace) {
  std::string bits(trace.neurons(), '0');
  for (std::uint64_t r = 0; r < trace.rounds(); ++r) {
    for (std::size_t i = 0; i < trace.neurons(); ++i)
      bits[i] = trace.fired(r, static_cast<NeuronId>(i)) ? '1' : '0';
    os << r << "\t" << bits << "\n";
  }
}

// round<TAB>comma-separated labels of firing neurons; silent rounds are skipped
inline void write_trace_events(std::ostream& os, const ExecutionTrace& trace, const Network& net) {
  for (std::uint64_t r = 0; r < trace.rounds(); ++r) {
    std::string line;
    for (NeuronId i = 0; i < trace.neurons(); ++i) {
      if (!trace.fired(r, i)) continue;
      if (!line.empty()) line += ",";
      line += net.neuron(i).label;
    }
    if (!line.empty()) os << r << "\t" << line << "\n";
  }
}

// Reads the bitstring form back; schedule and seed are not part of it.
inline ExecutionTrace read_trace_bits(std::istream& is) {
  std::vector<State> states;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto f = detail::fields(line);
    if (f.size() != 2) throw ParseError("trace line needs round and bits");
    if (detail::parse_uint(f[0]) != states.size()) throw ParseError("trace rounds must be consecutive from 0");
    State s(f[1].size());
    for (std::size_t i = 0; i < f[1].size(); ++i) {
      if (f[1][i] != '0' && f[1][i] != '1') throw ParseError("trace bits must be 0 or 1");
      s[i] = f[1][i] == '1';
    }
    if (!states.empty() && s.size() != states.front().size()) throw ParseError("ragged trace");
    states.push_back(std::move(s));
  }
  if (states.empty()) throw ParseError("empty trace");
  ExecutionTrace trace(states.front().size(), {}, 0);
  for (const auto& s : states) trace.push(s);
  return trace;
}

}  // namespace snn
