// snnctl: build, simulate and check spiking-network circuits.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "snn/snn.hpp"

using namespace snn;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PropertyFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t default_seed() {
  const char* s = std::getenv("SNN_SEED");
  if (!s || !*s) return 0;
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw UsageError("SNN_SEED must be an unsigned integer");
  }
}

Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  return read_network(in);
}

ExecutionTrace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  return read_trace_bits(in);
}

void save_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

std::string roles_path(const std::string& roles, const std::string& net) {
  if (!roles.empty()) return roles;
  return net + ".roles.json";
}

void save_report(const BuildReport& rep, const std::string& out, const std::string& roles) {
  auto problems = validate(rep.network);
  if (!problems.empty()) throw PropertyFailure("built network is invalid: " + problems.front().message);
  save_text(out, to_text(rep.network));
  if (out.empty() || out == "-") return;
  save_text(roles_path(roles, out), roles_to_json(rep).dump(2) + "\n");
}

BuildReport load_report(const std::string& net, const std::string& roles) {
  Network n = load_network(net);
  std::string path = roles_path(roles, net);
  std::ifstream probe(path);
  if (!probe) {
    if (!roles.empty()) throw UsageError("cannot open " + roles);
    return report_from_json(std::move(n), nlohmann::json::object());
  }
  return report_from_json(std::move(n), nlohmann::json::parse(probe));
}

// "x@0,x@5" -> spikes; "x" -> held
InputSchedule parse_inputs(const Network& net, const std::vector<std::string>& spike_args,
                           const std::vector<std::string>& hold_args) {
  InputSchedule s;
  for (const auto& a : spike_args) {
    auto at = a.find('@');
    if (at == std::string::npos) throw UsageError("--spike expects label@round, got " + a);
    auto id = net.find(a.substr(0, at));
    if (!id || net.neuron(*id).kind != Kind::input) throw UsageError("no input neuron " + a.substr(0, at));
    s.fire(*id, std::stoull(a.substr(at + 1)));
  }
  for (const auto& h : hold_args) {
    auto id = net.find(h);
    if (!id || net.neuron(*id).kind != Kind::input) throw UsageError("no input neuron " + h);
    s.hold(*id);
  }
  return s;
}

double param_or(const BuildReport& rep, const std::string& name, double given) {
  if (given > 0) return given;
  auto it = rep.params.find(name);
  if (it == rep.params.end()) throw UsageError("missing --" + name + " (not in the roles sidecar either)");
  return it->second;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"snnctl: spiking neural network circuits"};
  app.require_subcommand(1);
  app.allow_windows_style_options(false);

  // build
  auto* build = app.add_subcommand("build", "compile a circuit");
  std::string kind, out, roles;
  std::uint64_t t = 0, ell = 0, t_prime = 0;
  double delta = 0.05, alpha = 0, chernoff = 24;
  int L = 1;
  bool exact = false;
  build->add_option("--kind", kind, "det-timer|det-counter|rand-basic|rand-improved|approx-counter|async-timer")
      ->required();
  build->add_option("--t", t, "time parameter")->required();
  build->add_option("--delta", delta, "failure probability");
  build->add_option("--L", L, "latency bound (async-timer)");
  build->add_option("--ell", ell, "population / phase size override");
  build->add_option("--t-prime", t_prime, "phase count override (rand-improved)");
  build->add_option("--alpha", alpha, "Morris base (approx-counter)");
  build->add_option("--chernoff", chernoff, "population constant c in ceil(c ln(1/delta))");
  build->add_flag("--exact", exact, "det-timer: require t = 2^k + k");
  build->add_option("--out", out, "network file (default stdout)");
  build->add_option("--roles", roles, "roles sidecar (default <out>.roles.json)");

  // run
  auto* runc = app.add_subcommand("run", "simulate a network");
  std::string net_path, format = "events";
  std::uint64_t horizon = 0, seed = 0;
  bool seed_given = false;
  std::vector<std::string> spike_args, hold_args;
  runc->add_option("--net", net_path)->required();
  runc->add_option("--horizon", horizon)->required();
  runc->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
  runc->add_option("--spike", spike_args, "input spike label@round (repeatable, comma separated)")->delimiter(',');
  runc->add_option("--hold", hold_args, "input held on in every round")->delimiter(',');
  runc->add_option("--roles", roles, "sidecar whose 'initial' group fires at round 0");
  runc->add_option("--format", format)->check(CLI::IsMember({"bits", "events"}));
  runc->add_option("--out", out);

  // montecarlo
  auto* mc = app.add_subcommand("montecarlo", "estimate a property over seeded trials");
  std::string property, csv;
  std::uint64_t trials = 0, n = 0;
  unsigned threads = 0;
  double expect = -1;
  std::size_t phases = 30;
  mc->add_option("--property", property)
      ->required()
      ->check(CLI::IsMember(
          {"timer-fires-t", "timer-stops-2t", "timer-reliability", "approx-count-window", "morris-moments", "sync-similar-exec"}));
  mc->add_option("--net", net_path, "network file (not needed for morris-moments)");
  mc->add_option("--roles", roles);
  mc->add_option("--trials", trials)->required();
  mc->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
  mc->add_option("--t", t, "timer parameter (default from the sidecar)");
  mc->add_option("--n", n, "spike count (approx-count-window, morris-moments)");
  mc->add_option("--alpha", alpha, "Morris base (morris-moments, default 1.5)");
  mc->add_option("--L", L, "latency bound (sync-similar-exec)");
  mc->add_option("--phases", phases, "phases to compare (sync-similar-exec)");
  mc->add_option("--threads", threads);
  mc->add_option("--csv", csv, "append CSV (header written when the file is new)");
  mc->add_option("--expect", expect, "exit 2 unless the Wilson upper bound reaches this value");

  // synchronize
  auto* syn = app.add_subcommand("synchronize", "asynchronous simulation of a synchronous network");
  std::string in_path;
  int c_pg = 0;
  syn->add_option("--in", in_path)->required();
  syn->add_option("--L", L)->required();
  syn->add_option("--c-pg", c_pg, "pulse generator constant (default: smallest valid)");
  syn->add_option("--out", out);
  syn->add_option("--roles", roles);

  // assign-latencies
  auto* lat = app.add_subcommand("assign-latencies", "set edge latencies");
  std::string policy;
  lat->add_option("--in", in_path)->required();
  lat->add_option("--policy", policy)->required()->check(CLI::IsMember({"uniform", "random", "adversarial"}));
  lat->add_option("--L", L);
  lat->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
  lat->add_option("--out", out);

  // verify
  auto* ver = app.add_subcommand("verify", "similar-execution check of two traces, or validate a network");
  std::string sync_trace, async_trace, sync_net, async_net;
  ver->add_option("--sync", sync_trace, "synchronous trace (bits format)");
  ver->add_option("--async", async_trace, "asynchronous trace (bits format)");
  ver->add_option("--sync-net", sync_net);
  ver->add_option("--async-net", async_net);
  ver->add_option("--roles", roles, "sidecar of the synchronized network");
  ver->add_option("--net", net_path, "validate this network, or decode with --trace");
  std::string trace_path;
  std::uint64_t at_round = 0;
  bool at_given = false;
  ver->add_option("--trace", trace_path, "trace (bits format) of --net to decode a counter from");
  ver->add_option("--round", at_round, "decode round (default last)")->each([&](const std::string&) {
    at_given = true;
  });

  // random-net
  auto* rnd = app.add_subcommand("random-net", "random sign-consistent network");
  RandomNetSpec spec;
  rnd->add_option("--n", spec.n)->required();
  rnd->add_option("--inputs", spec.inputs);
  rnd->add_option("--density", spec.density);
  rnd->add_option("--weight-max", spec.weight_max);
  rnd->add_option("--stochastic", spec.stochastic);
  rnd->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
  rnd->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (!seed_given) seed = default_seed();

    if (*build) {
      BuildReport rep;
      if (kind == "det-timer") {
        rep = build_det_timer({t, exact ? Exactness::exact : Exactness::relaxed});
      } else if (kind == "det-counter") {
        rep = build_det_counter({t});
      } else if (kind == "rand-basic" || kind == "rand-improved") {
        RandTimerParams p;
        p.t = t;
        p.delta = delta;
        p.ell = ell;
        p.t_prime = t_prime;
        p.chernoff_constant = chernoff;
        rep = kind == "rand-basic" ? build_rand_basic(p) : build_rand_improved(p);
      } else if (kind == "approx-counter") {
        rep = build_approx_counter({t, delta, alpha, 0});
      } else if (kind == "async-timer") {
        rep = build_det_timer_async(t, L);
      } else {
        throw UsageError("unknown kind " + kind);
      }
      save_report(rep, out, roles);
      std::cerr << kind << ": " << rep.network.size() << " neurons, " << rep.network.count_kind(Kind::auxiliary)
                << " auxiliary, " << rep.network.count_gate(Gate::stochastic) << " stochastic\n";
      return 0;
    }

    if (*runc) {
      BuildReport rep = load_report(net_path, roles);
      InputSchedule s = parse_inputs(rep.network, spike_args, hold_args);
      std::optional<State> init;
      if (rep.groups.count("initial")) init = initial_state(rep);
      auto trace = run(rep.network, s, horizon, seed, init ? &*init : nullptr);
      std::ostringstream os;
      if (format == "bits")
        write_trace_bits(os, trace);
      else
        write_trace_events(os, trace, rep.network);
      save_text(out, os.str());
      return 0;
    }

    if (*mc) {
      MonteCarloResult r;
      if (property == "morris-moments") {
        MorrisSetup m = MorrisSetup::from_alpha(alpha > 0 ? alpha : 1.5);
        if (n == 0) throw UsageError("morris-moments needs --n");
        r = montecarlo(
            property, trials, seed, [&](std::uint64_t, std::uint64_t s) { return morris_within_half(m, n, s); },
            threads);
      } else {
        if (net_path.empty()) throw UsageError(property + " needs --net");
        BuildReport rep = load_report(net_path, roles);
        if (property == "timer-fires-t" || property == "timer-stops-2t" || property == "timer-reliability") {
          const auto tt = static_cast<std::uint64_t>(param_or(rep, "t", static_cast<double>(t)));
          const NeuronId x = rep.network.id("x"), y = rep.network.id("y");
          const bool fires = property != "timer-stops-2t", stops = property != "timer-fires-t";
          r = montecarlo(
              property, trials, seed,
              [&](std::uint64_t, std::uint64_t s) {
                return (!fires || timer_fires_t(rep.network, x, y, tt, s)) &&
                       (!stops || timer_stops_2t(rep.network, x, y, tt, s));
              },
              threads);
        } else if (property == "approx-count-window") {
          if (n == 0) throw UsageError("approx-count-window needs --n");
          r = montecarlo(
              property, trials, seed,
              [&](std::uint64_t, std::uint64_t s) { return approx_count_window(rep, n, s).in_window; }, threads);
        } else {
          // sync-similar-exec: --net is a synchronous network; each trial draws
          // latencies, input levels and coins
          const Network& sync = rep.network;
          BuildReport srep = synchronize(sync, {L});
          auto labels = shared_labels(sync);
          auto inputs = sync.of_kind(Kind::input);
          r = montecarlo(
              property, trials, seed,
              [&](std::uint64_t, std::uint64_t s) {
                Network async = assign_latencies(srep.network, LatencyPolicy::random_in(L, s));
                std::vector<std::string> on;
                for (std::size_t i = 0; i < inputs.size(); ++i)
                  if ((s >> i) & 1) on.push_back(sync.neuron(inputs[i]).label);
                auto ts = run(sync, held_inputs(sync, on), phases + 1, s);
                auto ta = run_phases(async, srep, held_inputs(async, on), phases, s);
                auto v = check_similar_execution(sync, ts, async, ta, extract_phases(ta, async, srep.role("g")),
                                                 labels);
                return v.pass && v.phases_checked == phases;
              },
              threads);
        }
      }
      std::cout << summary_line(r) << "\n";
      if (!csv.empty()) {
        bool fresh = !std::ifstream(csv).good();
        std::ofstream f(csv, std::ios::app);
        if (!f) throw UsageError("cannot write " + csv);
        if (fresh) f << csv_header() << "\n";
        f << csv_row(r) << "\n";
      }
      if (expect >= 0 && r.hi < expect)
        throw PropertyFailure("estimate interval [" + std::to_string(r.lo) + ", " + std::to_string(r.hi) +
                              "] lies below " + std::to_string(expect));
      return 0;
    }

    if (*syn) {
      Network sync = load_network(in_path);
      SynchronizerConfig c;
      c.L = L;
      c.c_pg = c_pg;
      BuildReport rep = synchronize(sync, c);
      save_report(rep, out, roles);
      std::cerr << "synchronized: " << rep.network.size() << " neurons, c_pg " << rep.param("c_pg") << ", phase in ["
                << rep.param("phase_lo") << ", " << rep.param("phase_hi") << "]\n";
      return 0;
    }

    if (*lat) {
      Network net = load_network(in_path);
      LatencyPolicy p = policy == "uniform"  ? LatencyPolicy::uniform(L)
                        : policy == "random" ? LatencyPolicy::random_in(L, seed)
                                             : LatencyPolicy::adversarial_sync_timer();
      save_text(out, to_text(assign_latencies(net, p)));
      return 0;
    }

    if (*ver) {
      if (!net_path.empty() && !trace_path.empty()) {
        BuildReport rep = load_report(net_path, roles);
        auto tr = load_trace(trace_path);
        if (tr.neurons() != rep.network.size()) throw UsageError("trace width does not match the network");
        if (tr.rounds() == 0) throw UsageError("empty trace");
        const std::uint64_t at = at_given ? at_round : tr.rounds() - 1;
        if (rep.groups.count("hold") && rep.roles.count("v_I"))
          std::cout << "estimate " << decode_estimate(tr, rep, at) << " exponent " << decode_exponent(tr, rep, at)
                    << "\n";
        else if (rep.groups.count("first"))
          std::cout << "count " << decode_counter(tr, rep, at) << "\n";
        else
          throw UsageError("network has no counter readout");
        return 0;
      }
      if (!net_path.empty()) {
        auto problems = validate(load_network(net_path));
        for (const auto& v : problems) std::cout << v.kind << ": " << v.message << "\n";
        if (!problems.empty()) throw PropertyFailure(std::to_string(problems.size()) + " violation(s)");
        std::cout << "valid\n";
        return 0;
      }
      if (sync_trace.empty() || async_trace.empty() || sync_net.empty() || async_net.empty())
        throw UsageError("verify needs --sync, --async, --sync-net and --async-net (or --net)");
      Network sn = load_network(sync_net);
      BuildReport rep = load_report(async_net, roles);
      auto ts = load_trace(sync_trace);
      auto ta = load_trace(async_trace);
      if (ts.neurons() != sn.size() || ta.neurons() != rep.network.size())
        throw UsageError("trace width does not match its network");
      auto v = check_similar_execution(sn, ts, rep.network, ta, extract_phases(ta, rep), shared_labels(sn));
      if (!v.pass)
        throw PropertyFailure("divergence at " + v.neuron + " phase " + std::to_string(v.phase) + " (sync " +
                              (v.sync_fired ? "fired" : "silent") + ")");
      std::cout << "similar execution over " << v.phases_checked << " phases\n";
      return 0;
    }

    if (*rnd) {
      spec.seed = seed;
      save_text(out, to_text(random_network(spec)));
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const PropertyFailure& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
