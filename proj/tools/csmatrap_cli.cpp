#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include <CLI11.hpp>
#include <json.hpp>

#include "csmatrap/error.hpp"
#include "csmatrap/graph.hpp"
#include "csmatrap/kernels.hpp"
#include "csmatrap/report.hpp"
#include "csmatrap/sim.hpp"
#include "csmatrap/validation.hpp"

using namespace csmatrap;
using json = nlohmann::json;

namespace {

struct InputOptions {
  std::string graph_path;
  std::string gen_spec;
  std::string rho_text;
  double rho0_mult = 0.0;
  std::size_t max_states = kDefaultStateCap;

  void add(CLI::App* sub) {
    auto* g = sub->add_option("-g,--graph", graph_path, "contention graph JSON");
    auto* s = sub->add_option("--gen", gen_spec,
                              "generator spec instead of a file: ring:N, linear:N, grid:RxC, "
                              "random:N:AVG:SEED, fig7");
    g->excludes(s);
    auto* r = sub->add_option("--rho", rho_text, "access intensity; a trailing x means a multiple of rho0");
    auto* m = sub->add_option("--rho0-mult", rho0_mult, "access intensity as a multiple of rho0 = 5.35");
    r->excludes(m);
    sub->add_option("--max-states", max_states, "state-space cap");
  }

  ContentionGraph graph() const {
    if (graph_path.empty() == gen_spec.empty()) {
      throw InvalidConfig("exactly one of --graph or --gen is required");
    }
    if (!graph_path.empty()) return load_graph(graph_path);
    return from_spec(gen_spec);
  }

  double rho() const {
    double v = kRho0;
    if (rho0_mult != 0.0) {
      v = rho0_mult * kRho0;
    } else if (!rho_text.empty()) {
      std::string t = rho_text;
      bool mult = false;
      if (t.back() == 'x' || t.back() == 'X') {
        mult = true;
        t.pop_back();
      }
      std::size_t used = 0;
      try {
        v = std::stod(t, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != t.size()) throw InvalidParameter("bad rho: " + rho_text);
      if (mult) v *= kRho0;
    }
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidParameter("rho must be positive");
    return v;
  }

  static ContentionGraph from_spec(const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    auto num = [&](std::size_t k) {
      if (k >= parts.size()) throw InvalidConfig("bad generator spec: " + spec);
      return std::stod(parts[k]);
    };
    const std::string& kind = parts.empty() ? spec : parts[0];
    try {
      if (kind == "fig7") return fig7_network();
      if (kind == "ring") return gen_ring(static_cast<int>(num(1)));
      if (kind == "linear") return gen_linear(static_cast<int>(num(1)));
      if (kind == "random") {
        return gen_random(static_cast<int>(num(1)), num(2),
                          parts.size() > 3 ? std::stoull(parts[3]) : 1);
      }
      if (kind == "grid" && parts.size() == 2) {
        int r = 0, c = 0;
        if (std::sscanf(parts[1].c_str(), "%dx%d", &r, &c) == 2) return gen_grid(r, c);
      }
    } catch (const std::invalid_argument&) {
    } catch (const std::out_of_range&) {
    }
    throw InvalidConfig("bad generator spec: " + spec);
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

json stats_json(const SampleStats& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"stddev", s.stddev}, {"ci95", s.ci95}};
}

DistributionSpec::Kind parse_kind(const std::string& name) {
  return DistributionSpec::parse(name, 1.0).kind;
}

// generate ------------------------------------------------------------------

struct GenerateCmd {
  std::string out;
  int n = 0, rows = 0, cols = 0;
  double avg_degree = 3.0;
  std::uint64_t seed = 1;

  void add(CLI::App& app) {
    auto* gen = app.add_subcommand("generate", "write a fixture contention graph");
    gen->require_subcommand(1);
    auto out_opt = [&](CLI::App* s) { s->add_option("-o,--output", out, "output path (default stdout)"); };
    auto* ring = gen->add_subcommand("ring", "N-link ring");
    ring->add_option("--n", n)->required();
    auto* lin = gen->add_subcommand("linear", "N-link chain");
    lin->add_option("--n", n)->required();
    auto* grid = gen->add_subcommand("grid", "rows x cols grid");
    grid->add_option("--rows", rows)->required();
    grid->add_option("--cols", cols)->required();
    auto* rnd = gen->add_subcommand("random", "random graph");
    rnd->add_option("--n", n)->required();
    rnd->add_option("--avg-degree", avg_degree);
    rnd->add_option("--seed", seed);
    auto* fig7 = gen->add_subcommand("fig7", "seven-link example network");
    for (auto* s : {ring, lin, grid, rnd, fig7}) {
      out_opt(s);
      s->final_callback([this, s] { run(s->get_name()); });
    }
  }

  void run(const std::string& kind) {
    ContentionGraph g;
    if (kind == "ring") g = gen_ring(n);
    else if (kind == "linear") g = gen_linear(n);
    else if (kind == "grid") g = gen_grid(rows, cols);
    else if (kind == "random") g = gen_random(n, avg_degree, seed);
    else g = fig7_network();
    if (out.empty()) std::cout << serialize_graph(g);
    else save_graph(g, out);
  }
};

// analyze -------------------------------------------------------------------

struct AnalyzeCmd {
  InputOptions in;
  Thresholds th;
  std::string out;
  double tx_ms = 0.0;
  bool no_passages = false;
  bool quiet = false;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("analyze", "trap decomposition and starvation report");
    in.add(sub);
    sub->add_option("--th-equil", th.th_equil, "equilibrium starvation threshold");
    sub->add_option("--th-temp", th.th_temp, "in-trap throughput threshold");
    sub->add_option("--d-target", th.d_target, "minimum trap depth for temporal starvation");
    sub->add_option("--x-target", th.x_target, "residual-wait target (normalized time)");
    sub->add_option("-o,--output", out, "report JSON path");
    sub->add_option("--tx-ms", tx_ms, "mean transmission duration in ms, for display");
    sub->add_flag("--no-passages", no_passages, "skip passage times");
    sub->add_flag("-q,--quiet", quiet, "no text summary");
    sub->final_callback([this] { run(); });
  }

  void run() {
    th.validate();
    const auto g = in.graph();
    ReportOptions opts;
    opts.max_states = in.max_states;
    opts.passages = !no_passages;
    const auto report = full_report(g, in.rho(), th, opts);
    if (!out.empty()) write_text(out, report_to_json(report));
    if (!quiet) {
      std::cout << (tx_ms > 0 ? report_to_text(report, tx_ms, "ms") : report_to_text(report));
    }
  }
};

// simulate ------------------------------------------------------------------

struct SimulateCmd {
  InputOptions in;
  double horizon = 1e5;
  double warmup = 100.0;
  std::uint64_t seed = 1;
  double window = 0.0;
  std::string tx = "exp", backoff = "exp";
  std::string trace_path, windows_path, stats_path, report_path;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("simulate", "run the event-driven CSMA simulator");
    in.add(sub);
    sub->add_option("--horizon", horizon, "measured duration after warmup");
    sub->add_option("--warmup", warmup, "discarded initial duration");
    sub->add_option("--seed", seed);
    sub->add_option("--window", window, "window length for throughput series");
    sub->add_option("--tx", tx, "transmission distribution")->check(CLI::IsMember({"exp", "const", "uniform"}));
    sub->add_option("--backoff", backoff, "backoff distribution")->check(CLI::IsMember({"exp", "const", "uniform"}));
    sub->add_option("--trace", trace_path, "event trace CSV");
    sub->add_option("--windows", windows_path, "windowed throughput CSV (needs --window)");
    sub->add_option("--stats", stats_path, "stats JSON (default stdout)");
    sub->add_option("--report", report_path, "analysis report JSON; adds per-trap statistics");
    sub->final_callback([this] { run(); });
  }

  void run() {
    const auto g = in.graph();
    const double rho = in.rho();
    SimConfig cfg = SimConfig::make(g, rho, parse_kind(backoff), parse_kind(tx), horizon, seed);
    cfg.warmup = warmup;
    cfg.validate();
    if (!windows_path.empty() && !(window > 0)) throw InvalidConfig("--windows needs --window > 0");

    // Per-link activity.
    SetTracker links(g.n_links(), [](LinkMask s, std::vector<int>& out) {
      for (LinkMask r = s; r != 0; r &= r - 1) out.push_back(std::countr_zero(r));
    });
    std::vector<SimObserver*> obs{&links};

    std::optional<WindowedThroughput> windows;
    if (window > 0) {
      windows.emplace(g.n_links(), window);
      obs.push_back(&*windows);
    }

    json report;
    std::optional<SetTracker> traps;
    std::vector<std::pair<int, int>> pairs;
    if (!report_path.empty()) {
      std::ifstream f(report_path);
      if (!f) throw IoError("cannot read " + report_path);
      try {
        report = json::parse(f);
      } catch (const json::exception& e) {
        throw ParseError(std::string("report: ") + e.what());
      }
      if (report.value("links", -1) != g.n_links()) throw InvalidConfig("report does not match graph");
      auto index = std::make_shared<std::unordered_map<LinkMask, std::vector<int>>>();
      int n_traps = 0;
      for (const auto& t : report.at("traps")) {
        const int id = t.at("id").get<int>();
        n_traps = std::max(n_traps, id + 1);
        for (LinkMask m : t.at("states").get<std::vector<LinkMask>>()) (*index)[m].push_back(id);
      }
      for (const auto& p : report.at("passages")) pairs.emplace_back(p.at("from"), p.at("to"));
      traps.emplace(n_traps,
                    [index](LinkMask s, std::vector<int>& out) {
                      if (auto it = index->find(s); it != index->end()) out = it->second;
                    },
                    pairs);
      obs.push_back(&*traps);
    }

    ObserverList all(obs);
    if (!trace_path.empty()) {
      const SimTrace trace = simulate(cfg);
      write_trace_csv(trace, trace_path);
      replay(trace, all);
    } else {
      simulate_stream(cfg, all);
    }

    json doc;
    doc["links"] = g.n_links();
    doc["rho"] = rho;
    doc["seed"] = seed;
    doc["warmup"] = warmup;
    doc["horizon"] = horizon;
    doc["backoff"] = cfg.backoff.name();
    doc["transmission"] = cfg.transmission.name();
    json th = json::array();
    for (int i = 0; i < g.n_links(); ++i) th.push_back(links.occupancy(i));
    doc["throughput"] = th;
    if (windows) {
      const auto& series = windows->series();
      doc["window"] = window;
      doc["window_count"] = series.size();
      // Fraction of windows where each link is nearly idle or nearly saturated.
      json extreme = json::array();
      for (int i = 0; i < g.n_links(); ++i) {
        std::size_t k = 0;
        for (const auto& w : series) k += (w[i] < 0.1 || w[i] > 0.9);
        extreme.push_back(series.empty() ? 0.0 : static_cast<double>(k) / series.size());
      }
      doc["extreme_window_fraction"] = extreme;
      if (!windows_path.empty()) write_windows_csv(*windows, windows_path);
    }
    if (traps) {
      json tj = json::array();
      for (const auto& t : report.at("traps")) {
        const int id = t.at("id");
        tj.push_back({{"id", id},
                      {"label", t.value("label", "")},
                      {"probability", t.value("probability_at_rho", 0.0)},
                      {"occupancy", traps->occupancy(id)},
                      {"sojourn_time", t.value("sojourn_time", 0.0)},
                      {"sojourn", stats_json(traps->sojourn(id))}});
      }
      doc["traps"] = tj;
      json pj = json::array();
      std::size_t k = 0;
      for (const auto& p : report.at("passages")) {
        pj.push_back({{"from", p.at("from")},
                      {"to", p.at("to")},
                      {"time", p.value("time", 0.0)},
                      {"passage", stats_json(traps->passage(k++))}});
      }
      doc["passages"] = pj;
    }
    const std::string text = doc.dump(2) + "\n";
    if (stats_path.empty()) std::cout << text;
    else write_text(stats_path, text);
  }
};

// validate ------------------------------------------------------------------

struct ValidateCmd {
  InputOptions in;
  ValidationOptions opts;
  std::string tx = "exp", backoff = "exp";
  std::string out;
  double tx_ms = 0.0;
  bool no_exact = false;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("validate", "compare analytic trap times with simulation");
    in.add(sub);
    sub->add_option("--horizon", opts.horizon, "measured duration per replica");
    sub->add_option("--replicas", opts.replicas, "independent simulation runs");
    sub->add_option("--seed", opts.seed);
    sub->add_option("--warmup", opts.warmup);
    sub->add_option("--tx", tx)->check(CLI::IsMember({"exp", "const", "uniform"}));
    sub->add_option("--backoff", backoff)->check(CLI::IsMember({"exp", "const", "uniform"}));
    sub->add_flag("--no-exact", no_exact, "skip the exact exit-time solve");
    sub->add_option("--tx-ms", tx_ms, "mean transmission duration in ms, for display");
    sub->add_option("-o,--output", out, "comparison JSON path");
    sub->final_callback([this] { run(); });
  }

  void run() {
    const auto g = in.graph();
    opts.rho = in.rho();
    opts.max_states = in.max_states;
    opts.exact = !no_exact;
    opts.backoff = parse_kind(backoff);
    opts.transmission = parse_kind(tx);
    if (!(opts.horizon > 0) || opts.replicas < 1) throw InvalidConfig("horizon and replicas must be positive");
    const auto res = validate_network(g, opts);

    const double scale = tx_ms > 0 ? tx_ms : 1.0;
    char buf[256];
    std::printf("rho %.4g  horizon %.3g x %d  threads %d\n", opts.rho, opts.horizon, opts.replicas,
                kernels::max_threads());
    if (res.traps.empty()) std::printf("no traps\n");
    json doc;
    doc["rho"] = opts.rho;
    doc["traps"] = json::array();
    doc["passages"] = json::array();
    double abs_sum = 0.0;
    int n_abs = 0;
    if (!res.traps.empty()) {
      std::printf("%-10s %9s %9s %12s %12s %12s %9s %9s %8s\n", "trap", "Pr", "occup", "T_V", "T_V(sim)",
                  "exact", "dT_V", "dT_V'", "visits");
    }
    for (const auto& tc : res.traps) {
      const auto& label = res.forest.at(tc.id).label;
      const bool ok = tc.simulated.count > 0;
      std::snprintf(buf, sizeof buf, "%-10s %8.4f%% %8.4f%% %12.4f %12.4f %12.4f %8.2f%% %8.2f%% %8lld",
                    label.c_str(), 100 * tc.probability, 100 * tc.occupancy, tc.sojourn * scale,
                    tc.simulated.mean * scale, tc.exact.value_or(NAN) * scale,
                    ok ? 100 * tc.error() : NAN, ok ? 100 * tc.asymptotic_error() : NAN,
                    static_cast<long long>(tc.simulated.count));
      std::puts(buf);
      if (ok) {
        abs_sum += std::abs(tc.error());
        ++n_abs;
      }
      doc["traps"].push_back({{"id", tc.id},
                              {"label", label},
                              {"probability", tc.probability},
                              {"occupancy", tc.occupancy},
                              {"sojourn_time", tc.sojourn},
                              {"beta_rho_d", tc.asymptotic},
                              {"exact", tc.exact ? json(*tc.exact) : json(nullptr)},
                              {"simulated", stats_json(tc.simulated)},
                              {"delta", ok ? json(tc.error()) : json(nullptr)},
                              {"delta_asymptotic", ok ? json(tc.asymptotic_error()) : json(nullptr)}});
    }
    if (n_abs > 0) std::printf("mean |dT_V| %.3f%%\n", 100 * abs_sum / n_abs);
    if (!res.passages.empty()) {
      std::printf("%-22s %12s %12s %9s %8s\n", "passage", "T_p", "T_p(sim)", "dT_p", "samples");
    }
    for (const auto& pc : res.passages) {
      const std::string name = res.forest.at(pc.from).label + " -> " + res.forest.at(pc.to).label;
      const bool ok = pc.simulated.count > 0;
      std::snprintf(buf, sizeof buf, "%-22s %12.4f %12.4f %8.2f%% %8lld", name.c_str(), pc.computed * scale,
                    pc.simulated.mean * scale, ok ? 100 * pc.error() : NAN,
                    static_cast<long long>(pc.simulated.count));
      std::puts(buf);
      doc["passages"].push_back({{"from", pc.from},
                                 {"to", pc.to},
                                 {"time", pc.computed},
                                 {"simulated", stats_json(pc.simulated)},
                                 {"delta", ok ? json(pc.error()) : json(nullptr)}});
    }
    if (!out.empty()) write_text(out, doc.dump(2) + "\n");
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal starvation analysis for CSMA contention graphs"};
  app.require_subcommand(1);
  GenerateCmd gen;
  AnalyzeCmd analyze;
  SimulateCmd sim;
  ValidateCmd validate;
  gen.add(app);
  analyze.add(app);
  sim.add(app);
  validate.add(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
