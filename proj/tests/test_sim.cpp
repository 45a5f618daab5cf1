#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "csmatrap/error.hpp"
#include "csmatrap/sim.hpp"
#include "csmatrap/sojourn.hpp"
#include "csmatrap/statespace.hpp"
#include "csmatrap/traps.hpp"

using namespace csmatrap;
using Kind = DistributionSpec::Kind;

namespace {

// Checks carrier sensing: a link only starts when it and its neighbors are
// idle, and only stops when it was transmitting.
class SafetyCheck : public SimObserver {
 public:
  explicit SafetyCheck(const ContentionGraph& g) : g_(g) {}
  void begin(double t, LinkMask s) override {
    prev_ = s;
    last_ = t;
    ok = ok && g_.is_independent(s);
  }
  void on_event(const SimEvent& e, LinkMask s) override {
    const LinkMask bit = LinkMask{1} << e.link;
    if (e.start) ok = ok && !(prev_ & bit) && !(g_.neighbors(e.link) & prev_);
    else ok = ok && (prev_ & bit);
    ok = ok && g_.is_independent(s) && e.time >= last_;
    prev_ = s;
    last_ = e.time;
    ++events;
  }
  bool ok = true;
  long events = 0;

 private:
  const ContentionGraph& g_;
  LinkMask prev_ = 0;
  double last_ = 0;
};

SimConfig config(const ContentionGraph& g, double rho, Kind b, Kind t, double horizon, std::uint64_t seed) {
  return SimConfig::make(g, rho, b, t, horizon, seed);
}

}  // namespace

TEST_SUITE("sim") {

TEST_CASE("distributions") {
  Rng rng(3);
  const auto e = DistributionSpec::exponential(2.0);
  const auto c = DistributionSpec::constant(0.5);
  const auto u = DistributionSpec::uniform_with_mean(1.5);
  CHECK(u.lo == 0.0);
  CHECK(u.hi == 3.0);
  CHECK(c.sample(rng) == 0.5);
  double se = 0, su = 0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double x = e.sample(rng);
    const double y = u.sample(rng);
    CHECK_UNARY(x >= 0.0);
    CHECK_UNARY(y >= 0.0 && y <= 3.0);
    se += x;
    su += y;
  }
  CHECK(se / n == doctest::Approx(2.0).epsilon(0.02));
  CHECK(su / n == doctest::Approx(1.5).epsilon(0.02));
  CHECK(DistributionSpec::parse("const", 1.0).kind == Kind::constant);
  CHECK(DistributionSpec::parse("uniform", 1.0).name() == "uniform");
  CHECK_THROWS_AS(DistributionSpec::parse("pareto", 1.0), InvalidConfig);
  CHECK_THROWS_AS(DistributionSpec::exponential(0.0).validate(), InvalidConfig);
  CHECK_THROWS_AS(DistributionSpec::uniform(2.0, 1.0).validate(), InvalidConfig);
}

TEST_CASE("rng helpers") {
  Rng a(1), b(1);
  for (int k = 0; k < 100; ++k) {
    const double x = uniform01(a);
    CHECK(x == uniform01(b));
    CHECK_UNARY(x >= 0.0 && x < 1.0);
  }
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(5, 9) == derive_seed(5, 9));
}

TEST_CASE("config validation") {
  const auto g = gen_ring(4);
  auto cfg = config(g, 5.0, Kind::exponential, Kind::exponential, 100, 1);
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.backoff.mean == doctest::Approx(0.2));
  CHECK(cfg.end_time() == doctest::Approx(cfg.warmup + 100));
  auto bad = cfg;
  bad.rho = -1;
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);
  bad = cfg;
  bad.horizon = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);
  bad = cfg;
  bad.initial_active = 0b0011;
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);
  bad = cfg;
  bad.transmission = DistributionSpec::exponential(2.0);
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);
  bad = cfg;
  bad.backoff = DistributionSpec::exponential(1.0);
  CHECK_THROWS_AS(simulate(bad), InvalidConfig);
}

TEST_CASE("carrier sensing holds on every trace") {
  for (const auto& g : {gen_grid(2, 3), fig7_network(), gen_ring(5), gen_random(20, 3, 1), gen_linear(4)}) {
    for (Kind b : {Kind::exponential, Kind::constant, Kind::uniform}) {
      for (Kind t : {Kind::exponential, Kind::constant, Kind::uniform}) {
        SafetyCheck check(g);
        simulate_stream(config(g, 20.0, b, t, 2000, 11), check);
        CHECK(check.ok);
        CHECK(check.events > 100);
      }
    }
  }
}

TEST_CASE("constant distributions with simultaneous expiries stay safe") {
  // Equal constant backoffs make ties likely; tie-breaking must not let two
  // neighbors start together.
  const auto g = gen_grid(2, 3);
  auto cfg = config(g, 1.0, Kind::constant, Kind::constant, 500, 1);
  SafetyCheck check(g);
  simulate_stream(cfg, check);
  CHECK(check.ok);
}

TEST_CASE("same seed, same trace") {
  const auto g = fig7_network();
  const auto a = simulate(config(g, 10.0, Kind::exponential, Kind::uniform, 5000, 42));
  const auto b = simulate(config(g, 10.0, Kind::exponential, Kind::uniform, 5000, 42));
  const auto c = simulate(config(g, 10.0, Kind::exponential, Kind::uniform, 5000, 43));
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t k = 0; k < a.events.size(); ++k) {
    CHECK(a.events[k].time == b.events[k].time);
    CHECK(a.events[k].link == b.events[k].link);
  }
  CHECK(a.events.size() != c.events.size());
  CHECK(a.n_links == 7);
  CHECK(a.start_time == doctest::Approx(100.0));
  CHECK(a.end_time == doctest::Approx(5100.0));
}

TEST_CASE("initial state") {
  const auto g = fig7_network();
  auto cfg = config(g, 53.5, Kind::exponential, Kind::exponential, 10, 1);
  cfg.warmup = 0;
  cfg.initial_active = 0b1010000;  // links 5 and 7
  const auto tr = simulate(cfg);
  CHECK(tr.initial_state == 0b1010000);
}

TEST_CASE("stationary throughput matches the product form") {
  for (const auto& g : {gen_ring(5), gen_linear(3), ContentionGraph(2, {{0, 1}})}) {
    const auto sg = enumerate_states(g);
    for (Kind t : {Kind::exponential, Kind::constant}) {
      const auto tr = simulate(config(g, 3.0, Kind::exponential, t, 2e5, 5));
      for (int i = 0; i < g.n_links(); ++i) {
        const double sim = measure_stationary(tr, [i](LinkMask s) { return (s >> i) & 1; });
        CHECK(sim == doctest::Approx(link_throughput(sg, 3.0, i)).epsilon(0.03));
      }
    }
  }
}

TEST_CASE("trap statistics on the grid") {
  const auto g = gen_grid(2, 3);
  const auto sg = enumerate_states(g);
  const auto f = find_traps(sg);
  const double rho = 10 * kRho0;
  const auto tr = simulate(config(g, rho, Kind::exponential, Kind::exponential, 2e5, 9));
  const auto in0 = trap_predicate(sg, f, 0);
  const double occ = measure_stationary(tr, in0);
  CHECK(occ == doctest::Approx(trap_probability(f.at(0), sg, rho)).epsilon(0.1));
  const auto soj = measure_sojourn(tr, in0);
  CHECK(soj.count > 1000);
  CHECK(std::abs(soj.mean - sojourn_time(f.at(0), sg, rho).value) < 4 * soj.ci95 + 0.02 * soj.mean);
  const auto p = measure_passage(tr, sg, f, 0, 1);
  CHECK(p.count > 100);
  CHECK(p.mean > soj.mean);

  // tracker agrees with the single-set helpers
  SetTracker tracker(2, trap_classifier(sg, f), {{0, 1}});
  replay(tr, tracker);
  CHECK(tracker.occupancy(0) == doctest::Approx(occ).epsilon(1e-12));
  CHECK(tracker.sojourn(0).count == soj.count);
  CHECK(tracker.passage(0).mean == doctest::Approx(p.mean).epsilon(1e-12));
  CHECK(measure_passage(tr, sg, f, 0, 0).count == 0);
}

TEST_CASE("tracker on a scripted trajectory") {
  // set 0 = {link 0 active}; set 1 = {link 1 active}
  SetTracker t(2, [](LinkMask s, std::vector<int>& out) {
    if (s & 1) out.push_back(0);
    if (s & 2) out.push_back(1);
  }, {{0, 1}});
  SimTrace tr;
  tr.n_links = 2;
  tr.start_time = 0;
  tr.initial_state = 1;  // already inside set 0: first visit is not counted
  tr.events = {{1, 0, false}, {2, 0, true}, {5, 0, false}, {6, 1, true}, {7, 1, false},
               {8, 0, true}, {9, 0, false}, {10, 0, true}, {12, 0, false}, {13, 1, true}};
  tr.end_time = 20;
  replay(tr, t);
  const auto s0 = t.sojourn(0);
  CHECK(s0.count == 3);  // [2,5], [8,9], [10,12]
  CHECK(s0.mean == doctest::Approx(2.0));
  CHECK(t.occupancy(0) == doctest::Approx((1 + 3 + 1 + 2) / 20.0));
  CHECK(t.occupancy(1) == doctest::Approx((1 + 7) / 20.0));
  const auto p = t.passage(0);
  CHECK(p.count == 2);  // 2 -> 6, 8 -> 13
  CHECK(p.mean == doctest::Approx((4 + 5) / 2.0));
}

TEST_CASE("too few visits") {
  const auto g = gen_grid(2, 3);
  const auto sg = enumerate_states(g);
  const auto f = find_traps(sg);
  const auto tr = simulate(config(g, 53.5, Kind::exponential, Kind::exponential, 50, 1));
  CHECK_THROWS_AS(measure_sojourn(tr, trap_predicate(sg, f, 0)), InsufficientSamples);
}

TEST_CASE("sample statistics") {
  const auto s = SampleStats::from_moments(4, 10, 30);  // 1,2,3,4
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.stddev == doctest::Approx(std::sqrt(5.0 / 3.0)));
  const auto a = SampleStats::from_moments(2, 3, 5);    // 1,2
  const auto b = SampleStats::from_moments(2, 7, 25);   // 3,4
  const auto m = SampleStats::merge(a, b);
  CHECK(m.count == 4);
  CHECK(m.mean == doctest::Approx(s.mean));
  CHECK(m.stddev == doctest::Approx(s.stddev));
  CHECK(SampleStats::merge(SampleStats{}, a).mean == doctest::Approx(1.5));
}

TEST_CASE("windowed throughput") {
  const auto g = gen_grid(2, 3);
  const auto tr = simulate(config(g, 10.0, Kind::exponential, Kind::exponential, 1000, 2));
  const auto w = windowed_throughput(tr, 50, 0);
  CHECK(w.size() == 20);
  double avg = 0;
  for (double x : w) {
    CHECK_UNARY(x >= 0.0 && x <= 1.0);
    avg += x / w.size();
  }
  CHECK(avg == doctest::Approx(measure_stationary(tr, [](LinkMask s) { return s & 1; })).epsilon(1e-9));
  CHECK_THROWS_AS(windowed_throughput(tr, 50, 6), UnknownLink);

  WindowedThroughput all(6, 30);
  replay(tr, all);
  CHECK(all.series().size() == 33);
  CHECK(all.origin() == doctest::Approx(100.0));
}

TEST_CASE("csv writers") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto g = gen_ring(4);
  const auto tr = simulate(config(g, 2.0, Kind::exponential, Kind::exponential, 200, 4));
  const auto path = (dir / "csmatrap_trace.csv").string();
  write_trace_csv(tr, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "time,link,event");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    const bool good = line.find(",start") != std::string::npos || line.find(",end") != std::string::npos;
    CHECK(good);
  }
  CHECK(rows == tr.events.size());
  std::remove(path.c_str());

  WindowedThroughput w(4, 20);
  replay(tr, w);
  const auto wpath = (dir / "csmatrap_windows.csv").string();
  write_windows_csv(w, wpath);
  std::ifstream win(wpath);
  std::getline(win, line);
  CHECK(line == "window_start,link,throughput");
  rows = 0;
  while (std::getline(win, line)) ++rows;
  CHECK(rows == 4 * w.series().size());
  std::remove(wpath.c_str());
  CHECK_THROWS_AS(write_trace_csv(tr, "/nonexistent/x.csv"), IoError);
}

TEST_CASE("residual wait of an isolated link") {
  // on for Exp(1), off for Exp(1/rho): E[X] = 1 + 1/(rho (1 + rho))
  const ContentionGraph g(1, {});
  const double rho = 2.0;
  ResidualWait rw(0, 0.5, 7);
  simulate_stream(config(g, rho, Kind::exponential, Kind::exponential, 2e5, 3), rw);
  const auto st = rw.stats();
  CHECK(st.count > 50000);
  CHECK(st.mean == doctest::Approx(1.0 + 1.0 / (rho * (1 + rho))).epsilon(0.02));
}

}
