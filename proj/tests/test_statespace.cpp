#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "csmatrap/error.hpp"
#include "csmatrap/statespace.hpp"
#include "oracles.hpp"

using namespace csmatrap;

namespace {

std::vector<ContentionGraph> fixtures() {
  return {gen_ring(4),     gen_ring(5),     gen_ring(8),       gen_linear(3),
          gen_linear(6),   gen_grid(2, 3),  gen_grid(3, 3),    fig7_network(),
          gen_random(12, 3, 5), gen_random(16, 2.5, 9), ContentionGraph(1, {}),
          ContentionGraph(2, {{0, 1}})};
}

// Brute-force throughput: sum of rho^|s| over states containing i, over Z.
double brute_throughput(const ContentionGraph& g, double rho, LinkId i) {
  double num = 0, den = 0;
  for (auto s : oracle::independent_sets(g)) {
    const double w = std::pow(rho, std::popcount(s));
    den += w;
    if ((s >> i) & 1) num += w;
  }
  return num / den;
}

}  // namespace

TEST_SUITE("statespace") {

TEST_CASE("enumeration matches exhaustive scan") {
  for (const auto& g : fixtures()) {
    const auto sg = enumerate_states(g);
    auto expect = oracle::independent_sets(g);
    std::sort(expect.begin(), expect.end(), [](LinkMask a, LinkMask b) {
      return std::pair(std::popcount(a), a) < std::pair(std::popcount(b), b);
    });
    REQUIRE(sg.size() == expect.size());
    for (StateIndex s = 0; s < sg.size(); ++s) {
      CHECK(sg.state(s).active == expect[s]);
      CHECK(sg.index_of(sg.state(s)) == s);
    }
    CHECK_FALSE(sg.index_of(SystemState{~LinkMask{0}}).has_value());

    const auto counts = sg.column_counts();
    std::int64_t total = 0;
    for (int n = 0; n <= sg.max_column(); ++n) {
      auto [lo, hi] = sg.column_range(n);
      CHECK(hi - lo == counts[n]);
      for (StateIndex s = lo; s < hi; ++s) CHECK(sg.cardinality(s) == n);
      total += counts[n];
    }
    CHECK(total == static_cast<std::int64_t>(sg.size()));
  }
}

TEST_CASE("grid census") {
  const auto sg = enumerate_states(gen_grid(2, 3));
  CHECK(sg.column_counts() == std::vector<std::int64_t>{1, 6, 8, 2});
  CHECK(sg.max_column() == 3);
}

TEST_CASE("adjacency is symmetric and complete") {
  for (const auto& g : fixtures()) {
    const auto sg = enumerate_states(g);
    for (StateIndex s = 0; s < sg.size(); ++s) {
      const LinkMask m = sg.state(s).active;
      int feasible = 0;
      for (int i = 0; i < g.n_links(); ++i) {
        if (!((m >> i) & 1) && (g.neighbors(i) & m) == 0) ++feasible;
      }
      CHECK(sg.up_degree(s) == feasible);
      for (auto nb : sg.up(s)) {
        CHECK(sg.state(nb.state).active == (m | (LinkMask{1} << nb.link)));
        const auto back = sg.down(nb.state);
        CHECK(std::any_of(back.begin(), back.end(), [&](const Neighbor& d) { return d.state == s && d.link == nb.link; }));
      }
      CHECK(sg.down(s).size() == static_cast<std::size_t>(std::popcount(m)));
    }
  }
}

TEST_CASE("detailed balance") {
  for (const auto& g : fixtures()) {
    const auto sg = enumerate_states(g);
    for (double rho : {0.3, 1.0, 5.35, 53.5, 1e4}) {
      const auto p = stationary_distribution(sg, rho);
      double sum = 0;
      for (double v : p) sum += v;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      for (StateIndex s = 0; s < sg.size(); ++s) {
        for (auto nb : sg.up(s)) {
          // flow s -> s+i at rate rho equals flow back at rate 1
          CHECK(p[s] * rho == doctest::Approx(p[nb.state]).epsilon(1e-10));
        }
      }
    }
  }
}

TEST_CASE("throughput against brute force") {
  for (const auto& g : fixtures()) {
    const auto sg = enumerate_states(g);
    for (double rho : {0.5, 5.35, 53.5}) {
      for (int i = 0; i < g.n_links(); ++i) {
        CHECK(link_throughput(sg, rho, i) == doctest::Approx(brute_throughput(g, rho, i)).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("large rho stays finite") {
  const auto sg = enumerate_states(gen_random(24, 3, 11));
  for (int i = 0; i < 24; ++i) {
    const double th = link_throughput(sg, 1e9, i);
    CHECK(std::isfinite(th));
    CHECK(th >= 0.0);
    CHECK(th <= 1.0);
  }
}

TEST_CASE("throughput polynomials") {
  const auto sg = enumerate_states(gen_grid(2, 3));
  const auto tp = throughput_polynomials(sg, 0);
  CHECK(tp.denominator == RhoPolynomial{{1, 6, 8, 2}});
  // link 1 appears in 1 single, 3 pairs ({1,4},{1,5},{1,6}), 1 triple
  CHECK(tp.numerator == RhoPolynomial{{0, 1, 3, 1}});
  CHECK(tp.numerator.evaluate(2.0) / tp.denominator.evaluate(2.0) ==
        doctest::Approx(link_throughput(sg, 2.0, 0)));
  CHECK(tp.denominator.degree() == 3);
  CHECK(RhoPolynomial{{0, 0, 0}}.degree() == -1);
}

TEST_CASE("exact asymptotic limits") {
  const auto grid = enumerate_states(gen_grid(2, 3));
  for (int i = 0; i < 6; ++i) CHECK(asymptotic_throughput(grid, i) == Rational(1, 2));
  const auto chain = enumerate_states(gen_linear(3));
  CHECK(asymptotic_throughput(chain, 0) == Rational(1));
  CHECK(asymptotic_throughput(chain, 1) == Rational(0));
  CHECK(asymptotic_throughput(chain, 2) == Rational(1));
  const auto ring = enumerate_states(gen_ring(5));
  for (int i = 0; i < 5; ++i) CHECK(asymptotic_throughput(ring, i) == Rational(2, 5));
  CHECK_THROWS_AS(asymptotic_throughput(ring, 5), UnknownLink);
  CHECK_THROWS_AS(link_throughput(ring, 1.0, -1), UnknownLink);
}

TEST_CASE("limit agrees with large-rho throughput") {
  for (const auto& g : fixtures()) {
    const auto sg = enumerate_states(g);
    for (int i = 0; i < g.n_links(); ++i) {
      const auto q = asymptotic_throughput(sg, i);
      CHECK(link_throughput(sg, 1e8, i) ==
            doctest::Approx(boost::rational_cast<double>(q)).epsilon(1e-6));
    }
  }
}

TEST_CASE("state cap") {
  CHECK_THROWS_AS(enumerate_states(gen_grid(2, 3), 16), StateSpaceTooLarge);
  CHECK_NOTHROW(enumerate_states(gen_grid(2, 3), 17));
  CHECK_THROWS_AS(enumerate_states(ContentionGraph(40, {})), StateSpaceTooLarge);
}

TEST_CASE("formatting and json") {
  CHECK(format_state(SystemState{0}) == "{}");
  CHECK(format_state(SystemState{0b110001}) == "{1,5,6}");
  const auto sg = enumerate_states(gen_linear(3));
  const auto doc = nlohmann::json::parse(state_graph_to_json(sg));
  CHECK(doc.at("states").size() == sg.size());
  CHECK(doc.at("column_counts") == nlohmann::json({1, 3, 1}));
}

}
