#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "csmatrap/error.hpp"
#include "csmatrap/graph.hpp"

using namespace csmatrap;

TEST_SUITE("graph") {

TEST_CASE("edges are normalized and sorted") {
  ContentionGraph g(4, {{3, 2}, {1, 0}, {2, 0}});
  CHECK(g.edges() == std::vector<ContentionGraph::Edge>{{0, 1}, {0, 2}, {2, 3}});
  CHECK(g.adjacent(2, 3));
  CHECK(g.adjacent(3, 2));
  CHECK_FALSE(g.adjacent(1, 3));
  CHECK(g.degree(0) == 2);
  CHECK(g.degree(1) == 1);
  CHECK(g.is_independent(0b1010));
  CHECK_FALSE(g.is_independent(0b0011));
  CHECK(g.link_name(0) == "1");
}

TEST_CASE("invalid graphs are rejected") {
  CHECK_THROWS_AS(ContentionGraph(3, {{1, 1}}), ValidationError);
  CHECK_THROWS_AS(ContentionGraph(3, {{0, 1}, {1, 0}}), ValidationError);
  CHECK_THROWS_AS(ContentionGraph(3, {{0, 3}}), ValidationError);
  CHECK_THROWS_AS(ContentionGraph(3, {{-1, 2}}), ValidationError);
  CHECK_THROWS_AS(ContentionGraph(0, {}), InvalidSize);
  CHECK_THROWS_AS(ContentionGraph(64, {}), InvalidSize);
  CHECK_NOTHROW(ContentionGraph(63, {}));
  CHECK_THROWS_AS(gen_ring(2), InvalidSize);
}

TEST_CASE("json round trip") {
  std::vector<ContentionGraph> all = {gen_ring(5),         gen_linear(7),
                                      gen_grid(2, 3),      gen_grid(3, 4),
                                      gen_random(20, 3, 7), fig7_network(),
                                      ContentionGraph(1, {})};
  for (const auto& g : all) CHECK(parse_graph(serialize_graph(g)) == g);

  ContentionGraph labelled(2, {{0, 1}}, {"ap", "sta"});
  const auto back = parse_graph(serialize_graph(labelled));
  CHECK(back == labelled);
  CHECK(back.link_name(1) == "sta");
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_graph("{"), ParseError);
  CHECK_THROWS_AS(parse_graph("[1,2]"), ParseError);
  CHECK_THROWS_AS(parse_graph(R"({"links": 3})"), ParseError);
  CHECK_THROWS_AS(parse_graph(R"({"links": 3, "edges": [[0]]})"), ParseError);
  CHECK_THROWS_AS(parse_graph(R"({"links": 3, "edges": [[0, 0]]})"), ValidationError);
  CHECK_THROWS_AS(parse_graph(R"({"links": 2, "edges": [[0, 5]]})"), ValidationError);
  CHECK_THROWS_AS(load_graph("/nonexistent/graph.json"), IoError);
}

TEST_CASE("file io") {
  const auto path = (std::filesystem::temp_directory_path() / "csmatrap_graph_test.json").string();
  save_graph(fig7_network(), path);
  CHECK(load_graph(path) == fig7_network());
  std::remove(path.c_str());
  CHECK_THROWS_AS(save_graph(fig7_network(), "/nonexistent/dir/g.json"), IoError);
}

TEST_CASE("ring and chain") {
  const auto r = gen_ring(5);
  CHECK(r.edges().size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(r.degree(i) == 2);
  CHECK(r.adjacent(0, 4));
  const auto c = gen_linear(3);
  CHECK(c.edges() == std::vector<ContentionGraph::Edge>{{0, 1}, {1, 2}});
}

TEST_CASE("grid numbering is column-major") {
  const auto g = gen_grid(2, 3);
  CHECK(g.n_links() == 6);
  CHECK(g.edges().size() == 7);
  // rows pair 0-1, 2-3, 4-5; columns link 0-2-4 and 1-3-5
  CHECK(g.adjacent(0, 1));
  CHECK(g.adjacent(0, 2));
  CHECK(g.adjacent(3, 5));
  CHECK_FALSE(g.adjacent(1, 2));
  // checkerboard classes {1,4,5} and {2,3,6}
  CHECK(g.is_independent(0b011001));
  CHECK(g.is_independent(0b100110));
}

TEST_CASE("random graphs are reproducible") {
  CHECK(gen_random(20, 3, 7) == gen_random(20, 3, 7));
  CHECK_FALSE(gen_random(20, 3, 7) == gen_random(20, 3, 8));
  CHECK(gen_random(10, 0, 1).edges().empty());
  CHECK_THROWS_AS(gen_random(10, -1, 1), InvalidParameter);
  CHECK_THROWS_AS(gen_random(10, 10, 1), InvalidParameter);

  // average degree is near the target over many draws
  double total = 0;
  for (std::uint64_t s = 0; s < 200; ++s) total += 2.0 * gen_random(20, 3, s).edges().size() / 20.0;
  CHECK(total / 200 == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("seven-link network") {
  const auto g = fig7_network();
  CHECK(g.n_links() == 7);
  CHECK(g.edges().size() == 14);
  for (int v : {4, 6}) {
    for (int u : {0, 1, 2, 3, 5}) CHECK(g.adjacent(u, v));
  }
  CHECK_FALSE(g.adjacent(4, 6));
  CHECK(g.adjacent(0, 1));
  CHECK(g.adjacent(0, 2));
  CHECK(g.adjacent(1, 3));
  CHECK(g.adjacent(2, 3));
  CHECK_FALSE(g.adjacent(0, 3));
  CHECK(g.degree(5) == 2);
}

}
