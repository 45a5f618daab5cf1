#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include <json.hpp>

#include "csmatrap/graph.hpp"

namespace {

struct Result {
  int code;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(CSMATRAP_CLI) + " " + args + " 2>&1";
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe.get())) > 0) out.append(buf.data(), n);
  const int status = pclose(pipe.release());
  return {WEXITSTATUS(status), out};
}

std::string tmp(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("csmatrap_cli_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("generate") {
  const auto g = tmp("grid.json");
  CHECK(run("generate grid --rows 2 --cols 3 -o " + g).code == 0);
  CHECK(csmatrap::load_graph(g) == csmatrap::gen_grid(2, 3));
  const auto ring = run("generate ring --n 5");
  CHECK(ring.code == 0);
  CHECK(csmatrap::parse_graph(ring.out) == csmatrap::gen_ring(5));
  const auto r1 = run("generate random --n 20 --avg-degree 3 --seed 7");
  const auto r2 = run("generate random --n 20 --avg-degree 3 --seed 7");
  CHECK(r1.out == r2.out);
  CHECK(csmatrap::parse_graph(r1.out) == csmatrap::gen_random(20, 3, 7));
  CHECK(run("generate ring --n 2").code != 0);
  CHECK(run("generate fig7").code == 0);
  CHECK(run("generate").code != 0);
}

TEST_CASE("analyze") {
  const auto f7 = tmp("fig7.json");
  run("generate fig7 -o " + f7);
  const auto rep = tmp("fig7_report.json");
  const auto a = run("analyze -g " + f7 + " --rho 5.35 -o " + rep);
  CHECK(a.code == 0);
  CHECK(a.out.find("92.60") != std::string::npos);
  CHECK(a.out.find("7.21") != std::string::npos);
  const auto doc = nlohmann::json::parse(slurp(rep));
  CHECK(doc.at("traps").size() == 4);

  const auto grid = run("analyze --gen grid:2x3 --rho 53.5");
  CHECK(grid.code == 0);
  CHECK(grid.out.find("T_V=9.4167") != std::string::npos);
  CHECK(run("analyze --gen grid:2x3 --rho 10x").out == grid.out);
  CHECK(run("analyze --gen grid:2x3 --rho0-mult 10").out == grid.out);

  const auto ring = run("analyze --gen ring:5 --rho 53.5");
  CHECK(ring.out.find("no traps") != std::string::npos);

  CHECK(run("analyze --gen grid:2x3 --rho 10x --tx-ms 2").out.find("ms") != std::string::npos);
  CHECK(run("analyze --gen ring:5 --rho -1").code != 0);
  CHECK(run("analyze --gen ring:5 --rho abc").code != 0);
  CHECK(run("analyze --rho 1").code != 0);
  CHECK(run("analyze -g " + f7 + " --gen ring:5").code != 0);
  CHECK(run("analyze --gen bogus:3").code != 0);
  CHECK(run("analyze --gen ring:5 --max-states 3").code != 0);
}

TEST_CASE("simulate") {
  const auto g = tmp("sim_grid.json");
  run("generate grid --rows 2 --cols 3 -o " + g);
  const auto rep = tmp("sim_report.json");
  run("analyze -q -g " + g + " --rho 53.5 -o " + rep);
  const auto stats = tmp("stats.json"), trace = tmp("trace.csv"), win = tmp("win.csv");
  const auto s = run("simulate -g " + g + " --rho 53.5 --horizon 2e4 --seed 1 --window 50 --tx exp --backoff exp" +
                     " --report " + rep + " --stats " + stats + " --trace " + trace + " --windows " + win);
  CHECK(s.code == 0);
  const auto doc = nlohmann::json::parse(slurp(stats));
  CHECK(doc.at("throughput").size() == 6);
  CHECK(doc.at("traps").size() == 2);
  CHECK(doc.at("traps")[0].at("sojourn").at("count").get<int>() > 100);
  CHECK(doc.at("passages").size() == 2);
  CHECK(slurp(trace).rfind("time,link,event\n", 0) == 0);
  CHECK(slurp(win).rfind("window_start,link,throughput\n", 0) == 0);

  // seed fixes everything
  const auto again = tmp("stats2.json");
  run("simulate -g " + g + " --rho 53.5 --horizon 2e4 --seed 1 --window 50 --report " + rep + " --stats " + again);
  CHECK(slurp(again) == slurp(stats));

  CHECK(run("simulate -g /nonexistent.json --rho 1").code != 0);
  CHECK(run("simulate -g " + g + " --rho 1 --horizon -5").code != 0);
  CHECK(run("simulate -g " + g + " --rho 1 --tx pareto").code != 0);
  CHECK(run("simulate -g " + g + " --rho 1 --report /nonexistent.json").code != 0);
}

TEST_CASE("validate") {
  const auto out = tmp("validate.json");
  const auto v = run("validate --gen grid:2x3 --rho 10x --horizon 5e4 --replicas 2 --seed 3 -o " + out);
  CHECK(v.code == 0);
  CHECK(v.out.find("dT_V") != std::string::npos);
  CHECK(v.out.find("G1^(2) -> G2^(2)") != std::string::npos);
  const auto doc = nlohmann::json::parse(slurp(out));
  CHECK(doc.at("traps").size() == 2);
  CHECK(std::abs(doc.at("traps")[0].at("delta").get<double>()) < 0.1);
  const auto again = run("validate --gen grid:2x3 --rho 10x --horizon 5e4 --replicas 2 --seed 3");
  CHECK(again.out == v.out);
  CHECK(run("validate --gen grid:2x3 --replicas 0").code != 0);
}

}
