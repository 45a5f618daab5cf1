#include "csmatrap/graph.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "csmatrap/error.hpp"
#include "csmatrap/random.hpp"

namespace csmatrap {

using nlohmann::json;

ContentionGraph::ContentionGraph(int n_links, std::vector<Edge> edges,
                                 std::vector<std::string> labels)
    : n_links_(n_links), edges_(std::move(edges)), labels_(std::move(labels)) {
  if (n_links_ < 1 || n_links_ > kMaxLinks) {
    throw InvalidSize("n_links must be in 1.." + std::to_string(kMaxLinks) +
                      ", got " + std::to_string(n_links_));
  }
  if (!labels_.empty() && static_cast<int>(labels_.size()) != n_links_) {
    throw ValidationError("labels must have one entry per link");
  }
  for (auto& [a, b] : edges_) {
    if (a < 0 || b < 0 || a >= n_links_ || b >= n_links_) {
      throw ValidationError("edge [" + std::to_string(a) + "," + std::to_string(b) +
                            "] out of range");
    }
    if (a == b) throw ValidationError("self-loop on link " + std::to_string(a));
    if (a > b) std::swap(a, b);
  }
  std::sort(edges_.begin(), edges_.end());
  if (auto it = std::adjacent_find(edges_.begin(), edges_.end()); it != edges_.end()) {
    throw ValidationError("duplicate edge [" + std::to_string(it->first) + "," +
                          std::to_string(it->second) + "]");
  }
  neighbor_mask_.assign(static_cast<std::size_t>(n_links_), 0);
  for (auto [a, b] : edges_) {
    neighbor_mask_[a] |= LinkMask{1} << b;
    neighbor_mask_[b] |= LinkMask{1} << a;
  }
}

int ContentionGraph::degree(LinkId i) const { return std::popcount(neighbors(i)); }

bool ContentionGraph::is_independent(LinkMask active) const {
  for (LinkMask rest = active; rest != 0; rest &= rest - 1) {
    const int i = std::countr_zero(rest);
    if (neighbor_mask_[i] & active) return false;
  }
  return true;
}

std::string ContentionGraph::link_name(LinkId i) const {
  if (!labels_.empty()) return labels_.at(static_cast<std::size_t>(i));
  return std::to_string(i + 1);
}

ContentionGraph parse_graph(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("graph file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("links") || !doc.contains("edges")) {
    throw ParseError("graph file needs an object with \"links\" and \"edges\"");
  }
  const auto& links = doc["links"];
  if (!links.is_number_integer()) throw ParseError("\"links\" must be an integer");
  const auto n = links.get<long long>();
  if (n < 1 || n > kMaxLinks) {
    throw ValidationError("\"links\" must be in 1.." + std::to_string(kMaxLinks));
  }
  const auto& edges = doc["edges"];
  if (!edges.is_array()) throw ParseError("\"edges\" must be an array");
  std::vector<ContentionGraph::Edge> out;
  out.reserve(edges.size());
  for (const auto& e : edges) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
        !e[1].is_number_integer()) {
      throw ParseError("each edge must be a pair of integers");
    }
    const auto a = e[0].get<long long>();
    const auto b = e[1].get<long long>();
    if (a < 0 || b < 0 || a >= n || b >= n) {
      throw ValidationError("edge [" + std::to_string(a) + "," + std::to_string(b) +
                            "] out of range");
    }
    out.emplace_back(static_cast<LinkId>(a), static_cast<LinkId>(b));
  }
  std::vector<std::string> labels;
  if (doc.contains("labels")) {
    const auto& l = doc["labels"];
    if (!l.is_array()) throw ParseError("\"labels\" must be an array of strings");
    for (const auto& s : l) {
      if (!s.is_string()) throw ParseError("\"labels\" must be an array of strings");
      labels.push_back(s.get<std::string>());
    }
  }
  return ContentionGraph(static_cast<int>(n), std::move(out), std::move(labels));
}

std::string serialize_graph(const ContentionGraph& g) {
  json doc;
  doc["links"] = g.n_links();
  doc["edges"] = json::array();
  for (auto [a, b] : g.edges()) doc["edges"].push_back({a, b});
  if (!g.labels().empty()) doc["labels"] = g.labels();
  return doc.dump() + "\n";
}

ContentionGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open graph file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_graph(buf.str());
}

void save_graph(const ContentionGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write graph file '" + path + "'");
  out << serialize_graph(g);
}

ContentionGraph gen_ring(int n) {
  if (n < 3) throw InvalidSize("ring needs at least 3 links");
  if (n > kMaxLinks) throw InvalidSize("ring larger than 63 links");
  std::vector<ContentionGraph::Edge> edges;
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return ContentionGraph(n, std::move(edges));
}

ContentionGraph gen_linear(int n) {
  if (n < 1 || n > kMaxLinks) throw InvalidSize("linear network needs 1..63 links");
  std::vector<ContentionGraph::Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return ContentionGraph(n, std::move(edges));
}

ContentionGraph gen_grid(int rows, int cols) {
  if (rows < 1 || cols < 1) throw InvalidSize("grid dimensions must be positive");
  if (static_cast<long long>(rows) * cols > kMaxLinks) {
    throw InvalidSize("grid has more than 63 links");
  }
  auto id = [rows](int r, int c) { return c * rows + r; };
  std::vector<ContentionGraph::Edge> edges;
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      if (r + 1 < rows) edges.emplace_back(id(r, c), id(r + 1, c));
      if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1));
    }
  }
  return ContentionGraph(rows * cols, std::move(edges));
}

ContentionGraph gen_random(int n, double avg_degree, std::uint64_t seed) {
  if (n < 1 || n > kMaxLinks) throw InvalidSize("random network needs 1..63 links");
  if (!(avg_degree >= 0.0) || (n > 1 && avg_degree >= n) || (n == 1 && avg_degree > 0.0)) {
    throw InvalidParameter("avg_degree must satisfy 0 <= avg_degree < n");
  }
  const double p = n > 1 ? avg_degree / (n - 1) : 0.0;
  Rng rng(seed);
  std::vector<ContentionGraph::Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (uniform01(rng) < p) edges.emplace_back(i, j);
    }
  }
  return ContentionGraph(n, std::move(edges));
}

ContentionGraph fig7_network() {
  // 0-based: links 4 and 6 are the "hub" pair.
  std::vector<ContentionGraph::Edge> edges = {{0, 1}, {0, 2}, {1, 3}, {2, 3}};
  for (int hub : {4, 6}) {
    for (int other : {0, 1, 2, 3, 5}) edges.emplace_back(other, hub);
  }
  return ContentionGraph(7, std::move(edges));
}

}  // namespace csmatrap
