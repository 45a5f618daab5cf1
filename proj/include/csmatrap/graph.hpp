#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace csmatrap {

using LinkId = int;
using LinkMask = std::uint64_t;

inline constexpr int kMaxLinks = 63;

/// Undirected contention graph: vertices are links, an edge means the two
/// links sense each other's carrier. Immutable once built.
class ContentionGraph {
 public:
  using Edge = std::pair<LinkId, LinkId>;

  ContentionGraph() = default;

  /// Edges are normalized to (lo, hi). Throws ValidationError on self-loops,
  /// duplicates or out-of-range indices, InvalidSize on n_links outside 1..63.
  ContentionGraph(int n_links, std::vector<Edge> edges,
                  std::vector<std::string> labels = {});

  int n_links() const { return n_links_; }
  /// Sorted lexicographically, each with first < second.
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::string>& labels() const { return labels_; }

  LinkMask neighbors(LinkId i) const { return neighbor_mask_.at(static_cast<std::size_t>(i)); }
  bool adjacent(LinkId i, LinkId j) const { return (neighbors(i) >> j) & 1u; }
  int degree(LinkId i) const;
  bool is_independent(LinkMask active) const;

  /// Human-facing name: the label if present, else the 1-based index.
  std::string link_name(LinkId i) const;

  friend bool operator==(const ContentionGraph&, const ContentionGraph&) = default;

 private:
  int n_links_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::string> labels_;
  std::vector<LinkMask> neighbor_mask_;
};

// JSON I/O: {"links": N, "edges": [[i,j],...], "labels": [...]?}
ContentionGraph parse_graph(std::string_view text);
std::string serialize_graph(const ContentionGraph& g);
ContentionGraph load_graph(const std::string& path);
void save_graph(const ContentionGraph& g, const std::string& path);

// Fixture generators.
ContentionGraph gen_ring(int n);
ContentionGraph gen_linear(int n);
/// Column-major numbering: the link at (row r, col c) has index c*rows + r,
/// so a 2x3 grid splits into the two checkerboard classes {1,4,5} / {2,3,6}
/// in 1-based labels.
ContentionGraph gen_grid(int rows, int cols);
/// Independent inclusion of each pair with probability avg_degree/(n-1).
ContentionGraph gen_random(int n, double avg_degree, std::uint64_t seed);
/// Seven-link network: links 5 and 7 (1-based) hear all of {1,2,3,4,6} but
/// not each other; additionally 1-2, 1-3, 2-4, 3-4.
ContentionGraph fig7_network();

}  // namespace csmatrap
