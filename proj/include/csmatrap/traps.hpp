#pragma once

#include <optional>
#include <string>
#include <vector>

#include "csmatrap/statespace.hpp"

namespace csmatrap {

/// A connected component of a truncated state graph spanning at least two
/// columns. Columns are indexed as in the full graph: the trap occupies
/// columns level .. level + depth.
struct Trap {
  int id = 0;
  int level = 0;
  int depth = 0;
  int generation = 1;  // 1 for first-level traps, 2 for their children, ...
  std::string label;   // "G<k>^(<level>)", k counting traps that share a level
  std::vector<StateIndex> states;  // sorted ascending
  std::vector<StateIndex> roots;  // ordered by link_order_less
  std::optional<int> parent;
  std::vector<int> children;
  /// |A_k| for k = level .. level + depth.
  std::vector<std::int64_t> column_sizes;

  bool contains(StateIndex s) const;
  std::int64_t column_size(int column) const { return column_sizes.at(static_cast<std::size_t>(column - level)); }
};

struct TrapForest {
  std::vector<Trap> traps;  // indexed by id, breadth-first over the hierarchy

  bool empty() const { return traps.empty(); }
  const Trap& at(int id) const { return traps.at(static_cast<std::size_t>(id)); }
  std::vector<int> top_level() const;
  /// True when a is b or an ancestor of b.
  bool is_ancestor_or_self(int a, int b) const;
};

/// The states retained by an l-column truncation, optionally restricted to a
/// subset of the state graph (used when decomposing inside a trap).
struct TruncatedView {
  const StateGraph* sg = nullptr;
  int level = 0;
  std::vector<StateIndex> states;  // retained, ascending
};

TruncatedView truncate(const StateGraph& sg, int level);
TruncatedView truncate(const StateGraph& sg, int level, const std::vector<StateIndex>& within);

/// Fewer links first; equal sizes compare as ascending link lists, so
/// {1,4,6} < {2,3,6}.
inline bool link_order_less(LinkMask a, LinkMask b) {
  const int ca = std::popcount(a), cb = std::popcount(b);
  if (ca != cb) return ca < cb;
  const LinkMask diff = a ^ b;
  return diff != 0 && (a & diff & (~diff + 1)) != 0;
}

/// Components over the retained edges, each sorted, ordered by smallest
/// member under link_order_less.
std::vector<std::vector<StateIndex>> connected_components(const TruncatedView& view);

struct TrapOptions {
  int min_depth = 1;
};

/// Hierarchical decomposition: the smallest truncation that disconnects the
/// diagram yields the first-level traps, then each trap is split the same
/// way by truncating further inside it, until nothing splits.
TrapForest find_traps(const StateGraph& sg, const TrapOptions& opts = {});

double conditional_throughput(const Trap& trap, const StateGraph& sg, double rho, LinkId i);
std::vector<LinkId> starving_links(const Trap& trap, const StateGraph& sg, double rho,
                                   double th_temp);
double trap_probability(const Trap& trap, const StateGraph& sg, double rho);
/// Numerator of the trap probability; the denominator is the column census.
RhoPolynomial trap_probability_polynomial(const Trap& trap, const StateGraph& sg);
/// Ids of traps in which link i is never active.
std::vector<int> frozen_traps(const TrapForest& forest, const StateGraph& sg, LinkId i);

}  // namespace csmatrap
