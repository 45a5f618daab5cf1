#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "csmatrap/traps.hpp"

namespace csmatrap {

/// The state graph with each selected trap lumped into one node. Trap nodes
/// leave at rate 1/T_V and return to the states feeding their leftmost
/// column; all other nodes keep their original rates.
struct SimplifiedChain {
  struct Node {
    std::optional<int> trap;  // trap id for aggregate nodes
    StateIndex state = 0;     // original state otherwise
  };

  std::vector<Node> nodes;
  std::vector<double> exit_rates;
  std::vector<std::vector<std::pair<int, double>>> jumps;  // (node, probability)
  std::vector<int> node_of_state;

  int node_of_trap(int trap_id) const;
};

/// Ids of {i, j} plus a maximal set of further traps disjoint from them and
/// from each other, deeper traps first. Throws NestedTraps when one of i, j
/// contains the other.
std::vector<int> select_trap_set(const TrapForest& forest, int trap_i, int trap_j);

/// Traps must be pairwise disjoint.
SimplifiedChain build_simplified_chain(const StateGraph& sg, const TrapForest& forest,
                                       const std::vector<int>& trap_ids, double rho);

/// Mean time from node `from` until the first visit to node `to`.
double mean_hitting_time(const SimplifiedChain& chain, int from, int to);

/// Expected first passage time between two traps; zero when nested.
double first_passage(const StateGraph& sg, const TrapForest& forest, int trap_i, int trap_j,
                     double rho);

}  // namespace csmatrap
