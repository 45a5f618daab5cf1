#include "csmatrap/passage.hpp"

#include <algorithm>
#include <map>

#include "csmatrap/error.hpp"
#include "csmatrap/linsolve.hpp"
#include "csmatrap/sojourn.hpp"

namespace csmatrap {

int SimplifiedChain::node_of_trap(int trap_id) const {
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k].trap == trap_id) return static_cast<int>(k);
  }
  throw InvalidParameter("trap " + std::to_string(trap_id) + " is not aggregated in this chain");
}

namespace {

// Traps of one forest are either nested or disjoint.
bool disjoint(const TrapForest& forest, int a, int b) {
  return !forest.is_ancestor_or_self(a, b) && !forest.is_ancestor_or_self(b, a);
}

}  // namespace

std::vector<int> select_trap_set(const TrapForest& forest, int trap_i, int trap_j) {
  forest.at(trap_i);
  forest.at(trap_j);
  if (!disjoint(forest, trap_i, trap_j)) {
    throw NestedTraps("traps " + std::to_string(trap_i) + " and " + std::to_string(trap_j) +
                      " are nested");
  }
  std::vector<int> order;
  for (const auto& t : forest.traps) {
    if (t.id != trap_i && t.id != trap_j) order.push_back(t.id);
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return forest.at(a).depth > forest.at(b).depth;
  });
  std::vector<int> chosen = {trap_i, trap_j};
  for (int cand : order) {
    if (std::all_of(chosen.begin(), chosen.end(), [&](int c) { return disjoint(forest, c, cand); })) {
      chosen.push_back(cand);
    }
  }
  return chosen;
}

SimplifiedChain build_simplified_chain(const StateGraph& sg, const TrapForest& forest,
                                       const std::vector<int>& trap_ids, double rho) {
  if (!(rho > 0.0)) throw InvalidParameter("rho must be positive");
  SimplifiedChain chain;
  chain.node_of_state.assign(sg.size(), -1);
  for (int id : trap_ids) {
    const int node = static_cast<int>(chain.nodes.size());
    chain.nodes.push_back({id, 0});
    for (StateIndex s : forest.at(id).states) {
      if (chain.node_of_state[s] != -1) {
        throw InvalidParameter("aggregated traps must be pairwise disjoint");
      }
      chain.node_of_state[s] = node;
    }
  }
  for (StateIndex s = 0; s < sg.size(); ++s) {
    if (chain.node_of_state[s] == -1) {
      chain.node_of_state[s] = static_cast<int>(chain.nodes.size());
      chain.nodes.push_back({std::nullopt, s});
    }
  }

  chain.exit_rates.resize(chain.nodes.size());
  chain.jumps.resize(chain.nodes.size());
  for (std::size_t k = 0; k < chain.nodes.size(); ++k) {
    std::map<int, double> out;
    const auto& node = chain.nodes[k];
    if (node.trap) {
      const Trap& t = forest.at(*node.trap);
      chain.exit_rates[k] = 1.0 / sojourn_time(t, sg, rho).value;
      // Exits are uniform over the leftmost column, then uniform over its
      // l downward transitions.
      const double share = 1.0 / (static_cast<double>(t.column_sizes.front()) * t.level);
      for (StateIndex s : t.states) {
        if (sg.cardinality(s) != t.level) continue;
        for (auto nb : sg.down(s)) out[chain.node_of_state[nb.state]] += share;
      }
    } else {
      const StateIndex s = node.state;
      const double rate = sg.cardinality(s) + sg.up_degree(s) * rho;
      chain.exit_rates[k] = rate;
      for (auto nb : sg.down(s)) out[chain.node_of_state[nb.state]] += 1.0 / rate;
      for (auto nb : sg.up(s)) out[chain.node_of_state[nb.state]] += rho / rate;
    }
    chain.jumps[k].assign(out.begin(), out.end());
  }
  return chain;
}

double mean_hitting_time(const SimplifiedChain& chain, int from, int to) {
  if (from == to) return 0.0;
  const int n = static_cast<int>(chain.nodes.size());
  // Unknowns are all nodes except the target; e_to = 0.
  auto unknown = [to](int node) { return node < to ? node : node - 1; };
  std::vector<Triplet> a;
  std::vector<double> b(static_cast<std::size_t>(n - 1));
  for (int u = 0; u < n; ++u) {
    if (u == to) continue;
    const int r = unknown(u);
    a.emplace_back(r, r, 1.0);
    b[r] = 1.0 / chain.exit_rates[u];
    for (auto [v, p] : chain.jumps[u]) {
      if (v != to) a.emplace_back(r, unknown(v), -p);
    }
  }
  return solve_sparse(n - 1, a, b)[unknown(from)];
}

double first_passage(const StateGraph& sg, const TrapForest& forest, int trap_i, int trap_j,
                     double rho) {
  std::vector<int> set;
  try {
    set = select_trap_set(forest, trap_i, trap_j);
  } catch (const NestedTraps&) {
    return 0.0;
  }
  const auto chain = build_simplified_chain(sg, forest, set, rho);
  return mean_hitting_time(chain, chain.node_of_trap(trap_i), chain.node_of_trap(trap_j));
}

}  // namespace csmatrap
