#include "csmatrap/traps.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "csmatrap/error.hpp"

namespace csmatrap {

bool Trap::contains(StateIndex s) const {
  return std::binary_search(states.begin(), states.end(), s);
}

std::vector<int> TrapForest::top_level() const {
  std::vector<int> ids;
  for (const auto& t : traps) {
    if (!t.parent) ids.push_back(t.id);
  }
  return ids;
}

bool TrapForest::is_ancestor_or_self(int a, int b) const {
  for (std::optional<int> cur = b; cur; cur = at(*cur).parent) {
    if (*cur == a) return true;
  }
  return false;
}

TruncatedView truncate(const StateGraph& sg, int level) {
  if (level < 0 || level > sg.max_column()) {
    throw ColumnOutOfRange("truncation column " + std::to_string(level) + " outside 0.." +
                           std::to_string(sg.max_column()));
  }
  TruncatedView view{&sg, level, {}};
  const auto first = sg.column_range(level).first;
  view.states.reserve(sg.size() - first);
  for (StateIndex s = first; s < sg.size(); ++s) view.states.push_back(s);
  return view;
}

TruncatedView truncate(const StateGraph& sg, int level, const std::vector<StateIndex>& within) {
  if (level < 0 || level > sg.max_column()) {
    throw ColumnOutOfRange("truncation column " + std::to_string(level));
  }
  TruncatedView view{&sg, level, {}};
  for (StateIndex s : within) {
    if (sg.cardinality(s) >= level) view.states.push_back(s);
  }
  return view;
}

std::vector<std::vector<StateIndex>> connected_components(const TruncatedView& view) {
  const StateGraph& sg = *view.sg;
  // -1 = not retained, -2 = retained but unvisited, >= 0 = component id
  std::vector<int> mark(sg.size(), -1);
  for (StateIndex s : view.states) mark[s] = -2;

  std::vector<std::vector<StateIndex>> comps;
  std::vector<StateIndex> stack;
  for (StateIndex seed : view.states) {
    if (mark[seed] != -2) continue;
    const int id = static_cast<int>(comps.size());
    auto& comp = comps.emplace_back();
    mark[seed] = id;
    stack.push_back(seed);
    while (!stack.empty()) {
      const StateIndex s = stack.back();
      stack.pop_back();
      comp.push_back(s);
      auto visit = [&](std::span<const Neighbor> nbrs) {
        for (auto nb : nbrs) {
          if (mark[nb.state] == -2) {
            mark[nb.state] = id;
            stack.push_back(nb.state);
          }
        }
      };
      visit(sg.up(s));
      visit(sg.down(s));
    }
    std::sort(comp.begin(), comp.end());
  }
  // Order by smallest member, states compared as ascending link lists.
  auto key = [&](const std::vector<StateIndex>& c) {
    LinkMask best = sg.state(c.front()).active;
    for (StateIndex s : c) {
      if (sg.cardinality(s) != sg.cardinality(c.front())) break;
      if (link_order_less(sg.state(s).active, best)) best = sg.state(s).active;
    }
    return best;
  };
  std::vector<std::pair<LinkMask, std::size_t>> order;
  for (std::size_t k = 0; k < comps.size(); ++k) order.emplace_back(key(comps[k]), k);
  std::sort(order.begin(), order.end(),
            [](const auto& a, const auto& b) { return link_order_less(a.first, b.first); });
  std::vector<std::vector<StateIndex>> sorted;
  for (const auto& o : order) sorted.push_back(std::move(comps[o.second]));
  return sorted;
}

namespace {

struct Split {
  int level;
  std::vector<std::vector<StateIndex>> traps;
};

// Scan truncation levels upward from `from` until the retained states fall
// apart into two or more components; keep the multi-column ones.
std::optional<Split> split(const StateGraph& sg, const std::vector<StateIndex>& within,
                           int from, int min_depth) {
  for (int l = from; l <= sg.max_column(); ++l) {
    auto comps = connected_components(truncate(sg, l, within));
    if (comps.empty()) break;
    if (comps.size() < 2) continue;
    Split out{l, {}};
    for (auto& c : comps) {
      const int top = sg.cardinality(c.back());
      if (top - l >= min_depth) out.traps.push_back(std::move(c));
    }
    if (!out.traps.empty()) return out;
  }
  return std::nullopt;
}

Trap make_trap(const StateGraph& sg, std::vector<StateIndex> states, int level) {
  Trap t;
  t.level = level;
  t.states = std::move(states);
  const int top = sg.cardinality(t.states.back());
  t.depth = top - level;
  t.column_sizes.assign(static_cast<std::size_t>(t.depth) + 1, 0);
  for (StateIndex s : t.states) {
    const int c = sg.cardinality(s);
    ++t.column_sizes[c - level];
    if (c == top) t.roots.push_back(s);
  }
  std::sort(t.roots.begin(), t.roots.end(), [&](StateIndex a, StateIndex b) {
    return link_order_less(sg.state(a).active, sg.state(b).active);
  });
  return t;
}

}  // namespace

TrapForest find_traps(const StateGraph& sg, const TrapOptions& opts) {
  if (opts.min_depth < 1) throw InvalidParameter("min_depth must be at least 1");
  TrapForest forest;

  std::vector<StateIndex> all(sg.size());
  for (StateIndex s = 0; s < sg.size(); ++s) all[s] = s;

  std::deque<int> pending;
  auto adopt = [&](const Split& sp, std::optional<int> parent, int generation) {
    for (const auto& comp : sp.traps) {
      Trap t = make_trap(sg, comp, sp.level);
      t.id = static_cast<int>(forest.traps.size());
      t.parent = parent;
      t.generation = generation;
      if (parent) forest.traps[*parent].children.push_back(t.id);
      forest.traps.push_back(std::move(t));
      pending.push_back(forest.traps.back().id);
    }
  };

  if (auto sp = split(sg, all, 0, opts.min_depth)) adopt(*sp, std::nullopt, 1);
  while (!pending.empty()) {
    const int id = pending.front();
    pending.pop_front();
    const Trap& t = forest.traps[id];
    if (auto sp = split(sg, t.states, t.level + 1, opts.min_depth)) {
      adopt(*sp, id, t.generation + 1);
    }
  }

  std::map<int, int> per_level;
  for (auto& t : forest.traps) {
    t.label = "G" + std::to_string(++per_level[t.level]) + "^(" + std::to_string(t.level) + ")";
  }
  return forest;
}

double conditional_throughput(const Trap& trap, const StateGraph& sg, double rho, LinkId i) {
  check_link(sg.graph(), i);
  const auto col = column_state_probability(sg, rho);
  double in = 0.0, total = 0.0;
  for (StateIndex s : trap.states) {
    const double p = col[sg.cardinality(s)];
    total += p;
    if (sg.state(s).contains(i)) in += p;
  }
  return in / total;
}

std::vector<LinkId> starving_links(const Trap& trap, const StateGraph& sg, double rho,
                                   double th_temp) {
  if (!(th_temp > 0.0 && th_temp <= 1.0)) throw InvalidParameter("th_temp must lie in (0, 1]");
  std::vector<LinkId> out;
  for (LinkId i = 0; i < sg.graph().n_links(); ++i) {
    if (conditional_throughput(trap, sg, rho, i) < th_temp) out.push_back(i);
  }
  return out;
}

double trap_probability(const Trap& trap, const StateGraph& sg, double rho) {
  const auto col = column_state_probability(sg, rho);
  double p = 0.0;
  for (StateIndex s : trap.states) p += col[sg.cardinality(s)];
  return p;
}

RhoPolynomial trap_probability_polynomial(const Trap& trap, const StateGraph& sg) {
  RhoPolynomial poly;
  poly.coefficients.assign(static_cast<std::size_t>(sg.max_column()) + 1, 0);
  for (int k = 0; k <= trap.depth; ++k) poly.coefficients[trap.level + k] = trap.column_sizes[k];
  return poly;
}

std::vector<int> frozen_traps(const TrapForest& forest, const StateGraph& sg, LinkId i) {
  check_link(sg.graph(), i);
  std::vector<int> out;
  for (const auto& t : forest.traps) {
    const bool ever_active = std::any_of(t.states.begin(), t.states.end(),
                                         [&](StateIndex s) { return sg.state(s).contains(i); });
    if (!ever_active) out.push_back(t.id);
  }
  return out;
}

}  // namespace csmatrap
