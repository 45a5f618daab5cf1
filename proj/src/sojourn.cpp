#include "csmatrap/sojourn.hpp"

#include <algorithm>
#include <cmath>

#include "csmatrap/error.hpp"
#include "csmatrap/linsolve.hpp"

namespace csmatrap {

double BirthDeathChain::down_rate(int column) const {
  if (column < level || column > level + depth) {
    throw LevelOutOfRange("column " + std::to_string(column) + " outside the chain");
  }
  return column;
}

double BirthDeathChain::up_rate(int column) const {
  if (column < level || column >= level + depth) {
    throw LevelOutOfRange("no up transition from column " + std::to_string(column));
  }
  const auto here = static_cast<double>(column_sizes[column - level]);
  const auto next = static_cast<double>(column_sizes[column - level + 1]);
  return next / here * (column + 1) * rho;
}

BirthDeathChain aggregate_birth_death(const Trap& trap, const StateGraph&, double rho) {
  if (!(rho > 0.0)) throw InvalidParameter("rho must be positive");
  return {trap.level, trap.depth, trap.column_sizes, rho};
}

std::vector<Rational> sojourn_coefficients(const Trap& trap) {
  // coefficient of rho^j is |A_{l+j}| / (l |A_l|)
  const std::int64_t base = trap.level * trap.column_sizes.front();
  std::vector<Rational> coef;
  for (int j = 0; j <= trap.depth; ++j) coef.emplace_back(trap.column_sizes[j], base);
  return coef;
}

double bd_passage_time(const BirthDeathChain& chain, int column) {
  const int l = chain.level, d = chain.depth;
  if (column < l || column > l + d) {
    throw LevelOutOfRange("column " + std::to_string(column) + " outside " +
                          std::to_string(l) + ".." + std::to_string(l + d));
  }
  auto size = [&](int c) { return static_cast<double>(chain.column_sizes[c - l]); };
  double total = 0.0;
  for (int k = 0; k <= d; ++k) {
    double inner = 0.0;
    for (int j = 0; j <= std::min(k, column - l); ++j) {
      inner += size(l + d - k + j) / ((l + j) * size(l + j));
    }
    total += inner * std::pow(chain.rho, d - k);
  }
  return total;
}

SojournResult sojourn_time(const Trap& trap, const StateGraph& sg, double rho) {
  const auto chain = aggregate_birth_death(trap, sg, rho);
  SojournResult r;
  r.value = bd_passage_time(chain, trap.level);
  r.coefficients = sojourn_coefficients(trap);
  r.beta = r.coefficients.back();
  r.depth = trap.depth;
  r.exact = is_uniform(trap, sg);
  return r;
}

double AsymptoticSojourn::at(double rho) const {
  return boost::rational_cast<double>(beta) * std::pow(rho, depth);
}

AsymptoticSojourn asymptotic_sojourn(const Trap& trap) {
  return {Rational(trap.column_sizes.back(), trap.level * trap.column_sizes.front()), trap.depth};
}

bool is_uniform(const Trap& trap, const StateGraph& sg) {
  std::vector<int> seen(trap.column_sizes.size(), -1);
  for (StateIndex s : trap.states) {
    const auto up = sg.up(s);
    const int n = static_cast<int>(std::count_if(
        up.begin(), up.end(), [&](const Neighbor& nb) { return trap.contains(nb.state); }));
    int& ref = seen[sg.cardinality(s) - trap.level];
    if (ref < 0) ref = n;
    else if (ref != n) return false;
  }
  return true;
}

std::vector<double> exact_exit_times(const Trap& trap, const StateGraph& sg, double rho) {
  if (!(rho > 0.0)) throw InvalidParameter("rho must be positive");
  const int n = static_cast<int>(trap.states.size());
  auto position = [&](StateIndex s) -> int {
    auto it = std::lower_bound(trap.states.begin(), trap.states.end(), s);
    return (it != trap.states.end() && *it == s) ? static_cast<int>(it - trap.states.begin()) : -1;
  };

  // (|s| + n_s rho) T_s - sum_{down in trap} T - rho sum_{up in trap} T = 1
  std::vector<Triplet> a;
  a.reserve(static_cast<std::size_t>(n) * 4);
  for (int r = 0; r < n; ++r) {
    const StateIndex s = trap.states[r];
    a.emplace_back(r, r, sg.cardinality(s) + sg.up_degree(s) * rho);
    for (auto nb : sg.down(s)) {
      if (int c = position(nb.state); c >= 0) a.emplace_back(r, c, -1.0);
    }
    for (auto nb : sg.up(s)) {
      if (int c = position(nb.state); c >= 0) a.emplace_back(r, c, -rho);
    }
  }
  return solve_sparse(n, a, std::vector<double>(static_cast<std::size_t>(n), 1.0));
}

double exact_sojourn(const Trap& trap, const StateGraph& sg, double rho) {
  const auto t = exact_exit_times(trap, sg, rho);
  double sum = 0.0;
  int count = 0;
  for (std::size_t k = 0; k < trap.states.size(); ++k) {
    if (sg.cardinality(trap.states[k]) == trap.level) {
      sum += t[k];
      ++count;
    }
  }
  return sum / count;
}

}  // namespace csmatrap
