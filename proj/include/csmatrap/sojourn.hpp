#pragma once

#include <vector>

#include "csmatrap/traps.hpp"

namespace csmatrap {

/// Access intensity typical of 802.11 networks.
inline constexpr double kRho0 = 5.35;

/// Columns of a trap lumped into single states l-1 .. l+d.
struct BirthDeathChain {
  int level = 0;  // l
  int depth = 0;  // d
  std::vector<std::int64_t> column_sizes;  // |A_i|, i = l .. l+d
  double rho = 0.0;

  /// Rate from lumped column i down to i-1; equals i.
  double down_rate(int column) const;
  /// Rate from lumped column i up to i+1: |A_{i+1}|/|A_i| * (i+1) * rho.
  double up_rate(int column) const;
};

struct SojournResult {
  double value = 0.0;  // normalized time
  Rational beta;
  int depth = 0;
  bool exact = false;  // aggregation is exact for this trap
  /// Exact coefficients of rho^0 .. rho^d.
  std::vector<Rational> coefficients;
};

BirthDeathChain aggregate_birth_death(const Trap& trap, const StateGraph& sg, double rho);

/// Ergodic sojourn time from the lumped birth-death chain.
SojournResult sojourn_time(const Trap& trap, const StateGraph& sg, double rho);

/// Symbolic version of sojourn_time: coefficient k multiplies rho^k.
std::vector<Rational> sojourn_coefficients(const Trap& trap);

/// Mean time to reach column l-1 starting from lumped column `column`.
double bd_passage_time(const BirthDeathChain& chain, int column);

struct AsymptoticSojourn {
  Rational beta;
  int depth = 0;
  double at(double rho) const;
};

/// Leading term beta * rho^d with beta = |A_{l+d}| / (l |A_l|).
AsymptoticSojourn asymptotic_sojourn(const Trap& trap);

/// True when every column's member states share the same up-degree.
bool is_uniform(const Trap& trap, const StateGraph& sg);

/// Mean exit time from each member state (aligned with trap.states), from
/// the full chain restricted to the trap.
std::vector<double> exact_exit_times(const Trap& trap, const StateGraph& sg, double rho);

/// Mean of exact_exit_times over the leftmost column (uniform entry).
double exact_sojourn(const Trap& trap, const StateGraph& sg, double rho);

}  // namespace csmatrap
