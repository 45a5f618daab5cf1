#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/rational.hpp>

#include "csmatrap/graph.hpp"

namespace csmatrap {

using Rational = boost::rational<std::int64_t>;
using StateIndex = std::uint32_t;

inline constexpr std::size_t kDefaultStateCap = std::size_t{1} << 22;

/// Set of transmitting links. Feasible iff independent in the contention graph.
struct SystemState {
  LinkMask active = 0;

  int cardinality() const { return std::popcount(active); }
  bool contains(LinkId i) const { return (active >> i) & 1u; }

  friend bool operator==(SystemState, SystemState) = default;
};

/// "{1,4,5}" with 1-based link numbers; "{}" for the empty state.
std::string format_state(SystemState s);

/// Integer-coefficient polynomial in rho; index = power.
struct RhoPolynomial {
  std::vector<std::int64_t> coefficients;

  int degree() const;
  double evaluate(double rho) const;
  friend bool operator==(const RhoPolynomial&, const RhoPolynomial&) = default;
};

struct Neighbor {
  StateIndex state;
  LinkId link;  // link added (up edge) or removed (down edge)
};

/// All feasible states in canonical order (cardinality, then mask value),
/// grouped into columns, with add-link / remove-link adjacency in CSR form.
class StateGraph {
 public:
  const ContentionGraph& graph() const { return graph_; }
  std::size_t size() const { return states_.size(); }
  const std::vector<SystemState>& states() const { return states_; }
  SystemState state(StateIndex s) const { return states_[s]; }
  int cardinality(StateIndex s) const { return states_[s].cardinality(); }

  int max_column() const { return static_cast<int>(column_offsets_.size()) - 2; }
  /// c[n] = |S^(n)|.
  std::vector<std::int64_t> column_counts() const;
  /// Indices of the states with exactly n active links.
  std::pair<StateIndex, StateIndex> column_range(int n) const;

  std::span<const Neighbor> up(StateIndex s) const {
    return {up_.data() + up_offsets_[s], up_.data() + up_offsets_[s + 1]};
  }
  std::span<const Neighbor> down(StateIndex s) const {
    return {down_.data() + down_offsets_[s], down_.data() + down_offsets_[s + 1]};
  }
  int up_degree(StateIndex s) const {
    return static_cast<int>(up_offsets_[s + 1] - up_offsets_[s]);
  }

  std::optional<StateIndex> index_of(SystemState s) const;

 private:
  friend StateGraph enumerate_states(const ContentionGraph&, std::size_t);

  ContentionGraph graph_;
  std::vector<SystemState> states_;
  std::vector<StateIndex> column_offsets_;
  std::vector<std::uint32_t> up_offsets_, down_offsets_;
  std::vector<Neighbor> up_, down_;
  std::unordered_map<LinkMask, StateIndex> index_;
};

/// Throws StateSpaceTooLarge when more than max_states independent sets exist.
StateGraph enumerate_states(const ContentionGraph& g,
                            std::size_t max_states = kDefaultStateCap);

/// Probability of one state in column n, for n = 0..max_column. Scaled by
/// the top power of rho so that large rho does not overflow.
std::vector<double> column_state_probability(const StateGraph& sg, double rho);

/// P_s = rho^|s| / Z for every state, in state order.
std::vector<double> stationary_distribution(const StateGraph& sg, double rho);

/// Fraction of time link i transmits at access intensity rho.
double link_throughput(const StateGraph& sg, double rho, LinkId i);

struct ThroughputPolynomials {
  RhoPolynomial numerator;
  RhoPolynomial denominator;
};

ThroughputPolynomials throughput_polynomials(const StateGraph& sg, LinkId i);

/// Exact limit of link i's throughput as rho grows without bound.
Rational asymptotic_throughput(const StateGraph& sg, LinkId i);

/// JSON dump: states as masks, per-column counts, up edges as index pairs.
std::string state_graph_to_json(const StateGraph& sg);

void check_link(const ContentionGraph& g, LinkId i);

}  // namespace csmatrap
