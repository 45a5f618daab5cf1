#pragma once

#include <optional>
#include <vector>

#include "csmatrap/sim.hpp"
#include "csmatrap/sojourn.hpp"

namespace csmatrap {

struct ValidationOptions {
  double rho = kRho0;
  double horizon = 1e6;  // per replica
  int replicas = 1;
  std::uint64_t seed = 1;
  double warmup = 100.0;
  DistributionSpec::Kind backoff = DistributionSpec::Kind::exponential;
  DistributionSpec::Kind transmission = DistributionSpec::Kind::exponential;
  bool passages = true;
  bool exact = true;  // also solve the exact exit-time oracle per trap
  std::size_t max_states = kDefaultStateCap;
};

struct TrapCheck {
  int id = 0;
  double probability = 0.0;       // analytic Pr{Tr}
  double occupancy = 0.0;         // simulated time fraction in Tr
  double sojourn = 0.0;           // birth-death approximation
  double asymptotic = 0.0;        // beta * rho^d
  std::optional<double> exact;    // exact exit-time oracle
  SampleStats simulated;          // simulated visit lengths

  /// (approximation - simulated) / simulated
  double error() const { return (sojourn - simulated.mean) / simulated.mean; }
  double asymptotic_error() const { return (asymptotic - simulated.mean) / simulated.mean; }
};

struct PassageCheck {
  int from = 0, to = 0;
  double computed = 0.0;
  SampleStats simulated;
  double error() const { return (computed - simulated.mean) / simulated.mean; }
};

struct ValidationResult {
  StateGraph states;
  TrapForest forest;
  std::vector<TrapCheck> traps;
  std::vector<PassageCheck> passages;
  std::vector<double> throughput;           // analytic, per link
  std::vector<double> measured_throughput;  // simulated, per link
};

/// Analyze the graph, then simulate independent replicas (in parallel) and
/// pool trap occupancy, visit lengths, and passage samples for every ordered
/// pair of same-generation traps.
ValidationResult validate_network(const ContentionGraph& g, const ValidationOptions& opts);

}  // namespace csmatrap
