#pragma once

#include <optional>
#include <string>
#include <vector>

#include "csmatrap/sojourn.hpp"
#include "csmatrap/traps.hpp"

namespace csmatrap {

struct Thresholds {
  double th_equil = 0.05;
  double th_temp = 0.05;
  int d_target = 1;
  double x_target = 100.0;  // normalized time

  /// Throws InvalidParameter unless all values are strictly positive and the
  /// throughput targets do not exceed 1.
  void validate() const;
};

bool classify_equilibrium(const StateGraph& sg, double rho, const Thresholds& th, LinkId i);

struct TemporalClassification {
  bool starved = false;
  std::vector<int> traps;  // traps of depth >= d_target in which i starves
};

TemporalClassification classify_temporal(const TrapForest& forest, const StateGraph& sg,
                                         double rho, const Thresholds& th, LinkId i);

/// Lower bound on the mean residual wait E[X_i] from pairwise-disjoint
/// frozen traps of link i: sum of Pr{T} * T_V(T).
struct UnifiedBound {
  double bound = 0.0;
  std::vector<int> traps;
  /// Largest power of rho in Pr{T} * T_V(T) over the chosen traps.
  std::optional<int> leading_exponent;
  bool starves_for_large_rho() const { return leading_exponent && *leading_exponent >= 1; }
};

UnifiedBound unified_bound(const TrapForest& forest, const StateGraph& sg, double rho, LinkId i);

struct TrapSummary {
  Trap trap;
  std::vector<LinkMask> roots;
  std::vector<LinkMask> state_masks;  // bit i set: link i active
  double probability = 0.0;
  RhoPolynomial probability_numerator;
  SojournResult sojourn;
  AsymptoticSojourn asymptotic;
  std::vector<LinkId> starving_links;
};

struct PassageEntry {
  int from = 0;
  int to = 0;
  double time = 0.0;
};

struct LinkSummary {
  LinkId link = 0;
  Rational asymptotic_throughput;
  double throughput = 0.0;
  bool equilibrium_starved = false;
  TemporalClassification temporal;
  UnifiedBound unified;
  bool unified_starved = false;  // unified bound exceeds x_target
};

struct StarvationReport {
  int n_links = 0;
  double rho = 0.0;
  Thresholds thresholds;
  std::size_t n_states = 0;
  std::vector<std::int64_t> column_counts;
  std::vector<TrapSummary> traps;
  std::vector<PassageEntry> passages;
  std::vector<LinkSummary> links;
};

struct ReportOptions {
  std::size_t max_states = kDefaultStateCap;
  bool passages = true;
};

/// Enumerates, decomposes and classifies. Passage times are computed for
/// every ordered pair of traps in the same hierarchy generation.
StarvationReport full_report(const ContentionGraph& g, double rho, const Thresholds& th,
                             const ReportOptions& opts = {});

std::string report_to_json(const StarvationReport& r);
std::string report_to_text(const StarvationReport& r, double time_scale = 1.0,
                           const std::string& time_unit = "");

std::string format_rational(const Rational& q);

}  // namespace csmatrap
