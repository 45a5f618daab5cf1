#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "csmatrap/graph.hpp"
#include "csmatrap/random.hpp"

namespace csmatrap {

class StateGraph;
struct TrapForest;

struct DistributionSpec {
  enum class Kind { exponential, constant, uniform };

  Kind kind = Kind::exponential;
  double mean = 1.0;
  double lo = 0.0, hi = 0.0;  // uniform support

  static DistributionSpec exponential(double mean);
  static DistributionSpec constant(double mean);
  /// Uniform on [lo, hi]; mean is the midpoint.
  static DistributionSpec uniform(double lo, double hi);
  /// Uniform on [0, 2 mean].
  static DistributionSpec uniform_with_mean(double mean);
  /// "exp", "const" or "uniform" with the given mean.
  static DistributionSpec parse(const std::string& name, double mean);

  void validate() const;
  double sample(Rng& rng) const;
  std::string name() const;
};

struct SimConfig {
  ContentionGraph graph;
  double rho = 1.0;
  DistributionSpec backoff = DistributionSpec::exponential(1.0);
  DistributionSpec transmission = DistributionSpec::exponential(1.0);
  double horizon = 1e4;  // measured after warmup
  std::uint64_t seed = 1;
  double warmup = 100.0;
  /// Links transmitting at t = 0 (must be independent); empty otherwise.
  LinkMask initial_active = 0;

  /// Unit-mean transmission and backoff mean 1/rho, of the given kinds.
  static SimConfig make(ContentionGraph g, double rho, DistributionSpec::Kind backoff,
                        DistributionSpec::Kind transmission, double horizon,
                        std::uint64_t seed);
  void validate() const;
  double end_time() const { return warmup + horizon; }
};

struct SimEvent {
  double time = 0.0;
  LinkId link = 0;
  bool start = false;  // transmission start, else end
};

/// Events after warmup; the state at start_time is initial_state.
struct SimTrace {
  int n_links = 0;
  double start_time = 0.0;
  double end_time = 0.0;
  LinkMask initial_state = 0;
  std::vector<SimEvent> events;
  LinkMask final_state = 0;
};

/// Per-link countdown: C drains at unit rate only while no neighbor is active.
struct LinkTimer {
  double remaining = 0.0;
  bool frozen = false;
};

/// Receives the post-warmup trajectory as it is generated.
class SimObserver {
 public:
  virtual ~SimObserver() = default;
  virtual void begin(double /*time*/, LinkMask /*state*/) {}
  /// `state` is the active set after the event.
  virtual void on_event(const SimEvent& /*event*/, LinkMask /*state*/) {}
  virtual void end(double /*time*/, LinkMask /*state*/) {}
};

/// Fans one trajectory out to several observers.
class ObserverList : public SimObserver {
 public:
  explicit ObserverList(std::vector<SimObserver*> obs) : obs_(std::move(obs)) {}
  void begin(double t, LinkMask s) override;
  void on_event(const SimEvent& e, LinkMask s) override;
  void end(double t, LinkMask s) override;

 private:
  std::vector<SimObserver*> obs_;
};

void simulate_stream(const SimConfig& cfg, SimObserver& observer);
SimTrace simulate(const SimConfig& cfg);
void replay(const SimTrace& trace, SimObserver& observer);

struct SampleStats {
  std::int64_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double ci95 = 0.0;  // half-width of the normal-approximation interval

  static SampleStats from_moments(std::int64_t n, double sum, double sum_sq);
  /// Pool two independent sample sets.
  static SampleStats merge(const SampleStats& a, const SampleStats& b);
};

inline constexpr std::int64_t kMinSamples = 30;

/// Assigns each state the ids of the tracked sets that contain it.
using SetClassifier = std::function<void(LinkMask, std::vector<int>&)>;

/// Occupancy, visit lengths and set-to-set passage samples for a family of
/// state sets, in one pass over a trajectory. A visit starts with a
/// transition from outside into the set; a passage sample runs from an entry
/// into `from` until the next entry into `to`, after which the next sample
/// waits for a fresh entry into `from`.
class SetTracker : public SimObserver {
 public:
  SetTracker(int n_sets, SetClassifier classify,
             std::vector<std::pair<int, int>> passages = {});

  void begin(double t, LinkMask s) override;
  void on_event(const SimEvent& e, LinkMask s) override;
  void end(double t, LinkMask s) override;

  double occupancy(int set) const;
  SampleStats sojourn(int set) const;
  SampleStats passage(std::size_t pair_index) const;
  const std::vector<std::pair<int, int>>& passages() const { return passages_; }

 private:
  struct SetState {
    bool inside = false;
    double entered = -1.0;  // < 0: visit not opened by a transition
    double since = 0.0;
    double time_in = 0.0;
    std::int64_t n = 0;
    double sum = 0.0, sum_sq = 0.0;
  };
  struct PassageState {
    double started = -1.0;  // < 0: waiting for an entry into `from`
    std::int64_t n = 0;
    double sum = 0.0, sum_sq = 0.0;
  };

  void transition(double t, LinkMask s);

  SetClassifier classify_;
  std::vector<SetState> sets_;
  std::vector<std::pair<int, int>> passages_;
  std::vector<PassageState> pass_;
  std::vector<int> current_, next_;
  double t0_ = 0.0, t1_ = 0.0;
};

/// Classifier over the traps of a forest (set id = trap id).
SetClassifier trap_classifier(const StateGraph& sg, const TrapForest& forest);
/// Classifier for one predicate (set id 0).
SetClassifier predicate_classifier(std::function<bool(LinkMask)> pred);

/// Fraction of each consecutive window during which each link is active.
class WindowedThroughput : public SimObserver {
 public:
  WindowedThroughput(int n_links, double window);
  void begin(double t, LinkMask s) override;
  void on_event(const SimEvent& e, LinkMask s) override;
  void end(double t, LinkMask s) override;

  double window() const { return window_; }
  double origin() const { return origin_; }
  /// series()[w][i]: throughput of link i in window w (complete windows only).
  const std::vector<std::vector<double>>& series() const { return series_; }

 private:
  void advance(double t);

  int n_links_;
  double window_;
  double origin_ = 0.0, now_ = 0.0;
  LinkMask state_ = 0;
  std::vector<double> acc_;
  std::vector<std::vector<double>> series_;
};

/// Estimates E[X_i], the wait from a random instant until link i next starts
/// transmitting, by sampling observation instants at Poisson epochs.
class ResidualWait : public SimObserver {
 public:
  ResidualWait(LinkId link, double epoch_rate, std::uint64_t seed);
  void begin(double t, LinkMask s) override;
  void on_event(const SimEvent& e, LinkMask s) override;
  SampleStats stats() const { return SampleStats::from_moments(n_, sum_, sum_sq_); }

 private:
  LinkId link_;
  double rate_;
  Rng rng_;
  double next_epoch_ = 0.0;
  std::int64_t pending_n_ = 0;
  double pending_sum_ = 0.0, pending_sum_sq_ = 0.0;
  std::int64_t n_ = 0;
  double sum_ = 0.0, sum_sq_ = 0.0;
};

std::vector<double> windowed_throughput(const SimTrace& trace, double window, LinkId i);
double measure_stationary(const SimTrace& trace, const std::function<bool(LinkMask)>& pred);
/// Throws InsufficientSamples below kMinSamples visits.
SampleStats measure_sojourn(const SimTrace& trace, const std::function<bool(LinkMask)>& in_trap);
SampleStats measure_passage(const SimTrace& trace, const std::function<bool(LinkMask)>& in_from,
                            const std::function<bool(LinkMask)>& in_to);
/// Trap-id overload: nested traps give a zero-mean result with no samples.
SampleStats measure_passage(const SimTrace& trace, const StateGraph& sg, const TrapForest& forest,
                            int from, int to);

/// Membership predicate for a trap of the forest.
std::function<bool(LinkMask)> trap_predicate(const StateGraph& sg, const TrapForest& forest, int id);

void write_trace_csv(const SimTrace& trace, const std::string& path);
void write_windows_csv(const WindowedThroughput& w, const std::string& path);

}  // namespace csmatrap
