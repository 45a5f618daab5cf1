#include "csmatrap/sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <memory>
#include <queue>
#include <unordered_map>

#include "csmatrap/error.hpp"
#include "csmatrap/statespace.hpp"
#include "csmatrap/traps.hpp"

namespace csmatrap {

// ---------------------------------------------------------------------------
// Distributions

DistributionSpec DistributionSpec::exponential(double mean) {
  return {Kind::exponential, mean, 0.0, 0.0};
}

DistributionSpec DistributionSpec::constant(double mean) {
  return {Kind::constant, mean, 0.0, 0.0};
}

DistributionSpec DistributionSpec::uniform(double lo, double hi) {
  return {Kind::uniform, 0.5 * (lo + hi), lo, hi};
}

DistributionSpec DistributionSpec::uniform_with_mean(double mean) {
  return uniform(0.0, 2.0 * mean);
}

DistributionSpec DistributionSpec::parse(const std::string& name, double mean) {
  if (name == "exp" || name == "exponential") return exponential(mean);
  if (name == "const" || name == "constant") return constant(mean);
  if (name == "uniform") return uniform_with_mean(mean);
  throw InvalidConfig("unknown distribution '" + name + "' (expected exp, const or uniform)");
}

void DistributionSpec::validate() const {
  if (!(mean > 0.0) || !std::isfinite(mean)) throw InvalidConfig("distribution mean must be positive");
  if (kind == Kind::uniform) {
    if (!(lo >= 0.0 && lo < hi)) throw InvalidConfig("uniform needs 0 <= lo < hi");
    if (std::abs(0.5 * (lo + hi) - mean) > 1e-12 * mean) {
      throw InvalidConfig("uniform mean must be the midpoint of its support");
    }
  }
}

double DistributionSpec::sample(Rng& rng) const {
  switch (kind) {
    case Kind::exponential:
      return -mean * std::log1p(-uniform01(rng));
    case Kind::constant:
      return mean;
    case Kind::uniform:
      return lo + (hi - lo) * uniform01(rng);
  }
  return mean;
}

std::string DistributionSpec::name() const {
  switch (kind) {
    case Kind::exponential: return "exp";
    case Kind::constant: return "const";
    case Kind::uniform: return "uniform";
  }
  return "?";
}

SimConfig SimConfig::make(ContentionGraph g, double rho, DistributionSpec::Kind backoff,
                          DistributionSpec::Kind transmission, double horizon,
                          std::uint64_t seed) {
  auto dist = [](DistributionSpec::Kind k, double mean) {
    switch (k) {
      case DistributionSpec::Kind::constant: return DistributionSpec::constant(mean);
      case DistributionSpec::Kind::uniform: return DistributionSpec::uniform_with_mean(mean);
      default: return DistributionSpec::exponential(mean);
    }
  };
  SimConfig cfg;
  cfg.graph = std::move(g);
  cfg.rho = rho;
  cfg.backoff = dist(backoff, 1.0 / rho);
  cfg.transmission = dist(transmission, 1.0);
  cfg.horizon = horizon;
  cfg.seed = seed;
  return cfg;
}

void SimConfig::validate() const {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidConfig("rho must be positive");
  backoff.validate();
  transmission.validate();
  if (std::abs(transmission.mean - 1.0) > 1e-12) {
    throw InvalidConfig("transmission mean must be 1 (time is normalized to it)");
  }
  if (std::abs(backoff.mean * rho - 1.0) > 1e-9) {
    throw InvalidConfig("backoff mean must equal 1/rho");
  }
  if (!(horizon > 0.0) || !(warmup >= 0.0)) throw InvalidConfig("horizon must be positive, warmup non-negative");
  if (graph.n_links() < 1) throw InvalidConfig("empty graph");
  if (initial_active >> graph.n_links() != 0 || !graph.is_independent(initial_active)) {
    throw InvalidConfig("initial active set must be an independent set of the graph");
  }
}

// ---------------------------------------------------------------------------
// Event engine

void ObserverList::begin(double t, LinkMask s) {
  for (auto* o : obs_) o->begin(t, s);
}
void ObserverList::on_event(const SimEvent& e, LinkMask s) {
  for (auto* o : obs_) o->on_event(e, s);
}
void ObserverList::end(double t, LinkMask s) {
  for (auto* o : obs_) o->end(t, s);
}

namespace {

struct Pending {
  double time;
  LinkId link;
  int kind;  // 0 = transmission end, 1 = countdown expiry
  std::uint64_t version;

  // min-heap on (time, link, kind)
  bool operator<(const Pending& o) const {
    if (time != o.time) return time > o.time;
    if (link != o.link) return link > o.link;
    return kind > o.kind;
  }
};

class Engine {
 public:
  Engine(const SimConfig& cfg, SimObserver& obs) : cfg_(cfg), obs_(obs) {
    const int n = cfg.graph.n_links();
    links_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      links_[i].rng.seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    }
  }

  void run() {
    const int n = cfg_.graph.n_links();
    for (int i = 0; i < n; ++i) links_[i].timer.remaining = cfg_.backoff.sample(links_[i].rng);
    for (int i = 0; i < n; ++i) {
      if ((cfg_.initial_active >> i) & 1u) start(i, 0.0);
    }
    for (int i = 0; i < n; ++i) {
      if (!links_[i].active && links_[i].busy_neighbors == 0) resume(i, 0.0);
    }

    const double warm = cfg_.warmup, stop = cfg_.end_time();
    bool observing = false;
    if (warm <= 0.0) {
      obs_.begin(0.0, state_);
      observing = true;
    }
    while (!queue_.empty()) {
      const Pending ev = queue_.top();
      if (ev.time > stop) break;
      queue_.pop();
      auto& lk = links_[ev.link];
      if (ev.version != lk.version) continue;
      if (!observing && ev.time >= warm) {
        obs_.begin(warm, state_);
        observing = true;
      }
      if (ev.kind == 1) {
        lk.timer.remaining = 0.0;
        start(ev.link, ev.time);
      } else {
        finish(ev.link, ev.time);
      }
      if (observing) obs_.on_event({ev.time, ev.link, ev.kind == 1}, state_);
    }
    if (!observing) obs_.begin(warm, state_);
    obs_.end(stop, state_);
  }

 private:
  struct Link {
    Rng rng;
    LinkTimer timer;
    bool active = false;
    int busy_neighbors = 0;
    double resumed_at = 0.0;
    std::uint64_t version = 0;
  };

  void resume(LinkId i, double t) {
    auto& lk = links_[i];
    lk.timer.frozen = false;
    lk.resumed_at = t;
    queue_.push({t + lk.timer.remaining, i, 1, ++lk.version});
  }

  void freeze(LinkId j, double t) {
    auto& lk = links_[j];
    lk.timer.remaining = std::max(0.0, lk.timer.remaining - (t - lk.resumed_at));
    lk.timer.frozen = true;
    ++lk.version;
  }

  void start(LinkId i, double t) {
    auto& lk = links_[i];
    lk.active = true;
    state_ |= LinkMask{1} << i;
    for (LinkMask nb = cfg_.graph.neighbors(i); nb != 0; nb &= nb - 1) {
      const int j = std::countr_zero(nb);
      auto& other = links_[j];
      if (!other.active && other.busy_neighbors == 0) freeze(j, t);
      ++other.busy_neighbors;
    }
    queue_.push({t + cfg_.transmission.sample(lk.rng), i, 0, ++lk.version});
  }

  void finish(LinkId i, double t) {
    auto& lk = links_[i];
    lk.active = false;
    state_ &= ~(LinkMask{1} << i);
    lk.timer.remaining = cfg_.backoff.sample(lk.rng);
    for (LinkMask nb = cfg_.graph.neighbors(i); nb != 0; nb &= nb - 1) {
      const int j = std::countr_zero(nb);
      auto& other = links_[j];
      if (--other.busy_neighbors == 0 && !other.active) resume(j, t);
    }
    if (lk.busy_neighbors == 0) resume(i, t);
    else lk.timer.frozen = true;
  }

  const SimConfig& cfg_;
  SimObserver& obs_;
  std::vector<Link> links_;
  std::priority_queue<Pending> queue_;
  LinkMask state_ = 0;
};

class TraceRecorder : public SimObserver {
 public:
  explicit TraceRecorder(SimTrace& out) : out_(out) {}
  void begin(double t, LinkMask s) override {
    out_.start_time = t;
    out_.initial_state = s;
  }
  void on_event(const SimEvent& e, LinkMask) override { out_.events.push_back(e); }
  void end(double t, LinkMask s) override {
    out_.end_time = t;
    out_.final_state = s;
  }

 private:
  SimTrace& out_;
};

}  // namespace

void simulate_stream(const SimConfig& cfg, SimObserver& observer) {
  cfg.validate();
  Engine(cfg, observer).run();
}

SimTrace simulate(const SimConfig& cfg) {
  SimTrace trace;
  trace.n_links = cfg.graph.n_links();
  TraceRecorder rec(trace);
  simulate_stream(cfg, rec);
  return trace;
}

void replay(const SimTrace& trace, SimObserver& observer) {
  LinkMask s = trace.initial_state;
  observer.begin(trace.start_time, s);
  for (const auto& e : trace.events) {
    const LinkMask bit = LinkMask{1} << e.link;
    s = e.start ? (s | bit) : (s & ~bit);
    observer.on_event(e, s);
  }
  observer.end(trace.end_time, s);
}

// ---------------------------------------------------------------------------
// Statistics

SampleStats SampleStats::from_moments(std::int64_t n, double sum, double sum_sq) {
  SampleStats st;
  st.count = n;
  if (n == 0) return st;
  st.mean = sum / static_cast<double>(n);
  if (n > 1) {
    const double var = std::max(0.0, (sum_sq - sum * st.mean) / static_cast<double>(n - 1));
    st.stddev = std::sqrt(var);
    st.ci95 = 1.96 * st.stddev / std::sqrt(static_cast<double>(n));
  }
  return st;
}

SampleStats SampleStats::merge(const SampleStats& a, const SampleStats& b) {
  auto sums = [](const SampleStats& x) {
    const double n = static_cast<double>(x.count);
    const double sum = x.mean * n;
    const double sq = x.count > 1 ? x.stddev * x.stddev * (n - 1) + sum * x.mean : sum * x.mean;
    return std::pair{sum, sq};
  };
  const auto [sa, qa] = sums(a);
  const auto [sb, qb] = sums(b);
  return from_moments(a.count + b.count, sa + sb, qa + qb);
}

SetTracker::SetTracker(int n_sets, SetClassifier classify,
                       std::vector<std::pair<int, int>> passages)
    : classify_(std::move(classify)),
      sets_(static_cast<std::size_t>(n_sets)),
      passages_(std::move(passages)),
      pass_(passages_.size()) {}

void SetTracker::begin(double t, LinkMask s) {
  t0_ = t;
  current_.clear();
  classify_(s, current_);
  std::sort(current_.begin(), current_.end());
  for (int id : current_) {
    sets_[id].inside = true;
    sets_[id].since = t;
    sets_[id].entered = -1.0;
  }
}

void SetTracker::on_event(const SimEvent& e, LinkMask s) { transition(e.time, s); }

void SetTracker::transition(double t, LinkMask s) {
  next_.clear();
  classify_(s, next_);
  std::sort(next_.begin(), next_.end());
  for (int id : current_) {
    if (std::binary_search(next_.begin(), next_.end(), id)) continue;
    auto& st = sets_[id];
    st.inside = false;
    st.time_in += t - st.since;
    if (st.entered >= 0.0) {
      const double len = t - st.entered;
      ++st.n;
      st.sum += len;
      st.sum_sq += len * len;
    }
  }
  bool any_entry = false;
  for (int id : next_) {
    if (std::binary_search(current_.begin(), current_.end(), id)) continue;
    auto& st = sets_[id];
    st.inside = true;
    st.since = t;
    st.entered = t;
    any_entry = true;
  }
  if (any_entry && !passages_.empty()) {
    auto entered = [&](int id) {
      return std::binary_search(next_.begin(), next_.end(), id) &&
             !std::binary_search(current_.begin(), current_.end(), id);
    };
    for (std::size_t k = 0; k < passages_.size(); ++k) {
      auto& ps = pass_[k];
      const auto [from, to] = passages_[k];
      if (ps.started >= 0.0 && entered(to)) {
        const double len = t - ps.started;
        ++ps.n;
        ps.sum += len;
        ps.sum_sq += len * len;
        ps.started = -1.0;
      } else if (ps.started < 0.0 && entered(from)) {
        ps.started = t;
      }
    }
  }
  current_.swap(next_);
}

void SetTracker::end(double t, LinkMask) {
  t1_ = t;
  for (int id : current_) {
    auto& st = sets_[id];
    st.time_in += t - st.since;
    st.since = t;
  }
}

double SetTracker::occupancy(int set) const {
  const double span = t1_ - t0_;
  return span > 0.0 ? sets_.at(static_cast<std::size_t>(set)).time_in / span : 0.0;
}

SampleStats SetTracker::sojourn(int set) const {
  const auto& st = sets_.at(static_cast<std::size_t>(set));
  return SampleStats::from_moments(st.n, st.sum, st.sum_sq);
}

SampleStats SetTracker::passage(std::size_t k) const {
  const auto& ps = pass_.at(k);
  return SampleStats::from_moments(ps.n, ps.sum, ps.sum_sq);
}

SetClassifier trap_classifier(const StateGraph& sg, const TrapForest& forest) {
  // For every feasible state, the traps holding it (at most one per generation).
  auto table = std::make_shared<std::unordered_map<LinkMask, std::vector<int>>>();
  for (const auto& t : forest.traps) {
    for (StateIndex s : t.states) (*table)[sg.state(s).active].push_back(t.id);
  }
  return [table](LinkMask s, std::vector<int>& out) {
    if (auto it = table->find(s); it != table->end()) out.insert(out.end(), it->second.begin(), it->second.end());
  };
}

SetClassifier predicate_classifier(std::function<bool(LinkMask)> pred) {
  return [pred = std::move(pred)](LinkMask s, std::vector<int>& out) {
    if (pred(s)) out.push_back(0);
  };
}

std::function<bool(LinkMask)> trap_predicate(const StateGraph& sg, const TrapForest& forest, int id) {
  std::vector<LinkMask> masks;
  for (StateIndex s : forest.at(id).states) masks.push_back(sg.state(s).active);
  std::sort(masks.begin(), masks.end());
  return [masks = std::move(masks)](LinkMask s) { return std::binary_search(masks.begin(), masks.end(), s); };
}

WindowedThroughput::WindowedThroughput(int n_links, double window)
    : n_links_(n_links), window_(window), acc_(static_cast<std::size_t>(n_links), 0.0) {
  if (!(window > 0.0)) throw InvalidParameter("window must be positive");
}

void WindowedThroughput::begin(double t, LinkMask s) {
  origin_ = now_ = t;
  state_ = s;
}

void WindowedThroughput::advance(double t) {
  while (true) {
    const double boundary = origin_ + window_ * static_cast<double>(series_.size() + 1);
    const double upto = std::min(t, boundary);
    const double dt = upto - now_;
    if (dt > 0.0) {
      for (LinkMask rest = state_; rest != 0; rest &= rest - 1) acc_[std::countr_zero(rest)] += dt;
    }
    now_ = upto;
    if (t < boundary) break;
    auto& row = series_.emplace_back(static_cast<std::size_t>(n_links_));
    for (int i = 0; i < n_links_; ++i) row[i] = acc_[i] / window_;
    std::fill(acc_.begin(), acc_.end(), 0.0);
    if (t == boundary) break;
  }
}

void WindowedThroughput::on_event(const SimEvent& e, LinkMask s) {
  advance(e.time);
  state_ = s;
}

void WindowedThroughput::end(double t, LinkMask) {
  // Tolerate rounding so that window == horizon yields one full window.
  const double complete = std::floor((t - origin_) / window_ + 1e-9);
  advance(std::max(t, origin_ + complete * window_));
}

ResidualWait::ResidualWait(LinkId link, double epoch_rate, std::uint64_t seed)
    : link_(link), rate_(epoch_rate), rng_(seed) {
  if (!(epoch_rate > 0.0)) throw InvalidParameter("epoch rate must be positive");
}

void ResidualWait::begin(double t, LinkMask) {
  next_epoch_ = t - std::log1p(-uniform01(rng_)) / rate_;
}

void ResidualWait::on_event(const SimEvent& e, LinkMask) {
  if (e.link != link_ || !e.start) return;
  const double t = e.time;
  while (next_epoch_ <= t) {
    ++pending_n_;
    pending_sum_ += next_epoch_;
    pending_sum_sq_ += next_epoch_ * next_epoch_;
    next_epoch_ -= std::log1p(-uniform01(rng_)) / rate_;
  }
  // sum over pending epochs tau of (t - tau) and (t - tau)^2
  const double n = static_cast<double>(pending_n_);
  n_ += pending_n_;
  sum_ += n * t - pending_sum_;
  sum_sq_ += n * t * t - 2.0 * t * pending_sum_ + pending_sum_sq_;
  pending_n_ = 0;
  pending_sum_ = pending_sum_sq_ = 0.0;
}

std::vector<double> windowed_throughput(const SimTrace& trace, double window, LinkId i) {
  if (i < 0 || i >= trace.n_links) throw UnknownLink("link index " + std::to_string(i));
  WindowedThroughput w(trace.n_links, window);
  replay(trace, w);
  std::vector<double> out;
  for (const auto& row : w.series()) out.push_back(row[i]);
  return out;
}

double measure_stationary(const SimTrace& trace, const std::function<bool(LinkMask)>& pred) {
  SetTracker tracker(1, predicate_classifier(pred));
  replay(trace, tracker);
  return tracker.occupancy(0);
}

SampleStats measure_sojourn(const SimTrace& trace, const std::function<bool(LinkMask)>& in_trap) {
  SetTracker tracker(1, predicate_classifier(in_trap));
  replay(trace, tracker);
  auto st = tracker.sojourn(0);
  if (st.count < kMinSamples) {
    throw InsufficientSamples("only " + std::to_string(st.count) + " trap visits observed");
  }
  return st;
}

SampleStats measure_passage(const SimTrace& trace, const std::function<bool(LinkMask)>& in_from,
                            const std::function<bool(LinkMask)>& in_to) {
  SetClassifier both = [in_from, in_to](LinkMask s, std::vector<int>& out) {
    if (in_from(s)) out.push_back(0);
    if (in_to(s)) out.push_back(1);
  };
  SetTracker tracker(2, both, {{0, 1}});
  replay(trace, tracker);
  auto st = tracker.passage(0);
  if (st.count < kMinSamples) {
    throw InsufficientSamples("only " + std::to_string(st.count) + " passages observed");
  }
  return st;
}

SampleStats measure_passage(const SimTrace& trace, const StateGraph& sg, const TrapForest& forest,
                            int from, int to) {
  if (forest.is_ancestor_or_self(from, to) || forest.is_ancestor_or_self(to, from)) return {};
  return measure_passage(trace, trap_predicate(sg, forest, from), trap_predicate(sg, forest, to));
}

void write_trace_csv(const SimTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write trace file '" + path + "'");
  out.precision(17);
  out << "time,link,event\n";
  for (const auto& e : trace.events) {
    out << e.time << ',' << e.link << ',' << (e.start ? "start" : "end") << '\n';
  }
}

void write_windows_csv(const WindowedThroughput& w, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write window file '" + path + "'");
  out.precision(10);
  out << "window_start,link,throughput\n";
  const auto& rows = w.series();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double t = w.origin() + w.window() * static_cast<double>(k);
    for (std::size_t i = 0; i < rows[k].size(); ++i) out << t << ',' << i << ',' << rows[k][i] << '\n';
  }
}

}  // namespace csmatrap
