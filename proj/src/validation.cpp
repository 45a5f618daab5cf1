#include "csmatrap/validation.hpp"

#include "csmatrap/kernels.hpp"
#include "csmatrap/passage.hpp"

namespace csmatrap {

namespace {

struct ReplicaResult {
  std::vector<double> occupancy;
  std::vector<SampleStats> sojourn;
  std::vector<SampleStats> passage;
  std::vector<double> throughput;
};

// Occupancy of every link, as a second tracker keyed by link id.
SetClassifier link_classifier() {
  return [](LinkMask s, std::vector<int>& out) {
    for (LinkMask rest = s; rest != 0; rest &= rest - 1) out.push_back(std::countr_zero(rest));
  };
}

}  // namespace

ValidationResult validate_network(const ContentionGraph& g, const ValidationOptions& opts) {
  ValidationResult res{enumerate_states(g, opts.max_states), {}, {}, {}, {}, {}};
  const StateGraph& sg = res.states;
  res.forest = find_traps(sg);
  const TrapForest& forest = res.forest;
  res.throughput = kernels::link_throughputs(sg, opts.rho);

  std::vector<std::pair<int, int>> pairs;
  if (opts.passages) {
    for (const auto& a : forest.traps) {
      for (const auto& b : forest.traps) {
        if (a.id != b.id && a.generation == b.generation) pairs.emplace_back(a.id, b.id);
      }
    }
  }

  const auto classify = trap_classifier(sg, forest);
  const int n_traps = static_cast<int>(forest.traps.size());
  auto run = [&](std::size_t k) {
    SimConfig cfg = SimConfig::make(g, opts.rho, opts.backoff, opts.transmission, opts.horizon,
                                    derive_seed(opts.seed, k));
    cfg.warmup = opts.warmup;
    SetTracker traps(n_traps, classify, pairs);
    SetTracker links(g.n_links(), link_classifier());
    ObserverList both({&traps, &links});
    simulate_stream(cfg, both);
    ReplicaResult r;
    for (int id = 0; id < n_traps; ++id) {
      r.occupancy.push_back(traps.occupancy(id));
      r.sojourn.push_back(traps.sojourn(id));
    }
    for (std::size_t p = 0; p < pairs.size(); ++p) r.passage.push_back(traps.passage(p));
    for (int i = 0; i < g.n_links(); ++i) r.throughput.push_back(links.occupancy(i));
    return r;
  };
  const auto replicas = kernels::parallel_map(static_cast<std::size_t>(std::max(1, opts.replicas)), run);

  const double n_rep = static_cast<double>(replicas.size());
  for (const auto& t : forest.traps) {
    TrapCheck tc;
    tc.id = t.id;
    tc.probability = trap_probability(t, sg, opts.rho);
    tc.sojourn = sojourn_time(t, sg, opts.rho).value;
    tc.asymptotic = asymptotic_sojourn(t).at(opts.rho);
    if (opts.exact) tc.exact = exact_sojourn(t, sg, opts.rho);
    for (const auto& r : replicas) {
      tc.occupancy += r.occupancy[t.id] / n_rep;
      tc.simulated = SampleStats::merge(tc.simulated, r.sojourn[t.id]);
    }
    res.traps.push_back(tc);
  }
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    PassageCheck pc;
    pc.from = pairs[p].first;
    pc.to = pairs[p].second;
    pc.computed = first_passage(sg, forest, pc.from, pc.to, opts.rho);
    for (const auto& r : replicas) pc.simulated = SampleStats::merge(pc.simulated, r.passage[p]);
    res.passages.push_back(pc);
  }
  res.measured_throughput.assign(static_cast<std::size_t>(g.n_links()), 0.0);
  for (const auto& r : replicas) {
    for (int i = 0; i < g.n_links(); ++i) res.measured_throughput[i] += r.throughput[i] / n_rep;
  }
  return res;
}

}  // namespace csmatrap
