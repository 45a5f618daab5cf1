#include "csmatrap/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "csmatrap/error.hpp"
#include "csmatrap/kernels.hpp"
#include "csmatrap/passage.hpp"

namespace csmatrap {

using nlohmann::json;

void Thresholds::validate() const {
  if (!(th_equil > 0.0 && th_equil <= 1.0)) throw InvalidParameter("th_equil must lie in (0, 1]");
  if (!(th_temp > 0.0 && th_temp <= 1.0)) throw InvalidParameter("th_temp must lie in (0, 1]");
  if (d_target < 1) throw InvalidParameter("d_target must be at least 1");
  if (!(x_target > 0.0)) throw InvalidParameter("x_target must be positive");
}

bool classify_equilibrium(const StateGraph& sg, double rho, const Thresholds& th, LinkId i) {
  th.validate();
  return link_throughput(sg, rho, i) < th.th_equil;
}

TemporalClassification classify_temporal(const TrapForest& forest, const StateGraph& sg,
                                         double rho, const Thresholds& th, LinkId i) {
  th.validate();
  check_link(sg.graph(), i);
  TemporalClassification out;
  for (const auto& t : forest.traps) {
    if (t.depth < th.d_target) continue;
    if (conditional_throughput(t, sg, rho, i) < th.th_temp) out.traps.push_back(t.id);
  }
  out.starved = !out.traps.empty();
  return out;
}

UnifiedBound unified_bound(const TrapForest& forest, const StateGraph& sg, double rho, LinkId i) {
  struct Candidate {
    int id;
    double weight;
  };
  std::vector<Candidate> cands;
  for (int id : frozen_traps(forest, sg, i)) {
    const Trap& t = forest.at(id);
    cands.push_back({id, trap_probability(t, sg, rho) * sojourn_time(t, sg, rho).value});
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& a, const Candidate& b) { return a.weight > b.weight; });

  UnifiedBound out;
  const int top = sg.max_column();
  for (const auto& c : cands) {
    const bool clash = std::any_of(out.traps.begin(), out.traps.end(), [&](int other) {
      return forest.is_ancestor_or_self(other, c.id) || forest.is_ancestor_or_self(c.id, other);
    });
    if (clash) continue;
    out.traps.push_back(c.id);
    out.bound += c.weight;
    const Trap& t = forest.at(c.id);
    // Pr{T} ~ rho^(l+d-top), T_V ~ rho^d
    const int exponent = t.level + 2 * t.depth - top;
    out.leading_exponent = std::max(out.leading_exponent.value_or(exponent), exponent);
  }
  return out;
}

StarvationReport full_report(const ContentionGraph& g, double rho, const Thresholds& th,
                             const ReportOptions& opts) {
  th.validate();
  if (!(rho > 0.0)) throw InvalidParameter("rho must be positive");
  const StateGraph sg = enumerate_states(g, opts.max_states);
  const TrapForest forest = find_traps(sg);

  StarvationReport r;
  r.n_links = g.n_links();
  r.rho = rho;
  r.thresholds = th;
  r.n_states = sg.size();
  r.column_counts = sg.column_counts();

  const auto probs = kernels::trap_probabilities(forest, sg, rho);
  for (const auto& t : forest.traps) {
    TrapSummary ts;
    ts.trap = t;
    for (StateIndex s : t.roots) ts.roots.push_back(sg.state(s).active);
    for (StateIndex s : t.states) ts.state_masks.push_back(sg.state(s).active);
    ts.probability = probs[t.id];
    ts.probability_numerator = trap_probability_polynomial(t, sg);
    ts.sojourn = sojourn_time(t, sg, rho);
    ts.asymptotic = asymptotic_sojourn(t);
    ts.starving_links = starving_links(t, sg, rho, th.th_temp);
    r.traps.push_back(std::move(ts));
  }

  if (opts.passages) {
    for (const auto& a : forest.traps) {
      for (const auto& b : forest.traps) {
        if (a.id == b.id || a.generation != b.generation) continue;
        r.passages.push_back({a.id, b.id, first_passage(sg, forest, a.id, b.id, rho)});
      }
    }
  }

  const auto th_links = kernels::link_throughputs(sg, rho);
  for (LinkId i = 0; i < g.n_links(); ++i) {
    LinkSummary ls;
    ls.link = i;
    ls.asymptotic_throughput = asymptotic_throughput(sg, i);
    ls.throughput = th_links[i];
    ls.equilibrium_starved = ls.throughput < th.th_equil;
    ls.temporal = classify_temporal(forest, sg, rho, th, i);
    ls.unified = unified_bound(forest, sg, rho, i);
    ls.unified_starved = ls.unified.bound > th.x_target;
    r.links.push_back(std::move(ls));
  }
  return r;
}

std::string format_rational(const Rational& q) {
  if (q.denominator() == 1) return std::to_string(q.numerator());
  return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

namespace {

json links_json(const std::vector<LinkId>& links) {
  json out = json::array();
  for (LinkId i : links) out.push_back(i);
  return out;
}

std::string link_list(const std::vector<LinkId>& links) {
  std::string s = "{";
  for (std::size_t k = 0; k < links.size(); ++k) s += (k ? "," : "") + std::to_string(links[k] + 1);
  return s + "}";
}

}  // namespace

std::string report_to_json(const StarvationReport& r) {
  json doc;
  doc["schema"] = 1;
  doc["links"] = r.n_links;
  doc["rho"] = r.rho;
  doc["time_unit"] = "mean transmission duration";
  doc["thresholds"] = {{"th_equil", r.thresholds.th_equil},
                       {"th_temp", r.thresholds.th_temp},
                       {"d_target", r.thresholds.d_target},
                       {"x_target", r.thresholds.x_target}};
  doc["state_count"] = r.n_states;
  doc["column_counts"] = r.column_counts;
  doc["metadata"] = {
      {"frozen_trap_selection", "greedy pairwise-disjoint, decreasing Pr*T_V"},
      {"passage_pairs", "ordered pairs within one hierarchy generation"},
      {"passage_trap_selection", "deepest disjoint traps first, ties by id"}};

  auto& traps = doc["traps"] = json::array();
  for (const auto& ts : r.traps) {
    const Trap& t = ts.trap;
    json coef = json::array();
    for (const auto& c : ts.sojourn.coefficients) coef.push_back(format_rational(c));
    traps.push_back({{"id", t.id},
                     {"label", t.label},
                     {"level", t.level},
                     {"depth", t.depth},
                     {"generation", t.generation},
                     {"parent", t.parent ? json(*t.parent) : json(nullptr)},
                     {"children", t.children},
                     {"roots", ts.roots},
                     {"state_count", t.states.size()},
                     {"states", ts.state_masks},
                     {"column_sizes", t.column_sizes},
                     {"probability_at_rho", ts.probability},
                     {"probability_numerator", ts.probability_numerator.coefficients},
                     {"sojourn_time", ts.sojourn.value},
                     {"sojourn_coefficients", coef},
                     {"sojourn_exact", ts.sojourn.exact},
                     {"beta", format_rational(ts.asymptotic.beta)},
                     {"beta_rho_d", ts.asymptotic.at(r.rho)},
                     {"starving_links", links_json(ts.starving_links)}});
  }

  auto& pass = doc["passages"] = json::array();
  for (const auto& p : r.passages) pass.push_back({{"from", p.from}, {"to", p.to}, {"time", p.time}});

  auto& links = doc["link_results"] = json::array();
  for (const auto& ls : r.links) {
    links.push_back(
        {{"link", ls.link},
         {"asymptotic_throughput", format_rational(ls.asymptotic_throughput)},
         {"throughput", ls.throughput},
         {"equilibrium_starved", ls.equilibrium_starved},
         {"temporally_starved", ls.temporal.starved},
         {"temporal_traps", ls.temporal.traps},
         {"unified_bound", ls.unified.bound},
         {"unified_traps", ls.unified.traps},
         {"unified_exponent",
          ls.unified.leading_exponent ? json(*ls.unified.leading_exponent) : json(nullptr)},
         {"unified_starved", ls.unified_starved},
         {"starves_for_large_rho", ls.unified.starves_for_large_rho()}});
  }
  return doc.dump(2) + "\n";
}

std::string report_to_text(const StarvationReport& r, double time_scale, const std::string& time_unit) {
  std::ostringstream out;
  char buf[256];
  auto t = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.4f%s%s", v * time_scale, time_unit.empty() ? "" : " ",
                  time_unit.c_str());
    return std::string(buf);
  };
  out << "links: " << r.n_links << "  rho: " << r.rho << "  states: " << r.n_states << "\n";

  if (r.traps.empty()) {
    out << "no traps\n";
  } else {
    out << "traps:\n";
    for (const auto& ts : r.traps) {
      const Trap& tr = ts.trap;
      std::string roots;
      for (auto m : ts.roots) roots += (roots.empty() ? "" : " ") + format_state(SystemState{m});
      std::snprintf(buf, sizeof buf, "  [%d] %-9s l=%d d=%d states=%zu  Pr=%.4f%%  ", tr.id,
                    tr.label.c_str(), tr.level, tr.depth, tr.states.size(), 100.0 * ts.probability);
      out << buf << "T_V=" << t(ts.sojourn.value) << (ts.sojourn.exact ? " (exact)" : "")
          << "  beta*rho^d=" << t(ts.asymptotic.at(r.rho)) << "  roots " << roots
          << "  starving " << link_list(ts.starving_links) << "\n";
    }
  }
  if (!r.passages.empty()) {
    out << "passage times:\n";
    for (const auto& p : r.passages) {
      out << "  " << r.traps[p.from].trap.label << " -> " << r.traps[p.to].trap.label << ": "
          << t(p.time) << "\n";
    }
  }
  out << "links:\n";
  for (const auto& ls : r.links) {
    std::snprintf(buf, sizeof buf, "  link %-3d Th=%.4f (limit %s)", ls.link + 1, ls.throughput,
                  format_rational(ls.asymptotic_throughput).c_str());
    out << buf;
    if (ls.equilibrium_starved) out << "  EQUILIBRIUM-STARVED";
    if (ls.temporal.starved) {
      out << "  TEMPORAL in";
      for (int id : ls.temporal.traps) out << " " << r.traps[id].trap.label;
    }
    if (ls.unified_starved) out << "  UNIFIED E[X]>=" << t(ls.unified.bound);
    out << "\n";
  }
  return out.str();
}

}  // namespace csmatrap
