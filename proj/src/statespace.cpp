#include "csmatrap/statespace.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "csmatrap/error.hpp"

namespace csmatrap {

std::string format_state(SystemState s) {
  std::string out = "{";
  bool first = true;
  for (LinkMask rest = s.active; rest != 0; rest &= rest - 1) {
    if (!first) out += ",";
    out += std::to_string(std::countr_zero(rest) + 1);
    first = false;
  }
  return out + "}";
}

int RhoPolynomial::degree() const {
  for (int n = static_cast<int>(coefficients.size()) - 1; n >= 0; --n) {
    if (coefficients[n] != 0) return n;
  }
  return -1;
}

double RhoPolynomial::evaluate(double rho) const {
  double acc = 0.0;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) {
    acc = acc * rho + static_cast<double>(*it);
  }
  return acc;
}

std::vector<std::int64_t> StateGraph::column_counts() const {
  std::vector<std::int64_t> c;
  for (std::size_t n = 0; n + 1 < column_offsets_.size(); ++n) {
    c.push_back(column_offsets_[n + 1] - column_offsets_[n]);
  }
  return c;
}

std::pair<StateIndex, StateIndex> StateGraph::column_range(int n) const {
  if (n < 0 || n > max_column()) throw ColumnOutOfRange("column " + std::to_string(n));
  return {column_offsets_[n], column_offsets_[n + 1]};
}

std::optional<StateIndex> StateGraph::index_of(SystemState s) const {
  auto it = index_.find(s.active);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

struct Enumerator {
  const ContentionGraph& g;
  std::size_t cap;
  std::vector<SystemState>& out;

  // Branch on the lowest undecided link; a chosen link forbids its neighbors.
  void run(int i, LinkMask chosen, LinkMask forbidden) {
    if (i == g.n_links()) {
      if (out.size() >= cap) {
        throw StateSpaceTooLarge("more than " + std::to_string(cap) +
                                 " feasible states");
      }
      out.push_back({chosen});
      return;
    }
    const LinkMask bit = LinkMask{1} << i;
    if (!(forbidden & bit)) run(i + 1, chosen | bit, forbidden | g.neighbors(i));
    run(i + 1, chosen, forbidden);
  }
};

}  // namespace

StateGraph enumerate_states(const ContentionGraph& g, std::size_t max_states) {
  StateGraph sg;
  sg.graph_ = g;
  Enumerator{g, max_states, sg.states_}.run(0, 0, 0);
  std::sort(sg.states_.begin(), sg.states_.end(), [](SystemState a, SystemState b) {
    const int ca = a.cardinality(), cb = b.cardinality();
    return ca != cb ? ca < cb : a.active < b.active;
  });

  const std::size_t n = sg.states_.size();
  sg.index_.reserve(n);
  for (std::size_t s = 0; s < n; ++s) sg.index_.emplace(sg.states_[s].active, static_cast<StateIndex>(s));

  const int top = sg.states_.back().cardinality();
  sg.column_offsets_.assign(static_cast<std::size_t>(top) + 2, 0);
  for (auto st : sg.states_) ++sg.column_offsets_[st.cardinality() + 1];
  for (std::size_t c = 1; c < sg.column_offsets_.size(); ++c) {
    sg.column_offsets_[c] += sg.column_offsets_[c - 1];
  }

  sg.up_offsets_.assign(n + 1, 0);
  sg.down_offsets_.assign(n + 1, 0);
  for (std::size_t s = 0; s < n; ++s) {
    const LinkMask active = sg.states_[s].active;
    for (LinkId i = 0; i < g.n_links(); ++i) {
      const LinkMask bit = LinkMask{1} << i;
      if (active & bit) {
        sg.down_.push_back({sg.index_.at(active & ~bit), i});
      } else if (!(g.neighbors(i) & active)) {
        sg.up_.push_back({sg.index_.at(active | bit), i});
      }
    }
    sg.up_offsets_[s + 1] = static_cast<std::uint32_t>(sg.up_.size());
    sg.down_offsets_[s + 1] = static_cast<std::uint32_t>(sg.down_.size());
  }
  return sg;
}

std::vector<double> column_state_probability(const StateGraph& sg, double rho) {
  if (!(rho > 0.0)) throw InvalidParameter("rho must be positive");
  const auto counts = sg.column_counts();
  const int top = sg.max_column();
  std::vector<double> w(counts.size());
  double z = 0.0;
  for (int n = 0; n <= top; ++n) {
    w[n] = rho >= 1.0 ? std::pow(rho, n - top) : std::pow(rho, n);
    z += static_cast<double>(counts[n]) * w[n];
  }
  for (auto& x : w) x /= z;
  return w;
}

std::vector<double> stationary_distribution(const StateGraph& sg, double rho) {
  const auto col = column_state_probability(sg, rho);
  std::vector<double> p(sg.size());
  for (std::size_t s = 0; s < sg.size(); ++s) p[s] = col[sg.cardinality(static_cast<StateIndex>(s))];
  return p;
}

void check_link(const ContentionGraph& g, LinkId i) {
  if (i < 0 || i >= g.n_links()) throw UnknownLink("link index " + std::to_string(i));
}

double link_throughput(const StateGraph& sg, double rho, LinkId i) {
  check_link(sg.graph(), i);
  const auto col = column_state_probability(sg, rho);
  double th = 0.0;
  for (auto st : sg.states()) {
    if (st.contains(i)) th += col[st.cardinality()];
  }
  return th;
}

ThroughputPolynomials throughput_polynomials(const StateGraph& sg, LinkId i) {
  check_link(sg.graph(), i);
  ThroughputPolynomials out;
  out.denominator.coefficients = sg.column_counts();
  out.numerator.coefficients.assign(out.denominator.coefficients.size(), 0);
  for (auto st : sg.states()) {
    if (st.contains(i)) ++out.numerator.coefficients[st.cardinality()];
  }
  return out;
}

Rational asymptotic_throughput(const StateGraph& sg, LinkId i) {
  const auto polys = throughput_polynomials(sg, i);
  const int top = polys.denominator.degree();
  return Rational(polys.numerator.coefficients[top], polys.denominator.coefficients[top]);
}

std::string state_graph_to_json(const StateGraph& sg) {
  nlohmann::json doc;
  doc["links"] = sg.graph().n_links();
  doc["column_counts"] = sg.column_counts();
  auto& states = doc["states"] = nlohmann::json::array();
  auto& edges = doc["edges"] = nlohmann::json::array();
  for (StateIndex s = 0; s < sg.size(); ++s) {
    states.push_back(sg.state(s).active);
    for (auto nb : sg.up(s)) edges.push_back({s, nb.state});
  }
  return doc.dump() + "\n";
}

}  // namespace csmatrap
