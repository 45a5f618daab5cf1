#include "csmatrap/kernels.hpp"

#include <bit>

#include <omp.h>

namespace csmatrap::kernels {

int max_threads() { return omp_get_max_threads(); }

std::vector<std::vector<std::int64_t>> link_column_counts_serial(const StateGraph& sg) {
  const int n = sg.graph().n_links();
  std::vector<std::vector<std::int64_t>> counts(
      static_cast<std::size_t>(n), std::vector<std::int64_t>(static_cast<std::size_t>(sg.max_column()) + 1));
  for (auto st : sg.states()) {
    const int c = st.cardinality();
    for (int i = 0; i < n; ++i) {
      if (st.contains(i)) ++counts[i][c];
    }
  }
  return counts;
}

std::vector<std::vector<std::int64_t>> link_column_counts(const StateGraph& sg) {
  const int n = sg.graph().n_links();
  const int cols = sg.max_column() + 1;
  std::vector<std::int64_t> flat(static_cast<std::size_t>(n) * cols, 0);
  const auto& states = sg.states();
  const auto total = static_cast<std::ptrdiff_t>(states.size());
#pragma omp parallel
  {
    std::vector<std::int64_t> local(flat.size(), 0);
#pragma omp for schedule(static)
    for (std::ptrdiff_t k = 0; k < total; ++k) {
      const LinkMask m = states[static_cast<std::size_t>(k)].active;
      const int c = std::popcount(m);
      for (LinkMask rest = m; rest != 0; rest &= rest - 1) {
        ++local[static_cast<std::size_t>(std::countr_zero(rest)) * cols + c];
      }
    }
#pragma omp critical
    for (std::size_t k = 0; k < flat.size(); ++k) flat[k] += local[k];
  }
  std::vector<std::vector<std::int64_t>> counts(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    counts[i].assign(flat.begin() + static_cast<std::ptrdiff_t>(i) * cols,
                     flat.begin() + static_cast<std::ptrdiff_t>(i + 1) * cols);
  }
  return counts;
}

std::vector<double> link_throughputs_serial(const StateGraph& sg, double rho) {
  const auto p = stationary_distribution(sg, rho);
  std::vector<double> th(static_cast<std::size_t>(sg.graph().n_links()), 0.0);
  for (std::size_t s = 0; s < sg.size(); ++s) {
    for (LinkId i = 0; i < sg.graph().n_links(); ++i) {
      if (sg.states()[s].contains(i)) th[i] += p[s];
    }
  }
  return th;
}

std::vector<double> link_throughputs(const StateGraph& sg, double rho) {
  const auto col = column_state_probability(sg, rho);
  const auto counts = link_column_counts(sg);
  std::vector<double> th(counts.size(), 0.0);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    for (std::size_t c = 0; c < col.size(); ++c) th[i] += static_cast<double>(counts[i][c]) * col[c];
  }
  return th;
}

std::vector<double> trap_probabilities_serial(const TrapForest& forest, const StateGraph& sg,
                                              double rho) {
  std::vector<double> out;
  for (const auto& t : forest.traps) out.push_back(trap_probability(t, sg, rho));
  return out;
}

std::vector<double> trap_probabilities(const TrapForest& forest, const StateGraph& sg, double rho) {
  const auto col = column_state_probability(sg, rho);
  std::vector<double> out(forest.traps.size(), 0.0);
  const auto n = static_cast<std::ptrdiff_t>(forest.traps.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const Trap& t = forest.traps[static_cast<std::size_t>(k)];
    double p = 0.0;
    for (int j = 0; j <= t.depth; ++j) p += static_cast<double>(t.column_sizes[j]) * col[t.level + j];
    out[static_cast<std::size_t>(k)] = p;
  }
  return out;
}

}  // namespace csmatrap::kernels
