#pragma once

#include <cstddef>
#include <type_traits>
#include <vector>

#include "csmatrap/traps.hpp"

namespace csmatrap::kernels {

// OpenMP kernels over the state list. Each has a serial reference kept for
// tests and for the benchmark comparison.

/// Throughput of every link at rho.
std::vector<double> link_throughputs(const StateGraph& sg, double rho);
std::vector<double> link_throughputs_serial(const StateGraph& sg, double rho);

/// Per-link, per-column incidence: counts[i][n] = #{s in column n : i in s}.
std::vector<std::vector<std::int64_t>> link_column_counts(const StateGraph& sg);
std::vector<std::vector<std::int64_t>> link_column_counts_serial(const StateGraph& sg);

/// Stationary probability of every trap in the forest, indexed by trap id.
std::vector<double> trap_probabilities(const TrapForest& forest, const StateGraph& sg, double rho);
std::vector<double> trap_probabilities_serial(const TrapForest& forest, const StateGraph& sg,
                                              double rho);

/// Evaluate f(0..n-1) across threads; results in index order. Used to fan
/// out independent simulation runs.
template <class F>
auto parallel_map(std::size_t n, F&& f) -> std::vector<std::invoke_result_t<F&, std::size_t>> {
  std::vector<std::invoke_result_t<F&, std::size_t>> out(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) {
    out[static_cast<std::size_t>(k)] = f(static_cast<std::size_t>(k));
  }
  return out;
}

template <class F>
auto serial_map(std::size_t n, F&& f) -> std::vector<std::invoke_result_t<F&, std::size_t>> {
  std::vector<std::invoke_result_t<F&, std::size_t>> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = f(k);
  return out;
}

int max_threads();

}  // namespace csmatrap::kernels
