#pragma once

#include <vector>

#include <Eigen/SparseCore>

namespace csmatrap {

using Triplet = Eigen::Triplet<double>;

/// Solve A x = b for a square sparse A given as triplets (duplicates summed).
/// Throws SingularSystem if the factorization fails.
std::vector<double> solve_sparse(int n, const std::vector<Triplet>& entries,
                                 const std::vector<double>& rhs);

}  // namespace csmatrap
