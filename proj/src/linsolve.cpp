#include "csmatrap/linsolve.hpp"

#include <Eigen/SparseLU>

#include "csmatrap/error.hpp"

namespace csmatrap {

std::vector<double> solve_sparse(int n, const std::vector<Triplet>& entries,
                                 const std::vector<double>& rhs) {
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(entries.begin(), entries.end());
  a.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw SingularSystem("sparse LU failed: " + lu.lastErrorMessage());
  Eigen::Map<const Eigen::VectorXd> b(rhs.data(), n);
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success) throw SingularSystem("sparse solve failed");
  return {x.data(), x.data() + n};
}

}  // namespace csmatrap
