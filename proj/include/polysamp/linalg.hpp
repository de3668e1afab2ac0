#pragma once

// Matrix/vector aliases and small helpers shared across the library.
// Sparse matrices are Eigen CSC; builders go through triplet lists.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "polysamp/common.hpp"

namespace polysamp {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Build a compressed CSC matrix from triplets. Duplicate (row, col) pairs are
// summed, explicit zeros dropped.
inline SparseMatrix from_triplets(Index rows, Index cols,
                                  const std::vector<Triplet>& entries) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(entries.begin(), entries.end());
  m.prune(0.0, 0.0);
  m.makeCompressed();
  return m;
}

inline std::vector<Triplet> to_triplets(const SparseMatrix& m) {
  std::vector<Triplet> out;
  out.reserve(static_cast<std::size_t>(m.nonZeros()));
  for (Index c = 0; c < m.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(m, c); it; ++it)
      out.emplace_back(it.row(), it.col(), it.value());
  return out;
}

// Largest absolute entry; 0 for an empty or all-zero matrix.
inline double max_abs(const SparseMatrix& m) {
  double best = 0.0;
  for (Index c = 0; c < m.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(m, c); it; ++it)
      best = std::max(best, std::abs(it.value()));
  return best;
}

inline void require(bool cond, const char* what) {
  if (!cond) throw DimensionError(what);
}

}  // namespace polysamp
