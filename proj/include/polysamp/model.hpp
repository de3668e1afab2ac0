#pragma once

// Polytope representations and generators.
//
// Two forms are used throughout:
//   constrained:      {x in R^d : Ax = b, x_j >= 0 for the trailing k coords}
//   full-dimensional: {v in R^m : A_tilde v <= b_tilde}
// The constrained form keeps A sparse; the full-dimensional form is the dense
// image of the constrained one under an orthonormal null-space map
// x = Q2 v + shift (see to_full_dimensional).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "polysamp/common.hpp"
#include "polysamp/linalg.hpp"

namespace polysamp {

struct ConstrainedPolytope {
  SparseMatrix A;  // n x d equality matrix
  Vector b;        // n
  Index k = 0;     // trailing coordinates constrained to be nonnegative

  Index dim() const { return A.cols(); }
  Index rows() const { return A.rows(); }
  Index leading() const { return A.cols() - k; }

  void check() const {
    require(b.size() == A.rows(), "constrained polytope: b length != rows of A");
    require(k >= 0 && k <= A.cols(), "constrained polytope: k out of range");
  }
};

// Affine map x = Q2 v + shift from the full-dimensional variable v back to x.
// Q2 has orthonormal columns spanning null(A); shift is a particular solution
// of Ax = b.
struct AffineMap {
  DenseMatrix Q2;
  Vector shift;

  Vector lift(const Vector& v) const {
    require(v.size() == Q2.cols(), "affine map: bad v length");
    return Q2 * v + shift;
  }
  // Inverse on the affine subspace; exact because Q2 is orthonormal.
  Vector project(const Vector& x) const {
    require(x.size() == Q2.rows(), "affine map: bad x length");
    return Q2.transpose() * (x - shift);
  }
};

struct FullDimPolytope {
  DenseMatrix A;  // k x m inequality matrix, one row per facet
  Vector b;       // k
  AffineMap map;  // identity for natively full-dimensional input

  Index dim() const { return A.cols(); }
  Index facets() const { return A.rows(); }

  void check() const {
    require(b.size() == A.rows(), "full-dim polytope: b length != rows of A");
    require(map.Q2.cols() == A.cols() && map.shift.size() == map.Q2.rows(),
            "full-dim polytope: inconsistent affine map");
  }
};

// Wrap a raw inequality system Av <= b as a full-dimensional polytope with an
// identity lift.
inline FullDimPolytope make_full_dim(DenseMatrix A, Vector b) {
  require(b.size() == A.rows(), "make_full_dim: b length != rows of A");
  FullDimPolytope f;
  const Index m = A.cols();
  f.map.Q2 = DenseMatrix::Identity(m, m);
  f.map.shift = Vector::Zero(m);
  f.A = std::move(A);
  f.b = std::move(b);
  return f;
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

// Standard simplex {x in R^d : sum x = 1, x >= 0}. One equality row, k = d.
inline ConstrainedPolytope make_simplex(Index d) {
  require(d >= 2, "make_simplex: need d >= 2");
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) t.emplace_back(0, j, 1.0);
  ConstrainedPolytope p;
  p.A = from_triplets(1, d, t);
  p.b = Vector::Constant(1, 1.0);
  p.k = d;
  return p;
}

// Hypercube [-1, 1]^m in constrained form with two slack blocks:
//   x_i + s_i = 1, -x_i + t_i = 1, s, t >= 0.
// d = 3m, n = 2m, k = 2m; the leading block is x itself (free).
inline ConstrainedPolytope make_hypercube(Index m) {
  require(m >= 1, "make_hypercube: need m >= 1");
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(4 * m));
  for (Index i = 0; i < m; ++i) {
    t.emplace_back(i, i, 1.0);          // x_i
    t.emplace_back(i, m + i, 1.0);      // s_i
    t.emplace_back(m + i, i, -1.0);     // -x_i
    t.emplace_back(m + i, 2 * m + i, 1.0);  // t_i
  }
  ConstrainedPolytope p;
  p.A = from_triplets(2 * m, 3 * m, t);
  p.b = Vector::Constant(2 * m, 1.0);
  p.k = 2 * m;
  return p;
}

// Birkhoff polytope of m x m doubly stochastic matrices, x = vec(X) row-major.
// All m row-sum constraints plus the first m-1 column sums (the last column
// sum is implied, so the system has full row rank 2m - 1). All coordinates
// nonnegative: k = d = m^2.
inline ConstrainedPolytope make_birkhoff(Index m) {
  require(m >= 2, "make_birkhoff: need m >= 2");
  const Index d = m * m;
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(2 * d));
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) t.emplace_back(i, i * m + j, 1.0);
  for (Index j = 0; j + 1 < m; ++j)
    for (Index i = 0; i < m; ++i) t.emplace_back(m + j, i * m + j, 1.0);
  ConstrainedPolytope p;
  p.A = from_triplets(2 * m - 1, d, t);
  p.b = Vector::Ones(2 * m - 1);
  p.k = d;
  return p;
}

// Analytic interior point of a generator instance (used by benchmarks where
// an LP-based initializer would dominate the runtime).
inline Vector simplex_center(Index d) {
  return Vector::Constant(d, 1.0 / static_cast<double>(d));
}
inline Vector hypercube_center(Index m) {
  Vector x = Vector::Zero(3 * m);
  x.segment(m, 2 * m).setOnes();
  return x;
}
inline Vector birkhoff_center(Index m) {
  return Vector::Constant(m * m, 1.0 / static_cast<double>(m));
}

// ---------------------------------------------------------------------------
// Constrained -> full-dimensional bridge
// ---------------------------------------------------------------------------

// Eliminate the equality constraints of a constrained polytope through a
// column-pivoted QR of A^T:
//   A^T P = Q R,  Q = [Q1 Q2],  x = Q2 v + Q1 R1^{-T} P^T b.
// Substituting into the trailing nonnegativity constraints x_trail >= 0 gives
//   (-Q2_trail) v <= shift_trail,
// a k x (d - n) inequality system in v. Throws RankDeficiencyError naming the
// redundant rows when rank(A) < n, and DimensionError when n >= d.
inline FullDimPolytope to_full_dimensional(const ConstrainedPolytope& p,
                                           double rank_tol = 1e-10) {
  p.check();
  const Index d = p.dim(), n = p.rows(), k = p.k;
  require(n >= 1, "to_full_dimensional: no equality rows");
  if (n >= d)
    throw DimensionError(
        "to_full_dimensional: need fewer equality rows than dimensions");

  DenseMatrix At = DenseMatrix(p.A).transpose();  // d x n
  Eigen::ColPivHouseholderQR<DenseMatrix> qr(At);
  qr.setThreshold(rank_tol);
  const Index rank = qr.rank();
  if (rank < n) {
    // Columns of A^T pivoted past the numerical rank are the redundant rows.
    const auto& perm = qr.colsPermutation().indices();
    std::vector<Index> bad;
    for (Index i = rank; i < n; ++i) bad.push_back(perm[i]);
    std::sort(bad.begin(), bad.end());
    std::string msg = "to_full_dimensional: rank-deficient equality system; "
                      "redundant rows:";
    for (Index r : bad) msg += " " + std::to_string(r);
    throw RankDeficiencyError(msg);
  }

  const DenseMatrix Q = qr.householderQ() * DenseMatrix::Identity(d, d);
  const DenseMatrix R1 =
      qr.matrixR().topLeftCorner(n, n).triangularView<Eigen::Upper>();
  const Vector pb = qr.colsPermutation().transpose() * p.b;
  const Vector v1 =
      R1.transpose().triangularView<Eigen::Lower>().solve(pb);
  const Vector shift = Q.leftCols(n) * v1;

  FullDimPolytope f;
  f.map.Q2 = Q.rightCols(d - n);
  f.map.shift = shift;
  f.A = -f.map.Q2.bottomRows(k);
  f.b = shift.tail(k);
  return f;
}

// The full-dimensional body is bounded iff the facet normals span R^m.
inline bool is_bounded(const FullDimPolytope& f, double rank_tol = 1e-10) {
  if (f.A.rows() < f.A.cols()) return false;
  Eigen::ColPivHouseholderQR<DenseMatrix> qr(f.A);
  qr.setThreshold(rank_tol);
  return qr.rank() == f.A.cols();
}

// ---------------------------------------------------------------------------
// Membership
// ---------------------------------------------------------------------------

// Constrained-form membership. Equality residual is tested at
// 1e-8 * (1 + ||b||_inf); trailing coordinates at > 0 (strict) or >= -1e-12.
inline bool membership(const ConstrainedPolytope& p, const Vector& x,
                       bool strict = false) {
  p.check();
  require(x.size() == p.dim(), "membership: bad point length");
  const double tol_eq = 1e-8 * (1.0 + p.b.lpNorm<Eigen::Infinity>());
  if ((p.A * x - p.b).lpNorm<Eigen::Infinity>() > tol_eq) return false;
  const double floor = strict ? 0.0 : -1e-12;
  for (Index j = p.leading(); j < p.dim(); ++j) {
    if (strict ? !(x[j] > floor) : !(x[j] >= floor)) return false;
  }
  return true;
}

// Full-dimensional membership on the slack vector b - Av.
inline bool membership(const FullDimPolytope& f, const Vector& v,
                       bool strict = false) {
  require(v.size() == f.dim(), "membership: bad point length");
  const Vector slack = f.b - f.A * v;
  if (strict) return (slack.array() > 0.0).all();
  const double tol = 1e-12 * (1.0 + f.b.lpNorm<Eigen::Infinity>());
  return (slack.array() >= -tol).all();
}

}  // namespace polysamp
