#pragma once

// Preprocessing for constrained polytopes: interior-point initialization,
// strict-feasibility certificates, and facial reduction of degenerate inputs.

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "polysamp/common.hpp"
#include "polysamp/linalg.hpp"
#include "polysamp/lp.hpp"
#include "polysamp/model.hpp"

namespace polysamp {

// Cap on the margin objective; hitting it flags an unbounded margin (the
// polytope is unbounded or has no trailing coordinates).
inline constexpr double kDeltaCap = 1e6;

struct InitResult {
  Vector x;            // interior point (margin-maximizing)
  double delta = 0.0;  // margin achieved; > 0 iff strictly feasible
  bool delta_capped = false;
};

// Maximize delta s.t. Ax = b, x_j >= delta for trailing j. delta > 0 gives a
// strictly interior starting point; delta = 0 means the polytope is feasible
// only on its boundary (degenerate); delta < 0 means it is empty.
inline InitResult initialize(const ConstrainedPolytope& p) {
  p.check();
  const Index d = p.dim(), k = p.k;
  LinearProgram lp = LinearProgram::make(d + 1);
  lp.objective[d] = 1.0;
  lp.upper[d] = kDeltaCap;

  {
    std::vector<Triplet> t = to_triplets(p.A);
    lp.A_eq = from_triplets(p.rows(), d + 1, t);
    lp.b_eq = p.b;
  }
  {
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(2 * k));
    for (Index i = 0; i < k; ++i) {
      t.emplace_back(i, p.leading() + i, -1.0);  // -x_j + delta <= 0
      t.emplace_back(i, d, 1.0);
    }
    lp.A_ub = from_triplets(k, d + 1, t);
    lp.b_ub = Vector::Zero(k);
  }

  const LpResult r = lp_solve(lp);
  if (r.status == LpStatus::infeasible)
    throw EmptyPolytopeError("initialize: equality system is infeasible");
  if (r.status == LpStatus::unbounded)
    throw UnboundedPolytopeError("initialize: margin LP unbounded");
  InitResult out;
  out.x = r.x.head(d);
  out.delta = r.x[d];
  out.delta_capped = out.delta >= kDeltaCap * (1.0 - 1e-9);
  return out;
}

// Full-dimensional analogue: maximize delta s.t. Av + delta * 1 <= b (the
// largest inscribed margin in the row geometry). delta < 0 means empty.
inline InitResult initialize_full(const FullDimPolytope& f) {
  f.check();
  const Index m = f.dim(), rows = f.facets();
  require(rows >= 1, "initialize_full: no inequality rows");
  LinearProgram lp = LinearProgram::make(m + 1);
  lp.objective[m] = 1.0;
  lp.upper[m] = kDeltaCap;
  {
    std::vector<Triplet> t;
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < m; ++j)
        if (f.A(i, j) != 0.0) t.emplace_back(i, j, f.A(i, j));
      t.emplace_back(i, m, 1.0);
    }
    lp.A_ub = from_triplets(rows, m + 1, t);
    lp.b_ub = f.b;
  }
  const LpResult r = lp_solve(lp);
  if (r.status != LpStatus::optimal)
    throw NumericalError("initialize_full: margin LP did not solve");
  InitResult out;
  out.x = r.x.head(m);
  out.delta = r.x[m];
  out.delta_capped = out.delta >= kDeltaCap * (1.0 - 1e-9);
  if (out.delta < 0.0)
    throw EmptyPolytopeError("initialize_full: polytope is empty");
  return out;
}

// Certificate that a constrained polytope has no strictly feasible point:
// a multiplier vector y with z = A^T y satisfying b^T y = 0, z = 0 on the
// leading block, z >= 0 on the trailing block, z != 0. Any feasible x then
// obeys z^T x = y^T A x = y^T b = 0, forcing x_j = 0 wherever z_j > 0.
struct Certificate {
  Vector y;  // length n
  Vector z;  // length d, equals A^T y
};

struct FindZResult {
  bool strictly_feasible = false;  // no certificate exists
  Certificate cert;                // valid when strictly_feasible is false
};

// Decide between strict feasibility and a forcing certificate by a
// feasibility LP over y: b^T y = 0, (A^T y)_lead = 0, (A^T y)_trail >= 0,
// sum of trailing entries = 1 (normalization excluding z = 0).
inline FindZResult find_z(const ConstrainedPolytope& p) {
  p.check();
  const Index d = p.dim(), n = p.rows(), k = p.k, lead = p.leading();
  require(k >= 1, "find_z: no trailing coordinates");

  const DenseMatrix At = DenseMatrix(p.A).transpose();  // d x n
  LinearProgram lp = LinearProgram::make(n);
  {
    std::vector<Triplet> t;
    // Row 0: b^T y = 0.
    for (Index i = 0; i < n; ++i)
      if (p.b[i] != 0.0) t.emplace_back(0, i, p.b[i]);
    // Rows 1..lead: (A^T y)_j = 0 for leading j.
    for (Index j = 0; j < lead; ++j)
      for (Index i = 0; i < n; ++i)
        if (At(j, i) != 0.0) t.emplace_back(1 + j, i, At(j, i));
    // Last row: sum of trailing entries of A^T y equals 1.
    for (Index i = 0; i < n; ++i) {
      double s = 0.0;
      for (Index j = lead; j < d; ++j) s += At(j, i);
      if (s != 0.0) t.emplace_back(1 + lead, i, s);
    }
    lp.A_eq = from_triplets(lead + 2, n, t);
    lp.b_eq = Vector::Zero(lead + 2);
    lp.b_eq[lead + 1] = 1.0;
  }
  {
    std::vector<Triplet> t;
    for (Index j = 0; j < k; ++j)
      for (Index i = 0; i < n; ++i)
        if (At(lead + j, i) != 0.0) t.emplace_back(j, i, -At(lead + j, i));
    lp.A_ub = from_triplets(k, n, t);  // -(A^T y)_trail <= 0
    lp.b_ub = Vector::Zero(k);
  }

  const LpResult r = lp_feasible(lp);
  FindZResult out;
  if (r.status != LpStatus::optimal) {
    out.strictly_feasible = true;
    return out;
  }
  out.strictly_feasible = false;
  out.cert.y = r.x;
  out.cert.z = At * r.x;
  return out;
}

// Variable fixed to zero by a certificate. y is given in original row
// indices (rows dropped before that round carry zeros); certificates from
// round 2 onward are conditional on the variables fixed by earlier rounds.
struct FixedVariable {
  Index index;  // coordinate index in the original polytope
  Vector y;     // certificate multipliers, length = original row count
};

struct FacialReductionResult {
  ConstrainedPolytope reduced;
  // Column selection: reduced coordinate i corresponds to original coordinate
  // kept_columns[i]. V below is the matching d x d_reduced 0/1 matrix.
  std::vector<Index> kept_columns;
  SparseMatrix V;
  // Original indices of the equality rows kept after rank re-selection.
  std::vector<Index> kept_rows;
  std::vector<FixedVariable> fixed_variables;
  Index rounds = 0;
};

namespace detail {

// Keep an independent subset of the rows of (A | b) via rank-revealing QR of
// A^T; returns kept original-row indices sorted ascending.
inline std::vector<Index> select_rows(const SparseMatrix& A, double tol) {
  const Index n = A.rows();
  DenseMatrix At = DenseMatrix(A).transpose();
  Eigen::ColPivHouseholderQR<DenseMatrix> qr(At);
  qr.setThreshold(tol);
  const Index rank = qr.rank();
  const auto& perm = qr.colsPermutation().indices();
  std::vector<Index> kept;
  kept.reserve(static_cast<std::size_t>(rank));
  for (Index i = 0; i < rank && i < n; ++i) kept.push_back(perm[i]);
  std::sort(kept.begin(), kept.end());
  return kept;
}

inline SparseMatrix take_rows(const SparseMatrix& A,
                              const std::vector<Index>& rows) {
  std::vector<Index> inv(static_cast<std::size_t>(A.rows()), -1);
  for (std::size_t i = 0; i < rows.size(); ++i)
    inv[static_cast<std::size_t>(rows[i])] = static_cast<Index>(i);
  std::vector<Triplet> t;
  for (Index c = 0; c < A.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(A, c); it; ++it)
      if (inv[static_cast<std::size_t>(it.row())] >= 0)
        t.emplace_back(inv[static_cast<std::size_t>(it.row())], it.col(),
                       it.value());
  return from_triplets(static_cast<Index>(rows.size()), A.cols(), t);
}

inline SparseMatrix drop_columns(const SparseMatrix& A,
                                 const std::vector<char>& dropped,
                                 Index kept_count) {
  std::vector<Index> newcol(static_cast<std::size_t>(A.cols()), -1);
  Index next = 0;
  for (Index j = 0; j < A.cols(); ++j)
    if (!dropped[static_cast<std::size_t>(j)]) newcol[static_cast<std::size_t>(j)] = next++;
  require(next == kept_count, "facial reduction: column bookkeeping");
  std::vector<Triplet> t;
  for (Index c = 0; c < A.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(A, c); it; ++it)
      if (newcol[static_cast<std::size_t>(it.col())] >= 0)
        t.emplace_back(it.row(), newcol[static_cast<std::size_t>(it.col())],
                       it.value());
  return from_triplets(A.rows(), kept_count, t);
}

}  // namespace detail

// Facial reduction: repeatedly find a forcing certificate, drop the zero-forced
// trailing coordinates, and re-select an independent row subset, until the
// remaining polytope is strictly feasible. Fixed variables are reported with
// the certificate that forced them to zero. Throws EmptyPolytopeError when the
// input is infeasible.
inline FacialReductionResult facial_reduction(const ConstrainedPolytope& p,
                                              double rank_tol = 1e-10) {
  p.check();
  FacialReductionResult out;

  // Current system plus books mapping back to original indices.
  ConstrainedPolytope cur = p;
  std::vector<Index> col_orig(static_cast<std::size_t>(p.dim()));
  for (Index j = 0; j < p.dim(); ++j) col_orig[static_cast<std::size_t>(j)] = j;
  std::vector<Index> row_orig(static_cast<std::size_t>(p.rows()));
  for (Index i = 0; i < p.rows(); ++i) row_orig[static_cast<std::size_t>(i)] = i;

  auto reselect_rows = [&]() {
    const std::vector<Index> kept = detail::select_rows(cur.A, rank_tol);
    if (kept.size() == static_cast<std::size_t>(cur.rows())) return;
    Vector b2(static_cast<Index>(kept.size()));
    std::vector<Index> ro2;
    ro2.reserve(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
      b2[static_cast<Index>(i)] = cur.b[kept[i]];
      ro2.push_back(row_orig[static_cast<std::size_t>(kept[i])]);
    }
    cur.A = detail::take_rows(cur.A, kept);
    cur.b = std::move(b2);
    row_orig = std::move(ro2);
  };

  reselect_rows();

  const Index max_rounds = p.k + 1;
  while (cur.k > 0 && cur.rows() > 0) {
    if (out.rounds > max_rounds)
      throw NumericalError("facial reduction: round limit exceeded");
    const FindZResult fz = find_z(cur);
    if (fz.strictly_feasible) break;

    const double tol_z = 1e-9 * (1.0 + max_abs(cur.A));
    const Index lead = cur.leading();
    Vector y_orig = Vector::Zero(p.rows());
    for (Index i = 0; i < cur.rows(); ++i)
      y_orig[row_orig[static_cast<std::size_t>(i)]] = fz.cert.y[i];
    std::vector<char> drop(static_cast<std::size_t>(cur.dim()), 0);
    Index ndrop = 0;
    for (Index j = lead; j < cur.dim(); ++j) {
      if (fz.cert.z[j] > tol_z) {
        drop[static_cast<std::size_t>(j)] = 1;
        ++ndrop;
        out.fixed_variables.push_back(
            {col_orig[static_cast<std::size_t>(j)], y_orig});
      }
    }
    if (ndrop == 0)
      throw NumericalError(
          "facial reduction: certificate found but below the drop tolerance");

    std::vector<Index> co2;
    co2.reserve(col_orig.size() - static_cast<std::size_t>(ndrop));
    for (Index j = 0; j < cur.dim(); ++j)
      if (!drop[static_cast<std::size_t>(j)])
        co2.push_back(col_orig[static_cast<std::size_t>(j)]);
    cur.A = detail::drop_columns(cur.A, drop, cur.dim() - ndrop);
    cur.k -= ndrop;
    col_orig = std::move(co2);
    reselect_rows();
    ++out.rounds;
  }

  // By the alternative, a strictly-feasibility-certified system with no
  // forcing certificate is strictly feasible unless the equalities themselves
  // are inconsistent; witness it and reject empty input.
  if (cur.rows() > 0) {
    const InitResult init = initialize(cur);
    if (cur.k > 0 && init.delta <= 0.0)
      throw EmptyPolytopeError("facial reduction: input polytope is empty");
  }

  out.reduced = cur;
  out.kept_columns = col_orig;
  out.kept_rows = row_orig;
  {
    std::vector<Triplet> t;
    t.reserve(col_orig.size());
    for (std::size_t i = 0; i < col_orig.size(); ++i)
      t.emplace_back(col_orig[i], static_cast<Index>(i), 1.0);
    out.V = from_triplets(p.dim(), static_cast<Index>(col_orig.size()), t);
  }
  return out;
}

// Lift a point of the reduced polytope back to original coordinates (fixed
// variables are exactly zero).
inline Vector lift(const FacialReductionResult& fr, const Vector& v) {
  require(v.size() == static_cast<Index>(fr.kept_columns.size()),
          "lift: bad reduced point length");
  Vector x = Vector::Zero(fr.V.rows());
  for (std::size_t i = 0; i < fr.kept_columns.size(); ++i)
    x[fr.kept_columns[i]] = v[static_cast<Index>(i)];
  return x;
}

}  // namespace polysamp
