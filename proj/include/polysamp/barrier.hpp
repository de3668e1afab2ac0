#pragma once

// Weighted log-barrier machinery in both polytope forms.
//
// Dense (full-dimensional) side: slacks, leverage scores, the four weight
// schemes, and the barrier Hessian H(v) = A^T S^{-1} W S^{-1} A.
//
// Sparse (constrained) side: the diagonal local metric g(x) with an epsilon
// ridge, the null-space pseudo-inverse
//   M+(x) = g^{-1} - g^{-1} A^T (A g^{-1} A^T)^{-1} A g^{-1},
// its square-root factor, the log pseudo-determinant
//   log pdet = log det g + log det(A g^{-1} A^T) - log det(A A^T),
// and leverage scores computed from solves against the cached factorization
// (all O(nnz) style work, no dense null-space basis is ever formed).

#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "polysamp/common.hpp"
#include "polysamp/linalg.hpp"
#include "polysamp/model.hpp"

namespace polysamp {

enum class WeightKind { dikin, vaidya, john, lee_sidford };

inline const char* weight_kind_name(WeightKind k) {
  switch (k) {
    case WeightKind::dikin: return "dikin";
    case WeightKind::vaidya: return "vaidya";
    case WeightKind::john: return "john";
    case WeightKind::lee_sidford: return "lee_sidford";
  }
  return "?";
}

struct SolverStats {
  Index iterations = 0;
  double residual = 0.0;
};

struct Weights {
  Vector w;
  WeightKind kind = WeightKind::dikin;
  SolverStats stats;
};

// Slack vector b - Av; every entry must be strictly positive.
inline Vector slack(const FullDimPolytope& f, const Vector& v) {
  require(v.size() == f.dim(), "slack: bad point length");
  Vector s = f.b - f.A * v;
  if (!(s.array() > 0.0).all())
    throw BoundaryError("slack: point is on or outside the boundary");
  return s;
}

// Row leverage scores of a full-column-rank matrix B: diagonal of the
// orthogonal projector onto range(B), computed from a thin Q.
inline Vector leverage_scores(const DenseMatrix& B) {
  const Index k = B.rows(), m = B.cols();
  require(k >= m, "leverage_scores: need at least as many rows as columns");
  Eigen::ColPivHouseholderQR<DenseMatrix> qr(B);
  qr.setThreshold(1e-12);
  if (qr.rank() < m)
    throw RankDeficiencyError("leverage_scores: matrix is column rank deficient");
  const DenseMatrix Q = qr.householderQ() * DenseMatrix::Identity(k, m);
  return Q.rowwise().squaredNorm();
}

// ---------------------------------------------------------------------------
// Weight schemes (dense form). Bs is the slack-scaled constraint matrix
// S^{-1} A of shape k x m evaluated at the current point.
// ---------------------------------------------------------------------------

inline Weights dikin_weights(Index k) {
  Weights out;
  out.w = Vector::Ones(k);
  out.kind = WeightKind::dikin;
  return out;
}

// Vaidya: leverage scores plus the constant m/k; total weight is exactly 2m.
inline Weights vaidya_weights(const DenseMatrix& Bs) {
  const Index k = Bs.rows(), m = Bs.cols();
  Weights out;
  out.kind = WeightKind::vaidya;
  out.w = leverage_scores(Bs).array() + double(m) / double(k);
  return out;
}

namespace detail {

// One leverage evaluation of the reweighted system W^{p/2} Bs.
inline Vector scaled_leverage(const DenseMatrix& Bs, const Vector& w, double p) {
  DenseMatrix Bw = Bs;
  for (Index i = 0; i < Bs.rows(); ++i) Bw.row(i) *= std::pow(w[i], 0.5 * p);
  return leverage_scores(Bw);
}

}  // namespace detail

// John: fixed point of w = sigma(W^{alpha/2} Bs) + beta with
// beta = m/(2k) and alpha = 1 - 1/log2(1/beta). The additive form is the
// first-order optimality condition of the John weight objective, and keeps
// w >= beta automatically. Damped when the iteration oscillates.
inline Weights john_weights(const DenseMatrix& Bs, double tol = 1e-8,
                            Index max_iters = 200) {
  const Index k = Bs.rows(), m = Bs.cols();
  if (k <= m)
    throw DimensionError("john_weights: need more constraints than dimensions");
  const double beta = double(m) / (2.0 * double(k));
  const double alpha = 1.0 - 1.0 / std::log2(1.0 / beta);

  Weights out;
  out.kind = WeightKind::john;
  Vector w = Vector::Ones(k);
  double prev_resid = std::numeric_limits<double>::infinity();
  for (Index it = 0; it < max_iters; ++it) {
    const Vector target = detail::scaled_leverage(Bs, w, alpha).array() + beta;
    const double resid = (target - w).lpNorm<Eigen::Infinity>();
    out.stats.iterations = it + 1;
    out.stats.residual = resid;
    if (resid < tol) {
      out.w = target;
      return out;
    }
    w = resid > prev_resid ? Vector(0.5 * (w + target)) : target;
    prev_resid = resid;
  }
  throw ConvergenceError("john_weights: fixed point did not converge",
                         out.stats.residual);
}

// Lee-Sidford: projected gradient descent on
//   f(w) = kappa * sum(w) - log det(Bs^T W^kappa Bs),  kappa = 1 - 2/q,
//   q = 2 (1 + log k), over w >= floor, with Armijo backtracking.
inline Weights ls_weights(const DenseMatrix& Bs, double grad_tol = 1e-5,
                          Index max_iters = 2000) {
  const Index k = Bs.rows();
  const double q = 2.0 * (1.0 + std::log(double(k)));
  const double kappa = 1.0 - 2.0 / q;
  const double floor_w = 1e-10;
  const double armijo_c = 1e-4;

  // +inf signals rank loss so the line search backs off instead of dying.
  const auto value = [&](const Vector& w) -> double {
    DenseMatrix Bw = Bs;
    for (Index i = 0; i < k; ++i) Bw.row(i) *= std::pow(w[i], 0.5 * kappa);
    // log det(Bw^T Bw) through the R factor of a QR decomposition.
    Eigen::HouseholderQR<DenseMatrix> qr(Bw);
    double logdet = 0.0;
    for (Index j = 0; j < Bs.cols(); ++j) {
      const double rjj = std::abs(qr.matrixQR()(j, j));
      if (!(rjj > 0.0)) return std::numeric_limits<double>::infinity();
      logdet += 2.0 * std::log(rjj);
    }
    return kappa * w.sum() - logdet;
  };
  const auto gradient = [&](const Vector& w) {
    const Vector sigma = detail::scaled_leverage(Bs, w, kappa);
    return Vector(kappa * (1.0 - (sigma.array() / w.array())));
  };

  Weights out;
  out.kind = WeightKind::lee_sidford;
  // Start from the plain leverage scores: they already satisfy sum(w) =
  // rank(Bs) and sit close to the fixed point, unlike all-ones.
  Vector w = detail::scaled_leverage(Bs, Vector::Ones(k), kappa).cwiseMax(floor_w);
  double fw = value(w);
  if (!std::isfinite(fw))
    throw RankDeficiencyError("ls_weights: reweighted system lost rank");
  Vector w_prev, g_prev;
  for (Index it = 0; it < max_iters; ++it) {
    const Vector g = gradient(w);
    // Projected-gradient residual: zero when a coordinate is pinned at the
    // floor with a positive gradient.
    double pg = 0.0;
    for (Index i = 0; i < k; ++i) {
      const double gi = (w[i] <= floor_w && g[i] > 0.0) ? 0.0 : g[i];
      pg = std::max(pg, std::abs(gi));
    }
    out.stats.iterations = it + 1;
    out.stats.residual = pg;
    if (pg < grad_tol) {
      out.w = w;
      return out;
    }
    // Barzilai-Borwein trial step, safeguarded by the Armijo backtracking
    // below; plain gradient steps crawl here because the curvature spreads
    // across coordinates with the square of the weights.
    double eta = 1.0;
    if (it > 0) {
      const Vector s = w - w_prev;
      const Vector y = g - g_prev;
      const double sy = s.dot(y);
      if (sy > 0.0)
        eta = std::min(1e8, std::max(1e-12, s.squaredNorm() / sy));
    }
    w_prev = w;
    g_prev = g;
    bool moved = false;
    for (int bt = 0; bt < 60 && !moved; ++bt) {
      Vector cand = (w - eta * g).cwiseMax(floor_w);
      if ((cand - w).lpNorm<Eigen::Infinity>() == 0.0) break;
      const double fc = value(cand);
      if (std::isfinite(fc) && fc <= fw + armijo_c * g.dot(cand - w)) {
        w = std::move(cand);
        fw = fc;
        moved = true;
      }
      eta *= 0.5;
    }
    if (!moved)
      throw ConvergenceError("ls_weights: line search failed", pg);
  }
  // Iteration cap reached: the weights are feasible and the objective has
  // decreased monotonically, so return them with the residual on record.
  out.w = w;
  return out;
}

// Dense weights for a walk kind at slack-scaled matrix Bs.
inline Weights dense_weights(WeightKind kind, const DenseMatrix& Bs) {
  switch (kind) {
    case WeightKind::dikin: return dikin_weights(Bs.rows());
    case WeightKind::vaidya: return vaidya_weights(Bs);
    case WeightKind::john: return john_weights(Bs);
    case WeightKind::lee_sidford: return ls_weights(Bs);
  }
  throw Error("dense_weights: unknown kind");
}

// ---------------------------------------------------------------------------
// Dense local metric
// ---------------------------------------------------------------------------

struct LocalMetricDense {
  DenseMatrix H;        // weighted barrier Hessian at the point
  DenseMatrix chol;     // lower Cholesky factor of H
  double logdet = 0.0;  // log det H
};

// H(v) = A^T S^{-1} W S^{-1} A, assembled as M^T M with M = W^{1/2} S^{-1} A
// so the result is symmetric PSD by construction.
inline LocalMetricDense hessian_dense(const FullDimPolytope& f, const Vector& v,
                                      const Weights& weights) {
  require(weights.w.size() == f.facets(), "hessian_dense: bad weight length");
  const Vector s = slack(f, v);
  DenseMatrix M = f.A;
  for (Index i = 0; i < f.facets(); ++i)
    M.row(i) *= std::sqrt(weights.w[i]) / s[i];
  LocalMetricDense out;
  out.H = M.transpose() * M;
  Eigen::LLT<DenseMatrix> llt(out.H);
  if (llt.info() != Eigen::Success)
    throw NumericalError("hessian_dense: Hessian is not positive definite");
  out.chol = llt.matrixL();
  out.logdet = 2.0 * out.chol.diagonal().array().log().sum();
  return out;
}

// ---------------------------------------------------------------------------
// Sparse local metric
// ---------------------------------------------------------------------------

using SparseFactor = Eigen::SimplicialLDLT<SparseMatrix>;

struct LocalMetricSparse {
  Vector g;       // regularized diagonal metric, length d
  Vector g_inv;   // 1 / g
  Vector g_sqrt;  // sqrt(g)
  double eps_abs = 0.0;
  std::shared_ptr<SparseFactor> factor;  // factorization of A g^{-1} A^T
};

// Diagonal metric g(x) = blockdiag(eps, W S_x^{-2} + eps) for trailing slack
// coordinates x_j with weights w, plus the factorized normal matrix
// A g^{-1} A^T. epsilon is relative to the largest trailing entry, floored at
// 1e-300 so the diagonal stays invertible even at extreme points.
inline LocalMetricSparse metric_sparse(const ConstrainedPolytope& p,
                                       const Vector& x, const Vector& w,
                                       double epsilon) {
  p.check();
  require(x.size() == p.dim(), "metric_sparse: bad point length");
  require(w.size() == p.k, "metric_sparse: bad weight length");
  if (!(epsilon > 0.0))
    throw NumericalError("metric_sparse: epsilon must be strictly positive");

  const Index d = p.dim(), lead = p.leading();
  LocalMetricSparse m;
  m.g = Vector::Zero(d);
  double gmax = 0.0;
  for (Index j = 0; j < p.k; ++j) {
    const double xj = x[lead + j];
    if (!(xj > 0.0))
      throw BoundaryError("metric_sparse: trailing coordinate not interior");
    if (!(w[j] > 0.0))
      throw NumericalError("metric_sparse: weights must be positive");
    const double gj = w[j] / (xj * xj);
    m.g[lead + j] = gj;
    gmax = std::max(gmax, gj);
  }
  m.eps_abs = std::max(epsilon * gmax, 1e-300);
  m.g.array() += m.eps_abs;
  m.g_inv = m.g.cwiseInverse();
  m.g_sqrt = m.g.cwiseSqrt();

  const SparseMatrix normal =
      p.A * m.g_inv.asDiagonal() * SparseMatrix(p.A.transpose());
  m.factor = std::make_shared<SparseFactor>();
  m.factor->compute(normal);
  if (m.factor->info() != Eigen::Success ||
      (m.factor->vectorD().array() <= 0.0).any())
    throw NumericalError("metric_sparse: normal matrix factorization failed");
  return m;
}

namespace detail {

// Solve the saddle system [g A^T; A 0] (p, mu) = (r1, r2) using the cached
// factorization of A g^{-1} A^T.
inline void saddle_solve(const LocalMetricSparse& m, const SparseMatrix& A,
                         const Vector& r1, const Vector& r2, Vector& pout,
                         Vector& muout) {
  const Vector t = m.g_inv.cwiseProduct(r1);
  muout = m.factor->solve(A * t - r2);
  pout = t - m.g_inv.cwiseProduct(A.transpose() * muout);
}

}  // namespace detail

// Apply M+(x) = g^{-1} - g^{-1} A^T (A g^{-1} A^T)^{-1} A g^{-1} to u.
// Two sweeps of iterative refinement against the saddle form keep the result
// accurate even with the tiny epsilon ridge (the naive evaluation loses
// ~condition * machine-eps digits when free coordinates are present).
inline Vector apply_pseudo_inverse(const LocalMetricSparse& m,
                                   const SparseMatrix& A, const Vector& u) {
  require(u.size() == A.cols(), "apply_pseudo_inverse: bad vector length");
  Vector p, mu;
  detail::saddle_solve(m, A, u, Vector::Zero(A.rows()), p, mu);
  for (int sweep = 0; sweep < 2; ++sweep) {
    const Vector r1 = u - m.g.cwiseProduct(p) - A.transpose() * mu;
    const Vector r2 = -(A * p);
    Vector dp, dmu;
    detail::saddle_solve(m, A, r1, r2, dp, dmu);
    p += dp;
    mu += dmu;
  }
  return p;
}

// Apply the square-root factor R = (I - g^{-1} A^T (A g^{-1} A^T)^{-1} A)
// g^{-1/2}, which satisfies R R^T = M+ exactly. Since the projector fixes
// its own range, R zeta = M+ (g^{1/2} zeta), so the application reuses the
// iteratively refined solve instead of forming ill-scaled intermediates.
inline Vector apply_sqrt_pseudo_inverse(const LocalMetricSparse& m,
                                        const SparseMatrix& A,
                                        const Vector& zeta) {
  require(zeta.size() == A.cols(), "apply_sqrt_pseudo_inverse: bad vector length");
  return apply_pseudo_inverse(m, A, m.g_sqrt.cwiseProduct(zeta));
}

// log det of A A^T (cache this per polytope; it never changes along a chain).
inline double log_det_outer(const SparseMatrix& A) {
  SparseFactor f;
  f.compute(SparseMatrix(A * SparseMatrix(A.transpose())));
  if (f.info() != Eigen::Success || (f.vectorD().array() <= 0.0).any())
    throw RankDeficiencyError("log_det_outer: A A^T is not positive definite");
  return f.vectorD().array().log().sum();
}

// Log pseudo-determinant of the metric restricted to null(A):
//   log pdet = log det g + log det(A g^{-1} A^T) - log det(A A^T).
// The first two terms are evaluated jointly as log |det [g A^T; A 0]|: the
// saddle matrix stays well conditioned when the epsilon ridge makes
// A g^{-1} A^T nearly singular in scale, so the determinant keeps full
// precision where the normal-matrix route loses ~kappa * machine-eps digits.
inline double log_pdet(const LocalMetricSparse& m, const SparseMatrix& A,
                       double logdet_outer) {
  const Index d = A.cols(), n = A.rows();
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(d + 2 * A.nonZeros()));
  for (Index j = 0; j < d; ++j) t.emplace_back(j, j, m.g[j]);
  for (Index c = 0; c < A.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(A, c); it; ++it) {
      t.emplace_back(d + it.row(), it.col(), it.value());
      t.emplace_back(it.col(), d + it.row(), it.value());
    }
  const SparseMatrix kkt = from_triplets(d + n, d + n, t);
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(kkt);
  if (lu.info() != Eigen::Success)
    throw NumericalError("log_pdet: saddle matrix factorization failed");
  return lu.logAbsDeterminant() - logdet_outer;
}

// Leverage scores of the slack-scaled system in sparse form:
//   sigma_j = 1 - (1/g_j) a_j^T (A g^{-1} A^T)^{-1} a_j
// for trailing columns a_j, with one refinement sweep per solve. Equals the
// dense leverage of W^{1/2} S^{-1} A_tilde up to O(epsilon).
inline Vector sparse_leverage_scores(const ConstrainedPolytope& p,
                                     const LocalMetricSparse& m) {
  const Index lead = p.leading();
  Vector sigma(p.k);
  for (Index j = 0; j < p.k; ++j) {
    const Vector aj = Vector(p.A.col(lead + j));
    Vector u = m.factor->solve(aj);
    // One refinement sweep keeps the solve accurate under the epsilon ridge.
    u += m.factor->solve(
        aj - (p.A * m.g_inv.cwiseProduct(p.A.transpose() * u)));
    sigma[j] = 1.0 - aj.dot(u) / m.g[lead + j];
  }
  return sigma;
}

// Sparse-form walk weights at a point: the dense schemes evaluated through
// sparse leverage scores only.
inline Weights sparse_weights(WeightKind kind, const ConstrainedPolytope& p,
                              const Vector& x, double epsilon) {
  const Index k = p.k;
  const Index m_eff = p.dim() - p.rows();
  Weights out;
  out.kind = kind;
  switch (kind) {
    case WeightKind::dikin:
      out.w = Vector::Ones(k);
      return out;
    case WeightKind::vaidya: {
      const auto metric = metric_sparse(p, x, Vector::Ones(k), epsilon);
      out.w = sparse_leverage_scores(p, metric).array() +
              double(m_eff) / double(k);
      return out;
    }
    case WeightKind::john: {
      if (k <= m_eff)
        throw DimensionError("john weights: need more constraints than dimensions");
      const double beta = double(m_eff) / (2.0 * double(k));
      const double alpha = 1.0 - 1.0 / std::log2(1.0 / beta);
      Vector w = Vector::Ones(k);
      double prev_resid = std::numeric_limits<double>::infinity();
      for (Index it = 0; it < 200; ++it) {
        const auto metric =
            metric_sparse(p, x, Vector(w.array().pow(alpha)), epsilon);
        const Vector target =
            sparse_leverage_scores(p, metric).array() + beta;
        const double resid = (target - w).lpNorm<Eigen::Infinity>();
        out.stats.iterations = it + 1;
        out.stats.residual = resid;
        if (resid < 1e-8) {
          out.w = target;
          return out;
        }
        w = resid > prev_resid ? Vector(0.5 * (w + target)) : target;
        prev_resid = resid;
      }
      throw ConvergenceError("john weights (sparse): no convergence",
                             out.stats.residual);
    }
    case WeightKind::lee_sidford: {
      const double q = 2.0 * (1.0 + std::log(double(k)));
      const double kappa = 1.0 - 2.0 / q;
      const double floor_w = 1e-10;
      const double logdet_aat = log_det_outer(p.A);
      const auto value = [&](const Vector& w) {
        const auto metric =
            metric_sparse(p, x, Vector(w.array().pow(kappa)), epsilon);
        return kappa * w.sum() - log_pdet(metric, p.A, logdet_aat);
      };
      const auto grad = [&](const Vector& w) {
        const auto metric =
            metric_sparse(p, x, Vector(w.array().pow(kappa)), epsilon);
        const Vector sigma = sparse_leverage_scores(p, metric);
        return Vector(kappa * (1.0 - (sigma.array() / w.array())));
      };
      Vector w = [&] {
        const auto metric = metric_sparse(p, x, Vector::Ones(k), epsilon);
        return Vector(sparse_leverage_scores(p, metric).cwiseMax(floor_w));
      }();
      double fw = value(w);
      Vector w_prev, g_prev;
      for (Index it = 0; it < 2000; ++it) {
        const Vector g = grad(w);
        double pg = 0.0;
        for (Index i = 0; i < k; ++i)
          pg = std::max(pg, std::abs((w[i] <= floor_w && g[i] > 0.0) ? 0.0 : g[i]));
        out.stats.iterations = it + 1;
        out.stats.residual = pg;
        if (pg < 1e-5) {
          out.w = w;
          return out;
        }
        double eta = 1.0;
        if (it > 0) {
          const Vector s = w - w_prev;
          const Vector y = g - g_prev;
          const double sy = s.dot(y);
          if (sy > 0.0)
            eta = std::min(1e8, std::max(1e-12, s.squaredNorm() / sy));
        }
        w_prev = w;
        g_prev = g;
        bool moved = false;
        for (int bt = 0; bt < 60 && !moved; ++bt) {
          Vector cand = (w - eta * g).cwiseMax(floor_w);
          if ((cand - w).lpNorm<Eigen::Infinity>() == 0.0) break;
          const double fc = value(cand);
          if (std::isfinite(fc) && fc <= fw + 1e-4 * g.dot(cand - w)) {
            w = std::move(cand);
            fw = fc;
            moved = true;
          } else {
            eta *= 0.5;
          }
        }
        if (!moved)
          throw ConvergenceError("ls weights (sparse): line search failed", pg);
      }
      out.w = w;  // iteration cap: feasible weights, residual on record
      return out;
    }
  }
  throw Error("sparse_weights: unknown kind");
}

}  // namespace polysamp
