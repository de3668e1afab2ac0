#pragma once

// Deterministic primal simplex for desk-scale linear programs.
//
// Maximize c.x subject to A_eq x = b_eq, A_ub x <= b_ub, lower <= x <= upper
// (entries of lower/upper may be -inf/+inf). Bounded-variable two-phase
// simplex with Bland's rule for both the entering and leaving choices, so the
// pivot sequence is cycle-free and a function of the input bytes alone. The
// basis inverse is kept explicitly (dense) with Gauss-Jordan pivot updates
// and a full refactorization every 100 pivots. This is deliberately a small,
// predictable solver for preprocessing steps, not a scale LP code.

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "polysamp/common.hpp"
#include "polysamp/linalg.hpp"

namespace polysamp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct LinearProgram {
  Vector objective;   // length d, maximized
  SparseMatrix A_eq;  // n_eq x d (may have zero rows)
  Vector b_eq;
  SparseMatrix A_ub;  // n_ub x d (may have zero rows)
  Vector b_ub;
  Vector lower;       // length d
  Vector upper;       // length d

  static LinearProgram make(Index nvars) {
    LinearProgram lp;
    lp.objective = Vector::Zero(nvars);
    lp.A_eq.resize(0, nvars);
    lp.b_eq.resize(0);
    lp.A_ub.resize(0, nvars);
    lp.b_ub.resize(0);
    lp.lower = Vector::Constant(nvars, -kInf);
    lp.upper = Vector::Constant(nvars, kInf);
    return lp;
  }

  void check() const {
    require(A_eq.cols() == objective.size() && A_ub.cols() == objective.size(),
            "lp: column count mismatch");
    require(b_eq.size() == A_eq.rows() && b_ub.size() == A_ub.rows(),
            "lp: right-hand side length mismatch");
    require(lower.size() == objective.size() && upper.size() == objective.size(),
            "lp: bound length mismatch");
  }
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Vector x;            // structural variables, valid when status == optimal
  double objective = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

class SimplexSolver {
 public:
  explicit SimplexSolver(const LinearProgram& lp) : lp_(lp) {
    lp.check();
    d_ = lp.objective.size();
    n_ub_ = lp.A_ub.rows();
    m_ = lp.A_eq.rows() + n_ub_;
    ncols_ = d_ + n_ub_ + m_;  // structural, ub slacks, artificials
    build_columns();
  }

  LpResult run(bool phase1_only) {
    LpResult out;
    init_phase1();
    const double feas_scale = 1.0 + rhs_.lpNorm<Eigen::Infinity>();
    iterate(phase1_cost());
    if (-objective_value(phase1_cost()) > 1e-7 * feas_scale) {
      out.status = LpStatus::infeasible;
      return out;
    }
    if (phase1_only) {
      out.status = LpStatus::optimal;
      out.x = structural();
      out.objective = 0.0;
      return out;
    }
    // Pin artificials to zero and optimize the real objective.
    for (Index j = d_ + n_ub_; j < ncols_; ++j) up_[j] = 0.0;
    Vector cost = Vector::Zero(ncols_);
    cost.head(d_) = lp_.objective;
    const bool bounded = iterate(cost);
    if (!bounded) {
      out.status = LpStatus::unbounded;
      return out;
    }
    out.status = LpStatus::optimal;
    out.x = structural();
    out.objective = lp_.objective.dot(out.x);
    verify_feasible(out.x, feas_scale);
    return out;
  }

 private:
  enum class State { basic, at_lower, at_upper, free_zero };

  using Column = std::vector<std::pair<Index, double>>;

  void build_columns() {
    cols_.assign(static_cast<std::size_t>(ncols_), {});
    for (Index c = 0; c < lp_.A_eq.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(lp_.A_eq, c); it; ++it)
        cols_[static_cast<std::size_t>(c)].emplace_back(it.row(), it.value());
    const Index eq_rows = lp_.A_eq.rows();
    for (Index c = 0; c < lp_.A_ub.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(lp_.A_ub, c); it; ++it)
        cols_[static_cast<std::size_t>(c)].emplace_back(eq_rows + it.row(),
                                                        it.value());
    for (Index i = 0; i < n_ub_; ++i)
      cols_[static_cast<std::size_t>(d_ + i)].emplace_back(eq_rows + i, 1.0);
    // Artificial columns are filled in init_phase1 once signs are known.

    rhs_.resize(m_);
    rhs_.head(eq_rows) = lp_.b_eq;
    rhs_.tail(n_ub_) = lp_.b_ub;

    lo_.resize(ncols_);
    up_.resize(ncols_);
    lo_.head(d_) = lp_.lower;
    up_.head(d_) = lp_.upper;
    for (Index i = 0; i < n_ub_; ++i) {
      lo_[d_ + i] = 0.0;
      up_[d_ + i] = kInf;
    }
    for (Index j = d_ + n_ub_; j < ncols_; ++j) {
      lo_[j] = 0.0;
      up_[j] = kInf;
    }
  }

  Vector phase1_cost() const {
    Vector c = Vector::Zero(ncols_);
    c.tail(m_).setConstant(-1.0);
    return c;
  }

  void init_phase1() {
    state_.assign(static_cast<std::size_t>(ncols_), State::at_lower);
    for (Index j = 0; j < d_ + n_ub_; ++j) {
      if (std::isfinite(lo_[j]))
        state_[static_cast<std::size_t>(j)] = State::at_lower;
      else if (std::isfinite(up_[j]))
        state_[static_cast<std::size_t>(j)] = State::at_upper;
      else
        state_[static_cast<std::size_t>(j)] = State::free_zero;
    }
    Vector residual = rhs_;
    for (Index j = 0; j < d_ + n_ub_; ++j) {
      const double v = nonbasic_value(j);
      if (v == 0.0) continue;
      for (const auto& [row, coef] : cols_[static_cast<std::size_t>(j)])
        residual[row] -= coef * v;
    }
    basis_.resize(static_cast<std::size_t>(m_));
    xb_.resize(m_);
    binv_ = DenseMatrix::Zero(m_, m_);
    for (Index i = 0; i < m_; ++i) {
      const double s = residual[i] >= 0.0 ? 1.0 : -1.0;
      const Index j = d_ + n_ub_ + i;
      cols_[static_cast<std::size_t>(j)] = {{i, s}};
      basis_[static_cast<std::size_t>(i)] = j;
      state_[static_cast<std::size_t>(j)] = State::basic;
      xb_[i] = residual[i] * s;
      binv_(i, i) = s;
    }
    pivots_since_refactor_ = 0;
  }

  double nonbasic_value(Index j) const {
    switch (state_[static_cast<std::size_t>(j)]) {
      case State::at_lower: return lo_[j];
      case State::at_upper: return up_[j];
      default: return 0.0;
    }
  }

  Vector column_dense(Index j) const {
    Vector v = Vector::Zero(m_);
    for (const auto& [row, coef] : cols_[static_cast<std::size_t>(j)])
      v[row] += coef;
    return v;
  }

  double objective_value(const Vector& cost) const {
    double v = 0.0;
    for (Index j = 0; j < ncols_; ++j) {
      if (state_[static_cast<std::size_t>(j)] == State::basic) continue;
      v += cost[j] * nonbasic_value(j);
    }
    for (Index i = 0; i < m_; ++i)
      v += cost[basis_[static_cast<std::size_t>(i)]] * xb_[i];
    return v;
  }

  // Returns false when the objective is unbounded above.
  bool iterate(const Vector& cost) {
    const double tol_d = 1e-9 * (1.0 + cost.lpNorm<Eigen::Infinity>());
    const double tol_piv = 1e-10;
    const long max_iters = 2000 * static_cast<long>(ncols_ + m_) + 10000;
    for (long iter = 0; iter < max_iters; ++iter) {
      // Prices and reduced costs.
      Vector cb(m_);
      for (Index i = 0; i < m_; ++i)
        cb[i] = cost[basis_[static_cast<std::size_t>(i)]];
      const Vector y = binv_.transpose() * cb;

      Index enter = -1;
      double dir = 0.0;
      for (Index j = 0; j < ncols_; ++j) {
        const State st = state_[static_cast<std::size_t>(j)];
        if (st == State::basic) continue;
        if (up_[j] - lo_[j] <= 0.0) continue;  // fixed variable
        double dj = cost[j];
        for (const auto& [row, coef] : cols_[static_cast<std::size_t>(j)])
          dj -= y[row] * coef;
        if ((st == State::at_lower || st == State::free_zero) && dj > tol_d) {
          enter = j;
          dir = 1.0;
          break;  // Bland: smallest improving index
        }
        if ((st == State::at_upper || st == State::free_zero) && dj < -tol_d) {
          enter = j;
          dir = -1.0;
          break;
        }
      }
      if (enter < 0) return true;  // optimal

      const Vector alpha = binv_ * column_dense(enter);
      const double v_enter = nonbasic_value(enter);
      // The entering variable's own far bound limits the move first.
      double t_best = kInf;
      if (dir > 0.0 && std::isfinite(up_[enter])) t_best = up_[enter] - v_enter;
      if (dir < 0.0 && std::isfinite(lo_[enter])) t_best = v_enter - lo_[enter];
      Index leave_row = -1;
      for (Index i = 0; i < m_; ++i) {
        const double a = dir * alpha[i];
        const Index q = basis_[static_cast<std::size_t>(i)];
        double t = kInf;
        if (a > tol_piv && std::isfinite(lo_[q]))
          t = (xb_[i] - lo_[q]) / a;
        else if (a < -tol_piv && std::isfinite(up_[q]))
          t = (up_[q] - xb_[i]) / (-a);
        if (t < -1e-11) t = 0.0;  // degenerate basic value slightly out of bound
        // Bland for the leaving choice: strict improvement, ties by smallest
        // basic variable index.
        if (t < t_best - 1e-12 ||
            (t <= t_best + 1e-12 && leave_row >= 0 &&
             q < basis_[static_cast<std::size_t>(leave_row)])) {
          if (t <= t_best + 1e-12) {
            t_best = std::min(t, t_best);
            leave_row = i;
          }
        }
      }
      if (!std::isfinite(t_best)) return false;  // unbounded ray
      const double t = std::max(t_best, 0.0);

      // Move the basic values, then either flip a bound or pivot.
      for (Index i = 0; i < m_; ++i) xb_[i] -= dir * t * alpha[i];
      if (leave_row < 0) {
        state_[static_cast<std::size_t>(enter)] =
            dir > 0.0 ? State::at_upper : State::at_lower;
        continue;
      }
      const Index leave = basis_[static_cast<std::size_t>(leave_row)];
      const double a_r = alpha[leave_row];
      state_[static_cast<std::size_t>(leave)] =
          (dir * a_r > 0.0) ? State::at_lower : State::at_upper;

      xb_[leave_row] = v_enter + dir * t;
      basis_[static_cast<std::size_t>(leave_row)] = enter;
      state_[static_cast<std::size_t>(enter)] = State::basic;

      // Gauss-Jordan update of the explicit inverse.
      if (std::abs(a_r) < tol_piv)
        throw NumericalError("lp: pivot element vanished");
      binv_.row(leave_row) /= a_r;
      for (Index i = 0; i < m_; ++i) {
        if (i == leave_row) continue;
        const double f = alpha[i];
        if (f != 0.0) binv_.row(i) -= f * binv_.row(leave_row);
      }
      if (++pivots_since_refactor_ >= 100) refactorize();
    }
    throw NumericalError("lp: iteration limit exceeded");
  }

  void refactorize() {
    DenseMatrix B(m_, m_);
    for (Index i = 0; i < m_; ++i)
      B.col(i) = column_dense(basis_[static_cast<std::size_t>(i)]);
    Eigen::FullPivLU<DenseMatrix> lu(B);
    if (!lu.isInvertible())
      throw NumericalError("lp: basis matrix is singular");
    binv_ = lu.inverse();
    // Recompute basic values from scratch to shed accumulated drift.
    Vector residual = rhs_;
    for (Index j = 0; j < ncols_; ++j) {
      if (state_[static_cast<std::size_t>(j)] == State::basic) continue;
      const double v = nonbasic_value(j);
      if (v == 0.0) continue;
      for (const auto& [row, coef] : cols_[static_cast<std::size_t>(j)])
        residual[row] -= coef * v;
    }
    xb_ = binv_ * residual;
    pivots_since_refactor_ = 0;
  }

  Vector structural() const {
    Vector x(d_);
    for (Index j = 0; j < d_; ++j) x[j] = nonbasic_value(j);
    for (Index i = 0; i < m_; ++i) {
      const Index q = basis_[static_cast<std::size_t>(i)];
      if (q < d_) x[q] = xb_[i];
    }
    return x;
  }

  // Residuals are judged against the magnitude of the terms that formed
  // them, so a solution with large coordinates (margin LPs at the delta cap)
  // is not rejected for ordinary cancellation error.
  void verify_feasible(const Vector& x, double scale) const {
    const auto check = [&](const SparseMatrix& A, const Vector& b,
                           bool equality, const char* what) {
      if (A.rows() == 0) return;
      Vector mag = Vector::Constant(A.rows(), scale);
      for (Index j = 0; j < A.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(A, j); it; ++it)
          mag[it.row()] += std::abs(it.value() * x[it.col()]);
      const Vector r = A * x - b;
      for (Index i = 0; i < A.rows(); ++i) {
        const bool bad =
            equality ? std::abs(r[i]) > 1e-7 * mag[i] : r[i] > 1e-7 * mag[i];
        if (bad) throw NumericalError(what);
      }
    };
    check(lp_.A_eq, lp_.b_eq, true, "lp: equality residual above tolerance");
    check(lp_.A_ub, lp_.b_ub, false,
          "lp: inequality residual above tolerance");
  }

  const LinearProgram& lp_;
  Index d_ = 0, n_ub_ = 0, m_ = 0, ncols_ = 0;
  std::vector<Column> cols_;
  Vector rhs_, lo_, up_, xb_;
  std::vector<State> state_;
  std::vector<Index> basis_;
  DenseMatrix binv_;
  int pivots_since_refactor_ = 0;
};

}  // namespace detail

// Solve to optimality. status == optimal also certifies primal feasibility of
// the returned point within 1e-7 * (1 + ||b||_inf).
inline LpResult lp_solve(const LinearProgram& lp) {
  return detail::SimplexSolver(lp).run(false);
}

// Phase 1 only: find any feasible point (objective is ignored).
inline LpResult lp_feasible(const LinearProgram& lp) {
  return detail::SimplexSolver(lp).run(true);
}

}  // namespace polysamp
