#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <memory>
#include <utility>

#include "polysamp/barrier.hpp"
#include "polysamp/common.hpp"
#include "polysamp/linalg.hpp"
#include "polysamp/model.hpp"
#include "polysamp/rng.hpp"

namespace polysamp {

enum class WalkKind { ball, hit_and_run, dikin, vaidya, john, lee_sidford };

inline const char* walk_kind_name(WalkKind k) {
  switch (k) {
    case WalkKind::ball: return "ball";
    case WalkKind::hit_and_run: return "hit_and_run";
    case WalkKind::dikin: return "dikin";
    case WalkKind::vaidya: return "vaidya";
    case WalkKind::john: return "john";
    case WalkKind::lee_sidford: return "lee_sidford";
  }
  return "?";
}

inline bool is_barrier_walk(WalkKind k) {
  return k == WalkKind::dikin || k == WalkKind::vaidya ||
         k == WalkKind::john || k == WalkKind::lee_sidford;
}

inline WeightKind to_weight_kind(WalkKind k) {
  switch (k) {
    case WalkKind::dikin: return WeightKind::dikin;
    case WalkKind::vaidya: return WeightKind::vaidya;
    case WalkKind::john: return WeightKind::john;
    case WalkKind::lee_sidford: return WeightKind::lee_sidford;
    default: break;
  }
  throw Error("to_weight_kind: not a barrier walk");
}

enum class PolytopeForm { dense_k1, sparse_k2 };

// Scale constant c for the proposal covariance r^2/c^2 * H^{-1}. Stationarity
// does not depend on c, only step efficiency does; callers may override.
inline double variance_correction(WalkKind kind, Index d_eff, Index k) {
  require(d_eff >= 1, "variance_correction: d_eff must be at least 1");
  const double d = double(d_eff);
  switch (kind) {
    case WalkKind::ball: return std::sqrt(d);
    case WalkKind::hit_and_run: return 1.0;
    case WalkKind::dikin: return std::sqrt(d);
    case WalkKind::vaidya: return std::pow(double(k) * d, 0.25);
    case WalkKind::john: return std::pow(d, 0.75);
    case WalkKind::lee_sidford: return std::sqrt(d);
  }
  throw Error("variance_correction: unknown kind");
}

struct WalkConfig {
  WalkKind kind = WalkKind::dikin;
  PolytopeForm form = PolytopeForm::dense_k1;
  double r = 0.5;
  double epsilon = 1e-12;  // metric regularization, sparse form only
  std::uint64_t seed = 0;
  Index steps = 0;
  Index thin = 1;
  Index burn_in = 0;
  double c_override = 0.0;  // > 0 replaces variance_correction

  void check() const {
    if (!(r > 0.0)) throw Error("walk config: r must be positive");
    if (thin < 1) throw Error("walk config: thin must be at least 1");
    if (steps < 0 || burn_in < 0)
      throw Error("walk config: counts must be non-negative");
    if (form == PolytopeForm::sparse_k2 && !(epsilon > 0.0))
      throw Error("walk config: epsilon must be positive for the sparse form");
    if (c_override < 0.0)
      throw Error("walk config: c_override must be non-negative");
  }
};

struct StepTiming {
  double total_seconds = 0.0;
  double max_seconds = 0.0;
  Index count = 0;

  double mean_seconds() const {
    return count > 0 ? total_seconds / double(count) : 0.0;
  }
};

struct ChainOutput {
  DenseMatrix samples;  // one kept state per row
  Index accepted = 0;
  Index proposed = 0;
  Index infeasible_rejects = 0;
  StepTiming per_step_seconds;
};

// Chord of the polytope along direction u through an interior point,
// parameterized as x + t*u with t in (tmin, tmax). Computed exactly from
// slack ratios.
struct Chord {
  double tmin = 0.0;
  double tmax = 0.0;
};

inline Chord chord_limits(const FullDimPolytope& f, const Vector& v,
                          const Vector& u) {
  require(v.size() == f.dim() && u.size() == f.dim(),
          "chord_limits: dimension mismatch");
  const Vector s = slack(f, v);
  const Vector q = f.A * u;
  Chord c;
  bool above = false, below = false;
  for (Index i = 0; i < f.facets(); ++i) {
    if (q[i] > 0.0) {
      const double t = s[i] / q[i];
      c.tmax = above ? std::min(c.tmax, t) : t;
      above = true;
    } else if (q[i] < 0.0) {
      const double t = s[i] / q[i];
      c.tmin = below ? std::max(c.tmin, t) : t;
      below = true;
    }
  }
  if (!above || !below)
    throw UnboundedPolytopeError(
        "chord_limits: unbounded chord; preprocess the polytope first");
  return c;
}

// Constrained form: u must lie in null(A); only the trailing sign
// constraints bound the chord.
inline Chord chord_limits(const ConstrainedPolytope& p, const Vector& x,
                          const Vector& u) {
  require(x.size() == p.dim() && u.size() == p.dim(),
          "chord_limits: dimension mismatch");
  const Index lead = p.leading();
  Chord c;
  bool above = false, below = false;
  for (Index j = 0; j < p.k; ++j) {
    const double xj = x[lead + j];
    const double uj = u[lead + j];
    if (xj <= 0.0)
      throw BoundaryError("chord_limits: point not strictly interior");
    if (uj < 0.0) {
      const double t = xj / -uj;
      c.tmax = above ? std::min(c.tmax, t) : t;
      above = true;
    } else if (uj > 0.0) {
      const double t = -xj / uj;
      c.tmin = below ? std::max(c.tmin, t) : t;
      below = true;
    }
  }
  if (!above || !below)
    throw UnboundedPolytopeError(
        "chord_limits: unbounded chord; preprocess the polytope first");
  return c;
}

namespace detail {

// Orthogonal projection machinery for the equality constraints, shared by
// the sparse-form walks; also restores A x = b against accumulated drift.
struct EqualityProjector {
  const SparseMatrix& A;
  Vector b;
  SparseFactor factor;  // of A A^T

  EqualityProjector(const SparseMatrix& A_, Vector b_) : A(A_), b(std::move(b_)) {
    const SparseMatrix outer = A * SparseMatrix(A.transpose());
    factor.compute(outer);
    if (factor.info() != Eigen::Success)
      throw NumericalError("equality projector: A A^T factorization failed");
  }

  Vector direction(const Vector& u) const {
    return u - A.transpose() * factor.solve(A * u);
  }

  Vector point(const Vector& x) const {
    return x - A.transpose() * factor.solve(Vector(A * x - b));
  }
};

inline Vector gaussian_vector(Rng& rng, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.gaussian();
  return v;
}

struct WarnOnce {
  bool fired = false;

  void operator()(const char* where, const char* what) {
    if (fired) return;
    fired = true;
    std::cerr << "polysamp warning: " << where << ": " << what
              << " (proposal rejected; further warnings suppressed)\n";
  }
};

// --- dense (full-dimensional) barrier chain ---

struct DenseState {
  Vector v;
  LocalMetricDense metric;
};

inline DenseState make_dense_state(const FullDimPolytope& f, WalkKind kind,
                                   const Vector& v) {
  const Vector s = slack(f, v);
  Weights w;
  if (kind == WalkKind::dikin) {
    w = dikin_weights(f.facets());
  } else {
    DenseMatrix Bs = f.A;
    for (Index i = 0; i < f.facets(); ++i) Bs.row(i) /= s[i];
    w = dense_weights(to_weight_kind(kind), Bs);
  }
  return DenseState{v, hessian_dense(f, v, w)};
}

// --- sparse (constrained) barrier chain ---

struct SparseState {
  Vector x;
  LocalMetricSparse metric;
  double log_pdet = 0.0;
};

inline SparseState make_sparse_state(const ConstrainedPolytope& p,
                                     WalkKind kind, const Vector& x,
                                     double epsilon, double logdet_outer) {
  const Weights w = sparse_weights(to_weight_kind(kind), p, x, epsilon);
  SparseState st;
  st.x = x;
  st.metric = metric_sparse(p, x, w.w, epsilon);
  st.log_pdet = log_pdet(st.metric, p.A, logdet_outer);
  return st;
}

inline bool strictly_interior(const FullDimPolytope& f, const Vector& v) {
  return ((f.b - f.A * v).array() > 0.0).all();
}

inline bool strictly_interior(const ConstrainedPolytope& p, const Vector& x) {
  return p.k == 0 || (x.tail(p.k).array() > 0.0).all();
}

}  // namespace detail

// Run one Markov chain from a strictly interior start point. `stream`
// decorrelates chains that share a seed.
inline ChainOutput run_chain(const FullDimPolytope& f, const Vector& v0,
                             const WalkConfig& cfg, std::uint64_t stream = 0) {
  cfg.check();
  if (cfg.form != PolytopeForm::dense_k1)
    throw Error("run_chain: config form does not match the polytope form");
  require(v0.size() == f.dim(), "run_chain: start point has wrong dimension");
  if (!detail::strictly_interior(f, v0))
    throw BoundaryError("run_chain: start point not strictly interior");

  const Index d_eff = f.dim();
  const double c = cfg.c_override > 0.0
                       ? cfg.c_override
                       : variance_correction(cfg.kind, d_eff, f.facets());
  const double scale = cfg.r / c;
  const double density_factor = (c * c) / (2.0 * cfg.r * cfg.r);

  Rng rng(cfg.seed, stream);
  ChainOutput out;
  out.samples.resize(cfg.steps, d_eff);
  detail::WarnOnce warn;

  Vector v = v0;
  detail::DenseState state;
  if (is_barrier_walk(cfg.kind)) state = detail::make_dense_state(f, cfg.kind, v0);

  const Index total = cfg.burn_in + cfg.steps * cfg.thin;
  using clock = std::chrono::steady_clock;
  for (Index t = 1; t <= total; ++t) {
    const auto tick = clock::now();
    ++out.proposed;
    switch (cfg.kind) {
      case WalkKind::ball: {
        const Vector z =
            v + scale * detail::gaussian_vector(rng, d_eff);
        if (detail::strictly_interior(f, z)) {
          v = z;
          ++out.accepted;
        } else {
          ++out.infeasible_rejects;
        }
        break;
      }
      case WalkKind::hit_and_run: {
        Vector u = detail::gaussian_vector(rng, d_eff);
        while (u.norm() == 0.0) u = detail::gaussian_vector(rng, d_eff);
        u /= u.norm();
        const Chord ch = chord_limits(f, v, u);
        // The draw is interior in exact arithmetic; redraw shields against
        // rounding at razor-thin chords.
        for (int attempt = 0; attempt < 16; ++attempt) {
          const Vector z = v + rng.uniform(ch.tmin, ch.tmax) * u;
          if (detail::strictly_interior(f, z)) {
            v = z;
            ++out.accepted;
            break;
          }
        }
        break;
      }
      default: {
        const Vector xi = detail::gaussian_vector(rng, d_eff);
        const Vector z =
            state.v + scale * state.metric.chol.transpose()
                                  .triangularView<Eigen::Upper>()
                                  .solve(xi);
        if (!detail::strictly_interior(f, z)) {
          ++out.infeasible_rejects;
          break;
        }
        bool built = false;
        detail::DenseState cand;
        try {
          cand = detail::make_dense_state(f, cfg.kind, z);
          built = true;
        } catch (const Error& e) {
          warn("dense metric", e.what());
        }
        if (!built) break;
        const Vector diff = z - state.v;
        const double log_fwd = 0.5 * state.metric.logdet -
                               density_factor *
                                   diff.dot(state.metric.H * diff);
        const double log_rev =
            0.5 * cand.metric.logdet -
            density_factor * diff.dot(cand.metric.H * diff);
        if (std::log(rng.uniform()) < log_rev - log_fwd) {
          state = std::move(cand);
          v = state.v;
          ++out.accepted;
        }
        break;
      }
    }
    const double dt = std::chrono::duration<double>(clock::now() - tick).count();
    out.per_step_seconds.total_seconds += dt;
    out.per_step_seconds.max_seconds = std::max(out.per_step_seconds.max_seconds, dt);
    ++out.per_step_seconds.count;
    if (t > cfg.burn_in && (t - cfg.burn_in) % cfg.thin == 0)
      out.samples.row((t - cfg.burn_in) / cfg.thin - 1) = v;
  }
  return out;
}

inline ChainOutput run_chain(const ConstrainedPolytope& p, const Vector& x0,
                             const WalkConfig& cfg, std::uint64_t stream = 0) {
  cfg.check();
  if (cfg.form != PolytopeForm::sparse_k2)
    throw Error("run_chain: config form does not match the polytope form");
  require(x0.size() == p.dim(), "run_chain: start point has wrong dimension");
  p.check();
  const double b_scale = 1.0 + p.b.lpNorm<Eigen::Infinity>();
  if ((p.A * x0 - p.b).lpNorm<Eigen::Infinity>() > 1e-8 * b_scale)
    throw Error("run_chain: start point violates the equality constraints");
  if (!detail::strictly_interior(p, x0))
    throw BoundaryError("run_chain: start point not strictly interior");

  const Index d_eff = p.dim() - p.rows();
  require(d_eff >= 1, "run_chain: polytope has no degrees of freedom");
  const double c = cfg.c_override > 0.0
                       ? cfg.c_override
                       : variance_correction(cfg.kind, d_eff, p.k);
  const double scale = cfg.r / c;
  const double density_factor = (c * c) / (2.0 * cfg.r * cfg.r);
  constexpr Index reproject_every = 1024;

  Rng rng(cfg.seed, stream);
  ChainOutput out;
  out.samples.resize(cfg.steps, p.dim());
  detail::WarnOnce warn;
  detail::EqualityProjector proj(p.A, p.b);

  Vector x = x0;
  detail::SparseState state;
  double logdet_outer = 0.0;
  if (is_barrier_walk(cfg.kind)) {
    logdet_outer = log_det_outer(p.A);
    state = detail::make_sparse_state(p, cfg.kind, x0, cfg.epsilon, logdet_outer);
  }

  const Index total = cfg.burn_in + cfg.steps * cfg.thin;
  using clock = std::chrono::steady_clock;
  for (Index t = 1; t <= total; ++t) {
    const auto tick = clock::now();
    ++out.proposed;
    switch (cfg.kind) {
      case WalkKind::ball: {
        const Vector z =
            x + scale * proj.direction(detail::gaussian_vector(rng, p.dim()));
        if (detail::strictly_interior(p, z)) {
          x = z;
          ++out.accepted;
        } else {
          ++out.infeasible_rejects;
        }
        break;
      }
      case WalkKind::hit_and_run: {
        Vector u = proj.direction(detail::gaussian_vector(rng, p.dim()));
        while (u.norm() == 0.0)
          u = proj.direction(detail::gaussian_vector(rng, p.dim()));
        u /= u.norm();
        const Chord ch = chord_limits(p, x, u);
        for (int attempt = 0; attempt < 16; ++attempt) {
          const Vector z = x + rng.uniform(ch.tmin, ch.tmax) * u;
          if (detail::strictly_interior(p, z)) {
            x = z;
            ++out.accepted;
            break;
          }
        }
        break;
      }
      default: {
        const Vector zeta = detail::gaussian_vector(rng, p.dim());
        const Vector dz =
            scale * apply_sqrt_pseudo_inverse(state.metric, p.A, zeta);
        const Vector z = state.x + dz;
        if (!detail::strictly_interior(p, z)) {
          ++out.infeasible_rejects;
          break;
        }
        bool built = false;
        detail::SparseState cand;
        try {
          cand = detail::make_sparse_state(p, cfg.kind, z, cfg.epsilon,
                                           logdet_outer);
          built = true;
        } catch (const Error& e) {
          warn("sparse metric", e.what());
        }
        if (!built) break;
        // dz lies in null(A), so the M-quadratic form reduces to the
        // g-weighted one.
        const double qf_fwd = dz.dot(state.metric.g.cwiseProduct(dz));
        const double qf_rev = dz.dot(cand.metric.g.cwiseProduct(dz));
        const double log_ratio = 0.5 * (cand.log_pdet - state.log_pdet) -
                                 density_factor * (qf_rev - qf_fwd);
        if (std::log(rng.uniform()) < log_ratio) {
          state = std::move(cand);
          x = state.x;
          ++out.accepted;
        }
        break;
      }
    }
    if (t % reproject_every == 0) {
      const Vector fixed = proj.point(x);
      const bool moved = (fixed - x).lpNorm<Eigen::Infinity>() > 0.0;
      if (moved && detail::strictly_interior(p, fixed)) {
        if (is_barrier_walk(cfg.kind)) {
          try {
            state = detail::make_sparse_state(p, cfg.kind, fixed, cfg.epsilon,
                                              logdet_outer);
            x = state.x;
          } catch (const Error&) {
            // keep the unprojected state rather than die near the boundary
          }
        } else {
          x = fixed;
        }
      }
    }
    const double dt = std::chrono::duration<double>(clock::now() - tick).count();
    out.per_step_seconds.total_seconds += dt;
    out.per_step_seconds.max_seconds = std::max(out.per_step_seconds.max_seconds, dt);
    ++out.per_step_seconds.count;
    if (t > cfg.burn_in && (t - cfg.burn_in) % cfg.thin == 0)
      out.samples.row((t - cfg.burn_in) / cfg.thin - 1) = x;
  }
  return out;
}

}  // namespace polysamp
