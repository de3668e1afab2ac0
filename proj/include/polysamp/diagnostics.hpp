#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "polysamp/common.hpp"
#include "polysamp/linalg.hpp"
#include "polysamp/model.hpp"
#include "polysamp/walks.hpp"

namespace polysamp {

// ---------------------------------------------------------------------------
// Effective sample size
// ---------------------------------------------------------------------------

// Per-coordinate ESS = N / (1 + 2 sum of autocorrelations), truncated by
// Geyer's initial positive sequence: pair sums of autocovariances are summed
// while they stay positive. Constant coordinates report N and raise the
// degenerate flag.
inline Vector ess(const DenseMatrix& samples,
                  std::vector<char>* degenerate = nullptr) {
  const Index n = samples.rows();
  if (n < 10) throw DimensionError("ess: need at least 10 samples");
  const Index dim = samples.cols();
  Vector out(dim);
  if (degenerate) degenerate->assign(static_cast<std::size_t>(dim), 0);

  std::vector<double> gamma(static_cast<std::size_t>(n));
  for (Index j = 0; j < dim; ++j) {
    const double mu = samples.col(j).mean();
    const Vector y = samples.col(j).array() - mu;
    const double g0 = y.squaredNorm() / double(n);
    if (!(g0 > 0.0)) {
      out[j] = double(n);
      if (degenerate) (*degenerate)[static_cast<std::size_t>(j)] = 1;
      continue;
    }
    // Autocovariances on demand; the positive-sequence rule rarely needs
    // more than a handful of lags on healthy chains.
    const auto acov = [&](Index t) {
      double s = 0.0;
      for (Index i = 0; i + t < n; ++i) s += y[i] * y[i + t];
      return s / double(n);
    };
    double tau = -1.0;  // running (2*sum of pair sums - gamma_0) / gamma_0
    for (Index m = 0; 2 * m < n; ++m) {
      const double even = acov(2 * m);
      const double odd = 2 * m + 1 < n ? acov(2 * m + 1) : 0.0;
      const double pair = even + odd;
      if (pair <= 0.0) break;
      tau += 2.0 * pair / g0;
    }
    if (tau <= 0.0) tau = 1.0;
    out[j] = std::min(double(n), double(n) / tau);
    out[j] = std::max(out[j], 1.0);
  }
  return out;
}

// Reduce a chain to approximately independent rows by striding at the
// integrated autocorrelation time: stride = floor(N / ess_min). Distribution
// tests whose null assumes independent draws (the KS test below) are run on
// the strided subsample, not the raw chain.
inline DenseMatrix decorrelate(const DenseMatrix& samples, double ess_min) {
  const Index n = samples.rows();
  if (n < 1) throw DimensionError("decorrelate: no samples");
  if (!(ess_min > 0.0)) throw DimensionError("decorrelate: ess must be positive");
  const Index stride = std::max<Index>(1, static_cast<Index>(double(n) / ess_min));
  const Index m = (n + stride - 1) / stride;
  DenseMatrix out(m, samples.cols());
  for (Index i = 0; i < m; ++i) out.row(i) = samples.row(i * stride);
  return out;
}

// ---------------------------------------------------------------------------
// Radial uniformity statistic
// ---------------------------------------------------------------------------

// Ray ratio of a sample x seen from x0: u = 1 / sup{t : x0 + t(x - x0) in K},
// in [0, 1]. For uniform samples in a convex body, u^d_eff ~ Uniform[0,1].

namespace detail {

inline double ray_ratio_from(const Vector& s, const Vector& q) {
  double tmax = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < s.size(); ++i)
    if (q[i] > 0.0) tmax = std::min(tmax, s[i] / q[i]);
  return std::isfinite(tmax) && tmax > 0.0 ? 1.0 / tmax : 0.0;
}

}  // namespace detail

inline double ray_ratio(const FullDimPolytope& f, const Vector& x0,
                        const Vector& x) {
  const Vector s = slack(f, x0);
  return detail::ray_ratio_from(s, Vector(f.A * (x - x0)));
}

inline double ray_ratio(const ConstrainedPolytope& p, const Vector& x0,
                        const Vector& x) {
  const Index lead = p.leading();
  Vector s(p.k), q(p.k);
  for (Index j = 0; j < p.k; ++j) {
    const double coord = x0[lead + j];
    if (!(coord > 0.0))
      throw BoundaryError("ray_ratio: reference point not strictly interior");
    s[j] = coord;
    q[j] = -(x[lead + j] - coord);  // slack decreases where the ray descends
  }
  return detail::ray_ratio_from(s, q);
}

// One-sample Kolmogorov-Smirnov statistic against Uniform[0,1].
inline double ks_statistic_uniform(std::vector<double> v) {
  if (v.empty()) throw DimensionError("ks_statistic_uniform: empty sample");
  std::sort(v.begin(), v.end());
  const double n = double(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double lo = double(i) / n;
    const double hi = double(i + 1) / n;
    d = std::max(d, std::max(v[i] - lo, hi - v[i]));
  }
  return std::min(d, 1.0);
}

// Asymptotic KS p-value with the Stephens small-sample correction.
inline double ks_pvalue(double statistic, Index n) {
  if (n < 1) throw DimensionError("ks_pvalue: need samples");
  const double rn = std::sqrt(double(n));
  const double lambda = (rn + 0.12 + 0.11 / rn) * statistic;
  if (lambda <= 0.0) return 1.0;
  double p = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * double(j) * double(j) * lambda * lambda);
    p += (j % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::min(1.0, std::max(0.0, p));
}

struct KsResult {
  double statistic = 0.0;
  double pvalue = 0.0;
};

namespace detail {

template <typename Polytope>
KsResult radial_uniformity_impl(const DenseMatrix& samples, const Polytope& p,
                                const Vector& x0, Index d_eff) {
  const Index n = samples.rows();
  if (n < 1) throw DimensionError("radial_uniformity: no samples");
  std::vector<double> v(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const Vector x = samples.row(i);
    if (!membership(p, x))
      throw Error("radial_uniformity: sample " + std::to_string(i) +
                  " lies outside the polytope");
    v[static_cast<std::size_t>(i)] =
        std::pow(ray_ratio(p, x0, x), double(d_eff));
  }
  KsResult r;
  r.statistic = ks_statistic_uniform(std::move(v));
  r.pvalue = ks_pvalue(r.statistic, n);
  return r;
}

}  // namespace detail

inline KsResult radial_uniformity(const DenseMatrix& samples,
                                  const FullDimPolytope& f, const Vector& x0) {
  return detail::radial_uniformity_impl(samples, f, x0, f.dim());
}

inline KsResult radial_uniformity(const DenseMatrix& samples,
                                  const ConstrainedPolytope& p,
                                  const Vector& x0) {
  return detail::radial_uniformity_impl(samples, p, x0, p.dim() - p.rows());
}

// ---------------------------------------------------------------------------
// Chain summary
// ---------------------------------------------------------------------------

struct DiagnosticsReport {
  Vector ess_per_coordinate;
  double ess_min = 0.0;
  double ks_statistic = 0.0;
  double ks_pvalue = 0.0;
  double acceptance_rate = 0.0;
};

namespace detail {

template <typename Polytope>
DiagnosticsReport summarize_impl(const ChainOutput& chain, const Polytope& p,
                                 const Vector& x0) {
  if (chain.samples.rows() == 0)
    throw DimensionError("summarize: chain holds no samples");
  DiagnosticsReport rep;
  rep.ess_per_coordinate = ess(chain.samples);
  rep.ess_min = rep.ess_per_coordinate.minCoeff();
  const KsResult ks = radial_uniformity(chain.samples, p, x0);
  rep.ks_statistic = ks.statistic;
  rep.ks_pvalue = ks.pvalue;
  rep.acceptance_rate =
      chain.proposed > 0 ? double(chain.accepted) / double(chain.proposed) : 0.0;
  return rep;
}

}  // namespace detail

inline DiagnosticsReport summarize(const ChainOutput& chain,
                                   const FullDimPolytope& f, const Vector& x0) {
  return detail::summarize_impl(chain, f, x0);
}

inline DiagnosticsReport summarize(const ChainOutput& chain,
                                   const ConstrainedPolytope& p,
                                   const Vector& x0) {
  return detail::summarize_impl(chain, p, x0);
}

}  // namespace polysamp
