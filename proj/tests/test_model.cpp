#include "polysamp/model.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "polysamp/rng.hpp"

using namespace polysamp;

namespace {

// Random strictly feasible constrained polytope: A = [I_n | R] has full row
// rank by construction, b = A x* with x* trailing-positive.
ConstrainedPolytope random_constrained(Index n, Index d, Index k, Rng& rng) {
  std::vector<Triplet> t;
  for (Index i = 0; i < n; ++i) t.emplace_back(i, i, 1.0);
  for (Index i = 0; i < n; ++i)
    for (Index j = n; j < d; ++j)
      if (rng.uniform() < 0.6) t.emplace_back(i, j, rng.uniform(-2.0, 2.0));
  ConstrainedPolytope p;
  p.A = from_triplets(n, d, t);
  p.k = k;
  Vector xstar(d);
  for (Index j = 0; j < d; ++j)
    xstar[j] = j < d - k ? rng.uniform(-1.0, 1.0) : rng.uniform(0.2, 2.0);
  p.b = p.A * xstar;
  return p;
}

}  // namespace

TEST_CASE("simplex generator") {
  const auto p = make_simplex(3);
  REQUIRE(p.dim() == 3);
  REQUIRE(p.rows() == 1);
  REQUIRE(p.k == 3);
  REQUIRE(p.A.nonZeros() == 3);
  CHECK(membership(p, simplex_center(3), /*strict=*/true));
  Vector vertex(3);
  vertex << 1.0, 0.0, 0.0;
  CHECK(membership(p, vertex));
  CHECK_FALSE(membership(p, vertex, /*strict=*/true));
}

TEST_CASE("hypercube generator uses two slack blocks") {
  const auto p = make_hypercube(2);
  REQUIRE(p.dim() == 6);
  REQUIRE(p.rows() == 4);
  REQUIRE(p.k == 4);
  CHECK(membership(p, hypercube_center(2), /*strict=*/true));
  // x = (1, -1) sits on the boundary: s_0 = 0 and t_1 = 0.
  Vector x(6);
  x << 1.0, -1.0, 0.0, 2.0, 2.0, 0.0;
  CHECK(membership(p, x));
  CHECK_FALSE(membership(p, x, /*strict=*/true));
}

TEST_CASE("birkhoff generator has full row rank") {
  const auto p = make_birkhoff(3);
  REQUIRE(p.dim() == 9);
  REQUIRE(p.rows() == 5);  // 3 row sums + 2 column sums
  REQUIRE(p.k == 9);
  CHECK(membership(p, birkhoff_center(3), /*strict=*/true));
  // Rank must be exactly 2m - 1 for the bridge to work.
  Eigen::ColPivHouseholderQR<DenseMatrix> qr(DenseMatrix(p.A));
  CHECK(qr.rank() == 5);
  // A permutation matrix is a (non-strict) member.
  Vector perm = Vector::Zero(9);
  perm[0 * 3 + 1] = 1.0;
  perm[1 * 3 + 2] = 1.0;
  perm[2 * 3 + 0] = 1.0;
  CHECK(membership(p, perm));
}

TEST_CASE("bridge invariants on generators") {
  for (const auto& p :
       {make_simplex(4), make_hypercube(3), make_birkhoff(3)}) {
    const auto f = to_full_dimensional(p);
    const Index d = p.dim(), n = p.rows();
    REQUIRE(f.dim() == d - n);
    REQUIRE(f.facets() == p.k);

    const DenseMatrix Ad(p.A);
    // Q2 spans null(A) orthonormally and the shift solves Ax = b.
    CHECK((Ad * f.map.Q2).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK((f.map.Q2.transpose() * f.map.Q2 -
           DenseMatrix::Identity(d - n, d - n))
              .lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK((Ad * f.map.shift - p.b).lpNorm<Eigen::Infinity>() < 1e-12);

    // Lifted points of the v-body satisfy the original constraints and the
    // slack identity: b_tilde - A_tilde v equals the trailing block of x.
    const Vector v0 = Vector::Zero(d - n);
    const Vector x0 = f.map.lift(v0);
    CHECK((f.b - f.A * v0 - x0.tail(p.k)).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(membership(f, v0) == membership(p, x0));
  }
}

TEST_CASE("interval bridge maps facets to the cube vertices") {
  // Hypercube m = 1: the full-dimensional body is an interval whose two
  // facet planes lift to x = +1 and x = -1.
  const auto p = make_hypercube(1);
  const auto f = to_full_dimensional(p);
  REQUIRE(f.dim() == 1);
  REQUIRE(f.facets() == 2);
  for (Index i = 0; i < 2; ++i) {
    REQUIRE(std::abs(f.A(i, 0)) > 1e-12);
    Vector v(1);
    v << f.b[i] / f.A(i, 0);
    const Vector x = f.map.lift(v);
    CHECK(std::abs(std::abs(x[0]) - 1.0) < 1e-12);  // cube vertex
    CHECK(membership(p, x));
  }
}

TEST_CASE("project inverts lift on the affine subspace") {
  Rng rng(7);
  const auto p = random_constrained(4, 9, 5, rng);
  const auto f = to_full_dimensional(p);
  for (int trial = 0; trial < 20; ++trial) {
    Vector v(f.dim());
    for (Index j = 0; j < f.dim(); ++j) v[j] = rng.uniform(-3.0, 3.0);
    const Vector x = f.map.lift(v);
    CHECK((f.map.project(x) - v).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK((DenseMatrix(p.A) * x - p.b).lpNorm<Eigen::Infinity>() < 1e-9);
  }
}

TEST_CASE("bridge invariants on random systems") {
  Rng rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.next_u64() % 5);
    const Index d = n + 2 + static_cast<Index>(rng.next_u64() % 6);
    const Index k = 1 + static_cast<Index>(rng.next_u64() % d);
    const auto p = random_constrained(n, d, k, rng);
    const auto f = to_full_dimensional(p);
    const DenseMatrix Ad(p.A);
    CHECK((Ad * f.map.Q2).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK((Ad * f.map.shift - p.b).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK((f.A + f.map.Q2.bottomRows(k)).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((f.b - f.map.shift.tail(k)).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("rank-deficient equality systems are rejected by name") {
  auto p = make_simplex(3);
  // Duplicate the single row: rank 1 out of 2.
  std::vector<Triplet> t = to_triplets(p.A);
  for (Index j = 0; j < 3; ++j) t.emplace_back(1, j, 1.0);
  p.A = from_triplets(2, 3, t);
  Vector b(2);
  b << 1.0, 1.0;
  p.b = b;
  try {
    to_full_dimensional(p);
    FAIL("expected RankDeficiencyError");
  } catch (const RankDeficiencyError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("rows") != std::string::npos);
    CHECK((msg.find(" 0") != std::string::npos ||
           msg.find(" 1") != std::string::npos));
  }
}

TEST_CASE("too many equality rows is a dimension error") {
  ConstrainedPolytope p;
  p.A = from_triplets(2, 2, {{0, 0, 1.0}, {1, 1, 1.0}});
  Vector b(2);
  b << 1.0, 1.0;
  p.b = b;
  p.k = 1;
  CHECK_THROWS_AS(to_full_dimensional(p), DimensionError);
}

TEST_CASE("boundedness detection") {
  CHECK(is_bounded(to_full_dimensional(make_hypercube(2))));
  CHECK(is_bounded(to_full_dimensional(make_simplex(5))));
  // A single half-space is unbounded.
  DenseMatrix A(1, 2);
  A << 1.0, 0.0;
  Vector b(1);
  b << 1.0;
  CHECK_FALSE(is_bounded(make_full_dim(A, b)));
}

TEST_CASE("membership tolerances") {
  const auto p = make_simplex(3);
  Vector x = simplex_center(3);
  // Equality violation just inside / outside the 1e-8 * (1 + |b|) window.
  Vector y = x;
  y[0] += 1.5e-8;
  CHECK(membership(p, y));  // residual 1.5e-8 < 2e-8
  y[0] += 2.0e-8;
  CHECK_FALSE(membership(p, y));
  // Trailing negativity: -1e-12 passes non-strict, anything lower fails.
  Vector z = x;
  z[0] -= x[0] + 1e-12;
  z[1] += x[0] + 1e-12;
  CHECK(membership(p, z));
  CHECK_FALSE(membership(p, z, /*strict=*/true));
  z[0] -= 1e-11;
  z[1] += 1e-11;
  CHECK_FALSE(membership(p, z));
}

TEST_CASE("membership rejects wrong-length points") {
  const auto p = make_simplex(3);
  CHECK_THROWS_AS(membership(p, Vector::Zero(2)), DimensionError);
}
