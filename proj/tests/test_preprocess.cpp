#include "polysamp/preprocess.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "polysamp/rng.hpp"

using namespace polysamp;

namespace {

// Simplex with one extra equality pinning the last coordinate to zero: the
// canonical degenerate input (feasible, never strictly feasible).
ConstrainedPolytope pinned_simplex(Index d) {
  std::vector<Triplet> t;
  for (Index j = 0; j < d; ++j) t.emplace_back(0, j, 1.0);
  t.emplace_back(1, d - 1, 1.0);
  ConstrainedPolytope p;
  p.A = from_triplets(2, d, t);
  Vector b(2);
  b << 1.0, 0.0;
  p.b = b;
  p.k = d;
  return p;
}

}  // namespace

TEST_CASE("initialize finds the simplex barycenter margin") {
  const auto r = initialize(make_simplex(3));
  CHECK(r.delta == Catch::Approx(1.0 / 3.0).margin(1e-9));
  CHECK_FALSE(r.delta_capped);
  CHECK(membership(make_simplex(3), r.x, /*strict=*/true));
  CHECK(r.x.minCoeff() >= r.delta - 1e-9);
}

TEST_CASE("initialize on the hypercube reaches margin one") {
  const auto r = initialize(make_hypercube(1));
  CHECK(r.delta == Catch::Approx(1.0).margin(1e-9));
  CHECK(std::abs(r.x[0]) <= 1e-9);  // slacks s = t = 1 forces x = 0
}

TEST_CASE("initialize flags degenerate and empty inputs") {
  CHECK(initialize(pinned_simplex(3)).delta == Catch::Approx(0.0).margin(1e-9));

  // x1 + x2 = -1 with x >= 0: empty, margin LP peaks at -1/2.
  ConstrainedPolytope empty;
  empty.A = from_triplets(1, 2, {{0, 0, 1.0}, {0, 1, 1.0}});
  empty.b = Vector::Constant(1, -1.0);
  empty.k = 2;
  CHECK(initialize(empty).delta == Catch::Approx(-0.5).margin(1e-9));
}

TEST_CASE("initialize caps unbounded margins") {
  // x1 = x2 with both nonnegative: margin grows along the diagonal ray.
  ConstrainedPolytope p;
  p.A = from_triplets(1, 2, {{0, 0, 1.0}, {0, 1, -1.0}});
  p.b = Vector::Zero(1);
  p.k = 2;
  const auto r = initialize(p);
  CHECK(r.delta_capped);
  CHECK(r.delta == Catch::Approx(kDeltaCap));
}

TEST_CASE("initialize_full margin equals the lifted trailing margin") {
  // For bridged polytopes the row-geometry margin is the best minimum
  // trailing coordinate: 1/d for the simplex, 1 for the hypercube.
  const auto rs = initialize_full(to_full_dimensional(make_simplex(3)));
  CHECK(rs.delta == Catch::Approx(1.0 / 3.0).margin(1e-9));
  const auto rc = initialize_full(to_full_dimensional(make_hypercube(2)));
  CHECK(rc.delta == Catch::Approx(1.0).margin(1e-9));
  CHECK(membership(to_full_dimensional(make_simplex(3)), rs.x, true));
}

TEST_CASE("initialize_full rejects empty interval") {
  DenseMatrix A(2, 1);
  A << 1.0, -1.0;
  Vector b(2);
  b << 0.0, -1.0;  // v <= 0 and v >= 1
  CHECK_THROWS_AS(initialize_full(make_full_dim(A, b)), EmptyPolytopeError);
}

TEST_CASE("find_z certifies the pinned simplex") {
  const auto fz = find_z(pinned_simplex(3));
  REQUIRE_FALSE(fz.strictly_feasible);
  const auto p = pinned_simplex(3);
  const Vector z = DenseMatrix(p.A).transpose() * fz.cert.y;
  CHECK((z - fz.cert.z).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(std::abs(p.b.dot(fz.cert.y)) < 1e-9);
  CHECK(z.minCoeff() > -1e-9);                       // trailing-only here
  CHECK(z.sum() == Catch::Approx(1.0).margin(1e-9)); // normalization
  CHECK(z[2] > 1e-3);                                // pins x3
}

TEST_CASE("find_z declares strict feasibility on generators") {
  CHECK(find_z(make_simplex(4)).strictly_feasible);
  CHECK(find_z(make_hypercube(2)).strictly_feasible);
  CHECK(find_z(make_birkhoff(3)).strictly_feasible);
}

TEST_CASE("facial reduction removes exactly the pinned coordinate") {
  for (Index d = 3; d <= 10; ++d) {
    const auto p = pinned_simplex(d);
    const auto fr = facial_reduction(p);
    REQUIRE(fr.fixed_variables.size() == 1);
    CHECK(fr.fixed_variables[0].index == d - 1);
    CHECK(fr.rounds == 1);
    REQUIRE(fr.reduced.dim() == d - 1);
    CHECK(fr.reduced.k == d - 1);
    REQUIRE(fr.kept_rows.size() == 1);  // the zero row is dropped
    CHECK(fr.kept_rows[0] == 0);

    // Reduced polytope is the (d-1)-simplex: strictly feasible with margin
    // 1/(d-1).
    const auto init = initialize(fr.reduced);
    CHECK(init.delta == Catch::Approx(1.0 / double(d - 1)).margin(1e-9));

    // Certificate validity on the original system.
    const Vector& y = fr.fixed_variables[0].y;
    REQUIRE(y.size() == p.rows());
    const Vector z = DenseMatrix(p.A).transpose() * y;
    CHECK(std::abs(p.b.dot(y)) < 1e-8);
    CHECK(z.minCoeff() > -1e-8);
    CHECK(z[d - 1] > 1e-8);

    // Lift maps reduced points into the original polytope with the fixed
    // coordinate at exact zero.
    const Vector x = lift(fr, init.x);
    CHECK(x[d - 1] == 0.0);
    CHECK(membership(p, x));

    // V is the matching unit-column selection.
    CHECK(fr.V.rows() == d);
    CHECK(fr.V.cols() == d - 1);
    CHECK((DenseMatrix(fr.V).colwise().sum().array() == 1.0).all());
  }
}

TEST_CASE("facial reduction is the identity on strictly feasible input") {
  const auto p = make_birkhoff(3);
  const auto fr = facial_reduction(p);
  CHECK(fr.rounds == 0);
  CHECK(fr.fixed_variables.empty());
  CHECK(fr.reduced.dim() == p.dim());
  CHECK(fr.kept_columns.size() == static_cast<std::size_t>(p.dim()));
  CHECK(fr.kept_rows.size() == static_cast<std::size_t>(p.rows()));
  CHECK(fr.reduced.A.nonZeros() == p.A.nonZeros());
}

TEST_CASE("facial reduction drops nested forced blocks") {
  // r0: x1+x2+x3+x4 = 1, r1: x3+x4 = 0, r2: x2-x3-x4 = 0. All of x2, x3, x4
  // are forced to zero (possibly across multiple rounds).
  std::vector<Triplet> t;
  for (Index j = 0; j < 4; ++j) t.emplace_back(0, j, 1.0);
  t.emplace_back(1, 2, 1.0);
  t.emplace_back(1, 3, 1.0);
  t.emplace_back(2, 1, 1.0);
  t.emplace_back(2, 2, -1.0);
  t.emplace_back(2, 3, -1.0);
  ConstrainedPolytope p;
  p.A = from_triplets(3, 4, t);
  Vector b(3);
  b << 1.0, 0.0, 0.0;
  p.b = b;
  p.k = 4;

  const auto fr = facial_reduction(p);
  REQUIRE(fr.fixed_variables.size() == 3);
  std::vector<Index> fixed;
  for (const auto& fv : fr.fixed_variables) fixed.push_back(fv.index);
  std::sort(fixed.begin(), fixed.end());
  CHECK(fixed == std::vector<Index>{1, 2, 3});
  REQUIRE(fr.reduced.dim() == 1);
  const auto init = initialize(fr.reduced);
  CHECK(init.delta > 0.0);  // x1 = 1 strictly feasible in the 1-point sense
  CHECK(lift(fr, init.x)[0] == Catch::Approx(1.0).margin(1e-9));
  CHECK(fr.reduced.A.nonZeros() <= p.A.nonZeros());
}

TEST_CASE("facial reduction rejects empty input") {
  ConstrainedPolytope p;
  p.A = from_triplets(1, 2, {{0, 0, 1.0}, {0, 1, 1.0}});
  p.b = Vector::Constant(1, -1.0);
  p.k = 2;
  CHECK_THROWS_AS(facial_reduction(p), EmptyPolytopeError);
}

TEST_CASE("alternative is exclusive on random polytopes") {
  Rng rng(2026);
  int certified = 0, feasible = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.next_u64() % 4);
    const Index d = n + 2 + static_cast<Index>(rng.next_u64() % 5);
    const Index k = std::max<Index>(1, d - 1 - static_cast<Index>(rng.next_u64() % 3));
    std::vector<Triplet> t;
    for (Index i = 0; i < n; ++i) t.emplace_back(i, i, 1.0);
    for (Index i = 0; i < n; ++i)
      for (Index j = n; j < d; ++j)
        if (rng.uniform() < 0.5) t.emplace_back(i, j, rng.uniform(-2.0, 2.0));
    ConstrainedPolytope p;
    p.A = from_triplets(n, d, t);
    p.k = k;
    Vector xstar(d);
    const bool force_zero = trial % 2 == 0;
    for (Index j = 0; j < d; ++j) {
      if (j < d - k)
        xstar[j] = rng.uniform(-1.0, 1.0);
      else
        xstar[j] = rng.uniform(0.3, 1.5);
    }
    if (force_zero) {
      // Append a row that pins one trailing coordinate to zero.
      xstar[d - 1] = 0.0;
      std::vector<Triplet> t2 = to_triplets(p.A);
      t2.emplace_back(n, d - 1, 1.0);
      p.A = from_triplets(n + 1, d, t2);
    }
    p.b = p.A * xstar;

    const auto fz = find_z(p);
    const auto init = initialize(p);
    if (fz.strictly_feasible) {
      ++feasible;
      CHECK(init.delta > 1e-9);
    } else {
      ++certified;
      CHECK(init.delta <= 1e-9);
      const Vector z = DenseMatrix(p.A).transpose() * fz.cert.y;
      CHECK(std::abs(p.b.dot(fz.cert.y)) < 1e-8);
      CHECK(z.tail(k).minCoeff() > -1e-8);
      CHECK(z.head(d - k).lpNorm<Eigen::Infinity>() < 1e-8);
    }
  }
  CHECK(certified >= 25);
  CHECK(feasible >= 25);
}

TEST_CASE("lift validates input length") {
  const auto fr = facial_reduction(make_simplex(3));
  CHECK_THROWS_AS(lift(fr, Vector::Zero(2)), DimensionError);
}
