#include "polysamp/lp.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

using namespace polysamp;

namespace {

// Brute-force oracle: enumerate basic solutions of {A x <= b, x >= 0} by
// solving every n-subset of the stacked constraint rows as equalities, keep
// the feasible ones, and maximize c.x over them. Exponential, fine for tiny d.
double vertex_oracle(const DenseMatrix& A, const Vector& b, const Vector& c) {
  const Index m = A.rows(), d = A.cols();
  DenseMatrix all(m + d, d);
  Vector rhs(m + d);
  all.topRows(m) = A;
  rhs.head(m) = b;
  all.bottomRows(d) = -DenseMatrix::Identity(d, d);
  rhs.tail(d).setZero();

  double best = -kInf;
  std::vector<Index> pick(static_cast<std::size_t>(d));
  const Index total = m + d;
  // Iterate over all d-subsets of rows via a simple odometer.
  for (Index i = 0; i < d; ++i) pick[static_cast<std::size_t>(i)] = i;
  while (true) {
    DenseMatrix S(d, d);
    Vector t(d);
    for (Index i = 0; i < d; ++i) {
      S.row(i) = all.row(pick[static_cast<std::size_t>(i)]);
      t[i] = rhs[pick[static_cast<std::size_t>(i)]];
    }
    Eigen::FullPivLU<DenseMatrix> lu(S);
    if (lu.isInvertible()) {
      const Vector x = lu.solve(t);
      if (((A * x - b).array() <= 1e-9).all() && (x.array() >= -1e-9).all())
        best = std::max(best, c.dot(x));
    }
    // Advance the subset odometer.
    Index i = d - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == total - d + i) --i;
    if (i < 0) break;
    ++pick[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < d; ++j)
      pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
  }
  return best;
}

LinearProgram ub_program(const DenseMatrix& A, const Vector& b,
                         const Vector& c) {
  LinearProgram lp = LinearProgram::make(A.cols());
  lp.objective = c;
  std::vector<Triplet> t;
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j)
      if (A(i, j) != 0.0) t.emplace_back(i, j, A(i, j));
  lp.A_ub = from_triplets(A.rows(), A.cols(), t);
  lp.b_ub = b;
  lp.lower.setZero();
  return lp;
}

}  // namespace

TEST_CASE("simple inequality LP") {
  DenseMatrix A(1, 2);
  A << 1.0, 1.0;
  Vector b(1);
  b << 1.0;
  Vector c(2);
  c << 1.0, 1.0;
  const auto r = lp_solve(ub_program(A, b, c));
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.objective == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("bounds-only LP uses bound flips") {
  LinearProgram lp = LinearProgram::make(1);
  lp.objective[0] = 1.0;
  lp.lower[0] = 0.0;
  lp.upper[0] = 5.0;
  const auto r = lp_solve(lp);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.x[0] == Catch::Approx(5.0));
}

TEST_CASE("infeasible bounds against a row") {
  LinearProgram lp = LinearProgram::make(1);
  lp.objective[0] = 1.0;
  lp.lower[0] = 1.0;
  lp.A_ub = from_triplets(1, 1, {{0, 0, 1.0}});
  lp.b_ub = Vector::Zero(1);
  CHECK(lp_solve(lp).status == LpStatus::infeasible);
}

TEST_CASE("unbounded objective is reported") {
  LinearProgram lp = LinearProgram::make(1);
  lp.objective[0] = 1.0;
  lp.lower[0] = 0.0;
  CHECK(lp_solve(lp).status == LpStatus::unbounded);
}

TEST_CASE("equality rows") {
  LinearProgram lp = LinearProgram::make(2);
  lp.objective << 1.0, 0.0;
  lp.A_eq = from_triplets(1, 2, {{0, 0, 1.0}, {0, 1, 1.0}});
  lp.b_eq = Vector::Ones(1);
  lp.lower.setZero();
  const auto r = lp_solve(lp);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.x[0] == Catch::Approx(1.0).margin(1e-9));
  CHECK(r.x[1] == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("beale cycling example terminates under bland") {
  // Classic degenerate program that cycles under most-negative pivoting.
  DenseMatrix A(3, 4);
  A << 0.25, -60.0, -0.04, 9.0,
       0.5, -90.0, -0.02, 3.0,
       0.0, 0.0, 1.0, 0.0;
  Vector b(3);
  b << 0.0, 0.0, 1.0;
  Vector c(4);
  c << 0.75, -150.0, 0.02, -6.0;
  const auto r = lp_solve(ub_program(A, b, c));
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.objective == Catch::Approx(vertex_oracle(A, b, c)).margin(1e-9));
}

TEST_CASE("randomized inequality LPs agree with the vertex oracle") {
  std::uint64_t state = 12345;
  auto next = [&]() {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(state >> 11) * 0x1.0p-53;
  };
  int solved = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const Index d = 2 + static_cast<Index>(next() * 2.999);
    const Index m = d + static_cast<Index>(next() * 3.0);
    DenseMatrix A(m, d);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < d; ++j) A(i, j) = std::round(next() * 8.0 - 4.0);
    Vector b(m);
    for (Index i = 0; i < m; ++i) b[i] = std::round(next() * 5.0);
    Vector c(d);
    for (Index j = 0; j < d; ++j) c[j] = std::round(next() * 6.0 - 3.0);

    const double oracle = vertex_oracle(A, b, c);
    const auto r = lp_solve(ub_program(A, b, c));
    // x = 0 is feasible here iff b >= 0; with b >= 0 entry-wise the program
    // is feasible, so only bounded/unbounded split matters.
    if ((b.array() >= 0.0).all()) {
      if (r.status == LpStatus::optimal) {
        CHECK(r.objective == Catch::Approx(oracle).margin(1e-7));
        ++solved;
      } else {
        REQUIRE(r.status == LpStatus::unbounded);
      }
    }
  }
  CHECK(solved > 5);  // the sweep must exercise real solves
}

TEST_CASE("bounded variables mix with rows") {
  // max x + 2y, x in [0,3], y in [-2,4], x + y <= 5 -> x=1, y=4.
  LinearProgram lp = LinearProgram::make(2);
  lp.objective << 1.0, 2.0;
  lp.lower << 0.0, -2.0;
  lp.upper << 3.0, 4.0;
  lp.A_ub = from_triplets(1, 2, {{0, 0, 1.0}, {0, 1, 1.0}});
  lp.b_ub = Vector::Constant(1, 5.0);
  const auto r = lp_solve(lp);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.objective == Catch::Approx(9.0).margin(1e-9));
  CHECK(r.x[0] == Catch::Approx(1.0).margin(1e-9));
  CHECK(r.x[1] == Catch::Approx(4.0).margin(1e-9));
}

TEST_CASE("fixed variables never pivot") {
  LinearProgram lp = LinearProgram::make(2);
  lp.objective << 1.0, 1.0;
  lp.lower << 0.0, 2.0;
  lp.upper << 3.0, 2.0;  // y fixed at 2
  lp.A_ub = from_triplets(1, 2, {{0, 0, 1.0}, {0, 1, 1.0}});
  lp.b_ub = Vector::Constant(1, 10.0);
  const auto r = lp_solve(lp);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.x[1] == Catch::Approx(2.0));
  CHECK(r.objective == Catch::Approx(5.0).margin(1e-9));
}

TEST_CASE("free variables solve equality systems") {
  // max -x subject to x + y = 3, y - z = 1, all free: unbounded.
  LinearProgram lp = LinearProgram::make(3);
  lp.objective << -1.0, 0.0, 0.0;
  lp.A_eq = from_triplets(2, 3,
                          {{0, 0, 1.0}, {0, 1, 1.0}, {1, 1, 1.0}, {1, 2, -1.0}});
  Vector be(2);
  be << 3.0, 1.0;
  lp.b_eq = be;
  CHECK(lp_solve(lp).status == LpStatus::unbounded);
  // Pin x: now optimal.
  lp.lower[0] = -4.0;
  const auto r = lp_solve(lp);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.x[0] == Catch::Approx(-4.0));
  CHECK(r.x[1] == Catch::Approx(7.0));
  CHECK(r.x[2] == Catch::Approx(6.0));
}

TEST_CASE("phase-1 feasibility certificates") {
  LinearProgram lp = LinearProgram::make(2);
  lp.A_eq = from_triplets(1, 2, {{0, 0, 1.0}, {0, 1, 2.0}});
  lp.b_eq = Vector::Constant(1, 4.0);
  lp.lower.setZero();
  const auto r = lp_feasible(lp);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.x[0] + 2.0 * r.x[1] == Catch::Approx(4.0).margin(1e-9));
  CHECK(r.x.minCoeff() >= -1e-9);

  lp.b_eq = Vector::Constant(1, -1.0);  // x, y >= 0 makes this impossible
  CHECK(lp_feasible(lp).status == LpStatus::infeasible);
}

TEST_CASE("deterministic resolution") {
  DenseMatrix A(3, 3);
  A << 1.0, 2.0, -1.0, 0.0, 1.0, 3.0, 2.0, -1.0, 1.0;
  Vector b(3);
  b << 4.0, 6.0, 3.0;
  Vector c(3);
  c << 1.0, 1.0, 1.0;
  const auto r1 = lp_solve(ub_program(A, b, c));
  const auto r2 = lp_solve(ub_program(A, b, c));
  REQUIRE(r1.status == LpStatus::optimal);
  REQUIRE(r2.status == LpStatus::optimal);
  CHECK(r1.x == r2.x);  // bitwise identical path
}
