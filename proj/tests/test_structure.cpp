#include "escells/structure.hpp"
#include "support/generators.hpp"

#include <doctest.h>

#include <cmath>

using namespace escells;

namespace {

// Dense A^k by naive multiplication, independent of the library's helpers.
Matrix naive_power(const Matrix& A, int k) {
  Matrix P = Matrix::Identity(A.rows(), A.cols());
  for (int i = 0; i < k; ++i) P = P * A;
  return P;
}

}  // namespace

TEST_CASE("time series mask semantics") {
  const TimeSeries ts({1.0, std::nan(""), 3.0});
  CHECK(ts.size() == 3);
  CHECK(ts.observed(0));
  CHECK_FALSE(ts.observed(1));
  CHECK_FALSE(ts.observed(-1));
  CHECK_FALSE(ts.observed(3));
  CHECK(ts.observed_count() == 2);
  CHECK_FALSE(ts.fully_observed());

  const TimeSeries masked({1.0, 2.0}, {1, 0});
  CHECK(std::isnan(masked.value(1)));
  CHECK(masked.mask()[1] == 0);
  CHECK_THROWS_AS(TimeSeries({1.0}, {1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(TimeSeries({INFINITY}, {1}), std::invalid_argument);

  const TimeSeries gap = TimeSeries({1, 2, 3, 4, 5}).with_missing_range(1, 2);
  CHECK(gap.observed_count() == 3);
  CHECK(gap == TimeSeries({1, NAN, NAN, 4, 5}));
  CHECK(gap.head(2).size() == 2);
}

TEST_CASE("structure for p = 2") {
  const ModelStructure s = build_structure(2);
  CHECK(s.state_dim == 4);
  Matrix A(4, 4);
  A << 1, 1, 0, 0,
       0, 1, 0, 0,
       0, 0, 0, 1,
       0, 0, 1, 0;
  CHECK(s.A == A);
  CHECK(s.w == (Vector(4) << 1, 1, 0, 1).finished());
  CHECK(s.b == (Vector(4) << 0, 0, 1, -1).finished());
  CHECK_THROWS_AS(build_structure(1), std::invalid_argument);
}

TEST_CASE("structure invariants for several periods") {
  for (int p : {2, 3, 4, 7, 12, 24}) {
    CAPTURE(p);
    const ModelStructure s = build_structure(p);
    const int n = p + 2;
    REQUIRE(s.state_dim == n);
    for (int i = 0; i < n; ++i) CHECK(s.w(i) == ((i == 0 || i == 1 || i == n - 1) ? 1.0 : 0.0));
    CHECK(s.A.topLeftCorner(2, 2) == (Matrix(2, 2) << 1, 1, 0, 1).finished());
    CHECK(s.A.block(0, 2, 2, p).isZero());
    CHECK(s.A.block(2, 0, p, 2).isZero());
    // Seasonal block is a permutation: one 1 per row and column.
    const Matrix S = s.A.block(2, 2, p, p);
    for (int r = 0; r < p; ++r) {
      CHECK(S.row(r).sum() == 1.0);
      CHECK(S.col(r).sum() == 1.0);
    }
    CHECK(S(0, p - 1) == 1.0);  // oldest slot becomes the newest
    CHECK(std::fabs(s.A.determinant()) == doctest::Approx(1.0));
    // b: one +1 and one -1 on seasonal slots.
    int plus = 0, minus = 0;
    for (int i = 0; i < n; ++i) {
      if (s.b(i) == 1.0) ++plus;
      if (s.b(i) == -1.0) ++minus;
      if (i < 2) CHECK(s.b(i) == 0.0);
    }
    CHECK(plus == 1);
    CHECK(minus == 1);
    CHECK(naive_power(s.A, p).block(2, 2, p, p).isIdentity());
  }
}

TEST_CASE("transition powers") {
  const ModelStructure s = build_structure(2);
  const Vector x = (Vector(4) << 1, 2, 3, 4).finished();
  CHECK(transition_power_apply(s, x, 0) == x);
  CHECK(transition_power_apply(s, x, 1) == (Vector(4) << 3, 2, 4, 3).finished());
  CHECK_THROWS_AS(transition_power_apply(s, Vector::Zero(3), 1), std::invalid_argument);

  testing::Gen g(3);
  for (int p : {2, 5, 12}) {
    const ModelStructure sp = build_structure(p);
    Vector z = g.vector(p + 2);
    z(1) = 0.0;
    const Vector back = transition_power_apply(sp, z, 3 * p);
    CHECK((back - z).norm() == doctest::Approx(0.0));
    for (int k : {0, 1, 2, 7, 30}) {
      const Vector y = g.vector(p + 2);
      CHECK((transition_power_apply(sp, y, k) - naive_power(sp.A, k) * y).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK((transition_power(sp, k) - naive_power(sp.A, k)).cwiseAbs().maxCoeff() == 0.0);
    }
    const Vector y = g.vector(p + 2);
    CHECK((sp.A * transition_inverse_apply(sp, y) - y).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("fixed point of the transition") {
  for (int p : {2, 4, 9}) {
    const ModelStructure s = build_structure(p);
    Vector x = Vector::Constant(p + 2, 2.5);
    x(0) = 7.0;
    x(1) = 0.0;
    Vector out(p + 2);
    transition_apply(s, {x.data(), static_cast<std::size_t>(x.size())}, {out.data(), static_cast<std::size_t>(out.size())});
    CHECK(out == x);
  }
}

TEST_CASE("design rows") {
  const ModelStructure s = build_structure(2);
  CHECK(design_row(s, 0) == s.w);
  CHECK(design_row(s, 1) == (Vector(4) << 1, 2, 1, 0).finished());
  const Matrix A2 = s.A * s.A;
  CHECK(design_row(s, 2) == Vector((s.w.transpose() * A2).transpose()));

  testing::Gen g(9);
  for (int p : {2, 3, 6, 12}) {
    const ModelStructure sp = build_structure(p);
    for (int j = 0; j <= 2 * 2 * p; ++j) {
      const Vector x = g.vector(p + 2, 5.0);
      const double lhs = design_row(sp, j).dot(x);
      const double rhs = sp.w.dot(transition_power_apply(sp, x, j));
      CHECK(std::fabs(lhs - rhs) <= 1e-12 * (1.0 + std::fabs(rhs)));
    }
  }
}

TEST_CASE("cell geometry") {
  const ModelStructure s = build_structure(2);
  const CellGeometry g1 = build_cell_geometry(s, 1, 0.5);
  CHECK(g1.weights == (Vector(3) << 0.5, 1.0, 0.5).finished());
  REQUIRE(g1.design.rows() == 3);
  CHECK(Vector(g1.design.row(0).transpose()) == s.w);
  CHECK(Vector(g1.design.row(1).transpose()) == (Vector(4) << 1, 2, 1, 0).finished());
  CHECK(Vector(g1.design.row(2).transpose()) == Vector((s.w.transpose() * s.A * s.A).transpose()));

  for (int K : {1, 2, 5, 12}) {
    for (double decay : {0.1, 0.5, 0.9, 0.999}) {
      const CellGeometry g = build_cell_geometry(build_structure(3), K, decay);
      CHECK(g.window_size() == 2 * K + 1);
      CHECK(g.weights(K) == 1.0);
      for (int i = 0; i < 2 * K + 1; ++i) CHECK(g.weights(i) > 0.0);
      for (int i = 0; i < K; ++i) CHECK(g.weights(i) < g.weights(i + 1));
      for (int i = K; i < 2 * K; ++i) CHECK(g.weights(i) > g.weights(i + 1));
    }
  }
  CHECK_THROWS_AS(build_cell_geometry(s, 0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(build_cell_geometry(s, 1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_cell_geometry(s, 1, 1.0), std::invalid_argument);
}

TEST_CASE("window weights") {
  const ModelStructure s = build_structure(2);
  const CellGeometry g = build_cell_geometry(s, 2, 0.5);
  const TimeSeries ts({1, 2, NAN, 4, 5, 6, 7});
  const Vector inside = window_weights(g, ts, 4);
  CHECK(inside == (Vector(5) << 0.0, 0.5, 1.0, 0.5, 0.25).finished());
  const Vector masked = window_weights(g, ts, 3);
  CHECK(masked == (Vector(5) << 0.25, 0.0, 1.0, 0.5, 0.25).finished());
  const Vector left = window_weights(g, ts, 0);
  CHECK(left(0) == 0.0);
  CHECK(left(1) == 0.0);
  CHECK(left(2) == 1.0);
  const Vector right = window_weights(g, ts, 6);
  CHECK(right(3) == 0.0);
  CHECK(right(4) == 0.0);
  const TimeSeries empty({NAN, NAN, NAN, NAN, NAN});
  CHECK(window_weights(g, empty, 2).isZero());
}
