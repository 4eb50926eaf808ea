#include <gtest/gtest.h>

#include <cmath>

#include "tempxai/errors.hpp"
#include "tempxai/numerics.hpp"

using namespace tempxai;

namespace {

Matrix random_matrix(Index r, Index c, RngStream& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(r, c);
  for (double& v : m.data()) v = rng.uniform(lo, hi);
  return m;
}

// Straight triple loop, kept independent of the library kernel.
Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (Index k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

}  // namespace

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  RngStream rng(5);
  const Matrix m = random_matrix(3, 4, rng);
  EXPECT_EQ(matmul(Matrix::identity(3), m), m);
}

TEST(Matmul, HandProduct) {
  const Matrix p = matmul(Matrix{{1, 2}, {3, 4}}, Matrix{{1}, {1}});
  EXPECT_EQ(p, (Matrix{{3}, {7}}));
}

TEST(Matmul, MatchesTripleLoop) {
  RngStream rng(11);
  const Matrix a = random_matrix(5, 4, rng), b = random_matrix(4, 3, rng);
  const Matrix got = matmul(a, b), want = naive_matmul(a, b);
  for (Index k = 0; k < got.size(); ++k) EXPECT_NEAR(got.data()[k], want.data()[k], 1e-12);
}

TEST(Matmul, ShapeMismatchThrows) {
  EXPECT_THROW(matmul(Matrix(2, 3), Matrix(2, 3)), ShapeError);
}

TEST(Matmul, Associative) {
  RngStream rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix a = random_matrix(3, 5, rng), b = random_matrix(5, 2, rng), c = random_matrix(2, 4, rng);
    const Matrix l = matmul(matmul(a, b), c), r = matmul(a, matmul(b, c));
    for (Index k = 0; k < l.size(); ++k) {
      EXPECT_LE(std::fabs(l.data()[k] - r.data()[k]), 1e-9 * std::max(1.0, std::fabs(r.data()[k])));
    }
  }
}

TEST(Hadamard, Cases) {
  RngStream rng(3);
  const Matrix m = random_matrix(2, 3, rng);
  EXPECT_EQ(hadamard(m, Matrix::ones(2, 3)), m);
  EXPECT_EQ(hadamard(m, Matrix(2, 3)), Matrix(2, 3));
  EXPECT_EQ(hadamard(Matrix{{1, 2}, {3, 4}}, Matrix{{0, 1}, {1, 0}}), (Matrix{{0, 2}, {3, 0}}));
  EXPECT_THROW(hadamard(Matrix(2, 2), Matrix(2, 3)), ShapeError);
}

TEST(Hadamard, CommutesExactly) {
  RngStream rng(4);
  const Matrix a = random_matrix(4, 6, rng), b = random_matrix(4, 6, rng);
  EXPECT_EQ(hadamard(a, b), hadamard(b, a));
}

TEST(Softmax, UniformForEqualColumn) {
  const Matrix s = softmax_axis(Matrix(4, 2, 3.0), Axis::Cols);
  for (double v : s.data()) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(Softmax, ClosedFormColumn) {
  const Matrix s = softmax_axis(Matrix{{std::log(1.0)}, {std::log(3.0)}}, Axis::Cols);
  EXPECT_NEAR(s(0, 0), 0.25, 1e-15);
  EXPECT_NEAR(s(1, 0), 0.75, 1e-15);
}

TEST(Softmax, SlicesSumToOneAndShiftInvariant) {
  RngStream rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    Matrix m = random_matrix(6, 5, rng, -30.0, 30.0);
    const Matrix s = softmax_axis(m, Axis::Cols);
    for (Index c = 0; c < 5; ++c) {
      double sum = 0.0;
      for (Index r = 0; r < 6; ++r) {
        EXPECT_GE(s(r, c), 0.0);
        sum += s(r, c);
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
    const double shift = rng.uniform(-100.0, 100.0);
    for (Index r = 0; r < 6; ++r) m(r, 2) += shift;
    const Matrix shifted = softmax_axis(m, Axis::Cols);
    for (Index r = 0; r < 6; ++r) EXPECT_NEAR(shifted(r, 2), s(r, 2), 1e-9);

    const Matrix rows = softmax_axis(m, Axis::Rows);
    for (Index r = 0; r < 6; ++r) {
      double sum = 0.0;
      for (Index c = 0; c < 5; ++c) sum += rows(r, c);
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(Softmax, NoOverflow) {
  const Matrix s = softmax_axis(Matrix{{1000.0}, {-1000.0}}, Axis::Cols);
  EXPECT_DOUBLE_EQ(s(0, 0), 1.0);
  EXPECT_TRUE(std::isfinite(s(1, 0)));
}

TEST(Sigmoid, StableAtExtremes) {
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
  EXPECT_GT(sigmoid(-800.0), -1e-300);
  EXPECT_LE(sigmoid(800.0), 1.0);
  EXPECT_NEAR(sigmoid(2.0), 1.0 / (1.0 + std::exp(-2.0)), 1e-15);
}

TEST(Wls, ExactlyDeterminedSystem) {
  // 2x + y = 5, x - y = 1  ->  x = 2, y = 1
  const Matrix d{{2, 1}, {1, -1}};
  const Vector y{5, 1}, w{1, 1};
  const Vector c = weighted_least_squares(d, y, w, 0.0);
  EXPECT_NEAR(c[0], 2.0, 1e-12);
  EXPECT_NEAR(c[1], 1.0, 1e-12);
}

TEST(Wls, WeightSemantics) {
  RngStream rng(21);
  Matrix d = random_matrix(6, 3, rng);
  Vector y(6), w(6);
  for (Index k = 0; k < 6; ++k) {
    y[k] = rng.uniform(-1, 1);
    w[k] = rng.uniform(0.5, 2);
  }
  // Append a copy of row 0 with weight 0 and double row 0's weight instead.
  Matrix d2(7, 3);
  for (Index k = 0; k < 6; ++k)
    for (Index j = 0; j < 3; ++j) d2(k, j) = d(k, j);
  for (Index j = 0; j < 3; ++j) d2(6, j) = d(0, j);
  Vector y2 = y, w2 = w;
  y2.push_back(y[0]);
  w2.push_back(0.0);
  w2[0] = 2.0;
  Vector w1 = w;
  w1[0] = 2.0;
  const Vector a = weighted_least_squares(d, y, w1, 0.0);
  const Vector b = weighted_least_squares(d2, y2, w2, 0.0);
  for (Index j = 0; j < 3; ++j) EXPECT_NEAR(a[j], b[j], 1e-10);
}

TEST(Wls, HugeRidgeShrinksPenalisedColumns) {
  RngStream rng(22);
  Matrix d = random_matrix(20, 3, rng);
  for (Index k = 0; k < 20; ++k) d(k, 2) = 1.0;
  Vector y(20), w(20, 1.0);
  for (double& v : y) v = rng.uniform(2, 3);
  const Vector c = weighted_least_squares(d, y, w, 1e9, Index{2});
  EXPECT_LT(std::fabs(c[0]), 1e-6);
  EXPECT_LT(std::fabs(c[1]), 1e-6);
  // The unpenalised intercept absorbs the mean.
  double mean = 0.0;
  for (double v : y) mean += v / 20.0;
  EXPECT_NEAR(c[2], mean, 1e-6);
}

TEST(Wls, SingularWithoutRidgeThrows) {
  const Matrix d{{1, 1}, {2, 2}, {3, 3}};
  const Vector y{1, 2, 3}, w{1, 1, 1};
  try {
    weighted_least_squares(d, y, w, 0.0);
    FAIL() << "expected SingularError";
  } catch (const SingularError& e) {
    EXPECT_NE(std::string(e.what()).find("ridge"), std::string::npos);
  }
  const Vector c = weighted_least_squares(d, y, w, 1e-6);
  for (double v : c) EXPECT_TRUE(std::isfinite(v));
}

TEST(Wls, RidgeAlwaysFinite) {
  RngStream rng(23);
  for (int rep = 0; rep < 30; ++rep) {
    Matrix d = random_matrix(4, 6, rng);  // underdetermined
    Vector y(4), w(4);
    for (Index k = 0; k < 4; ++k) {
      y[k] = rng.uniform(-5, 5);
      w[k] = rng.uniform(0, 1);
    }
    for (double v : weighted_least_squares(d, y, w, 1e-3)) EXPECT_TRUE(std::isfinite(v));
  }
}

TEST(Wls, ArgumentChecks) {
  EXPECT_THROW(weighted_least_squares(Matrix(2, 1), Vector{1}, Vector{1, 1}, 0.0), ShapeError);
  EXPECT_THROW(weighted_least_squares(Matrix(1, 1, 1.0), Vector{1}, Vector{1}, -1.0), ArgumentError);
  EXPECT_THROW(weighted_least_squares(Matrix(1, 1, 1.0), Vector{1}, Vector{-1}, 0.0), ArgumentError);
}

TEST(FiniteDiff, ClosedForms) {
  const Vector p{3.0};
  EXPECT_NEAR(finite_diff_grad([](std::span<const double> q) { return q[0] * q[0]; }, p, 1e-5)[0], 6.0, 1e-6);
  const Vector z{0.0, 1.0};
  const Vector g = finite_diff_grad([](std::span<const double>) { return 4.2; }, z, 1e-5);
  EXPECT_EQ(g, (Vector{0.0, 0.0}));
  EXPECT_NEAR(finite_diff_grad([](std::span<const double> q) { return sigmoid(q[0]); }, Vector{0.0}, 1e-5)[0], 0.25,
              1e-6);
}

TEST(Rng, ReproducibleAndDerived) {
  RngStream a(99), b(99);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(a.next_u64(), b.next_u64());
  RngStream c = RngStream(99).derive(1), d = RngStream(99).derive(2);
  EXPECT_NE(c.next_u64(), d.next_u64());
}

TEST(Rng, PinnedSequence) {
  // First outputs of the reference splitmix64 generator started from state 0.
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
  RngStream r(0);
  EXPECT_EQ(r.next_u64(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(r.next_u64(), 0x6e789e6aa1b965f4ULL);
}

TEST(Rng, UniformRangeAndBelow) {
  RngStream r(7);
  double mean = 0.0;
  for (int k = 0; k < 20000; ++k) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    mean += u / 20000.0;
    ASSERT_LT(r.below(7), 7U);
  }
  EXPECT_NEAR(mean, 0.5, 0.01);
}

TEST(Rng, NormalMoments) {
  RngStream r(8);
  double s = 0.0, s2 = 0.0;
  const int n = 50000;
  for (int k = 0; k < n; ++k) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.02);
  EXPECT_NEAR(s2 / n, 1.0, 0.03);
}
