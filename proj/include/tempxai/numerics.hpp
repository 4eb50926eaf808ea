#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace tempxai {

using Index = std::size_t;
using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(Index rows, Index cols, double fill = 0.0);
  Matrix(Index rows, Index cols, std::vector<double> values);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(Index n);
  static Matrix ones(Index rows, Index cols) { return Matrix(rows, cols, 1.0); }

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(Index r, Index c) noexcept { return data_[r * cols_ + c]; }
  double operator()(Index r, Index c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(Index r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(Index r) const noexcept { return {data_.data() + r * cols_, cols_}; }

  Vector column(Index c) const;
  void set_column(Index c, std::span<const double> values);

  /// Columns [0, n) as a new rows() x n matrix.
  Matrix leading_columns(Index n) const;

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool operator==(const Matrix& other) const = default;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

enum class Axis { Rows, Cols };

/// Softmax along `axis`: Axis::Cols normalises each column (sum over rows),
/// Axis::Rows normalises each row. Max-subtracted for stability.
Matrix softmax_axis(const Matrix& m, Axis axis);

/// y = A x
Vector matvec(const Matrix& a, std::span<const double> x);
/// y += A^T x
void matvec_transpose_accumulate(const Matrix& a, std::span<const double> x, std::span<double> y);

double sigmoid(double x) noexcept;

/// argmin_c sum_k w_k (y_k - d_k.c)^2 + ridge * |c|^2 via the normal equations.
/// `unpenalized_column`, when set, is excluded from the ridge term (intercept).
/// Throws SingularError when the system cannot be factorised.
Vector weighted_least_squares(const Matrix& design, std::span<const double> targets,
                              std::span<const double> weights, double ridge,
                              std::optional<Index> unpenalized_column = std::nullopt);

/// Solve the symmetric positive definite system A x = b by Cholesky.
Vector cholesky_solve(Matrix a, Vector b);

/// Central-difference gradient of f at p with step h.
Vector finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                        std::span<const double> p, double h);

/// Counter-based generator: draw k is splitmix64(seed + (k + 1) * golden).
/// The sequence depends only on (seed, counter), so a stream is reproducible
/// on every platform and child streams can be derived without shared state.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) noexcept : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }
  /// Standard normal by Box-Muller (one draw per call pair is discarded).
  double normal() noexcept;

  /// Independent child stream keyed by `stream_id`.
  RngStream derive(std::uint64_t stream_id) const noexcept;

  template <typename T>
  void shuffle(std::vector<T>& items) noexcept {
    for (Index i = items.size(); i > 1; --i) {
      const Index j = static_cast<Index>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace tempxai
