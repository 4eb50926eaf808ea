#include "tempxai/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tempxai/errors.hpp"

namespace tempxai {

namespace {

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Matrix::Matrix(Index rows, Index cols, double fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(Index rows, Index cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("matrix data length " + std::to_string(data_.size()) + " does not match " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(Index n) {
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector Matrix::column(Index c) const {
  Vector out(rows_);
  for (Index r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

void Matrix::set_column(Index c, std::span<const double> values) {
  if (values.size() != rows_) throw ShapeError("column length mismatch");
  for (Index r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
}

Matrix Matrix::leading_columns(Index n) const {
  if (n > cols_) throw ShapeError("leading_columns: requested " + std::to_string(n) + " of " + shape_str(*this));
  Matrix out(rows_, n);
  for (Index r = 0; r < rows_; ++r) {
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_), n,
                out.data_.begin() + static_cast<std::ptrdiff_t>(r * n));
  }
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + shape_str(a) + " * " + shape_str(b));
  }
  Matrix out(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    auto orow = out.row(i);
    for (Index k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (Index j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw ShapeError("hadamard: " + shape_str(a) + " vs " + shape_str(b));
  Matrix out = a;
  auto& d = out.data();
  const auto& bd = b.data();
  for (Index i = 0; i < d.size(); ++i) d[i] *= bd[i];
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Matrix softmax_axis(const Matrix& m, Axis axis) {
  Matrix out(m.rows(), m.cols());
  const Index slices = axis == Axis::Cols ? m.cols() : m.rows();
  const Index len = axis == Axis::Cols ? m.rows() : m.cols();
  auto at = [&](Matrix& x, Index s, Index k) -> double& {
    return axis == Axis::Cols ? x(k, s) : x(s, k);
  };
  auto cat = [&](const Matrix& x, Index s, Index k) -> double {
    return axis == Axis::Cols ? x(k, s) : x(s, k);
  };
  for (Index s = 0; s < slices; ++s) {
    double mx = -INFINITY;
    for (Index k = 0; k < len; ++k) mx = std::max(mx, cat(m, s, k));
    double total = 0.0;
    for (Index k = 0; k < len; ++k) {
      const double e = std::exp(cat(m, s, k) - mx);
      at(out, s, k) = e;
      total += e;
    }
    for (Index k = 0; k < len; ++k) at(out, s, k) /= total;
  }
  return out;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw ShapeError("matvec: " + shape_str(a) + " * vector " + std::to_string(x.size()));
  Vector y(a.rows(), 0.0);
  for (Index i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    double acc = 0.0;
    for (Index j = 0; j < r.size(); ++j) acc += r[j] * x[j];
    y[i] = acc;
  }
  return y;
}

void matvec_transpose_accumulate(const Matrix& a, std::span<const double> x, std::span<double> y) {
  if (a.rows() != x.size() || a.cols() != y.size()) throw ShapeError("matvec_transpose: " + shape_str(a));
  for (Index i = 0; i < a.rows(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    auto r = a.row(i);
    for (Index j = 0; j < r.size(); ++j) y[j] += r[j] * xi;
  }
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vector cholesky_solve(Matrix a, Vector b) {
  const Index n = a.rows();
  if (a.cols() != n || b.size() != n) throw ShapeError("cholesky_solve: " + shape_str(a));
  double max_diag = 0.0;
  for (Index i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
  const double tol = std::max(max_diag, 1.0) * 1e-13;
  // In-place lower factor.
  for (Index j = 0; j < n; ++j) {
    double d = a(j, j);
    for (Index k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
    if (!(d > tol)) throw SingularError("normal equations are singular or indefinite");
    d = std::sqrt(d);
    a(j, j) = d;
    for (Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Index k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
      a(i, j) = s / d;
    }
  }
  for (Index i = 0; i < n; ++i) {
    double s = b[i];
    for (Index k = 0; k < i; ++k) s -= a(i, k) * b[k];
    b[i] = s / a(i, i);
  }
  for (Index ii = n; ii-- > 0;) {
    double s = b[ii];
    for (Index k = ii + 1; k < n; ++k) s -= a(k, ii) * b[k];
    b[ii] = s / a(ii, ii);
  }
  return b;
}

Vector weighted_least_squares(const Matrix& design, std::span<const double> targets,
                              std::span<const double> weights, double ridge,
                              std::optional<Index> unpenalized_column) {
  const Index n = design.rows();
  const Index p = design.cols();
  if (targets.size() != n || weights.size() != n) {
    throw ShapeError("weighted_least_squares: design has " + std::to_string(n) + " rows, targets " +
                     std::to_string(targets.size()) + ", weights " + std::to_string(weights.size()));
  }
  if (!(ridge >= 0.0)) throw ArgumentError("weighted_least_squares: ridge must be >= 0");
  if (unpenalized_column && *unpenalized_column >= p) throw ArgumentError("unpenalized column out of range");

  Matrix gram(p, p);
  Vector rhs(p, 0.0);
  for (Index k = 0; k < n; ++k) {
    const double w = weights[k];
    if (w < 0.0) throw ArgumentError("weighted_least_squares: negative weight");
    if (w == 0.0) continue;
    auto row = design.row(k);
    for (Index i = 0; i < p; ++i) {
      const double wi = w * row[i];
      if (wi == 0.0) continue;
      rhs[i] += wi * targets[k];
      for (Index j = 0; j <= i; ++j) gram(i, j) += wi * row[j];
    }
  }
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < i; ++j) gram(j, i) = gram(i, j);
    if (!unpenalized_column || *unpenalized_column != i) gram(i, i) += ridge;
  }
  try {
    return cholesky_solve(std::move(gram), std::move(rhs));
  } catch (const SingularError&) {
    if (ridge == 0.0) {
      throw SingularError("weighted_least_squares: singular system with ridge = 0; use ridge > 0");
    }
    throw;
  }
}

Vector finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                        std::span<const double> p, double h) {
  if (!(h > 0.0)) throw ArgumentError("finite_diff_grad: h must be positive");
  Vector work(p.begin(), p.end());
  Vector g(p.size());
  for (Index j = 0; j < p.size(); ++j) {
    const double orig = work[j];
    work[j] = orig + h;
    const double fp = f(work);
    work[j] = orig - h;
    const double fm = f(work);
    work[j] = orig;
    g[j] = (fp - fm) / (2.0 * h);
  }
  return g;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t RngStream::next_u64() noexcept {
  // splitmix64 adds the golden increment itself, so feeding seed + k * golden
  // reproduces the classic splitmix64 sequence for this seed.
  const std::uint64_t x = seed_ + counter_ * 0x9E3779B97F4A7C15ULL;
  ++counter_;
  return splitmix64(x);
}

double RngStream::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::below(std::uint64_t n) noexcept {
  // Lemire's multiply-shift with rejection.
  std::uint64_t x = next_u64();
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<__uint128_t>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double RngStream::normal() noexcept {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RngStream RngStream::derive(std::uint64_t stream_id) const noexcept {
  return RngStream(splitmix64(seed_ ^ splitmix64(stream_id + 0x632BE59BD9B4E019ULL)));
}

}  // namespace tempxai
