#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "fejer/errors.hpp"

namespace fejer {

/// A point of R^N with value semantics. Entries are required to be finite.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t dim, double fill = 0.0) : coords_(dim, fill) {}
  Vector(std::initializer_list<double> values) : coords_(values) {}
  explicit Vector(std::vector<double> values) : coords_(std::move(values)) {}

  std::size_t dim() const noexcept { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  double& operator[](std::size_t i) { return coords_[i]; }

  std::span<const double> coords() const noexcept { return coords_; }
  const std::vector<double>& values() const noexcept { return coords_; }

  auto begin() const noexcept { return coords_.begin(); }
  auto end() const noexcept { return coords_.end(); }

  bool is_finite() const noexcept {
    return std::all_of(coords_.begin(), coords_.end(),
                       [](double v) { return std::isfinite(v); });
  }

  Vector& operator+=(const Vector& other) {
    require_same_dim(other);
    for (std::size_t i = 0; i < dim(); ++i) coords_[i] += other.coords_[i];
    return *this;
  }
  Vector& operator-=(const Vector& other) {
    require_same_dim(other);
    for (std::size_t i = 0; i < dim(); ++i) coords_[i] -= other.coords_[i];
    return *this;
  }
  Vector& operator*=(double s) noexcept {
    for (double& v : coords_) v *= s;
    return *this;
  }

  void require_same_dim(const Vector& other) const {
    if (other.dim() != dim()) throw DimensionMismatch(dim(), other.dim());
  }

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> coords_;
};

inline Vector operator+(Vector a, const Vector& b) { return a += b; }
inline Vector operator-(Vector a, const Vector& b) { return a -= b; }
inline Vector operator*(Vector a, double s) { return a *= s; }
inline Vector operator*(double s, Vector a) { return a *= s; }

inline double dot(const Vector& a, const Vector& b) {
  a.require_same_dim(b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(const Vector& a) { return dot(a, a); }
inline double norm(const Vector& a) { return std::sqrt(norm_sq(a)); }
inline double distance(const Vector& a, const Vector& b) { return norm(a - b); }

/// Dense row-major matrix, used by the affine and quadratic descriptors.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    for (const auto& r : rows) {
      if (r.size() != cols_) throw InvalidConfig("ragged matrix literal");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  Vector operator*(const Vector& x) const {
    if (x.dim() != cols_) throw DimensionMismatch(cols_, x.dim());
    Vector out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < cols_; ++c) s += (*this)(r, c) * x[c];
      out[r] = s;
    }
    return out;
  }

  Vector transpose_times(const Vector& x) const {
    if (x.dim() != rows_) throw DimensionMismatch(rows_, x.dim());
    Vector out(cols_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) out[c] += (*this)(r, c) * x[r];
    return out;
  }

  /// Frobenius norm; an upper bound on the spectral norm.
  double frobenius() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
  }

  const std::vector<double>& data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace fejer
