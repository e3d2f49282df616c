#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "fedminimax/error.hpp"

namespace fedminimax {

/// Shape of a parameter block. A vector of dimension d is stored as a d x 1
/// matrix, so the Muon path sees it as a single-column matrix.
struct Shape {
  enum class Kind { vector, matrix };

  Kind kind = Kind::vector;
  std::size_t rows = 1;
  std::size_t cols = 1;

  static Shape vector(std::size_t d) {
    if (d < 1) throw InvalidArgument("Shape::vector: dimension must be >= 1");
    return {Kind::vector, d, 1};
  }
  static Shape matrix(std::size_t m, std::size_t n) {
    if (m < 1 || n < 1) throw InvalidArgument("Shape::matrix: dimensions must be >= 1");
    return {Kind::matrix, m, n};
  }

  std::size_t size() const { return rows * cols; }
  bool is_vector() const { return kind == Kind::vector; }
  // Shapes are interoperable when the underlying storage agrees (vector(d) ~ matrix(d,1)).
  bool compatible(const Shape& o) const { return rows == o.rows && cols == o.cols; }

  bool operator==(const Shape&) const = default;
};

/// Dense row-major real matrix. Value type; all arithmetic is element-wise
/// unless named otherwise (matmul, transpose).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  explicit Matrix(const Shape& shape) : Matrix(shape.rows, shape.cols) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != c) throw InvalidArgument("Matrix::from_rows: ragged rows");
      std::size_t j = 0;
      for (double v : row) m(i, j++) = v;
      ++i;
    }
    return m;
  }

  static Matrix column(std::span<const double> v) {
    Matrix m(v.size(), 1);
    std::copy(v.begin(), v.end(), m.data_.begin());
    return m;
  }
  static Matrix column(std::initializer_list<double> v) {
    return column(std::span<const double>(v.begin(), v.size()));
  }

  static Matrix diagonal(std::span<const double> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  double& operator()(std::size_t i, std::size_t j) {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }
  double& operator[](std::size_t k) { return data_[k]; }
  double operator[](std::size_t k) const { return data_[k]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  Matrix& operator+=(const Matrix& o) {
    require_same(o, "+=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    require_same(o, "-=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Matrix& operator*=(double a) {
    for (double& v : data_) v *= a;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }
  friend Matrix operator-(Matrix a) { return a *= -1.0; }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Matrix reshaped(std::size_t rows, std::size_t cols) const {
    if (rows * cols != data_.size()) throw InvalidArgument("Matrix::reshaped: size mismatch");
    Matrix m = *this;
    m.rows_ = rows;
    m.cols_ = cols;
    return m;
  }

  double frobenius_norm() const {
    // Scaled accumulation avoids overflow for the huge heavy-tailed draws.
    double scale = 0.0, ssq = 1.0;
    for (double v : data_) {
      if (v == 0.0) continue;
      const double a = std::abs(v);
      if (scale < a) {
        ssq = 1.0 + ssq * (scale / a) * (scale / a);
        scale = a;
      } else {
        ssq += (a / scale) * (a / scale);
      }
    }
    return scale * std::sqrt(ssq);
  }

  // Max absolute column sum.
  double norm_1() const {
    double best = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
      best = std::max(best, s);
    }
    return best;
  }

  // Max absolute row sum.
  double norm_inf() const {
    double best = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
      best = std::max(best, s);
    }
    return best;
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  bool operator==(const Matrix&) const = default;

 private:
  void require_same(const Matrix& o, const char* op) const {
    if (!same_shape(o))
      throw InvalidArgument(std::string("Matrix ") + op + ": shape mismatch (" +
                            std::to_string(rows_) + "x" + std::to_string(cols_) + " vs " +
                            std::to_string(o.rows_) + "x" + std::to_string(o.cols_) + ")");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw InvalidArgument("matmul: inner dimension mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

// a^T * b without materializing the transpose.
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw InvalidArgument("matmul_tn: row mismatch");
  Matrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k)
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aki * b(k, j);
    }
  return c;
}

// Frobenius inner product.
inline double dot(const Matrix& a, const Matrix& b) {
  if (a.size() != b.size()) throw InvalidArgument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

inline double distance(const Matrix& a, const Matrix& b) { return (a - b).frobenius_norm(); }

/// Sum of matrices by pairwise (cascade) summation in index order. The
/// association pattern depends only on the count, so the result is
/// bit-reproducible for a fixed ordering.
inline Matrix pairwise_sum(std::span<const Matrix> terms) {
  if (terms.empty()) throw InvalidArgument("pairwise_sum: no terms");
  if (terms.size() == 1) return terms[0];
  const std::size_t half = terms.size() / 2;
  return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

inline Matrix pairwise_mean(std::span<const Matrix> terms) {
  return pairwise_sum(terms) * (1.0 / static_cast<double>(terms.size()));
}

}  // namespace fedminimax
