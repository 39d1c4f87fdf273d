#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace mgeom {

/// Dense row-major matrix of doubles.
///
/// Point clouds use the column convention: a p x n matrix holds n points of
/// dimension p, one per column.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> column(std::size_t c) const;
  void set_column(std::size_t c, std::span<const double> v);

  Matrix transposed() const;
  bool all_finite() const noexcept;
  double frobenius_norm() const noexcept;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);

/// Columns [first, first + count) of `m`.
Matrix column_block(const Matrix& m, std::size_t first, std::size_t count);

/// Columns of `m` selected by index, in the given order.
Matrix select_columns(const Matrix& m, std::span<const std::size_t> indices);

/// Horizontal concatenation [a b]; row counts must agree.
Matrix hconcat(const Matrix& a, const Matrix& b);

}  // namespace mgeom
