#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace sepnmf {

using Index = std::size_t;

// Dense real matrix stored column-major. Carries every operand of the
// toolkit: data matrices, bases, mixing weights, noise and projections.
class Matrix {
 public:
  Matrix() = default;
  // Zero-filled rows x cols matrix.
  Matrix(Index rows, Index cols);
  // Takes ownership of column-major data; throws BadShape on a size mismatch
  // and NonFinite if any entry is NaN or infinite.
  Matrix(Index rows, Index cols, std::vector<double> column_major);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix identity(Index n);
  static Matrix diagonal(std::span<const double> values);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(Index i, Index j) noexcept { return data_[j * rows_ + i]; }
  double operator()(Index i, Index j) const noexcept { return data_[j * rows_ + i]; }

  std::span<double> col(Index j) noexcept { return {data_.data() + j * rows_, rows_}; }
  std::span<const double> col(Index j) const noexcept {
    return {data_.data() + j * rows_, rows_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> data_;
};

Matrix transpose(const Matrix& a);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

// a^T b without materializing the transpose.
Matrix transpose_times(const Matrix& a, const Matrix& b);
// a b^T.
Matrix times_transpose(const Matrix& a, const Matrix& b);
// Symmetric Gram matrices a a^T (rows x rows) and a^T a (cols x cols).
Matrix gram_of_rows(const Matrix& a);
Matrix gram_of_cols(const Matrix& a);

Matrix select_columns(const Matrix& a, std::span<const Index> columns);

double dot(std::span<const double> x, std::span<const double> y) noexcept;
double norm2(std::span<const double> x) noexcept;
double frobenius_norm(const Matrix& a) noexcept;
double max_abs(const Matrix& a) noexcept;

// Throws NonFinite naming `what` when `a` holds NaN/Inf.
void require_finite(const Matrix& a, std::string_view what);
// Throws BadShape when `a` has a zero dimension.
void require_nonempty(const Matrix& a, std::string_view what);

}  // namespace sepnmf
