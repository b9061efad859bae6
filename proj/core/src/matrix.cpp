#include "sepnmf/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sepnmf/error.hpp"

namespace sepnmf {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(op) + ": " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                    std::to_string(b.cols()));
  }
}

}  // namespace

Matrix::Matrix(Index rows, Index cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(Index rows, Index cols, std::vector<double> column_major)
    : rows_(rows), cols_(cols), data_(std::move(column_major)) {
  if (data_.size() != rows * cols) {
    throw Error(ErrorCode::kBadShape, "data length " + std::to_string(data_.size()) +
                                          " does not match " + std::to_string(rows) + "x" +
                                          std::to_string(cols));
  }
  if (!all_finite()) throw Error(ErrorCode::kNonFinite, "matrix construction");
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const Index r = rows.size();
  const Index c = r == 0 ? 0 : rows.begin()->size();
  Matrix m(r, c);
  Index i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw Error(ErrorCode::kBadShape, "ragged row list");
    Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  if (!m.all_finite()) throw Error(ErrorCode::kNonFinite, "matrix construction");
  return m;
}

Matrix Matrix::identity(Index n) {
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> values) {
  Matrix m(values.size(), values.size());
  for (Index i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) t(j, i) = a(i, j);
  return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "matrix product inner dimensions");
  }
  Matrix c(a.rows(), b.cols());
  const Index n = a.rows();
  // Stream each column of `a` once; the result block stays hot when b is thin.
  for (Index l = 0; l < a.cols(); ++l) {
    const double* al = a.col(l).data();
    for (Index j = 0; j < b.cols(); ++j) {
      const double blj = b(l, j);
      if (blj == 0.0) continue;
      double* cj = c.col(j).data();
      for (Index i = 0; i < n; ++i) cj[i] += al[i] * blj;
    }
  }
  return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "matrix sum");
  Matrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (Index i = 0; i < cd.size(); ++i) cd[i] += bd[i];
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "matrix difference");
  Matrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (Index i = 0; i < cd.size(); ++i) cd[i] -= bd[i];
  return c;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  for (double& v : c.data()) v *= s;
  return c;
}

Matrix transpose_times(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "transpose product row counts");
  }
  Matrix c(a.cols(), b.cols());
  for (Index i = 0; i < a.cols(); ++i) {
    const auto ai = a.col(i);
    for (Index j = 0; j < b.cols(); ++j) c(i, j) = dot(ai, b.col(j));
  }
  return c;
}

Matrix times_transpose(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "product with transpose column counts");
  }
  Matrix c(a.rows(), b.rows());
  for (Index l = 0; l < a.cols(); ++l) {
    const double* al = a.col(l).data();
    for (Index j = 0; j < b.rows(); ++j) {
      const double bjl = b(j, l);
      if (bjl == 0.0) continue;
      double* cj = c.col(j).data();
      for (Index i = 0; i < a.rows(); ++i) cj[i] += al[i] * bjl;
    }
  }
  return c;
}

Matrix gram_of_rows(const Matrix& a) {
  const Index n = a.rows();
  Matrix g(n, n);
  // Accumulate the upper triangle column by column of `a`, then mirror.
  for (Index l = 0; l < a.cols(); ++l) {
    const double* al = a.col(l).data();
    for (Index j = 0; j < n; ++j) {
      const double ajl = al[j];
      if (ajl == 0.0) continue;
      double* gj = g.col(j).data();
      for (Index i = 0; i <= j; ++i) gj[i] += al[i] * ajl;
    }
  }
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) g(i, j) = g(j, i);
  return g;
}

Matrix gram_of_cols(const Matrix& a) {
  const Index n = a.cols();
  Matrix g(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i <= j; ++i) {
      const double v = dot(a.col(i), a.col(j));
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

Matrix select_columns(const Matrix& a, std::span<const Index> columns) {
  Matrix s(a.rows(), columns.size());
  for (Index j = 0; j < columns.size(); ++j) {
    if (columns[j] >= a.cols()) {
      throw Error(ErrorCode::kBadShape, "column index " + std::to_string(columns[j]) +
                                            " out of range " + std::to_string(a.cols()));
    }
    std::copy_n(a.col(columns[j]).data(), a.rows(), s.col(j).data());
  }
  return s;
}

double dot(std::span<const double> x, std::span<const double> y) noexcept {
  double s = 0.0;
  const Index n = std::min(x.size(), y.size());
  for (Index i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double norm2(std::span<const double> x) noexcept {
  // Scaled to stay finite for large entries.
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double v : x) {
    const double t = v / scale;
    s += t * t;
  }
  return scale * std::sqrt(s);
}

double frobenius_norm(const Matrix& a) noexcept { return norm2(a.data()); }

double max_abs(const Matrix& a) noexcept {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

void require_finite(const Matrix& a, std::string_view what) {
  if (!a.all_finite()) throw Error(ErrorCode::kNonFinite, std::string(what));
}

void require_nonempty(const Matrix& a, std::string_view what) {
  if (a.rows() == 0 || a.cols() == 0) {
    throw Error(ErrorCode::kBadShape, std::string(what) + " is empty");
  }
}

}  // namespace sepnmf
