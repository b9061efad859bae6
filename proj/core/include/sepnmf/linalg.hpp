#pragma once

#include <vector>

#include "sepnmf/matrix.hpp"

namespace sepnmf {

// Thin SVD factors: u is d x r, v is m x r, s nonincreasing and nonnegative.
struct SvdResult {
  Matrix u;
  std::vector<double> s;
  Matrix v;
};

// Eigenpairs of a symmetric matrix, eigenvalues in nonincreasing order.
struct SymmetricEigen {
  std::vector<double> values;
  Matrix vectors;
};

inline constexpr double kDefaultNormTol = 1e-12;

// Largest singular value by power iteration on the smaller Gram matrix.
// Deterministic: fixed start vectors, no randomness.
double spectral_norm(const Matrix& a, double tol = kDefaultNormTol);

// Full thin SVD (r = min(d, m)) by one-sided Jacobi rotations.
SvdResult svd(const Matrix& a);

// Top-k factors of svd(a). Throws BadRank unless 1 <= k <= min(d, m).
SvdResult svd_truncated(const Matrix& a, Index k);

std::vector<double> singular_values(const Matrix& a);

// Orthonormal basis of range(y) with as many columns as the numerical rank
// of y. Rank is decided by column-pivoted Householder QR: a pivot below
// kRankPivotTol times the first pivot ends the factorization. The basis is
// then built from the independent columns in their original order.
inline constexpr double kRankPivotTol = 1e-12;
Matrix orthonormalize(const Matrix& y);

// Numerical rank by the same pivot rule as orthonormalize.
Index pivoted_qr_rank(const Matrix& y, double rel_tol = kRankPivotTol);

// Cyclic Jacobi eigensolver. Throws NotSymmetric when |s - s^T| exceeds
// 1e-10 * max(1, max|s_ij|).
SymmetricEigen symmetric_eigen(const Matrix& s);

// Unique symmetric PSD square root. Eigenvalues in [-1e-10 ||L||_2, 0) are
// clamped to zero; anything lower throws NotPsd.
Matrix psd_sqrt(const Matrix& l);

}  // namespace sepnmf
