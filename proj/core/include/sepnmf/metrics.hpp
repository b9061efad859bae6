#pragma once

#include <span>
#include <vector>

#include "sepnmf/linalg.hpp"
#include "sepnmf/matrix.hpp"
#include "sepnmf/spa.hpp"

namespace sepnmf {

// |found ∩ truth| / k. Throws SizeMismatch when the sizes differ or are zero.
double recovery_rate(const IndexSet& found, const IndexSet& truth);

// Angle in radians between f and fhat, cosine clamped to [-1, 1].
// Throws ZeroVector on a zero input and SizeMismatch on a length mismatch.
double spectral_angle_distance(std::span<const double> f, std::span<const double> fhat);

// Euclidean projection onto {w >= 0, sum w = 1}, by sorting.
std::vector<double> project_to_simplex(std::span<const double> v);

struct AbundanceResult {
  Matrix w;                        // k x m, columns on the simplex
  std::vector<double> residuals;   // ||F w_i - a_i||_2 per column
  std::vector<double> kkt;         // projected-gradient residual per column
  std::vector<Index> iterations;   // per column
};

inline constexpr double kAbundanceKktTol = 1e-8;
inline constexpr Index kAbundanceMaxIterations = 50000;

// Column-wise argmin over the simplex of ||F w - a||_2^2, by accelerated
// projected gradient (step 1 / sigma_max(F)^2, gradient-based restart).
// A column stops once ||w - proj(w - grad / L)||_inf <= kAbundanceKktTol.
//
// Throws DimensionMismatch when F and A disagree in rows and
// RankDeficientBasis when rank(F) < k.
AbundanceResult estimate_abundances(const Matrix& f, const Matrix& a);

struct ApproximationError {
  double abs = 0.0;  // ||A - B||_2
  double rel = 0.0;  // abs / ||A||_2
};

// Throws DimensionMismatch on differing shapes.
ApproximationError approximation_error(const Matrix& a, const Matrix& b,
                                       double tol = kDefaultNormTol);

}  // namespace sepnmf
