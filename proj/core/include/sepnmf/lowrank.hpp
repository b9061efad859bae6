#pragma once

#include <cstdint>
#include <optional>

#include "sepnmf/linalg.hpp"
#include "sepnmf/matrix.hpp"
#include "sepnmf/spa.hpp"
#include "sepnmf/timing.hpp"

namespace sepnmf {

// Rank-k approximation B = Q Q^T A together with how it was produced.
struct RankKApprox {
  Matrix q;  // d x r orthonormal, r == k unless the subspace collapsed
  Matrix b;  // d x m
  std::optional<IndexSet> seed_indices;  // present on the SPA-seeded path
  Index power = 0;                       // exponent q of (A A^T)^q
  Index oversample = 0;
  std::optional<std::uint64_t> seed;  // present on the Gaussian path
  double error2 = 0.0;                // ||A - B||_2
  bool rank_collapsed = false;        // Q ended with fewer than k columns
  StageTimings timings;
};

// Orthonormal basis of range((A A^T)^q A(I)) with I = spa_select(A, k),
// evaluated right to left with re-orthonormalization after every product by
// A or A^T (2q + 1 orthonormalizations).
struct SpaSubspace {
  Matrix q;
  IndexSet seed_indices;
  bool rank_collapsed = false;
  StageTimings timings;
};
SpaSubspace spa_subspace(const Matrix& a, Index k, Index q);

// SPA-seeded subspace iteration. error2 uses spectral_norm at `norm_tol`.
RankKApprox spa_rank_approx(const Matrix& a, Index k, Index q, double norm_tol = kDefaultNormTol);

// Gaussian-seeded subspace iteration with an m x (k + oversample) test
// matrix drawn from Rng(seed). With oversample > 0 the sampled basis is cut
// back to rank k through the top-k SVD of Q^T A.
RankKApprox rand_subspace_approx(const Matrix& a, Index k, Index q, Index oversample,
                                 std::uint64_t seed, double norm_tol = kDefaultNormTol);

// Best rank-k approximation A_k from the truncated SVD, in the same carrier.
RankKApprox svd_rank_approx(const Matrix& a, Index k, double norm_tol = kDefaultNormTol);

// Number of singular values above rel_tol * s[0].
inline constexpr double kNumericalRankTol = 1e-10;
Index numerical_rank(std::span<const double> singular_values, double rel_tol = kNumericalRankTol);

// Error-bound diagnostics for an SPA-seeded approximation, all computed from a
// full SVD of A. Blocks follow G = U^T A(I) = [G1; G2] and
// Z = S^{2q} G = [Z1; Z2], H = Z2 Z1^{-1}.
struct BoundReport {
  Index k = 0;
  Index power = 0;
  double sigma_k = 0.0;
  double sigma_k1 = 0.0;       // sigma_{k+1}(A), zero when k == min(d, m)
  double sigma_min_ai = 0.0;   // sigma_min(A(I))
  double rho = 0.0;            // sigma_min_ai - sigma_k1
  double g1_min = 0.0;
  double g2_max = 0.0;
  double theorem4_bound = 0.0;
  std::optional<double> corollary9_bound;    // needs rho > 0
  std::optional<double> proposition7_bound;  // needs G1 nonsingular
  std::optional<double> lemma6_rhs;          // ||H S1||_2^2 + sigma_{k+1}^2
  bool singular_z1 = false;
  double achieved_error = 0.0;
  Index rank_b = 0;
};

// Throws BadShape if approx carries no seed indices.
BoundReport bound_report(const Matrix& a, const RankKApprox& approx);

// Largest admissible ||N||_2 (exclusive) for the guarantees on the
// SPA-seeded approximation: min{1/(2 sqrt(k-1)), 1/4} sigma_min(F) / (1 + 80 kappa(F)^2).
double spa_noise_limit(const Matrix& f);

// Lower bound (323 - 81 sqrt 5)/324 * sigma_min(F) on rho under that noise level.
double rho_floor(double sigma_min_f);

}  // namespace sepnmf
