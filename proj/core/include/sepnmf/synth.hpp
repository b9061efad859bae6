#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sepnmf/matrix.hpp"
#include "sepnmf/spa.hpp"

namespace sepnmf {

// A = F [I, H] Pi + N with known ground truth.
struct SyntheticInstance {
  Matrix a;                          // d x m
  Matrix f;                          // d x k
  Matrix h;                          // k x (m - k), columns on the simplex
  std::vector<Index> permutation;    // column c of F[I, H] lands at permutation[c]
  Matrix n;                          // d x m, ||N||_2 = delta
  double delta = 0.0;
  IndexSet true_indices;             // permutation[0..k-1]
  std::uint64_t seed = 0;
  std::vector<double> dirichlet_alpha;
  Index f_attempts = 1;              // draws of F until sigma_min(F) >= 1e-6
};

inline constexpr double kAlphaFloor = 0.05;
inline constexpr double kMinBasisSigma = 1e-6;
inline constexpr int kMaxBasisAttempts = 10;

// Draw order, fixed so that delta only rescales the noise: alpha (unless
// given), F (with retries), H, the permutation, then the noise direction.
//
// Throws BadShape unless 2 <= k <= min(d, m), m > k, delta >= 0 and alpha
// (if given) has k entries in (0, 1]; DegenerateBasis if every attempt at F
// has sigma_min below 1e-6.
SyntheticInstance generate_instance(Index d, Index m, Index k, double delta, std::uint64_t seed,
                                    const std::optional<std::vector<double>>& alpha = {});

// F [I, H] Pi, the noiseless part of A.
Matrix separable_part(const SyntheticInstance& inst);

}  // namespace sepnmf
