#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "sepnmf/matrix.hpp"

namespace sepnmf {

// Identifies the generator and the sampling algorithms below. Bumped whenever
// any of them changes so reports stay attributable to the stream they used.
inline constexpr const char* kRngName = "mt19937_64/splitmix64-seed/box-muller/marsaglia-tsang/v1";

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seed of the `stream`-th independent job spawned from `base`.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

// Per-call random source. Every distribution is implemented here on top of
// the raw 64-bit engine so the streams are identical across standard
// libraries (std::*_distribution are not specified bit-exactly).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on (lo, hi].
  double uniform_left_open(double lo, double hi);
  // Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal();
  // log of a Gamma(shape, 1) variate; kept in log space so tiny shapes do
  // not underflow.
  double log_gamma_variate(double shape);
  std::vector<double> dirichlet(std::span<const double> alpha);
  std::vector<Index> permutation(Index n);
  Matrix gaussian_matrix(Index rows, Index cols);
  Matrix uniform_matrix(Index rows, Index cols);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sepnmf
