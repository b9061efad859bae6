#include "sepnmf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sepnmf/error.hpp"
#include "sepnmf/linalg.hpp"
#include "sepnmf/random.hpp"

namespace sepnmf {

namespace {

constexpr double kNoiseNormTol = 1e-10;

}  // namespace

SyntheticInstance generate_instance(Index d, Index m, Index k, double delta, std::uint64_t seed,
                                    const std::optional<std::vector<double>>& alpha) {
  if (k < 2 || k > std::min(d, m) || m <= k) {
    throw Error(ErrorCode::kBadShape, "need 2 <= k <= min(d, m) and m > k; got d=" +
                                          std::to_string(d) + " m=" + std::to_string(m) +
                                          " k=" + std::to_string(k));
  }
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorCode::kBadShape, "delta must be a finite nonnegative number");
  }
  if (alpha) {
    if (alpha->size() != k) throw Error(ErrorCode::kBadShape, "alpha needs k entries");
    for (double v : *alpha)
      if (!(v > 0.0 && v <= 1.0)) throw Error(ErrorCode::kBadShape, "alpha entries lie in (0, 1]");
  }

  Rng rng(seed);
  SyntheticInstance inst;
  inst.seed = seed;
  inst.delta = delta;
  if (alpha) {
    inst.dirichlet_alpha = *alpha;
  } else {
    inst.dirichlet_alpha.resize(k);
    for (double& v : inst.dirichlet_alpha) v = rng.uniform_left_open(kAlphaFloor, 1.0);
  }

  for (int attempt = 1;; ++attempt) {
    inst.f = rng.uniform_matrix(d, k);
    inst.f_attempts = static_cast<Index>(attempt);
    if (singular_values(inst.f).back() >= kMinBasisSigma) break;
    if (attempt == kMaxBasisAttempts) {
      throw Error(ErrorCode::kDegenerateBasis,
                  "sigma_min(F) < 1e-6 after " + std::to_string(kMaxBasisAttempts) + " draws");
    }
  }

  inst.h = Matrix(k, m - k);
  for (Index j = 0; j < m - k; ++j) {
    const std::vector<double> w = rng.dirichlet(inst.dirichlet_alpha);
    std::copy(w.begin(), w.end(), inst.h.col(j).begin());
  }

  inst.permutation = rng.permutation(m);
  inst.true_indices = IndexSet(std::vector<Index>(inst.permutation.begin(),
                                                  inst.permutation.begin() + k));

  Matrix noise = rng.gaussian_matrix(d, m);
  if (delta == 0.0) {
    inst.n = Matrix(d, m);
  } else {
    const double scale = delta / spectral_norm(noise, kNoiseNormTol);
    for (double& v : noise.data()) v *= scale;
    inst.n = std::move(noise);
  }

  inst.a = separable_part(inst) + inst.n;
  return inst;
}

Matrix separable_part(const SyntheticInstance& inst) {
  const Index d = inst.f.rows();
  const Index k = inst.f.cols();
  const Index m = inst.permutation.size();
  const Matrix fh = inst.f * inst.h;
  Matrix out(d, m);
  for (Index c = 0; c < m; ++c) {
    const auto src = c < k ? inst.f.col(c) : fh.col(c - k);
    std::copy(src.begin(), src.end(), out.col(inst.permutation[c]).begin());
  }
  return out;
}

}  // namespace sepnmf
