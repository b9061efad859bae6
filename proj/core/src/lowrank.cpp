#include "sepnmf/lowrank.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sepnmf/error.hpp"
#include "sepnmf/random.hpp"

namespace sepnmf {

namespace {

void require_rank_arg(const Matrix& a, Index k, Index width) {
  const Index limit = std::min(a.rows(), a.cols());
  if (k < 1 || width > limit) {
    throw Error(ErrorCode::kBadRank, "k = " + std::to_string(k) + " (sample width " +
                                         std::to_string(width) + ") outside [1, " +
                                         std::to_string(limit) + "]");
  }
}

// Q spanning range((A A^T)^q Y0), orthonormalized after every product.
// Columns that become numerically dependent are dropped along the way.
Matrix iterate_subspace(const Matrix& a, const Matrix& y0, Index q) {
  Matrix basis = orthonormalize(y0);
  for (Index j = 0; j < q && basis.cols() > 0; ++j) {
    const Matrix w = orthonormalize(transpose_times(a, basis));
    if (w.cols() == 0) return Matrix(a.rows(), 0);
    basis = orthonormalize(a * w);
  }
  return basis;
}

void finish(const Matrix& a, RankKApprox& out, Index k, double norm_tol) {
  {
    ScopedStage stage(out.timings, "project");
    out.b = out.q * transpose_times(out.q, a);
  }
  {
    ScopedStage stage(out.timings, "error");
    out.error2 = spectral_norm(a - out.b, norm_tol);
  }
  out.rank_collapsed = out.q.cols() < k;
}

}  // namespace

SpaSubspace spa_subspace(const Matrix& a, Index k, Index q) {
  SpaSubspace out;
  {
    ScopedStage stage(out.timings, "spa");
    out.seed_indices = spa_select(a, k);
  }
  {
    ScopedStage stage(out.timings, "subspace");
    out.q = iterate_subspace(a, select_columns(a, out.seed_indices.view()), q);
  }
  out.rank_collapsed = out.q.cols() < k;
  return out;
}

RankKApprox spa_rank_approx(const Matrix& a, Index k, Index q, double norm_tol) {
  SpaSubspace sub = spa_subspace(a, k, q);
  RankKApprox out;
  out.q = std::move(sub.q);
  out.seed_indices = std::move(sub.seed_indices);
  out.power = q;
  out.timings = std::move(sub.timings);
  finish(a, out, k, norm_tol);
  return out;
}

RankKApprox rand_subspace_approx(const Matrix& a, Index k, Index q, Index oversample,
                                 std::uint64_t seed, double norm_tol) {
  require_nonempty(a, "approximation input");
  require_finite(a, "approximation input");
  const Index width = k + oversample;
  require_rank_arg(a, k, width);

  RankKApprox out;
  out.power = q;
  out.oversample = oversample;
  out.seed = seed;
  {
    ScopedStage stage(out.timings, "subspace");
    Rng rng(seed);
    const Matrix omega = rng.gaussian_matrix(a.cols(), width);
    out.q = iterate_subspace(a, a * omega, q);
  }
  if (oversample > 0 && out.q.cols() > 0) {
    ScopedStage stage(out.timings, "truncate");
    const Index kk = std::min(k, out.q.cols());
    const SvdResult top = svd_truncated(transpose_times(out.q, a), kk);
    out.q = out.q * top.u;
  }
  finish(a, out, k, norm_tol);
  return out;
}

RankKApprox svd_rank_approx(const Matrix& a, Index k, double norm_tol) {
  require_nonempty(a, "approximation input");
  require_rank_arg(a, k, k);
  RankKApprox out;
  {
    ScopedStage stage(out.timings, "svd");
    out.q = svd_truncated(a, k).u;
  }
  finish(a, out, k, norm_tol);
  return out;
}

Index numerical_rank(std::span<const double> s, double rel_tol) {
  if (s.empty() || !(s[0] > 0.0)) return 0;
  const double cut = rel_tol * s[0];
  return static_cast<Index>(std::count_if(s.begin(), s.end(), [&](double v) { return v > cut; }));
}

BoundReport bound_report(const Matrix& a, const RankKApprox& approx) {
  if (!approx.seed_indices) {
    throw Error(ErrorCode::kBadShape, "bound_report needs the SPA seed indices");
  }
  const IndexSet& seeds = *approx.seed_indices;
  const Index k = seeds.size();
  const Index q = approx.power;

  BoundReport r;
  r.k = k;
  r.power = q;
  r.achieved_error = approx.error2;

  const SvdResult full = svd(a);
  const Index rank_cap = full.s.size();
  r.sigma_k = full.s[k - 1];
  r.sigma_k1 = k < rank_cap ? full.s[k] : 0.0;

  const Matrix ai = select_columns(a, seeds.view());
  r.sigma_min_ai = singular_values(ai).back();
  r.rho = r.sigma_min_ai - r.sigma_k1;

  // G = U^T A(I) split after row k.
  const Matrix g = transpose_times(full.u, ai);
  Matrix g1(k, k);
  Matrix g2(rank_cap - k, k);
  for (Index j = 0; j < k; ++j) {
    for (Index i = 0; i < k; ++i) g1(i, j) = g(i, j);
    for (Index i = k; i < rank_cap; ++i) g2(i - k, j) = g(i, j);
  }
  const SvdResult g1_svd = svd(g1);
  r.g1_min = g1_svd.s.back();
  r.g2_max = g2.rows() > 0 ? singular_values(g2).front() : 0.0;

  const double exponent = 4.0 * static_cast<double>(q) - 2.0;
  const auto amplified = [&](double factor_sq) {
    if (r.sigma_k1 == 0.0) return 0.0;
    const double ratio = r.sigma_k1 / r.sigma_k;
    return r.sigma_k1 * std::sqrt(1.0 + factor_sq * std::pow(ratio, exponent));
  };
  r.theorem4_bound = amplified(1.0 / 20164.0);
  if (r.rho > 0.0) {
    const double f = r.sigma_k1 / r.rho;
    r.corollary9_bound = amplified(f * f);
  }
  if (r.g1_min > 0.0) {
    const double f = r.g2_max / r.g1_min;
    r.proposition7_bound = amplified(f * f);
  }

  // Z1 = S1^{2q} G1 is invertible exactly when G1 is and sigma_k > 0; its
  // floating-point form under/overflows for large q, so the test runs on G1.
  const bool g1_singular = !(r.g1_min > kDefaultNormTol * g1_svd.s.front()) ||
                           (q > 0 && !(r.sigma_k > 0.0));
  r.singular_z1 = g1_singular;
  if (!g1_singular) {
    // X = G2 G1^{-1}; (H S1)_ij = s1_j (s2_i / s1_j)^{2q} X_ij.
    Matrix g1_inv(k, k);
    for (Index j = 0; j < k; ++j) {
      for (Index i = 0; i < k; ++i) {
        double acc = 0.0;
        for (Index l = 0; l < k; ++l) acc += g1_svd.v(i, l) * g1_svd.u(j, l) / g1_svd.s[l];
        g1_inv(i, j) = acc;
      }
    }
    double hs1_norm = 0.0;
    if (g2.rows() > 0) {
      Matrix hs1 = g2 * g1_inv;
      const double two_q = 2.0 * static_cast<double>(q);
      for (Index j = 0; j < k; ++j) {
        const double s1 = full.s[j];
        for (Index i = 0; i < hs1.rows(); ++i) {
          const double s2 = full.s[k + i];
          hs1(i, j) *= s1 * (q == 0 ? 1.0 : std::pow(s2 / s1, two_q));
        }
      }
      hs1_norm = singular_values(hs1).front();
    }
    r.lemma6_rhs = hs1_norm * hs1_norm + r.sigma_k1 * r.sigma_k1;
  }

  r.rank_b = approx.q.cols() > 0 ? numerical_rank(singular_values(transpose_times(approx.q, a)))
                                 : 0;
  return r;
}

double spa_noise_limit(const Matrix& f) {
  const std::vector<double> s = singular_values(f);
  const Index k = f.cols();
  const double s_min = s.back();
  if (!(s_min > 0.0)) return 0.0;
  const double kappa = s.front() / s_min;
  double c = 0.25;
  if (k >= 2) c = std::min(c, 1.0 / (2.0 * std::sqrt(static_cast<double>(k - 1))));
  return c * s_min / (1.0 + 80.0 * kappa * kappa);
}

double rho_floor(double sigma_min_f) {
  return (323.0 - 81.0 * std::sqrt(5.0)) / 324.0 * sigma_min_f;
}

}  // namespace sepnmf
