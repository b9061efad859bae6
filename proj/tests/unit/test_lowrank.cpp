#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "sepnmf/error.hpp"
#include "sepnmf/linalg.hpp"
#include "sepnmf/lowrank.hpp"
#include "sepnmf/synth.hpp"
#include "test_util.hpp"

using namespace sepnmf;
using testutil::gaussian;
using testutil::orthonormality_error;

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const Index n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Instance with ||N||_2 at a fraction of the admissible noise level.
SyntheticInstance admissible_instance(Index d, Index m, Index k, std::uint64_t seed,
                                      double fraction) {
  const SyntheticInstance probe = generate_instance(d, m, k, 0.0, seed);
  return generate_instance(d, m, k, fraction * spa_noise_limit(probe.f), seed);
}

void check_carrier(const Matrix& a, const RankKApprox& r, Index k) {
  EXPECT_LE(orthonormality_error(r.q), 1e-10);
  const double na = oracle::spectral_norm(a);
  EXPECT_LE(oracle::spectral_norm(r.b - r.q * transpose_times(r.q, a)), 1e-10 * na);
  EXPECT_LE(numerical_rank(oracle::singular_values(r.b)), k);
  EXPECT_NEAR(r.error2, oracle::spectral_norm(a - r.b), 1e-9 * std::max(1.0, na));
}

}  // namespace

TEST(SpaRankApprox, RankOneExact) {
  const Matrix a = times_transpose(gaussian(7, 1, 1), gaussian(12, 1, 2));
  for (Index q : {0, 1, 3}) {
    const RankKApprox r = spa_rank_approx(a, 1, q);
    EXPECT_LE(r.error2, 1e-10 * spectral_norm(a));
    check_carrier(a, r, 1);
  }
}

TEST(SpaRankApprox, DiagonalBestError) {
  const std::vector<double> d{3.0, 1.0};
  const Matrix a = Matrix::diagonal(d);
  const RankKApprox r = spa_rank_approx(a, 1, 1);
  ASSERT_TRUE(r.seed_indices);
  EXPECT_EQ((*r.seed_indices)[0], 0u);
  EXPECT_NEAR(r.b(0, 0), 3.0, 1e-12);
  EXPECT_NEAR(r.b(1, 1), 0.0, 1e-12);
  EXPECT_NEAR(r.error2, 1.0, 1e-12);
}

TEST(SpaRankApprox, NoisySeparableWithinBound) {
  const SyntheticInstance inst = admissible_instance(30, 400, 5, 42, 0.5);
  const RankKApprox r = spa_rank_approx(inst.a, 5, 2);
  const auto s = oracle::singular_values(inst.a);
  const double bound = s[5] * std::sqrt(1.0 + std::pow(s[5] / s[4], 6.0) / 20164.0);
  EXPECT_LT(r.error2, bound + 1e-10);
  const auto sb = oracle::singular_values(r.b);
  EXPECT_GT(sb[4], 0.0);
  EXPECT_LE(sb[5], 1e-8 * s[0]);
  check_carrier(inst.a, r, 5);
}

TEST(SpaRankApprox, MatchesExplicitProjector) {
  // Gaussian inputs keep (A A^T)^q A(I) well conditioned for small q.
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Matrix a = gaussian(12, 60, 100 + seed);
    const Index q = seed % 4;
    const RankKApprox r = spa_rank_approx(a, 4, q);
    Matrix y = select_columns(a, r.seed_indices->view());
    const Matrix aat = gram_of_rows(a);
    for (Index j = 0; j < q; ++j) y = aat * y;
    const Matrix ref = oracle::projector_approx(y, a);
    EXPECT_LE(oracle::spectral_norm(r.b - ref), 1e-8 * oracle::spectral_norm(a)) << "seed " << seed;
  }
}

TEST(SpaRankApprox, StableForLargePower) {
  const SyntheticInstance inst = generate_instance(20, 200, 4, 0.3, 77);
  const RankKApprox r = spa_rank_approx(inst.a, 4, 40);
  EXPECT_FALSE(r.rank_collapsed);
  check_carrier(inst.a, r, 4);
  const auto s = oracle::singular_values(inst.a);
  EXPECT_LE(r.error2, s[4] * (1.0 + 1e-8));
}

TEST(SpaRankApprox, ErrorTrendInPower) {
  std::vector<double> prev;
  for (Index q : {1, 2, 5, 10, 15}) {
    std::vector<double> errs;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const SyntheticInstance inst = generate_instance(20, 150, 4, 0.5, 900 + seed);
      errs.push_back(spa_rank_approx(inst.a, 4, q).error2);
    }
    const double med = median(errs);
    if (!prev.empty()) EXPECT_LE(med, prev.back() * 1.01);
    prev.push_back(med);
  }
}

TEST(RandSubspaceApprox, RankOneExact) {
  const Matrix a = times_transpose(gaussian(5, 1, 3), gaussian(8, 1, 4));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const RankKApprox r = rand_subspace_approx(a, 1, 0, 0, seed);
    EXPECT_LE(r.error2, 1e-10 * spectral_norm(a));
    ASSERT_TRUE(r.seed);
    EXPECT_EQ(*r.seed, seed);
  }
}

TEST(RandSubspaceApprox, PaddedDiagonalOverSeeds) {
  Matrix a(3, 5);
  a(0, 0) = 4.0;
  a(1, 1) = 2.0;
  a(2, 2) = 1.0;
  int good = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    if (rand_subspace_approx(a, 2, 3, 0, seed).error2 <= 1.05) ++good;
  }
  EXPECT_GE(good, 95);
}

TEST(RandSubspaceApprox, OversamplingDoesNotHurt) {
  const Matrix a = generate_instance(20, 60, 4, 0.8, 5).a;
  std::vector<double> plain, over;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    plain.push_back(rand_subspace_approx(a, 4, 1, 0, seed).error2);
    const RankKApprox r = rand_subspace_approx(a, 4, 1, 2, seed);
    over.push_back(r.error2);
    EXPECT_EQ(r.q.cols(), 4u);
    check_carrier(a, r, 4);
  }
  EXPECT_LE(median(over), median(plain));
}

TEST(RandSubspaceApprox, Deterministic) {
  const Matrix a = gaussian(10, 30, 8);
  EXPECT_EQ(rand_subspace_approx(a, 3, 2, 1, 99).b, rand_subspace_approx(a, 3, 2, 1, 99).b);
}

TEST(RandSubspaceApprox, BadRank) {
  const Matrix a = gaussian(4, 6, 1);
  EXPECT_THROW(rand_subspace_approx(a, 3, 1, 2, 0), Error);
  EXPECT_THROW(rand_subspace_approx(a, 0, 1, 0, 0), Error);
}

TEST(SvdRankApprox, EckartYoung) {
  const Matrix a = gaussian(9, 15, 12);
  const auto s = oracle::singular_values(a);
  const RankKApprox r = svd_rank_approx(a, 3);
  EXPECT_NEAR(r.error2, s[3], 1e-8 * s[0]);
  check_carrier(a, r, 3);
}

TEST(SpaRankApprox, KeepsTinyDirection) {
  // The third direction is 1e-9 of the others; re-orthonormalization after
  // every product keeps it through the power iteration.
  const Matrix a = Matrix::from_rows({{1, 0, 0, 1}, {0, 1, 0, 1}, {0, 0, 1e-9, 0}});
  const RankKApprox r = spa_rank_approx(a, 3, 3);
  EXPECT_EQ(r.q.cols(), 3u);
  EXPECT_FALSE(r.rank_collapsed);
  EXPECT_LE(orthonormality_error(r.q), 1e-10);
  EXPECT_LE(r.error2, 1e-12);
}

TEST(BoundReport, DiagonalClosedForm) {
  const std::vector<double> d{3.0, 1.0};
  const Matrix a = Matrix::diagonal(d);
  const BoundReport b = bound_report(a, spa_rank_approx(a, 1, 1));
  EXPECT_NEAR(b.sigma_k, 3.0, 1e-12);
  EXPECT_NEAR(b.sigma_k1, 1.0, 1e-12);
  EXPECT_NEAR(b.sigma_min_ai, 3.0, 1e-12);
  EXPECT_NEAR(b.rho, 2.0, 1e-12);
  EXPECT_NEAR(b.achieved_error, 1.0, 1e-12);
  ASSERT_TRUE(b.corollary9_bound);
  EXPECT_NEAR(*b.corollary9_bound, std::sqrt(1.0 + 0.25 / 9.0), 1e-12);
  EXPECT_NEAR(*b.corollary9_bound, 1.01379, 1e-5);
  EXPECT_EQ(b.rank_b, 1u);
}

TEST(BoundReport, NoiselessInstance) {
  const SyntheticInstance inst = generate_instance(10, 50, 3, 0.0, 4);
  const BoundReport b = bound_report(inst.a, spa_rank_approx(inst.a, 3, 1));
  const double na = oracle::spectral_norm(inst.a);
  EXPECT_LE(b.sigma_k1, 1e-10 * na);
  EXPECT_GT(b.rho, 0.0);
  EXPECT_NEAR(b.rho, b.sigma_min_ai, 1e-10 * na);
  EXPECT_EQ(b.rho, b.sigma_min_ai - b.sigma_k1);
}

TEST(BoundReport, AllBoundsHoldOnNoisyBatch) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SyntheticInstance inst = admissible_instance(30, 400, 5, 10 + seed, 0.9);
    const RankKApprox r = spa_rank_approx(inst.a, 5, 1 + seed % 3);
    const BoundReport b = bound_report(inst.a, r);
    const auto s = oracle::singular_values(inst.a);
    EXPECT_NEAR(b.sigma_k1, s[5], 1e-10 * s[0]);
    EXPECT_LE(b.g2_max, b.sigma_k1 + 1e-10);
    EXPECT_GE(b.g1_min, std::max(0.0, b.sigma_min_ai - b.sigma_k1) - 1e-10);
    EXPECT_GT(b.rho, rho_floor(singular_values(inst.f).back()));
    ASSERT_TRUE(b.lemma6_rhs);
    EXPECT_LE(b.achieved_error * b.achieved_error, *b.lemma6_rhs + 1e-8);
    EXPECT_LT(b.achieved_error, b.theorem4_bound + 1e-10);
    ASSERT_TRUE(b.proposition7_bound);
    EXPECT_LE(b.achieved_error, *b.proposition7_bound + 1e-10);
    ASSERT_TRUE(b.corollary9_bound);
    EXPECT_LE(b.achieved_error, *b.corollary9_bound + 1e-10);
    EXPECT_EQ(b.rank_b, 5u);
    EXPECT_LE(b.sigma_k1, inst.delta + 1e-10);
  }
}

TEST(BoundReport, SingularBlockLeavesOtherFieldsFilled) {
  // Seed column orthogonal to the top singular direction: G1 = 0.
  const Matrix a = Matrix::from_rows({{3, 0}, {0, 2.5}});
  RankKApprox approx = spa_rank_approx(a, 1, 0);
  approx.seed_indices = IndexSet({1});
  const BoundReport b = bound_report(a, approx);
  EXPECT_TRUE(b.singular_z1);
  EXPECT_FALSE(b.lemma6_rhs);
  EXPECT_FALSE(b.proposition7_bound);
  EXPECT_NEAR(b.sigma_k, 3.0, 1e-12);
  EXPECT_NEAR(b.sigma_min_ai, 2.5, 1e-12);
}

TEST(BoundReport, NeedsSeedIndices) {
  const Matrix a = gaussian(5, 8, 3);
  EXPECT_THROW(bound_report(a, rand_subspace_approx(a, 2, 1, 0, 1)), Error);
}

TEST(NoiseLimit, Constants) {
  EXPECT_NEAR(rho_floor(1.0), (323.0 - 81.0 * std::sqrt(5.0)) / 324.0, 1e-15);
  // Orthonormal F: kappa = 1, k = 5 -> 1/4 * 1 / 81.
  Matrix f(6, 5);
  for (Index j = 0; j < 5; ++j) f(j, j) = 1.0;
  EXPECT_NEAR(spa_noise_limit(f), 0.25 / 81.0, 1e-14);
  Matrix f2(6, 2);
  f2(0, 0) = 1.0;
  f2(1, 1) = 1.0;
  EXPECT_NEAR(spa_noise_limit(f2), 0.25 / 81.0, 1e-14);
  Matrix f10(12, 10);
  for (Index j = 0; j < 10; ++j) f10(j, j) = 1.0;
  EXPECT_NEAR(spa_noise_limit(f10), 1.0 / 6.0 / 81.0, 1e-14);
}

TEST(NumericalRank, RelativeThreshold) {
  EXPECT_EQ(numerical_rank(std::vector<double>{1.0, 1e-9, 1e-11}), 2u);
  EXPECT_EQ(numerical_rank(std::vector<double>{0.0, 0.0}), 0u);
  EXPECT_EQ(numerical_rank(std::vector<double>{}), 0u);
}
