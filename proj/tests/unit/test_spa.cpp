#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>

#include "oracles.hpp"
#include "sepnmf/error.hpp"
#include "sepnmf/linalg.hpp"
#include "sepnmf/spa.hpp"
#include "sepnmf/synth.hpp"
#include "test_util.hpp"

using namespace sepnmf;
using testutil::gaussian;

namespace {

std::vector<Index> seq(const IndexSet& s) { return {s.begin(), s.end()}; }

}  // namespace

TEST(IndexSet, RejectsDuplicates) {
  EXPECT_THROW(IndexSet({1, 2, 1}), Error);
  const IndexSet s({4, 0, 2});
  EXPECT_EQ(s.sorted(), (std::vector<Index>{0, 2, 4}));
  EXPECT_EQ(s.one_based(), (std::vector<Index>{5, 1, 3}));
  EXPECT_TRUE(s.contains(2));
  EXPECT_FALSE(s.contains(3));
}

TEST(SpaSelect, SimplexVerticesWithTie) {
  const Matrix a = Matrix::from_rows({{1, 0, 0.5}, {0, 1, 0.5}});
  EXPECT_EQ(seq(spa_select(a, 2)), (std::vector<Index>{0, 1}));
}

TEST(SpaSelect, IdentityPicksInOrder) {
  EXPECT_EQ(seq(spa_select(Matrix::identity(3), 3)), (std::vector<Index>{0, 1, 2}));
}

TEST(SpaSelect, NoiselessSeparableRecoversVertices) {
  const SyntheticInstance inst = generate_instance(6, 40, 4, 0.0, 9);
  const IndexSet found = spa_select(inst.a, 4);
  EXPECT_EQ(found.sorted(), inst.true_indices.sorted());
  EXPECT_EQ(seq(found), oracle::naive_spa(inst.a, 4));
}

TEST(SpaSelect, MatchesNaiveProjectorOracle) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Matrix a = gaussian(10, 50, 1000 + seed);
    const Index k = 1 + seed % 8;
    EXPECT_EQ(seq(spa_select(a, k)), oracle::naive_spa(a, k)) << "seed " << seed;
  }
}

TEST(SpaSelect, PickedNormsNonincreasing) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SpaRun run = spa_select_traced(gaussian(12, 30, 2000 + seed), 8);
    for (Index r = 1; r < run.picked_sq_norms.size(); ++r)
      EXPECT_LE(run.picked_sq_norms[r], run.picked_sq_norms[r - 1] + 1e-12);
  }
}

TEST(SpaSelect, Errors) {
  const Matrix a = gaussian(3, 5, 1);
  EXPECT_THROW(spa_select(a, 0), Error);
  try {
    spa_select(a, 4);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBadRank);
  }
  // Rank-one input cannot supply a second direction.
  const Matrix rank1 = times_transpose(gaussian(3, 1, 2), gaussian(5, 1, 3));
  try {
    spa_select(rank1, 2);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateInput);
  }
}

TEST(ResidualUpdate, ClosedForms) {
  // a = (3, 4), b = (1, 0).
  EXPECT_EQ(residual_update(std::vector<double>{25.0}, std::vector<double>{3.0}),
            std::vector<double>{16.0});
  // a parallel to unit b.
  EXPECT_EQ(residual_update(std::vector<double>{4.0}, std::vector<double>{2.0}),
            std::vector<double>{0.0});
  // Round-off below zero clamps.
  EXPECT_EQ(residual_update(std::vector<double>{1.0}, std::vector<double>{1.0000001}),
            std::vector<double>{0.0});
}

TEST(ResidualUpdate, MatchesMaterializedProjector) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix a = gaussian(5, 6, 3000 + seed);
    const Matrix t = gaussian(5, 1, 4000 + seed);
    const double nt = norm2(t.col(0));
    std::vector<double> sq(6), dots(6);
    for (Index i = 0; i < 6; ++i) {
      sq[i] = dot(a.col(i), a.col(i));
      dots[i] = dot(a.col(i), t.col(0)) / nt;
    }
    const std::vector<double> fast = residual_update(sq, dots);
    const Eigen::VectorXd b = oracle::to_eigen(t).col(0) / nt;
    const Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(5, 5) - b * b.transpose();
    const Eigen::MatrixXd r = proj * oracle::to_eigen(a);
    for (Index i = 0; i < 6; ++i) EXPECT_NEAR(fast[i], r.col(i).squaredNorm(), 1e-10);
  }
}

TEST(SpaSelect, ExactRecoveryOverSeeds) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const SyntheticInstance inst = generate_instance(10, 80, 3 + seed % 4, 0.0, 5000 + seed);
    EXPECT_EQ(spa_select(inst.a, inst.f.cols()).sorted(), inst.true_indices.sorted());
  }
}

TEST(SpaSelect, RobustUnderSmallNoise) {
  // Column-wise noise small against sigma_min(F) / kappa(F)^2: every pick lies
  // within (80 kappa^2 + 1) eps of a distinct basis column.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SyntheticInstance inst = generate_instance(8, 60, 3, 0.0, 6000 + seed);
    const auto s = singular_values(inst.f);
    const double kappa = s.front() / s.back();
    const double eps_col = 0.01 * s.back() / (1.0 + 80.0 * kappa * kappa);
    Matrix noise = gaussian(8, 60, 7000 + seed);
    for (Index j = 0; j < 60; ++j) {
      const double n = norm2(noise.col(j));
      for (double& v : noise.col(j)) v *= eps_col / n;
    }
    const Matrix a = inst.a + noise;
    const IndexSet found = spa_select(a, 3);
    std::vector<bool> used(3, false);
    for (Index i : found) {
      Index best = 0;
      double dist = INFINITY;
      for (Index j = 0; j < 3; ++j) {
        double d2 = 0.0;
        for (Index r = 0; r < 8; ++r) d2 += (a(r, i) - inst.f(r, j)) * (a(r, i) - inst.f(r, j));
        if (std::sqrt(d2) < dist) {
          dist = std::sqrt(d2);
          best = j;
        }
      }
      EXPECT_LE(dist, (80.0 * kappa * kappa + 1.0) * eps_col);
      EXPECT_FALSE(used[best]);
      used[best] = true;
    }
  }
}

TEST(SpaSelect, LinearInColumnCount) {
  const Matrix small = gaussian(20, 40000, 1);
  const Matrix large = gaussian(20, 80000, 2);
  const auto time = [](const Matrix& a) {
    double best = INFINITY;
    for (int rep = 0; rep < 5; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      spa_select(a, 8);
      best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
  };
  EXPECT_LE(time(large) / time(small), 3.0);
}
