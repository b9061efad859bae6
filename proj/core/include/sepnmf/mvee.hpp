#pragma once

#include <vector>

#include "sepnmf/error.hpp"
#include "sepnmf/matrix.hpp"
#include "sepnmf/spa.hpp"

namespace sepnmf {

// Origin-centered ellipsoid {x : x^T L x <= 1} with the dual design that
// certifies it: L = M(u)^{-1} / k, M(u) = sum_i u_i p_i p_i^T.
struct Ellipsoid {
  Matrix l;
  std::vector<double> weights;  // one per input point, on the simplex
  IndexSet support;             // points with weight above kMveeSupportTol
  double max_violation = 0.0;   // max_i p_i^T L p_i - 1
  Index iterations = 0;         // inner ascent steps over all rounds
  Index rounds = 0;             // cutting-plane rounds
};

inline constexpr double kMveeDefaultEps = 1e-6;
inline constexpr double kMveeSupportTol = 1e-8;

struct MveeOptions {
  double eps = kMveeDefaultEps;
  Index max_iterations = 100000;
  Index max_rounds = 200;
  // Iterations between full recomputations of M(u)^{-1}.
  Index refresh_every = 100;
};

// Thrown when the iteration or round cap is hit; carries the last iterate.
class MveeNoConvergence : public Error {
 public:
  MveeNoConvergence(std::string what, Ellipsoid last)
      : Error(ErrorCode::kNoConvergence, std::move(what)), last_(std::move(last)) {}
  const Ellipsoid& last() const noexcept { return last_; }

 private:
  Ellipsoid last_;
};

// Minimum-volume origin-centered ellipsoid enclosing the columns of the k x m
// matrix P, to a (1 + eps) certificate: max_i p_i^T L p_i <= 1 + eps and
// log det L is within k log(1 + eps) of the optimum.
//
// Solved on the dual D-optimal design problem by Khachiyan forward steps and
// Todd-Yildirim away steps, inside a cutting-plane loop that starts from the
// 10k largest points and adds the worst violators, at most k per round.
//
// Throws RankDeficient if rank(P) < k and BadShape unless 0 < eps < 0.5.
Ellipsoid solve_mvee(const Matrix& p, const MveeOptions& options = {});
Ellipsoid solve_mvee(const Matrix& p, double eps);

// p_i^T L p_i per column. Throws DimensionMismatch.
std::vector<double> ellipsoid_support(const Matrix& l, const Matrix& p);
std::vector<double> ellipsoid_support(const Ellipsoid& e, const Matrix& p);

}  // namespace sepnmf
