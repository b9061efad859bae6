#include "sepnmf/spa.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sepnmf/error.hpp"

namespace sepnmf {

IndexSet::IndexSet(std::vector<Index> indices) : indices_(std::move(indices)) {
  std::vector<Index> s = sorted();
  if (std::adjacent_find(s.begin(), s.end()) != s.end()) {
    throw Error(ErrorCode::kBadShape, "index set has duplicate entries");
  }
}

bool IndexSet::contains(Index i) const noexcept {
  return std::find(indices_.begin(), indices_.end(), i) != indices_.end();
}

std::vector<Index> IndexSet::sorted() const {
  std::vector<Index> s = indices_;
  std::sort(s.begin(), s.end());
  return s;
}

std::vector<Index> IndexSet::one_based() const {
  std::vector<Index> s = indices_;
  for (Index& v : s) ++v;
  return s;
}

std::vector<double> residual_update(std::span<const double> sq_norms,
                                    std::span<const double> dots) {
  std::vector<double> out(sq_norms.size());
  for (Index i = 0; i < sq_norms.size(); ++i) {
    out[i] = std::max(0.0, sq_norms[i] - dots[i] * dots[i]);
  }
  return out;
}

SpaRun spa_select_traced(const Matrix& a, Index k) {
  require_nonempty(a, "spa input");
  require_finite(a, "spa input");
  const Index d = a.rows();
  const Index m = a.cols();
  if (k < 1 || k > std::min(d, m)) {
    throw Error(ErrorCode::kBadRank, "k = " + std::to_string(k) + " outside [1, " +
                                         std::to_string(std::min(d, m)) + "]");
  }
  const double threshold = kSpaDegenerateTol * frobenius_norm(a);

  std::vector<double> sq(m);
  for (Index i = 0; i < m; ++i) sq[i] = dot(a.col(i), a.col(i));

  Matrix basis(d, k);
  std::vector<Index> picked;
  std::vector<double> picked_sq;
  picked.reserve(k);
  std::vector<double> dots(m);

  // Residual of column i against the first `round` basis directions,
  // orthogonalized twice.
  const auto explicit_residual = [&](Index i, Index round) {
    std::vector<double> t(a.col(i).begin(), a.col(i).end());
    for (int pass = 0; pass < 2; ++pass) {
      for (Index j = 0; j < round; ++j) {
        const auto uj = basis.col(j);
        const double c = dot(uj, t);
        for (Index r = 0; r < d; ++r) t[r] -= c * uj[r];
      }
    }
    return t;
  };
  const auto argmax = [&] {
    Index best = 0;
    for (Index i = 1; i < m; ++i)
      if (sq[i] > sq[best]) best = i;
    return best;
  };

  for (Index round = 0; round < k; ++round) {
    Index best = argmax();
    std::vector<double> t = explicit_residual(best, round);
    // The downdated norms lose relative accuracy once residuals fall near
    // round-off of the original norms; recompute them when the pick disagrees.
    if (dot(t, t) < 0.5 * sq[best]) {
      for (Index i = 0; i < m; ++i) {
        if (std::find(picked.begin(), picked.end(), i) != picked.end()) continue;
        const std::vector<double> ri = explicit_residual(i, round);
        sq[i] = dot(ri, ri);
      }
      best = argmax();
      t = explicit_residual(best, round);
    }
    if (std::sqrt(sq[best]) <= threshold) {
      throw Error(ErrorCode::kDegenerateInput,
                  "residuals depleted after " + std::to_string(round) + " of " +
                      std::to_string(k) + " picks");
    }
    picked.push_back(best);
    picked_sq.push_back(sq[best]);

    const double nt = norm2(t);
    auto u = basis.col(round);
    for (Index r = 0; r < d; ++r) u[r] = t[r] / nt;

    // u is orthogonal to every earlier direction, so s_i^T u = a_i^T u.
    for (Index i = 0; i < m; ++i) dots[i] = dot(a.col(i), u);
    sq = residual_update(sq, dots);
    sq[best] = 0.0;
  }
  return SpaRun{IndexSet(std::move(picked)), std::move(picked_sq)};
}

IndexSet spa_select(const Matrix& a, Index k) { return spa_select_traced(a, k).indices; }

}  // namespace sepnmf
