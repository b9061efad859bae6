#pragma once

#include <span>
#include <vector>

#include "sepnmf/matrix.hpp"

namespace sepnmf {

// Ordered set of distinct 0-based column indices, kept in selection order.
class IndexSet {
 public:
  IndexSet() = default;
  // Throws BadShape on duplicate entries.
  explicit IndexSet(std::vector<Index> indices);

  Index size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  Index operator[](Index i) const noexcept { return indices_[i]; }
  auto begin() const noexcept { return indices_.begin(); }
  auto end() const noexcept { return indices_.end(); }
  std::span<const Index> view() const noexcept { return indices_; }

  bool contains(Index i) const noexcept;
  std::vector<Index> sorted() const;
  std::vector<Index> one_based() const;

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  std::vector<Index> indices_;
};

// A column counts as depleted when its residual norm is at most this
// fraction of ||A||_F.
inline constexpr double kSpaDegenerateTol = 1e-12;

struct SpaRun {
  IndexSet indices;
  // Squared residual norm of the column picked in each round.
  std::vector<double> picked_sq_norms;
};

// Successive projection: k rounds of picking the column with the largest
// residual norm (smallest index on ties) and projecting every column onto the
// orthogonal complement of the pick. Residual norms are updated in O(dm) per
// round from the identity ||(I - bb^T)a||^2 = ||a||^2 - (a^T b)^2.
//
// Throws BadRank unless 1 <= k <= min(d, m), and DegenerateInput when every
// residual is depleted before k picks.
IndexSet spa_select(const Matrix& a, Index k);
SpaRun spa_select_traced(const Matrix& a, Index k);

// sq_norms[i] - dots[i]^2, clamped at zero.
std::vector<double> residual_update(std::span<const double> sq_norms,
                                    std::span<const double> dots);

}  // namespace sepnmf
