#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sepnmf/lowrank.hpp"
#include "sepnmf/matrix.hpp"
#include "sepnmf/mvee.hpp"
#include "sepnmf/spa.hpp"
#include "sepnmf/timing.hpp"

namespace sepnmf {

struct SelectorResult {
  IndexSet indices;
  std::string method;
  std::optional<Index> q;
  // k x k: C for the ellipsoid-based selectors, C C^T for the whitening ones
  // whose C is k x d.
  std::optional<Matrix> preconditioner;
  std::optional<BoundReport> diagnostics;
  StageTimings timing;
  // Boundary candidates found by the ER selectors.
  std::optional<Index> candidates;
  // Set when a selector fell back to plain SPA on its transformed data.
  bool fallback = false;
  std::vector<std::string> notes;
};

inline constexpr double kBoundaryTol = 1e-3;
inline constexpr Index kDefaultPower = 10;

// Every selector below returns exactly k distinct column indices of A or
// throws. For k = 1 the preconditioned ones reduce to spa_select and say so in
// notes.

SelectorResult spa_selector(const Matrix& a, Index k);

// SPA on C P with P = S_k V_k^T from the truncated SVD and C^2 the minimum
// volume enclosing ellipsoid of P's columns. RankDeficient from the ellipsoid
// solver means rank(A) < k.
SelectorResult pspa_select(const Matrix& a, Index k, double eps = kMveeDefaultEps);

// As pspa_select with P = Q^T A, Q from the SPA-seeded subspace iteration.
// A collapsed subspace is reported as RankDeficient. With `diagnostics` the
// bound report of the underlying rank-k approximation is attached.
SelectorResult mpspa_select(const Matrix& a, Index k, Index q, double eps = kMveeDefaultEps,
                            bool diagnostics = false);

// Candidates are the columns with |p^T L p - 1| <= boundary_tol. More than k
// candidates are narrowed by SPA on their columns of C P; fewer than k fall
// back to SPA on all of C P.
SelectorResult erspa_select(const Matrix& a, Index k, double eps = kMveeDefaultEps,
                            double boundary_tol = kBoundaryTol);
SelectorResult merspa_select(const Matrix& a, Index k, Index q, double eps = kMveeDefaultEps,
                             double boundary_tol = kBoundaryTol);

// SPA on C A with C = S_k^{-1} U_k^T. Throws BadRank if sigma_k <= 1e-12 sigma_1.
SelectorResult prewhiten_spa_select(const Matrix& a, Index k);

// SPA on C A with C = S^{-1} U^T from the SVD of A(I0), I0 = spa_select(A, k).
// Throws BadRank if A(I0) is rank deficient at the same threshold.
SelectorResult spaspa_select(const Matrix& a, Index k);

struct SelectOptions {
  Index q = kDefaultPower;
  double eps = kMveeDefaultEps;
  double boundary_tol = kBoundaryTol;
  bool diagnostics = false;
};

// Names accepted by run_selector.
const std::vector<std::string>& selector_names();

// Dispatch by name. Throws BadShape on an unknown name.
SelectorResult run_selector(std::string_view method, const Matrix& a, Index k,
                            const SelectOptions& options = {});

}  // namespace sepnmf
