#include "sepnmf/select.hpp"

#include <cmath>

#include "sepnmf/error.hpp"
#include "sepnmf/linalg.hpp"

namespace sepnmf {

namespace {

constexpr double kWhiteningRankTol = 1e-12;

SelectorResult plain(const Matrix& a, Index k, std::string method) {
  SelectorResult r;
  r.method = std::move(method);
  {
    ScopedStage stage(r.timing, "spa");
    r.indices = spa_select(a, k);
  }
  return r;
}

SelectorResult bypass(const Matrix& a, std::string method) {
  SelectorResult r = plain(a, 1, std::move(method));
  r.notes.emplace_back("k = 1: preconditioning skipped, plain SPA used");
  return r;
}

// P = S_k V_k^T.
Matrix svd_projection(const Matrix& a, Index k, StageTimings& timing) {
  ScopedStage stage(timing, "svd");
  const SvdResult top = svd_truncated(a, k);
  Matrix p(k, a.cols());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < k; ++i) p(i, j) = top.s[i] * top.v(j, i);
  return p;
}

// P = Q^T A with Q from the SPA-seeded subspace iteration.
Matrix subspace_projection(const Matrix& a, Index k, Index q, SelectorResult& r,
                           bool diagnostics) {
  SpaSubspace sub = spa_subspace(a, k, q);
  r.timing.append(sub.timings);
  if (sub.rank_collapsed) {
    throw Error(ErrorCode::kRankDeficient, "subspace iteration kept " +
                                               std::to_string(sub.q.cols()) + " of " +
                                               std::to_string(k) + " directions");
  }
  Matrix p;
  {
    ScopedStage stage(r.timing, "project");
    p = transpose_times(sub.q, a);
  }
  if (diagnostics) {
    ScopedStage stage(r.timing, "diagnostics");
    RankKApprox approx;
    approx.b = sub.q * p;
    approx.error2 = spectral_norm(a - approx.b);
    approx.q = std::move(sub.q);
    approx.seed_indices = std::move(sub.seed_indices);
    approx.power = q;
    r.diagnostics = bound_report(a, approx);
  }
  return p;
}

struct Preconditioned {
  Ellipsoid ellipsoid;
  Matrix cp;
};

Preconditioned precondition(const Matrix& p, double eps, SelectorResult& r) {
  Preconditioned out;
  {
    ScopedStage stage(r.timing, "mvee");
    out.ellipsoid = solve_mvee(p, eps);
  }
  ScopedStage stage(r.timing, "sqrt");
  Matrix c = psd_sqrt(out.ellipsoid.l);
  out.cp = c * p;
  r.preconditioner = std::move(c);
  return out;
}

void spa_on(const Matrix& cp, Index k, SelectorResult& r) {
  ScopedStage stage(r.timing, "spa");
  r.indices = spa_select(cp, k);
}

void boundary_pick(const Matrix& p, const Preconditioned& pre, Index k, double boundary_tol,
                   SelectorResult& r) {
  std::vector<Index> candidates;
  {
    ScopedStage stage(r.timing, "boundary");
    const std::vector<double> values = ellipsoid_support(pre.ellipsoid, p);
    for (Index i = 0; i < values.size(); ++i)
      if (std::abs(values[i] - 1.0) <= boundary_tol) candidates.push_back(i);
  }
  r.candidates = candidates.size();
  if (candidates.size() == k) {
    r.indices = IndexSet(std::move(candidates));
    return;
  }
  if (candidates.size() > k) {
    try {
      ScopedStage stage(r.timing, "spa");
      const IndexSet local = spa_select(select_columns(pre.cp, candidates), k);
      std::vector<Index> mapped;
      for (Index i : local) mapped.push_back(candidates[i]);
      r.indices = IndexSet(std::move(mapped));
      return;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateInput) throw;
      r.notes.emplace_back("boundary candidates span fewer than k directions");
    }
  } else {
    r.notes.emplace_back("only " + std::to_string(candidates.size()) + " boundary candidates");
  }
  r.fallback = true;
  r.notes.emplace_back("fell back to SPA on the preconditioned data");
  spa_on(pre.cp, k, r);
}

void require_whitening_rank(const std::vector<double>& s, Index k, const char* what) {
  if (!(s[k - 1] > kWhiteningRankTol * s.front())) {
    throw Error(ErrorCode::kBadRank, std::string(what) + ": sigma_k is numerically zero");
  }
}

// C = S^{-1} U^T applied to A; returns C A and records C C^T = S^{-2}.
Matrix whiten(const Matrix& a, const SvdResult& f, Index k, SelectorResult& r) {
  Matrix c(k, a.rows());
  std::vector<double> inv_sq(k);
  for (Index i = 0; i < k; ++i) {
    inv_sq[i] = 1.0 / (f.s[i] * f.s[i]);
    for (Index j = 0; j < a.rows(); ++j) c(i, j) = f.u(j, i) / f.s[i];
  }
  r.preconditioner = Matrix::diagonal(inv_sq);
  ScopedStage stage(r.timing, "whiten");
  return c * a;
}

}  // namespace

SelectorResult spa_selector(const Matrix& a, Index k) { return plain(a, k, "spa"); }

SelectorResult pspa_select(const Matrix& a, Index k, double eps) {
  if (k == 1) return bypass(a, "pspa");
  SelectorResult r;
  r.method = "pspa";
  const Matrix p = svd_projection(a, k, r.timing);
  const Preconditioned pre = precondition(p, eps, r);
  spa_on(pre.cp, k, r);
  return r;
}

SelectorResult mpspa_select(const Matrix& a, Index k, Index q, double eps, bool diagnostics) {
  if (k == 1) {
    SelectorResult r = bypass(a, "mpspa");
    r.q = q;
    return r;
  }
  SelectorResult r;
  r.method = "mpspa";
  r.q = q;
  const Matrix p = subspace_projection(a, k, q, r, diagnostics);
  const Preconditioned pre = precondition(p, eps, r);
  spa_on(pre.cp, k, r);
  return r;
}

SelectorResult erspa_select(const Matrix& a, Index k, double eps, double boundary_tol) {
  if (k == 1) return bypass(a, "erspa");
  SelectorResult r;
  r.method = "erspa";
  const Matrix p = svd_projection(a, k, r.timing);
  const Preconditioned pre = precondition(p, eps, r);
  boundary_pick(p, pre, k, boundary_tol, r);
  return r;
}

SelectorResult merspa_select(const Matrix& a, Index k, Index q, double eps, double boundary_tol) {
  if (k == 1) {
    SelectorResult r = bypass(a, "merspa");
    r.q = q;
    return r;
  }
  SelectorResult r;
  r.method = "merspa";
  r.q = q;
  const Matrix p = subspace_projection(a, k, q, r, false);
  const Preconditioned pre = precondition(p, eps, r);
  boundary_pick(p, pre, k, boundary_tol, r);
  return r;
}

SelectorResult prewhiten_spa_select(const Matrix& a, Index k) {
  if (k == 1) return bypass(a, "prewhiten");
  SelectorResult r;
  r.method = "prewhiten";
  SvdResult top;
  {
    ScopedStage stage(r.timing, "svd");
    top = svd_truncated(a, k);
  }
  require_whitening_rank(top.s, k, "prewhiten");
  spa_on(whiten(a, top, k, r), k, r);
  return r;
}

SelectorResult spaspa_select(const Matrix& a, Index k) {
  if (k == 1) return bypass(a, "spaspa");
  SelectorResult r;
  r.method = "spaspa";
  IndexSet seeds;
  {
    ScopedStage stage(r.timing, "spa");
    seeds = spa_select(a, k);
  }
  SvdResult f;
  {
    ScopedStage stage(r.timing, "svd");
    f = svd(select_columns(a, seeds.view()));
  }
  require_whitening_rank(f.s, k, "spaspa");
  spa_on(whiten(a, f, k, r), k, r);
  return r;
}

const std::vector<std::string>& selector_names() {
  static const std::vector<std::string> names{"spa",    "pspa",      "mpspa", "erspa",
                                              "merspa", "prewhiten", "spaspa"};
  return names;
}

SelectorResult run_selector(std::string_view method, const Matrix& a, Index k,
                            const SelectOptions& o) {
  if (method == "spa") return spa_selector(a, k);
  if (method == "pspa") return pspa_select(a, k, o.eps);
  if (method == "mpspa") return mpspa_select(a, k, o.q, o.eps, o.diagnostics);
  if (method == "erspa") return erspa_select(a, k, o.eps, o.boundary_tol);
  if (method == "merspa") return merspa_select(a, k, o.q, o.eps, o.boundary_tol);
  if (method == "prewhiten") return prewhiten_spa_select(a, k);
  if (method == "spaspa") return spaspa_select(a, k);
  throw Error(ErrorCode::kBadShape, "unknown selector '" + std::string(method) + "'");
}

}  // namespace sepnmf
