#include "sepnmf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sepnmf/error.hpp"

namespace sepnmf {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kPowerMaxIter = 10000;
constexpr int kJacobiMaxSweeps = 80;

// Rayleigh-quotient power iteration on a symmetric PSD matrix.
double power_iterate(const Matrix& g, std::vector<double> x, double tol) {
  const Index n = g.rows();
  double nx = norm2(x);
  if (nx == 0.0) return 0.0;
  for (double& v : x) v /= nx;
  std::vector<double> y(n);
  double previous = 0.0;
  for (int it = 0; it < kPowerMaxIter; ++it) {
    std::fill(y.begin(), y.end(), 0.0);
    for (Index j = 0; j < n; ++j) {
      const double xj = x[j];
      const double* gj = g.col(j).data();
      for (Index i = 0; i < n; ++i) y[i] += gj[i] * xj;
    }
    const double rq = dot(x, y);
    const double ny = norm2(y);
    if (ny == 0.0) return 0.0;
    if (it > 0 && std::abs(rq - previous) < tol * std::abs(rq)) return rq;
    previous = rq;
    for (Index i = 0; i < n; ++i) x[i] = y[i] / ny;
  }
  return previous;
}

// Householder QR workspace. Columns of `r` are overwritten; the reflectors
// are kept so an explicit Q can be formed afterwards.
struct HouseholderQr {
  Matrix r;
  std::vector<std::vector<double>> reflectors;  // reflector p acts on rows p..d-1
  std::vector<Index> perm;
  Index rank = 0;
};

HouseholderQr householder_qr(const Matrix& y, bool pivot, double rel_tol) {
  HouseholderQr qr{y, {}, std::vector<Index>(y.cols()), 0};
  std::iota(qr.perm.begin(), qr.perm.end(), Index{0});
  Matrix& r = qr.r;
  const Index d = r.rows();
  const Index n = r.cols();
  const Index steps = std::min(d, n);
  double first_pivot = 0.0;

  for (Index p = 0; p < steps; ++p) {
    if (pivot) {
      Index best = p;
      double best_norm = -1.0;
      for (Index j = p; j < n; ++j) {
        const double nj = norm2(r.col(j).subspan(p));
        if (nj > best_norm) {
          best_norm = nj;
          best = j;
        }
      }
      if (best != p) {
        std::swap_ranges(r.col(p).begin(), r.col(p).end(), r.col(best).begin());
        std::swap(qr.perm[p], qr.perm[best]);
      }
    }
    auto x = r.col(p).subspan(p);
    const double nrm = norm2(x);
    if (p == 0) first_pivot = nrm;
    if (nrm == 0.0 || nrm < rel_tol * first_pivot) break;

    std::vector<double> v(x.begin(), x.end());
    const double alpha = x[0] >= 0.0 ? -nrm : nrm;
    v[0] -= alpha;
    const double nv = norm2(v);
    for (double& vi : v) vi /= nv;
    for (Index j = p; j < n; ++j) {
      auto c = r.col(j).subspan(p);
      const double s = 2.0 * dot(v, c);
      for (Index i = 0; i < c.size(); ++i) c[i] -= s * v[i];
    }
    qr.reflectors.push_back(std::move(v));
    qr.rank = p + 1;
  }
  return qr;
}

Matrix form_q(const HouseholderQr& qr, Index d) {
  const Index r = qr.reflectors.size();
  Matrix q(d, r);
  for (Index j = 0; j < r; ++j) q(j, j) = 1.0;
  for (Index p = r; p-- > 0;) {
    const auto& v = qr.reflectors[p];
    for (Index j = 0; j < r; ++j) {
      auto c = q.col(j).subspan(p);
      const double s = 2.0 * dot(v, c);
      for (Index i = 0; i < c.size(); ++i) c[i] -= s * v[i];
    }
  }
  return q;
}

// Gram-Schmidt completion of zero columns of `w` (those flagged in `missing`)
// against the already orthonormal ones.
void complete_orthonormal(Matrix& w, const std::vector<bool>& missing) {
  const Index p = w.rows();
  Index candidate = 0;
  for (Index j = 0; j < w.cols(); ++j) {
    if (!missing[j]) continue;
    for (; candidate < p; ++candidate) {
      std::vector<double> e(p, 0.0);
      e[candidate] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (Index l = 0; l < w.cols(); ++l) {
          if (l == j || (missing[l] && l > j)) continue;
          const auto wl = w.col(l);
          const double c = dot(wl, e);
          for (Index i = 0; i < p; ++i) e[i] -= c * wl[i];
        }
      }
      const double ne = norm2(e);
      if (ne > 0.5) {
        for (Index i = 0; i < p; ++i) w(i, j) = e[i] / ne;
        ++candidate;
        break;
      }
    }
  }
}

}  // namespace

double spectral_norm(const Matrix& a, double tol) {
  require_nonempty(a, "spectral_norm input");
  require_finite(a, "spectral_norm input");
  if (!(tol > 0.0)) throw Error(ErrorCode::kBadShape, "spectral_norm tolerance must be > 0");
  const double scale = max_abs(a);
  if (scale == 0.0) return 0.0;
  const Matrix scaled = (1.0 / scale) * a;
  const Matrix g = a.rows() <= a.cols() ? gram_of_rows(scaled) : gram_of_cols(scaled);
  const Index n = g.rows();

  // The all-ones start can be orthogonal to the top eigenvector, so a second
  // fixed start vector is tried and the larger Rayleigh quotient kept.
  std::vector<double> ones(n, 1.0);
  std::vector<double> alternating(n);
  for (Index i = 0; i < n; ++i) alternating[i] = (i % 2 == 0 ? 1.0 : -1.0) * (1.0 + 0.5 * std::sin(double(i) + 1.0));
  const double lambda = std::max(power_iterate(g, std::move(ones), tol),
                                 power_iterate(g, std::move(alternating), tol));
  return scale * std::sqrt(std::max(lambda, 0.0));
}

SvdResult svd(const Matrix& a) {
  require_nonempty(a, "svd input");
  require_finite(a, "svd input");
  const bool wide = a.rows() <= a.cols();
  const double scale = max_abs(a);
  const double inv_scale = scale > 0.0 ? 1.0 / scale : 1.0;

  // Orthogonalize the columns of x = A^T (wide) or A (tall); n = min(d, m).
  Matrix x = inv_scale * (wide ? transpose(a) : a);
  const Index p = x.rows();
  const Index n = x.cols();
  Matrix v = Matrix::identity(n);
  const double tol = kEps * std::sqrt(static_cast<double>(p));
  std::vector<double> sq(n);

  for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
    for (Index j = 0; j < n; ++j) sq[j] = dot(x.col(j), x.col(j));
    bool rotated = false;
    for (Index i = 0; i + 1 < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        const double alpha = sq[i];
        const double beta = sq[j];
        if (alpha == 0.0 || beta == 0.0) continue;
        double* xi = x.col(i).data();
        double* xj = x.col(j).data();
        const double gamma = dot(x.col(i), x.col(j));
        if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Index r = 0; r < p; ++r) {
          const double a_i = xi[r];
          const double a_j = xj[r];
          xi[r] = c * a_i - s * a_j;
          xj[r] = s * a_i + c * a_j;
        }
        double* vi = v.col(i).data();
        double* vj = v.col(j).data();
        for (Index r = 0; r < n; ++r) {
          const double a_i = vi[r];
          const double a_j = vj[r];
          vi[r] = c * a_i - s * a_j;
          vj[r] = s * a_i + c * a_j;
        }
        sq[i] = alpha - t * gamma;
        sq[j] = beta + t * gamma;
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(n);
  for (Index j = 0; j < n; ++j) sigma[j] = norm2(x.col(j));
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index l, Index r) { return sigma[l] > sigma[r]; });

  Matrix w(p, n);
  Matrix vs(n, n);
  std::vector<double> s(n);
  std::vector<bool> missing(n, false);
  for (Index j = 0; j < n; ++j) {
    const Index src = order[j];
    s[j] = sigma[src] * scale;
    std::copy_n(v.col(src).data(), n, vs.col(j).data());
    if (sigma[src] > 0.0) {
      for (Index r = 0; r < p; ++r) w(r, j) = x(r, src) / sigma[src];
    } else {
      missing[j] = true;
    }
  }
  if (std::find(missing.begin(), missing.end(), true) != missing.end()) {
    complete_orthonormal(w, missing);
  }

  // x V = W diag(s): for x = A^T this gives A = V diag(s) W^T.
  if (wide) return SvdResult{std::move(vs), std::move(s), std::move(w)};
  return SvdResult{std::move(w), std::move(s), std::move(vs)};
}

SvdResult svd_truncated(const Matrix& a, Index k) {
  require_nonempty(a, "svd_truncated input");
  const Index t = std::min(a.rows(), a.cols());
  if (k < 1 || k > t) {
    throw Error(ErrorCode::kBadRank,
                "k = " + std::to_string(k) + " outside [1, " + std::to_string(t) + "]");
  }
  SvdResult full = svd(a);
  if (k == t) return full;
  Matrix u(full.u.rows(), k);
  Matrix v(full.v.rows(), k);
  for (Index j = 0; j < k; ++j) {
    std::copy_n(full.u.col(j).data(), u.rows(), u.col(j).data());
    std::copy_n(full.v.col(j).data(), v.rows(), v.col(j).data());
  }
  full.s.resize(k);
  return SvdResult{std::move(u), std::move(full.s), std::move(v)};
}

std::vector<double> singular_values(const Matrix& a) { return svd(a).s; }

Index pivoted_qr_rank(const Matrix& y, double rel_tol) {
  require_nonempty(y, "rank input");
  require_finite(y, "rank input");
  return householder_qr(y, true, rel_tol).rank;
}

Matrix orthonormalize(const Matrix& y) {
  require_nonempty(y, "orthonormalize input");
  require_finite(y, "orthonormalize input");
  if (y.rows() < y.cols()) {
    throw Error(ErrorCode::kBadShape, "orthonormalize needs rows >= cols");
  }
  const HouseholderQr pivoted = householder_qr(y, true, kRankPivotTol);
  if (pivoted.rank == 0) return Matrix(y.rows(), 0);
  std::vector<Index> chosen(pivoted.perm.begin(), pivoted.perm.begin() + pivoted.rank);
  std::sort(chosen.begin(), chosen.end());
  if (chosen.size() == y.cols()) {
    return form_q(householder_qr(y, false, 0.0), y.rows());
  }
  return form_q(householder_qr(select_columns(y, chosen), false, 0.0), y.rows());
}

SymmetricEigen symmetric_eigen(const Matrix& s) {
  require_nonempty(s, "symmetric_eigen input");
  require_finite(s, "symmetric_eigen input");
  if (s.rows() != s.cols()) throw Error(ErrorCode::kBadShape, "symmetric_eigen needs a square matrix");
  const Index n = s.rows();
  const double sym_tol = 1e-10 * std::max(1.0, max_abs(s));
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i)
      if (std::abs(s(i, j) - s(j, i)) > sym_tol) {
        throw Error(ErrorCode::kNotSymmetric, "asymmetry at (" + std::to_string(i) + ", " +
                                                  std::to_string(j) + ")");
      }

  Matrix a = s;
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) a(i, j) = a(j, i) = 0.5 * (s(i, j) + s(j, i));
  Matrix v = Matrix::identity(n);
  const double floor = 1e-18 * std::max(frobenius_norm(a), std::numeric_limits<double>::min());

  for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
    double off = 0.0;
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < j; ++i) off = std::max(off, std::abs(a(i, j)));
    if (off <= floor) break;
    for (Index p = 0; p + 1 < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= floor) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        for (Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index l, Index r) { return a(l, l) > a(r, r); });
  SymmetricEigen out{std::vector<double>(n), Matrix(n, n)};
  for (Index j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    std::copy_n(v.col(order[j]).data(), n, out.vectors.col(j).data());
  }
  return out;
}

Matrix psd_sqrt(const Matrix& l) {
  const SymmetricEigen eig = symmetric_eigen(l);
  const Index n = l.rows();
  const double norm = std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
  const double floor = -1e-10 * norm;
  Matrix c(n, n);
  for (Index k = 0; k < n; ++k) {
    double lambda = eig.values[k];
    if (lambda < floor) {
      throw Error(ErrorCode::kNotPsd, "eigenvalue " + std::to_string(lambda));
    }
    lambda = std::sqrt(std::max(lambda, 0.0));
    if (lambda == 0.0) continue;
    const auto vk = eig.vectors.col(k);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) c(i, j) += lambda * vk[i] * vk[j];
  }
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) c(i, j) = c(j, i) = 0.5 * (c(i, j) + c(j, i));
  return c;
}

}  // namespace sepnmf
