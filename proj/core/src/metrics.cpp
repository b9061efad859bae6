#include "sepnmf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "sepnmf/error.hpp"

namespace sepnmf {

double recovery_rate(const IndexSet& found, const IndexSet& truth) {
  if (found.size() != truth.size() || truth.empty()) {
    throw Error(ErrorCode::kSizeMismatch, "found " + std::to_string(found.size()) +
                                              " indices against " +
                                              std::to_string(truth.size()) + " true ones");
  }
  Index hits = 0;
  for (Index i : found)
    if (truth.contains(i)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double spectral_angle_distance(std::span<const double> f, std::span<const double> fhat) {
  if (f.size() != fhat.size()) {
    throw Error(ErrorCode::kSizeMismatch, "spectra differ in length");
  }
  const double nf = norm2(f);
  const double ng = norm2(fhat);
  if (nf == 0.0 || ng == 0.0) throw Error(ErrorCode::kZeroVector, "spectral angle of a zero vector");
  const double c = std::clamp(dot(f, fhat) / (nf * ng), -1.0, 1.0);
  return std::acos(c);
}

std::vector<double> project_to_simplex(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Index j = 0; j < s.size(); ++j) {
    cumulative += s[j];
    const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (s[j] - t > 0.0) theta = t;
  }
  std::vector<double> w(v.size());
  for (Index i = 0; i < v.size(); ++i) w[i] = std::max(v[i] - theta, 0.0);
  return w;
}

namespace {

struct QuadraticOnSimplex {
  const Matrix& gram;  // F^T F
  double lipschitz;

  std::vector<double> gradient(std::span<const double> w, std::span<const double> c) const {
    const Index k = w.size();
    std::vector<double> g(k);
    for (Index i = 0; i < k; ++i) g[i] = -c[i];
    for (Index j = 0; j < k; ++j)
      for (Index i = 0; i < k; ++i) g[i] += gram(i, j) * w[j];
    return g;
  }

  std::vector<double> step(std::span<const double> y, std::span<const double> g) const {
    std::vector<double> z(y.size());
    for (Index i = 0; i < y.size(); ++i) z[i] = y[i] - g[i] / lipschitz;
    return project_to_simplex(z);
  }

  double kkt(std::span<const double> w, std::span<const double> c) const {
    const std::vector<double> p = step(w, gradient(w, c));
    double r = 0.0;
    for (Index i = 0; i < w.size(); ++i) r = std::max(r, std::abs(w[i] - p[i]));
    return r;
  }
};

}  // namespace

AbundanceResult estimate_abundances(const Matrix& f, const Matrix& a) {
  require_nonempty(f, "abundance basis");
  require_finite(f, "abundance basis");
  require_finite(a, "abundance data");
  if (f.rows() != a.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "basis has " + std::to_string(f.rows()) +
                                                   " rows, data has " + std::to_string(a.rows()));
  }
  const Index k = f.cols();
  const Index m = a.cols();
  if (f.rows() < k || pivoted_qr_rank(f) < k) {
    throw Error(ErrorCode::kRankDeficientBasis, "basis rank below " + std::to_string(k));
  }

  const Matrix gram = gram_of_cols(f);
  const Matrix fta = transpose_times(f, a);
  const double smax = spectral_norm(f);
  const QuadraticOnSimplex problem{gram, smax * smax};

  AbundanceResult out;
  out.w = Matrix(k, m);
  out.residuals.resize(m);
  out.kkt.resize(m);
  out.iterations.resize(m);

  for (Index col = 0; col < m; ++col) {
    const auto c = fta.col(col);
    std::vector<double> w(k, 1.0 / static_cast<double>(k));
    std::vector<double> y = w;
    double t = 1.0;
    Index it = 0;
    double kkt = problem.kkt(w, c);
    while (kkt > kAbundanceKktTol && it < kAbundanceMaxIterations) {
      ++it;
      std::vector<double> next = problem.step(y, problem.gradient(y, c));
      // Restart momentum when the step moves against the previous direction.
      double trend = 0.0;
      for (Index i = 0; i < k; ++i) trend += (y[i] - next[i]) * (next[i] - w[i]);
      if (trend > 0.0) {
        t = 1.0;
        y = w;
        next = problem.step(y, problem.gradient(y, c));
      }
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      for (Index i = 0; i < k; ++i) y[i] = next[i] + (t - 1.0) / t_next * (next[i] - w[i]);
      t = t_next;
      w = std::move(next);
      kkt = problem.kkt(w, c);
    }
    std::copy(w.begin(), w.end(), out.w.col(col).begin());
    out.kkt[col] = kkt;
    out.iterations[col] = it;
    double r2 = 0.0;
    for (Index i = 0; i < f.rows(); ++i) {
      double fi = -a(i, col);
      for (Index j = 0; j < k; ++j) fi += f(i, j) * w[j];
      r2 += fi * fi;
    }
    out.residuals[col] = std::sqrt(r2);
  }
  return out;
}

ApproximationError approximation_error(const Matrix& a, const Matrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "approximation has a different shape");
  }
  ApproximationError e;
  e.abs = spectral_norm(a - b, tol);
  const double na = spectral_norm(a, tol);
  e.rel = na > 0.0 ? e.abs / na : 0.0;
  return e;
}

}  // namespace sepnmf
