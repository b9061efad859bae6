#include "sepnmf/mvee.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sepnmf/linalg.hpp"

namespace sepnmf {

namespace {

double quadratic_form(const Matrix& s, std::span<const double> x) {
  const Index n = x.size();
  double acc = 0.0;
  for (Index j = 0; j < n; ++j) {
    double row = 0.0;
    for (Index i = 0; i < n; ++i) row += s(i, j) * x[i];
    acc += row * x[j];
  }
  return acc;
}

// Inverse of the design matrix with eigenvalues floored at 1e-14 * trace.
Matrix design_inverse(const Matrix& m) {
  const SymmetricEigen eig = symmetric_eigen(m);
  const Index n = m.rows();
  double trace = 0.0;
  for (double v : eig.values) trace += v;
  const double floor = 1e-14 * trace;
  Matrix inv(n, n);
  for (Index l = 0; l < n; ++l) {
    const double w = 1.0 / std::max(eig.values[l], floor);
    const auto v = eig.vectors.col(l);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) inv(i, j) += w * v[i] * v[j];
  }
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) {
      const double s = 0.5 * (inv(i, j) + inv(j, i));
      inv(i, j) = s;
      inv(j, i) = s;
    }
  return inv;
}

Matrix design_matrix(const Matrix& p, std::span<const Index> points,
                     std::span<const double> u) {
  const Index k = p.rows();
  Matrix m(k, k);
  for (Index t = 0; t < points.size(); ++t) {
    if (u[t] == 0.0) continue;
    const auto x = p.col(points[t]);
    for (Index j = 0; j < k; ++j)
      for (Index i = 0; i < k; ++i) m(i, j) += u[t] * x[i] * x[j];
  }
  return m;
}

// Dual ascent on a working set of points.
class WorkingSetSolver {
 public:
  WorkingSetSolver(const Matrix& p, const MveeOptions& options)
      : p_(p), opt_(options), k_(static_cast<double>(p.rows())), member_(p.cols(), 0) {}

  void add(Index point, double weight) {
    points_.push_back(point);
    u_.push_back(weight);
    member_[point] = 1;
  }
  bool contains(Index point) const { return member_[point] != 0; }

  const Matrix& inverse() const { return minv_; }

  // Ascends until every working point has kappa <= k(1 + eps) and every
  // weighted one kappa >= k(1 - eps), both on a freshly inverted design.
  // Returns false when the global iteration budget runs out.
  bool run(Index& iterations) {
    refresh();
    Index since_refresh = 0;
    for (;;) {
      Index jp = 0;
      Index jm = points_.size();
      for (Index t = 0; t < points_.size(); ++t) {
        if (kappa_[t] > kappa_[jp]) jp = t;
        if (u_[t] > 0.0 && (jm == points_.size() || kappa_[t] < kappa_[jm])) jm = t;
      }
      const double up = kappa_[jp] / k_ - 1.0;
      const double down = 1.0 - kappa_[jm] / k_;
      if (up <= opt_.eps && down <= opt_.eps) {
        if (since_refresh == 0) return true;
        refresh();
        since_refresh = 0;
        continue;
      }
      if (iterations >= opt_.max_iterations) return false;
      ++iterations;

      const bool forward = up >= down;
      const Index j = forward ? jp : jm;
      const double kap = kappa_[j];
      double beta;
      bool drop = false;
      if (forward) {
        beta = (kap - k_) / (k_ * (kap - 1.0));
      } else {
        const double bound = -u_[j] / (1.0 - u_[j]);
        beta = kap > 1.0 ? (kap - k_) / (k_ * (kap - 1.0)) : 0.0;
        if (!(beta < 0.0) || beta <= bound) {
          beta = bound;
          drop = true;
        }
      }
      step(j, beta, drop);
      if (++since_refresh >= opt_.refresh_every || stale_) {
        refresh();
        since_refresh = 0;
      }
    }
  }

  void refresh() {
    minv_ = design_inverse(design_matrix(p_, points_, u_));
    kappa_.resize(points_.size());
    for (Index t = 0; t < points_.size(); ++t) kappa_[t] = quadratic_form(minv_, p_.col(points_[t]));
    stale_ = false;
  }

  std::vector<double> full_weights(Index m) const {
    std::vector<double> w(m, 0.0);
    for (Index t = 0; t < points_.size(); ++t) w[points_[t]] = u_[t];
    return w;
  }

 private:
  // u <- (1 - beta) u + beta e_j with Sherman-Morrison updates of M^{-1}
  // and of every kappa.
  void step(Index j, double beta, bool drop) {
    const Index k = p_.rows();
    const double c = 1.0 - beta;
    const auto x = p_.col(points_[j]);
    std::vector<double> v(k, 0.0);
    for (Index l = 0; l < k; ++l)
      for (Index i = 0; i < k; ++i) v[i] += minv_(i, l) * x[l];
    const double denom = c + beta * kappa_[j];
    if (!(denom > 1e-8 * c)) stale_ = true;

    for (double& w : u_) w *= c;
    u_[j] = drop ? 0.0 : u_[j] + beta;
    if (stale_) return;

    const double g = beta / denom;
    for (Index l = 0; l < k; ++l)
      for (Index i = 0; i < k; ++i) minv_(i, l) = (minv_(i, l) - g * v[i] * v[l]) / c;
    for (Index t = 0; t < points_.size(); ++t) {
      const double pv = dot(p_.col(points_[t]), v);
      kappa_[t] = (kappa_[t] - g * pv * pv) / c;
    }
  }

  const Matrix& p_;
  const MveeOptions& opt_;
  double k_;
  std::vector<char> member_;
  std::vector<Index> points_;
  std::vector<double> u_;
  std::vector<double> kappa_;
  Matrix minv_;
  bool stale_ = false;
};

Ellipsoid make_ellipsoid(const Matrix& p, std::vector<double> weights, Index iterations,
                         Index rounds) {
  const Index k = p.rows();
  std::vector<Index> all(p.cols());
  std::iota(all.begin(), all.end(), Index{0});
  Ellipsoid e;
  e.l = (1.0 / static_cast<double>(k)) * design_inverse(design_matrix(p, all, weights));
  double worst = -1.0;
  for (double v : ellipsoid_support(e.l, p)) worst = std::max(worst, v - 1.0);
  e.max_violation = worst;
  std::vector<Index> support;
  for (Index i = 0; i < weights.size(); ++i)
    if (weights[i] > kMveeSupportTol) support.push_back(i);
  e.support = IndexSet(std::move(support));
  e.weights = std::move(weights);
  e.iterations = iterations;
  e.rounds = rounds;
  return e;
}

}  // namespace

std::vector<double> ellipsoid_support(const Matrix& l, const Matrix& p) {
  if (l.rows() != l.cols() || l.rows() != p.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "ellipsoid is " + std::to_string(l.rows()) + "x" + std::to_string(l.cols()) +
                    ", points have " + std::to_string(p.rows()) + " rows");
  }
  std::vector<double> out(p.cols());
  for (Index i = 0; i < p.cols(); ++i) out[i] = quadratic_form(l, p.col(i));
  return out;
}

std::vector<double> ellipsoid_support(const Ellipsoid& e, const Matrix& p) {
  return ellipsoid_support(e.l, p);
}

Ellipsoid solve_mvee(const Matrix& p, double eps) {
  MveeOptions options;
  options.eps = eps;
  return solve_mvee(p, options);
}

Ellipsoid solve_mvee(const Matrix& p, const MveeOptions& options) {
  require_nonempty(p, "mvee points");
  require_finite(p, "mvee points");
  if (!(options.eps > 0.0 && options.eps < 0.5)) {
    throw Error(ErrorCode::kBadShape, "mvee eps must lie in (0, 0.5)");
  }
  const Index k = p.rows();
  const Index m = p.cols();
  if (m < k || pivoted_qr_rank(transpose(p)) < k) {
    throw Error(ErrorCode::kRankDeficient, "points span fewer than " + std::to_string(k) +
                                               " dimensions");
  }

  // Working set: the 10k longest points plus an SPA pick, which spans R^k.
  std::vector<double> sq(m);
  for (Index i = 0; i < m; ++i) sq[i] = dot(p.col(i), p.col(i));
  std::vector<Index> order(m);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return sq[a] > sq[b]; });
  std::vector<Index> initial(order.begin(), order.begin() + std::min(m, 10 * k));
  for (Index i : spa_select(p, k))
    if (std::find(initial.begin(), initial.end(), i) == initial.end()) initial.push_back(i);

  WorkingSetSolver solver(p, options);
  for (Index i : initial) solver.add(i, 1.0 / static_cast<double>(initial.size()));

  const double kd = static_cast<double>(k);
  Index iterations = 0;
  for (Index round = 1; round <= options.max_rounds; ++round) {
    if (!solver.run(iterations)) {
      throw MveeNoConvergence("mvee hit " + std::to_string(options.max_iterations) +
                                  " iterations",
                              make_ellipsoid(p, solver.full_weights(m), iterations, round));
    }
    std::vector<std::pair<double, Index>> violators;
    for (Index i = 0; i < m; ++i) {
      const double kappa = quadratic_form(solver.inverse(), p.col(i));
      if (kappa > kd * (1.0 + options.eps) && !solver.contains(i)) violators.emplace_back(kappa, i);
    }
    if (violators.empty()) {
      return make_ellipsoid(p, solver.full_weights(m), iterations, round);
    }
    const Index batch = std::min(k, violators.size());
    std::partial_sort(violators.begin(), violators.begin() + batch, violators.end(),
                      [](const auto& a, const auto& b) {
                        return a.first > b.first || (a.first == b.first && a.second < b.second);
                      });
    for (Index t = 0; t < batch; ++t) solver.add(violators[t].second, 0.0);
  }
  throw MveeNoConvergence(
      "mvee hit " + std::to_string(options.max_rounds) + " cutting-plane rounds",
      make_ellipsoid(p, solver.full_weights(m), iterations, options.max_rounds));
}

}  // namespace sepnmf
