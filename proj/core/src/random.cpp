#include "sepnmf/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sepnmf/error.hpp"

namespace sepnmf {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(base) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

Rng::Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform_left_open(double lo, double hi) {
  // 1 - u lies in (0, 1].
  return lo + (hi - lo) * (1.0 - uniform());
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) return 0;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 == 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double Rng::log_gamma_variate(double shape) {
  if (!(shape > 0.0)) throw Error(ErrorCode::kBadShape, "gamma shape must be positive");
  if (shape < 1.0) {
    // Gamma(a) = Gamma(a + 1) * U^(1/a).
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return log_gamma_variate(shape + 1.0) + std::log(u) / shape;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d * v);
    if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return std::log(d * v);
  }
}

std::vector<double> Rng::dirichlet(std::span<const double> alpha) {
  std::vector<double> logs(alpha.size());
  for (Index j = 0; j < alpha.size(); ++j) logs[j] = log_gamma_variate(alpha[j]);
  const double top = *std::max_element(logs.begin(), logs.end());
  double total = 0.0;
  for (double& v : logs) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : logs) v /= total;
  return logs;
}

std::vector<Index> Rng::permutation(Index n) {
  std::vector<Index> p(n);
  for (Index i = 0; i < n; ++i) p[i] = i;
  for (Index i = n; i > 1; --i) {
    const Index j = static_cast<Index>(below(i));
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

Matrix Rng::gaussian_matrix(Index rows, Index cols) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = normal();
  return m;
}

Matrix Rng::uniform_matrix(Index rows, Index cols) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = uniform();
  return m;
}

}  // namespace sepnmf
