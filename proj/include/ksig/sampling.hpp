#pragma once

// Portable seeded sampling: a counter-based generator plus samplers for
// Garding-cone eigenvalue vectors, orthogonal matrices and PSD matrices.

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "ksig/linalg.hpp"
#include "ksig/symcone.hpp"

namespace ksig {

/// Counter-based generator: the i-th draw is a fixed function of (seed,
/// stream, i), so any implementation of the mixing function reproduces the
/// same sequence. Mixing is the SplitMix64 finaliser.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

  [[nodiscard]] static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() noexcept { return mix(key_ ^ mix(counter_++)); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; always consumes two draws.
  double normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Haar-distributed orthogonal matrix from the QR factorisation of a Gaussian
/// matrix, with the sign of diag(R) folded into Q.
[[nodiscard]] inline Eigen::MatrixXd random_orthogonal(int n, CounterRng& rng) {
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

/// Samples below this cone margin are treated as boundary cases and skipped.
inline constexpr double kBoundarySkip = 1e-12;

/// Rejection sampler: lambda uniform in [-1, 2]^n until sigma_j > kBoundarySkip
/// for every j <= order.
[[nodiscard]] inline std::vector<double> sample_cone_eigenvalues(int n, int order, CounterRng& rng) {
  std::vector<double> lambda(static_cast<std::size_t>(n));
  for (;;) {
    for (auto& v : lambda) v = rng.uniform(-1.0, 2.0);
    if (in_gamma_cone(std::span<const double>(lambda), order, kBoundarySkip)) return lambda;
  }
}

/// Near-boundary sampler: bisects along the segment from an interior sample
/// towards an exterior one until the cone margin matches a log-uniform target
/// in [1e-11, 1e-6].
[[nodiscard]] inline std::vector<double> sample_cone_boundary(int n, int order, CounterRng& rng) {
  const auto inside = sample_cone_eigenvalues(n, order, rng);
  std::vector<double> outside(static_cast<std::size_t>(n));
  do {
    for (auto& v : outside) v = rng.uniform(-1.0, 2.0);
  } while (in_gamma_cone(std::span<const double>(outside), order));
  const double target = std::pow(10.0, rng.uniform(-11.0, -6.0));

  std::vector<double> point(inside.size());
  auto at = [&](double s) {
    for (std::size_t i = 0; i < point.size(); ++i) point[i] = inside[i] + s * (outside[i] - inside[i]);
    return cone_margin(std::span<const double>(point), order);
  };
  double lo = 0.0;  // margin(lo) >= target
  double hi = 1.0;  // margin(hi) < target
  if (at(lo) < target) return inside;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (at(mid) >= target ? lo : hi) = mid;
  }
  at(lo);
  return point;
}

/// R diag(lambda) R^T with lambda from the cone sampler; a fraction of the
/// draws come from the near-boundary sampler.
[[nodiscard]] inline SymTensor sample_cone_matrix(int n, int order, CounterRng& rng,
                                                  double boundary_fraction = 0.0) {
  const bool boundary = boundary_fraction > 0.0 && rng.uniform() < boundary_fraction;
  const auto lambda = boundary ? sample_cone_boundary(n, order, rng) : sample_cone_eigenvalues(n, order, rng);
  return conjugate_diagonal(random_orthogonal(n, rng), lambda);
}

/// Random positive semi-definite matrix; roughly one draw in five is rank
/// deficient.
[[nodiscard]] inline SymTensor sample_psd(int n, CounterRng& rng) {
  std::vector<double> d(static_cast<std::size_t>(n));
  const bool deficient = rng.uniform() < 0.2;
  for (auto& v : d) v = rng.uniform(0.0, 1.0);
  if (deficient) d[static_cast<std::size_t>(rng.next_u64() % static_cast<std::uint64_t>(n))] = 0.0;
  return conjugate_diagonal(random_orthogonal(n, rng), d);
}

}  // namespace ksig
