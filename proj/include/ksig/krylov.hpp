#pragma once

// Restarted GMRES with right preconditioning, matrix-free.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace ksig {

struct KrylovResult {
  bool converged = false;
  int iterations = 0;
  double relative_residual = 0.0;
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

}  // namespace detail

/// Solves A x = b for x starting from x = 0. `apply(in, out)` computes A in,
/// `precondition(in, out)` applies M^{-1}; the Krylov space is built for
/// A M^{-1} so the reported residual is the true one.
template <class Apply, class Precondition>
KrylovResult gmres(Apply&& apply, Precondition&& precondition, std::span<const double> rhs, std::span<double> x,
                   double relative_tolerance, int max_iterations, int restart) {
  const std::size_t n = rhs.size();
  KrylovResult result;
  std::fill(x.begin(), x.end(), 0.0);
  const double bnorm = detail::norm2(rhs);
  if (bnorm == 0.0) {
    result.converged = true;
    return result;
  }

  const int m = std::max(1, restart);
  std::vector<std::vector<double>> basis(static_cast<std::size_t>(m + 1), std::vector<double>(n));
  std::vector<double> hess(static_cast<std::size_t>((m + 1) * m), 0.0);
  auto H = [&](int r, int c) -> double& { return hess[static_cast<std::size_t>(r * m + c)]; };
  std::vector<double> cs(static_cast<std::size_t>(m)), sn(static_cast<std::size_t>(m)), g(static_cast<std::size_t>(m + 1));
  std::vector<double> w(n), z(n), r(n);

  int total = 0;
  while (total < max_iterations) {
    // r = b - A x
    apply(std::span<const double>(x.data(), n), std::span<double>(r));
    for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
    const double beta = detail::norm2(r);
    result.relative_residual = beta / bnorm;
    if (result.relative_residual <= relative_tolerance) {
      result.converged = true;
      break;
    }
    for (std::size_t i = 0; i < n; ++i) basis[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;

    int j = 0;
    for (; j < m && total < max_iterations; ++j, ++total) {
      precondition(std::span<const double>(basis[static_cast<std::size_t>(j)]), std::span<double>(z));
      apply(std::span<const double>(z), std::span<double>(w));
      for (int i = 0; i <= j; ++i) {
        const double hij = detail::dot(w, basis[static_cast<std::size_t>(i)]);
        H(i, j) = hij;
        const auto& vi = basis[static_cast<std::size_t>(i)];
        for (std::size_t p = 0; p < n; ++p) w[p] -= hij * vi[p];
      }
      const double hnext = detail::norm2(w);
      H(j + 1, j) = hnext;
      if (hnext > 0.0) {
        auto& vn = basis[static_cast<std::size_t>(j + 1)];
        for (std::size_t p = 0; p < n; ++p) vn[p] = w[p] / hnext;
      }
      for (int i = 0; i < j; ++i) {
        const double a = H(i, j);
        const double b = H(i + 1, j);
        H(i, j) = cs[i] * a + sn[i] * b;
        H(i + 1, j) = -sn[i] * a + cs[i] * b;
      }
      const double a = H(j, j);
      const double b = H(j + 1, j);
      const double rho = std::hypot(a, b);
      cs[j] = rho > 0.0 ? a / rho : 1.0;
      sn[j] = rho > 0.0 ? b / rho : 0.0;
      H(j, j) = rho;
      H(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      if (std::abs(g[j + 1]) / bnorm <= relative_tolerance || hnext == 0.0) {
        ++j;
        ++total;
        break;
      }
    }

    // y = H^{-1} g, x += M^{-1} V y
    std::vector<double> y(static_cast<std::size_t>(j), 0.0);
    for (int i = j - 1; i >= 0; --i) {
      double s = g[i];
      for (int c = i + 1; c < j; ++c) s -= H(i, c) * y[c];
      y[i] = H(i, i) != 0.0 ? s / H(i, i) : 0.0;
    }
    std::fill(w.begin(), w.end(), 0.0);
    for (int i = 0; i < j; ++i) {
      const auto& vi = basis[static_cast<std::size_t>(i)];
      for (std::size_t p = 0; p < n; ++p) w[p] += y[i] * vi[p];
    }
    precondition(std::span<const double>(w), std::span<double>(z));
    for (std::size_t p = 0; p < n; ++p) x[p] += z[p];
  }
  result.iterations = total;
  if (!result.converged) {
    apply(std::span<const double>(x.data(), n), std::span<double>(r));
    for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
    result.relative_residual = detail::norm2(r) / bnorm;
    result.converged = result.relative_residual <= relative_tolerance;
  }
  return result;
}

}  // namespace ksig
