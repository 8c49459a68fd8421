#pragma once

// Elementary symmetric polynomials of eigenvalue vectors and symmetric
// matrices, Garding cones, Newton transformation tensors and the quotient
// operator of the Krylov-type continuation family.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ksig {

inline constexpr int kMaxDim = 5;
inline constexpr int kMaxPacked = kMaxDim * (kMaxDim + 1) / 2;

/// Raised when an order or dimension argument is outside its admissible range.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when a matrix leaves the admissible cone Gamma_{k-1}.
///
/// Carries the first order j with sigma_j <= margin and the offending value.
class InadmissibleState : public std::runtime_error {
 public:
  InadmissibleState(int failing_order, double failing_value, const std::string& what)
      : std::runtime_error(what), failing_order_(failing_order), failing_value_(failing_value) {}

  [[nodiscard]] int failing_order() const noexcept { return failing_order_; }
  [[nodiscard]] double failing_value() const noexcept { return failing_value_; }

 private:
  int failing_order_;
  double failing_value_;
};

namespace detail {

inline void require_dim(int n) {
  if (n < 1 || n > kMaxDim) {
    throw DomainError("dimension " + std::to_string(n) + " outside [1, " +
                      std::to_string(kMaxDim) + "]");
  }
}

}  // namespace detail

/// Binomial coefficient C(n, k) as a double; zero outside 0 <= k <= n.
[[nodiscard]] constexpr double binomial(int n, int k) noexcept {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

/// n x n real symmetric matrix, n <= kMaxDim, stored as its packed upper
/// triangle in row-major order: (0,0), (0,1), ..., (0,n-1), (1,1), ...
template <std::floating_point Real>
class SymmetricTensor {
 public:
  SymmetricTensor() = default;

  explicit SymmetricTensor(int dim) : dim_(dim) { detail::require_dim(dim); }

  static SymmetricTensor identity(int dim, Real scale = Real(1)) {
    SymmetricTensor m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = scale;
    return m;
  }

  static SymmetricTensor diagonal(std::span<const Real> d) {
    SymmetricTensor m(static_cast<int>(d.size()));
    for (int i = 0; i < m.dim(); ++i) m(i, i) = d[static_cast<std::size_t>(i)];
    return m;
  }

  /// Builds from a dense row-major array; the upper triangle is used.
  static SymmetricTensor from_dense(int dim, std::span<const Real> row_major) {
    SymmetricTensor m(dim);
    if (row_major.size() != static_cast<std::size_t>(dim * dim)) {
      throw DomainError("dense matrix size does not match dimension");
    }
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) m(i, j) = row_major[static_cast<std::size_t>(i * dim + j)];
    return m;
  }

  static SymmetricTensor from_packed(int dim, std::span<const Real> packed) {
    SymmetricTensor m(dim);
    if (packed.size() != static_cast<std::size_t>(packed_size(dim))) {
      throw DomainError("packed size does not match dimension");
    }
    std::copy(packed.begin(), packed.end(), m.entries_.begin());
    return m;
  }

  [[nodiscard]] static constexpr int packed_size(int dim) noexcept { return dim * (dim + 1) / 2; }

  [[nodiscard]] int dim() const noexcept { return dim_; }

  [[nodiscard]] Real operator()(int i, int j) const noexcept { return entries_[index(i, j)]; }
  [[nodiscard]] Real& operator()(int i, int j) noexcept { return entries_[index(i, j)]; }

  [[nodiscard]] std::span<const Real> packed() const noexcept {
    return std::span<const Real>(entries_.data(), static_cast<std::size_t>(packed_size(dim_)));
  }
  [[nodiscard]] std::span<Real> packed() noexcept {
    return std::span<Real>(entries_.data(), static_cast<std::size_t>(packed_size(dim_)));
  }

  [[nodiscard]] Real trace() const noexcept {
    Real s = 0;
    for (int i = 0; i < dim_; ++i) s += (*this)(i, i);
    return s;
  }

  /// Frobenius inner product sum_ij A_ij B_ij.
  [[nodiscard]] Real contract(const SymmetricTensor& other) const noexcept {
    Real s = 0;
    for (int i = 0; i < dim_; ++i) {
      s += (*this)(i, i) * other(i, i);
      for (int j = i + 1; j < dim_; ++j) s += Real(2) * (*this)(i, j) * other(i, j);
    }
    return s;
  }

  [[nodiscard]] Real max_abs() const noexcept {
    Real m = 0;
    for (Real v : packed()) m = std::max(m, std::abs(v));
    return m;
  }

  SymmetricTensor& operator+=(const SymmetricTensor& o) noexcept {
    for (int p = 0; p < packed_size(dim_); ++p) entries_[p] += o.entries_[p];
    return *this;
  }
  SymmetricTensor& operator-=(const SymmetricTensor& o) noexcept {
    for (int p = 0; p < packed_size(dim_); ++p) entries_[p] -= o.entries_[p];
    return *this;
  }
  SymmetricTensor& operator*=(Real s) noexcept {
    for (int p = 0; p < packed_size(dim_); ++p) entries_[p] *= s;
    return *this;
  }

  friend SymmetricTensor operator+(SymmetricTensor a, const SymmetricTensor& b) noexcept { return a += b; }
  friend SymmetricTensor operator-(SymmetricTensor a, const SymmetricTensor& b) noexcept { return a -= b; }
  friend SymmetricTensor operator*(Real s, SymmetricTensor a) noexcept { return a *= s; }
  friend SymmetricTensor operator*(SymmetricTensor a, Real s) noexcept { return a *= s; }

  friend bool operator==(const SymmetricTensor& a, const SymmetricTensor& b) noexcept {
    if (a.dim_ != b.dim_) return false;
    return std::equal(a.packed().begin(), a.packed().end(), b.packed().begin());
  }

 private:
  [[nodiscard]] int index(int i, int j) const noexcept {
    if (i > j) std::swap(i, j);
    return i * dim_ - i * (i - 1) / 2 + (j - i);
  }

  int dim_ = 0;
  std::array<Real, kMaxPacked> entries_{};
};

using SymTensor = SymmetricTensor<double>;

// ---------------------------------------------------------------------------
// Eigenvalue-vector algebra
// ---------------------------------------------------------------------------

/// sigma_k of an eigenvalue vector, sigma_0 = 1.
template <std::floating_point Real>
[[nodiscard]] Real elementary_symmetric(std::span<const Real> lambda, int k) {
  const int n = static_cast<int>(lambda.size());
  if (k < 0 || k > n) {
    throw DomainError("sigma order " + std::to_string(k) + " outside [0, " + std::to_string(n) + "]");
  }
  std::array<Real, kMaxDim + 1> e{};
  e[0] = 1;
  for (int i = 0; i < n; ++i)
    for (int j = std::min(i + 1, k); j >= 1; --j) e[j] += lambda[static_cast<std::size_t>(i)] * e[j - 1];
  return e[k];
}

template <std::floating_point Real>
[[nodiscard]] Real elementary_symmetric(const std::vector<Real>& lambda, int k) {
  return elementary_symmetric(std::span<const Real>(lambda), k);
}

/// All of sigma_0 .. sigma_n for an eigenvalue vector.
template <std::floating_point Real>
[[nodiscard]] std::array<Real, kMaxDim + 1> elementary_symmetric_all(std::span<const Real> lambda) {
  std::array<Real, kMaxDim + 1> e{};
  e[0] = 1;
  const int n = static_cast<int>(lambda.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j >= 1; --j) e[j] += lambda[static_cast<std::size_t>(i)] * e[j - 1];
  return e;
}

// ---------------------------------------------------------------------------
// Matrix algebra: characteristic-coefficient recursion
// ---------------------------------------------------------------------------

/// sigma_0..sigma_order of M together with the Newton transforms T_0..T_order.
///
/// Recursion: T_0 = I, A_j = M T_{j-1}, sigma_j = tr(A_j)/j, T_j = sigma_j I - A_j.
/// T_j = sum_{i<=j} (-1)^i sigma_{j-i} M^i and d sigma_{j+1} / dM = T_j.
template <std::floating_point Real>
struct NewtonExpansion {
  int dim = 0;
  int order = 0;
  std::array<Real, kMaxDim + 1> sigma{};
  std::array<SymmetricTensor<Real>, kMaxDim + 1> transform{};
};

template <std::floating_point Real>
[[nodiscard]] NewtonExpansion<Real> newton_expansion(const SymmetricTensor<Real>& m, int order) {
  const int n = m.dim();
  if (order < 0 || order > n) {
    throw DomainError("expansion order " + std::to_string(order) + " outside [0, " + std::to_string(n) + "]");
  }
  NewtonExpansion<Real> out;
  out.dim = n;
  out.order = order;
  out.sigma[0] = 1;
  out.transform[0] = SymmetricTensor<Real>::identity(n);
  for (int j = 1; j <= order; ++j) {
    const auto& prev = out.transform[j - 1];
    // A = M * T_{j-1}; both are polynomials in M so A is symmetric. Only the
    // upper triangle is formed, from the symmetrised product.
    SymmetricTensor<Real> a(n);
    for (int r = 0; r < n; ++r) {
      for (int c = r; c < n; ++c) {
        Real lhs = 0;
        Real rhs = 0;
        for (int s = 0; s < n; ++s) {
          lhs += m(r, s) * prev(s, c);
          rhs += prev(r, s) * m(s, c);
        }
        a(r, c) = Real(0.5) * (lhs + rhs);
      }
    }
    out.sigma[j] = a.trace() / static_cast<Real>(j);
    auto t = SymmetricTensor<Real>::identity(n, out.sigma[j]);
    t -= a;
    out.transform[j] = t;
  }
  return out;
}

/// sigma_k of the eigenvalues of M (sum of k x k principal minors).
template <std::floating_point Real>
[[nodiscard]] Real sigma_of_matrix(const SymmetricTensor<Real>& m, int k) {
  return newton_expansion(m, k).sigma[k];
}

/// T_k(M) = sum_{j=0..k} (-1)^j sigma_{k-j}(M) M^j, for 0 <= k <= n-1.
template <std::floating_point Real>
[[nodiscard]] SymmetricTensor<Real> newton_transform(const SymmetricTensor<Real>& m, int k) {
  if (k < 0 || k > m.dim() - 1) {
    throw DomainError("Newton transform order " + std::to_string(k) + " outside [0, " +
                      std::to_string(m.dim() - 1) + "]");
  }
  return newton_expansion(m, k).transform[k];
}

// ---------------------------------------------------------------------------
// Garding cones
// ---------------------------------------------------------------------------

namespace detail {

inline void require_cone_index(int k, int n) {
  if (k < 1 || k > n) {
    throw DomainError("cone index " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
}

}  // namespace detail

/// min_{1<=j<=k} sigma_j; the distance-like quantity used for cone margins.
template <std::floating_point Real>
[[nodiscard]] Real cone_margin(std::span<const Real> lambda, int k) {
  detail::require_cone_index(k, static_cast<int>(lambda.size()));
  const auto e = elementary_symmetric_all(lambda);
  Real m = std::numeric_limits<Real>::infinity();
  for (int j = 1; j <= k; ++j) m = std::min(m, e[j]);
  return m;
}

template <std::floating_point Real>
[[nodiscard]] Real cone_margin(const SymmetricTensor<Real>& m, int k) {
  detail::require_cone_index(k, m.dim());
  const auto ex = newton_expansion(m, k);
  Real r = std::numeric_limits<Real>::infinity();
  for (int j = 1; j <= k; ++j) r = std::min(r, ex.sigma[j]);
  return r;
}

/// Gamma_k membership: sigma_j > margin for every 1 <= j <= k.
template <std::floating_point Real>
[[nodiscard]] bool in_gamma_cone(std::span<const Real> lambda, int k, Real margin = Real(0)) {
  return cone_margin(lambda, k) > margin;
}

template <std::floating_point Real>
[[nodiscard]] bool in_gamma_cone(const std::vector<Real>& lambda, int k, Real margin = Real(0)) {
  return in_gamma_cone(std::span<const Real>(lambda), k, margin);
}

template <std::floating_point Real>
[[nodiscard]] bool in_gamma_cone(const SymmetricTensor<Real>& m, int k, Real margin = Real(0)) {
  return cone_margin(m, k) > margin;
}

// ---------------------------------------------------------------------------
// Constants
// ---------------------------------------------------------------------------

/// c(n,k) = sigma_k(e) / sum_{l=0}^{k-2} sigma_l(e), e = (1,...,1).
[[nodiscard]] inline double homotopy_constant(int n, int k) {
  if (k < 3 || k > n) {
    throw DomainError("homotopy constant needs 3 <= k <= n, got n=" + std::to_string(n) +
                      " k=" + std::to_string(k));
  }
  double denom = 0.0;
  for (int l = 0; l <= k - 2; ++l) denom += binomial(n, l);
  return binomial(n, k) / denom;
}

/// Constant of the Newton-MacLaurin bound
///   sigma_l / sigma_{k-1} <= C * (sigma_{k-1} / sigma_k)^{k-1-l}  on Gamma_k,
/// C = C(n,k)^{k-1-l} C(n,l) / C(n,k-1)^{k-l}; equality at e.
[[nodiscard]] inline double newton_maclaurin_constant(int n, int k, int l) {
  if (l < 0 || l > k - 2 || k > n) {
    throw DomainError("Newton-MacLaurin constant needs 0 <= l <= k-2 <= n-2");
  }
  return std::pow(binomial(n, k), k - 1 - l) * binomial(n, l) / std::pow(binomial(n, k - 1), k - l);
}

// ---------------------------------------------------------------------------
// Quotient operator G(M) = sigma_k/sigma_{k-1} - sum_l beta_l sigma_l/sigma_{k-1}
// ---------------------------------------------------------------------------

/// Everything the solver and the monitors need from one quotient evaluation.
template <std::floating_point Real>
struct QuotientEvaluation {
  int dim = 0;
  int k = 0;
  std::array<Real, kMaxDim + 1> sigma{};
  Real leading = 0;                          // G_k = sigma_k / sigma_{k-1}
  std::array<Real, kMaxDim> lower{};         // G_l = -sigma_l / sigma_{k-1}, l = 0..k-2
  Real value = 0;                            // G = G_k + sum_l beta_l G_l
  SymmetricTensor<Real> grad_leading{};      // dG_k / dM
  std::array<SymmetricTensor<Real>, kMaxDim> grad_lower{};  // dG_l / dM
  SymmetricTensor<Real> grad{};              // dG / dM
};

namespace detail {

template <std::floating_point Real>
void check_weights(std::span<const Real> beta, int k) {
  if (static_cast<int>(beta.size()) != k - 1) {
    throw DomainError("expected " + std::to_string(k - 1) + " weights beta_0..beta_{k-2}, got " +
                      std::to_string(beta.size()));
  }
  for (Real b : beta) {
    if (!(b >= 0)) throw DomainError("weights beta_l must be nonnegative");
  }
}

}  // namespace detail

/// Evaluates G (and, when requested, its gradient with respect to M).
/// Throws InadmissibleState unless sigma_j(M) > margin for all j <= k-1.
template <std::floating_point Real>
[[nodiscard]] QuotientEvaluation<Real> evaluate_quotient(const SymmetricTensor<Real>& m, int k,
                                                         std::span<const Real> beta,
                                                         bool with_gradient = true,
                                                         Real margin = Real(0)) {
  const int n = m.dim();
  if (k < 2 || k > n) {
    throw DomainError("quotient operator needs 2 <= k <= n, got k=" + std::to_string(k));
  }
  detail::check_weights(beta, k);

  const auto ex = newton_expansion(m, k);
  for (int j = 1; j <= k - 1; ++j) {
    if (!(ex.sigma[j] > margin)) {
      throw InadmissibleState(j, static_cast<double>(ex.sigma[j]),
                              "matrix outside Gamma_" + std::to_string(k - 1) + ": sigma_" +
                                  std::to_string(j) + " = " + std::to_string(static_cast<double>(ex.sigma[j])));
    }
  }

  QuotientEvaluation<Real> q;
  q.dim = n;
  q.k = k;
  q.sigma = ex.sigma;
  const Real skm1 = ex.sigma[k - 1];
  q.leading = ex.sigma[k] / skm1;
  q.value = q.leading;
  for (int l = 0; l <= k - 2; ++l) {
    q.lower[l] = -ex.sigma[l] / skm1;
    q.value += beta[static_cast<std::size_t>(l)] * q.lower[l];
  }
  if (!with_gradient) return q;

  // d(sigma_a / sigma_{k-1}) = [T_{a-1} sigma_{k-1} - sigma_a T_{k-2}] / sigma_{k-1}^2
  const auto& t_km2 = ex.transform[k - 2];
  const Real inv2 = Real(1) / (skm1 * skm1);
  q.grad_leading = (ex.transform[k - 1] * skm1 - t_km2 * ex.sigma[k]) * inv2;
  q.grad = q.grad_leading;
  for (int l = 0; l <= k - 2; ++l) {
    SymmetricTensor<Real> d = t_km2 * ex.sigma[l];
    if (l >= 1) d -= ex.transform[l - 1] * skm1;
    d *= inv2;  // = -d(sigma_l / sigma_{k-1})
    q.grad_lower[l] = d;
    q.grad += d * beta[static_cast<std::size_t>(l)];
  }
  return q;
}

/// G(M) = sigma_k/sigma_{k-1} + sum_l beta_l G_l with G_l = -sigma_l/sigma_{k-1}.
template <std::floating_point Real>
[[nodiscard]] Real operator_G(const SymmetricTensor<Real>& m, int k, std::span<const Real> beta) {
  return evaluate_quotient(m, k, beta, false).value;
}

template <std::floating_point Real>
[[nodiscard]] Real operator_G(const SymmetricTensor<Real>& m, int k, const std::vector<Real>& beta) {
  return operator_G(m, k, std::span<const Real>(beta));
}

/// G^{ij} = dG / dM_ij.
template <std::floating_point Real>
[[nodiscard]] SymmetricTensor<Real> grad_G(const SymmetricTensor<Real>& m, int k, std::span<const Real> beta) {
  return evaluate_quotient(m, k, beta, true).grad;
}

template <std::floating_point Real>
[[nodiscard]] SymmetricTensor<Real> grad_G(const SymmetricTensor<Real>& m, int k, const std::vector<Real>& beta) {
  return grad_G(m, k, std::span<const Real>(beta));
}

}  // namespace ksig
