#pragma once

// Periodic uniform grid on the flat torus [0, 2pi)^n, grid functions and
// their second-order central-difference jets.

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ksig/symcone.hpp"

namespace ksig {

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using NodeIndex = std::size_t;
using MultiIndex = std::array<int, kMaxDim>;

class PeriodicGrid {
 public:
  PeriodicGrid() = default;

  PeriodicGrid(int dim, int resolution) : dim_(dim), resolution_(resolution) {
    if (dim < 3 || dim > kMaxDim) {
      throw GridError("grid dimension " + std::to_string(dim) + " outside [3, " + std::to_string(kMaxDim) + "]");
    }
    if (resolution < 8 || resolution % 2 != 0) {
      throw GridError("grid resolution must be even and >= 8, got " + std::to_string(resolution));
    }
    spacing_ = 2.0 * std::numbers::pi / resolution;
    node_count_ = 1;
    for (int a = dim_ - 1; a >= 0; --a) {
      strides_[a] = node_count_;
      node_count_ *= static_cast<std::size_t>(resolution);
    }
  }

  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] int resolution() const noexcept { return resolution_; }
  [[nodiscard]] double spacing() const noexcept { return spacing_; }
  [[nodiscard]] std::size_t node_count() const noexcept { return node_count_; }
  [[nodiscard]] double cell_volume() const noexcept { return std::pow(spacing_, dim_); }

  /// Row-major: axis 0 varies slowest.
  [[nodiscard]] MultiIndex unravel(NodeIndex idx) const noexcept {
    MultiIndex m{};
    for (int a = 0; a < dim_; ++a) m[a] = static_cast<int>((idx / strides_[a]) % static_cast<std::size_t>(resolution_));
    return m;
  }

  [[nodiscard]] NodeIndex ravel(const MultiIndex& m) const noexcept {
    NodeIndex idx = 0;
    for (int a = 0; a < dim_; ++a) {
      const int w = ((m[a] % resolution_) + resolution_) % resolution_;
      idx += static_cast<std::size_t>(w) * strides_[a];
    }
    return idx;
  }

  [[nodiscard]] double coordinate(NodeIndex idx, int axis) const noexcept {
    return spacing_ * static_cast<double>((idx / strides_[axis]) % static_cast<std::size_t>(resolution_));
  }

  /// Node shifted by `offset` cells along `axis`, with periodic wraparound.
  [[nodiscard]] NodeIndex neighbor(NodeIndex idx, int axis, int offset) const noexcept {
    const auto n = static_cast<long long>(resolution_);
    const long long i = static_cast<long long>((idx / strides_[axis]) % static_cast<std::size_t>(resolution_));
    const long long j = ((i + offset) % n + n) % n;
    return static_cast<NodeIndex>(static_cast<long long>(idx) + (j - i) * static_cast<long long>(strides_[axis]));
  }

  friend bool operator==(const PeriodicGrid& a, const PeriodicGrid& b) noexcept {
    return a.dim_ == b.dim_ && a.resolution_ == b.resolution_;
  }

 private:
  int dim_ = 0;
  int resolution_ = 0;
  double spacing_ = 0.0;
  std::size_t node_count_ = 0;
  std::array<std::size_t, kMaxDim> strides_{};
};

class ScalarField {
 public:
  ScalarField() = default;

  explicit ScalarField(const PeriodicGrid& grid, double fill = 0.0) : grid_(grid), values_(grid.node_count(), fill) {}

  ScalarField(const PeriodicGrid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.node_count()) {
      throw GridError("field has " + std::to_string(values_.size()) + " values, grid has " +
                      std::to_string(grid_.node_count()) + " nodes");
    }
  }

  template <class Fn>
  static ScalarField sample(const PeriodicGrid& grid, Fn&& fn) {
    ScalarField f(grid);
    std::array<double, kMaxDim> x{};
    for (NodeIndex i = 0; i < grid.node_count(); ++i) {
      for (int a = 0; a < grid.dim(); ++a) x[a] = grid.coordinate(i, a);
      f.values_[i] = fn(std::span<const double>(x.data(), static_cast<std::size_t>(grid.dim())));
    }
    return f;
  }

  [[nodiscard]] const PeriodicGrid& grid() const noexcept { return grid_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] double operator[](NodeIndex i) const noexcept { return values_[i]; }
  [[nodiscard]] double& operator[](NodeIndex i) noexcept { return values_[i]; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::span<double> values() noexcept { return values_; }

  /// Index of the first non-finite value, or size() when all are finite.
  [[nodiscard]] std::size_t first_non_finite() const noexcept {
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (!std::isfinite(values_[i])) return i;
    return values_.size();
  }

  ScalarField& operator+=(const ScalarField& o) {
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
  }

  friend bool operator==(const ScalarField& a, const ScalarField& b) noexcept {
    return a.grid_ == b.grid_ && a.values_ == b.values_;
  }

 private:
  PeriodicGrid grid_;
  std::vector<double> values_;
};

/// Value, gradient, Hessian and Laplacian of a grid function at one node.
struct NodeJet {
  double value = 0.0;
  std::array<double, kMaxDim> gradient{};
  SymTensor hessian;
  double laplacian = 0.0;
};

/// Central differences with periodic wraparound:
///   f_i  = (f(x+h e_i) - f(x-h e_i)) / 2h
///   f_ii = (f(x+h e_i) - 2 f + f(x-h e_i)) / h^2
///   f_ij = (f(++) - f(+-) - f(-+) + f(--)) / 4h^2
[[nodiscard]] inline NodeJet node_jet(const ScalarField& f, NodeIndex idx) {
  const auto& g = f.grid();
  const int n = g.dim();
  const double h = g.spacing();
  const double inv2h = 1.0 / (2.0 * h);
  const double invh2 = 1.0 / (h * h);
  const double inv4h2 = 0.25 * invh2;

  NodeJet jet;
  jet.value = f[idx];
  jet.hessian = SymTensor(n);
  std::array<NodeIndex, kMaxDim> plus{};
  std::array<NodeIndex, kMaxDim> minus{};
  for (int a = 0; a < n; ++a) {
    plus[a] = g.neighbor(idx, a, 1);
    minus[a] = g.neighbor(idx, a, -1);
    const double fp = f[plus[a]];
    const double fm = f[minus[a]];
    jet.gradient[a] = (fp - fm) * inv2h;
    jet.hessian(a, a) = (fp - 2.0 * jet.value + fm) * invh2;
  }
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const double fpp = f[g.neighbor(plus[a], b, 1)];
      const double fpm = f[g.neighbor(plus[a], b, -1)];
      const double fmp = f[g.neighbor(minus[a], b, 1)];
      const double fmm = f[g.neighbor(minus[a], b, -1)];
      jet.hessian(a, b) = (fpp - fpm - fmp + fmm) * inv4h2;
    }
  }
  jet.laplacian = jet.hessian.trace();
  return jet;
}

class JetField {
 public:
  JetField() = default;
  JetField(const PeriodicGrid& grid, std::vector<NodeJet> jets) : grid_(grid), jets_(std::move(jets)) {
    if (jets_.size() != grid_.node_count()) throw GridError("jet count does not match grid");
  }

  [[nodiscard]] const PeriodicGrid& grid() const noexcept { return grid_; }
  [[nodiscard]] std::size_t size() const noexcept { return jets_.size(); }
  [[nodiscard]] const NodeJet& operator[](NodeIndex i) const noexcept { return jets_[i]; }

  [[nodiscard]] ScalarField values() const {
    ScalarField f(grid_);
    for (NodeIndex i = 0; i < jets_.size(); ++i) f[i] = jets_[i].value;
    return f;
  }

 private:
  PeriodicGrid grid_;
  std::vector<NodeJet> jets_;
};

[[nodiscard]] inline JetField compute_jet(const ScalarField& f) {
  std::vector<NodeJet> jets(f.size());
  for (NodeIndex i = 0; i < f.size(); ++i) jets[i] = node_jet(f, i);
  return JetField(f.grid(), std::move(jets));
}

/// Discrete Laplacian: trace of the jet Hessian (the 2n+1 point stencil).
[[nodiscard]] inline ScalarField laplacian(const ScalarField& f) {
  ScalarField out(f.grid());
  for (NodeIndex i = 0; i < f.size(); ++i) out[i] = node_jet(f, i).laplacian;
  return out;
}

[[nodiscard]] inline double sup_norm(std::span<const double> v) noexcept {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

[[nodiscard]] inline double sup_norm(const ScalarField& f) noexcept { return sup_norm(f.values()); }

/// sqrt(h^n sum f^2).
[[nodiscard]] inline double l2_norm(const ScalarField& f) noexcept {
  double s = 0.0;
  for (double x : f.values()) s += x * x;
  return std::sqrt(f.grid().cell_volume() * s);
}

}  // namespace ksig
