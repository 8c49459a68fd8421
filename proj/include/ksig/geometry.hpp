#pragma once

// Background metrics, the modified Schouten tensor A^tau_{g0}, and pointwise
// assembly of the conformal tensor U^t from a solution jet.
//
// Two background modes live on the flat torus chart:
//  - prescribed tensor: g0 is the flat metric and B = A^tau_{g0} is supplied
//    per node (default B = -g0);
//  - conformally flat: g0 = e^{2 phi} delta and B is derived from phi.
// All matrices handed to the cone algebra are g0^{-1} U in an orthonormal
// frame of g0, i.e. e^{-2 phi} times the coordinate matrix.

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ksig/grid.hpp"
#include "ksig/symcone.hpp"

namespace ksig {

/// Hypotheses of the existence theorem that every problem must satisfy.
enum class Hypothesis { tau_below_one, alpha_l_positive, background_in_cone, order_range };

[[nodiscard]] inline const char* hypothesis_statement(Hypothesis h) noexcept {
  switch (h) {
    case Hypothesis::tau_below_one: return "tau < 1";
    case Hypothesis::alpha_l_positive: return "alpha_l > 0 everywhere";
    case Hypothesis::background_in_cone: return "lambda(-A^tau_{g0}) in Gamma_k everywhere";
    case Hypothesis::order_range: return "3 <= k <= n";
  }
  return "";
}

class HypothesisError : public std::invalid_argument {
 public:
  HypothesisError(Hypothesis which, const std::string& detail)
      : std::invalid_argument(std::string("hypothesis violated (") + hypothesis_statement(which) + "): " + detail),
        which_(which) {}

  [[nodiscard]] Hypothesis which() const noexcept { return which_; }

 private:
  Hypothesis which_;
};

inline void validate_tau(double tau) {
  if (!(tau < 1.0)) throw HypothesisError(Hypothesis::tau_below_one, "tau = " + std::to_string(tau));
}

inline void validate_order(int n, int k) {
  if (k < 3 || k > n) {
    throw HypothesisError(Hypothesis::order_range, "k = " + std::to_string(k) + ", n = " + std::to_string(n));
  }
}

enum class BackgroundMode { prescribed_tensor, conformally_flat };

/// Per-node data of the conformal factor of g0 = e^{2 phi} delta.
struct ConformalFrame {
  double scale = 1.0;                       // e^{-2 phi}
  std::array<double, kMaxDim> phi_gradient{};  // flat-chart d phi
};

/// Schouten-type tensor of a space form of sectional curvature kappa:
/// Ric = (n-1) kappa g, R = n(n-1) kappa, so A^tau = kappa/(n-2) (n-1 - tau n/2) g.
[[nodiscard]] inline SymTensor spaceform_schouten(double kappa, int n, double tau) {
  return SymTensor::identity(n, kappa / (n - 2) * ((n - 1) - 0.5 * tau * n));
}

/// W(f) = Hess f + (1-tau)/(n-2) Lap f delta + (2-tau)/2 |df|^2 delta - df (x) df
/// in the flat chart. -A^tau of e^{2f} delta equals W(f).
[[nodiscard]] inline SymTensor conformal_quadratic(const NodeJet& jet, double tau) {
  const int n = jet.hessian.dim();
  const double q = (1.0 - tau) / (n - 2);
  double grad2 = 0.0;
  for (int a = 0; a < n; ++a) grad2 += jet.gradient[a] * jet.gradient[a];
  SymTensor w = jet.hessian;
  for (int i = 0; i < n; ++i) {
    w(i, i) += q * jet.laplacian + 0.5 * (2.0 - tau) * grad2;
    for (int j = i; j < n; ++j) w(i, j) -= jet.gradient[i] * jet.gradient[j];
  }
  return w;
}

class BackgroundField {
 public:
  BackgroundField() = default;

  /// Flat g0 with a user-supplied A^tau_{g0} per node.
  static BackgroundField prescribed(const PeriodicGrid& grid, double tau, std::vector<SymTensor> schouten) {
    validate_tau(tau);
    if (schouten.size() != grid.node_count()) throw GridError("prescribed tensor count does not match grid");
    for (const auto& b : schouten)
      if (b.dim() != grid.dim()) throw GridError("prescribed tensor dimension does not match grid");
    BackgroundField bg;
    bg.mode_ = BackgroundMode::prescribed_tensor;
    bg.grid_ = grid;
    bg.tau_ = tau;
    bg.schouten_ = std::move(schouten);
    return bg;
  }

  /// Flat g0 with a spatially constant A^tau_{g0}.
  static BackgroundField uniform(const PeriodicGrid& grid, double tau, const SymTensor& schouten) {
    return prescribed(grid, tau, std::vector<SymTensor>(grid.node_count(), schouten));
  }

  /// The default testbed: flat g0 and A^tau_{g0} = -g0.
  static BackgroundField hyperbolic_like(const PeriodicGrid& grid, double tau) {
    return uniform(grid, tau, SymTensor::identity(grid.dim(), -1.0));
  }

  /// g0 = e^{2 phi} delta; A^tau_{g0} = -W(phi) with flat-chart discrete jets.
  static BackgroundField conformally_flat(const ScalarField& phi, double tau) {
    validate_tau(tau);
    const auto& grid = phi.grid();
    BackgroundField bg;
    bg.mode_ = BackgroundMode::conformally_flat;
    bg.grid_ = grid;
    bg.tau_ = tau;
    bg.phi_ = phi;
    bg.schouten_.resize(grid.node_count());
    bg.frames_.resize(grid.node_count());
    for (NodeIndex i = 0; i < grid.node_count(); ++i) {
      const auto jet = node_jet(phi, i);
      bg.schouten_[i] = -1.0 * conformal_quadratic(jet, tau);
      bg.frames_[i].scale = std::exp(-2.0 * jet.value);
      bg.frames_[i].phi_gradient = jet.gradient;
    }
    return bg;
  }

  [[nodiscard]] BackgroundMode mode() const noexcept { return mode_; }
  [[nodiscard]] const PeriodicGrid& grid() const noexcept { return grid_; }
  [[nodiscard]] int dim() const noexcept { return grid_.dim(); }
  [[nodiscard]] double tau() const noexcept { return tau_; }
  [[nodiscard]] const std::optional<ScalarField>& phi() const noexcept { return phi_; }

  /// Coordinate components of A^tau_{g0} at a node.
  [[nodiscard]] const SymTensor& schouten(NodeIndex i) const noexcept { return schouten_[i]; }
  [[nodiscard]] const std::vector<SymTensor>& schouten_field() const noexcept { return schouten_; }

  [[nodiscard]] ConformalFrame frame(NodeIndex i) const noexcept {
    return mode_ == BackgroundMode::conformally_flat ? frames_[i] : ConformalFrame{};
  }

  /// g0^{-1} A^tau_{g0} in an orthonormal frame.
  [[nodiscard]] SymTensor schouten_orthonormal(NodeIndex i) const { return frame(i).scale * schouten_[i]; }

 private:
  BackgroundMode mode_ = BackgroundMode::prescribed_tensor;
  PeriodicGrid grid_;
  double tau_ = 0.0;
  std::vector<SymTensor> schouten_;
  std::vector<ConformalFrame> frames_;
  std::optional<ScalarField> phi_;
};

struct ConeHypothesisReport {
  double min_margin = 0.0;   // min over nodes of min_{j<=k} sigma_j(-B)
  NodeIndex worst_node = 0;
};

[[nodiscard]] inline ConeHypothesisReport check_cone_hypothesis(const BackgroundField& bg, int k) {
  ConeHypothesisReport r;
  r.min_margin = std::numeric_limits<double>::infinity();
  for (NodeIndex i = 0; i < bg.grid().node_count(); ++i) {
    const double m = cone_margin(-1.0 * bg.schouten_orthonormal(i), k);
    if (m < r.min_margin) {
      r.min_margin = m;
      r.worst_node = i;
    }
  }
  return r;
}

/// Throws HypothesisError unless lambda(-A^tau_{g0}) is in Gamma_k at every node.
inline ConeHypothesisReport validate_background(const BackgroundField& bg, int k) {
  validate_order(bg.dim(), k);
  const auto r = check_cone_hypothesis(bg, k);
  if (!(r.min_margin > 0.0)) {
    std::string where;
    const auto m = bg.grid().unravel(r.worst_node);
    for (int a = 0; a < bg.dim(); ++a) where += (a ? "," : "") + std::to_string(m[a]);
    throw HypothesisError(Hypothesis::background_in_cone,
                          "worst node " + std::to_string(r.worst_node) + " (" + where + ") has min_j sigma_j = " +
                              std::to_string(r.min_margin));
  }
  return r;
}

/// Background of g0 = e^{2 phi} delta.
[[nodiscard]] inline BackgroundField background_from_phi(const ScalarField& phi, double tau) {
  return BackgroundField::conformally_flat(phi, tau);
}

/// Same, rejected unless it satisfies the Gamma_k hypothesis.
[[nodiscard]] inline BackgroundField background_from_phi(const ScalarField& phi, double tau, int k) {
  auto bg = BackgroundField::conformally_flat(phi, tau);
  validate_background(bg, k);
  return bg;
}

/// alpha (any sign) and alpha_0..alpha_{k-2} (positive) on the grid.
struct CoefficientData {
  int k = 0;
  ScalarField alpha;
  std::vector<ScalarField> alpha_l;
};

inline void validate_coefficients(const CoefficientData& c, const PeriodicGrid& grid) {
  validate_order(grid.dim(), c.k);
  if (static_cast<int>(c.alpha_l.size()) != c.k - 1) {
    throw std::invalid_argument("expected " + std::to_string(c.k - 1) + " alpha_l fields, got " +
                                std::to_string(c.alpha_l.size()));
  }
  if (!(c.alpha.grid() == grid)) throw GridError("alpha field grid does not match background grid");
  if (const auto bad = c.alpha.first_non_finite(); bad < c.alpha.size()) {
    throw std::invalid_argument("alpha is not finite at node " + std::to_string(bad));
  }
  for (int l = 0; l < c.k - 1; ++l) {
    const auto& f = c.alpha_l[static_cast<std::size_t>(l)];
    if (!(f.grid() == grid)) throw GridError("alpha_" + std::to_string(l) + " grid does not match background grid");
    for (NodeIndex i = 0; i < f.size(); ++i) {
      if (!(f[i] > 0.0) || !std::isfinite(f[i])) {
        throw HypothesisError(Hypothesis::alpha_l_positive, "alpha_" + std::to_string(l) + " = " +
                                                                std::to_string(f[i]) + " at node " + std::to_string(i));
      }
    }
  }
}

/// g0^{-1} U^t in an orthonormal frame of g0, where
///   U^t = Hess u + (1-tau)/(n-2) Lap u g0 + (2-tau)/2 |du|^2 g0 - du (x) du - t B + (1-t) g0
/// with covariant derivatives of g0. For g0 = e^{2 phi} delta the Christoffel
/// symbols are delta_ik phi_j + delta_jk phi_i - delta_ij phi_k; `jet` holds
/// flat-chart derivatives and `schouten` the coordinate components of B.
[[nodiscard]] inline SymTensor assemble_U(const NodeJet& jet, const SymTensor& schouten, double tau, double t,
                                          const ConformalFrame& frame = {}) {
  const int n = jet.hessian.dim();
  const double q = (1.0 - tau) / (n - 2);
  const auto& dphi = frame.phi_gradient;
  double phi_dot_u = 0.0;
  double grad2 = 0.0;
  for (int a = 0; a < n; ++a) {
    phi_dot_u += dphi[a] * jet.gradient[a];
    grad2 += jet.gradient[a] * jet.gradient[a];
  }
  const double iso = phi_dot_u + q * (jet.laplacian + (n - 2) * phi_dot_u) + 0.5 * (2.0 - tau) * grad2;
  SymTensor u(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double v = jet.hessian(i, j) - dphi[i] * jet.gradient[j] - dphi[j] * jet.gradient[i] -
                 jet.gradient[i] * jet.gradient[j] - t * schouten(i, j);
      if (i == j) v += iso;
      u(i, j) = frame.scale * v;
    }
    u(i, i) += 1.0 - t;
  }
  return u;
}

/// beta_l(x, u, t) = [(1-t) c + t alpha_l(x)] exp(2(k-l) u), l = 0..k-2.
[[nodiscard]] inline std::array<double, kMaxDim> beta_weights(std::span<const double> alpha_l, int n, int k, double u,
                                                              double t) {
  const double c = homotopy_constant(n, k);
  std::array<double, kMaxDim> beta{};
  for (int l = 0; l <= k - 2; ++l) {
    beta[l] = ((1.0 - t) * c + t * alpha_l[static_cast<std::size_t>(l)]) * std::exp(2.0 * (k - l) * u);
  }
  return beta;
}

}  // namespace ksig
