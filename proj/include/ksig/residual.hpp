#pragma once

// The continuation family
//   F(u; t) = G(U^t) + t alpha e^{2u},
//   G(U^t)  = sigma_k/sigma_{k-1}(U^t) - sum_l beta_l(x,u,t) sigma_l/sigma_{k-1}(U^t),
// its discrete residual and its exact discrete linearisation.

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ksig/geometry.hpp"
#include "ksig/grid.hpp"
#include "ksig/linalg.hpp"
#include "ksig/symcone.hpp"

namespace ksig {

/// A node of U^t left Gamma_{k-1} (by at least the configured margin).
class InadmissibleNode : public std::runtime_error {
 public:
  InadmissibleNode(NodeIndex node, int failing_order, double failing_value, std::vector<double> eigenvalues)
      : std::runtime_error(describe(node, failing_order, failing_value, eigenvalues)),
        node_(node),
        failing_order_(failing_order),
        failing_value_(failing_value),
        eigenvalues_(std::move(eigenvalues)) {}

  [[nodiscard]] NodeIndex node() const noexcept { return node_; }
  [[nodiscard]] int failing_order() const noexcept { return failing_order_; }
  [[nodiscard]] double failing_value() const noexcept { return failing_value_; }
  [[nodiscard]] const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }

 private:
  static std::string describe(NodeIndex node, int j, double v, const std::vector<double>& ev) {
    std::string s = "U^t inadmissible at node " + std::to_string(node) + ": sigma_" + std::to_string(j) + " = " +
                    std::to_string(v) + ", eigenvalues (";
    for (std::size_t i = 0; i < ev.size(); ++i) s += (i ? ", " : "") + std::to_string(ev[i]);
    return s + ")";
  }

  NodeIndex node_;
  int failing_order_;
  double failing_value_;
  std::vector<double> eigenvalues_;
};

/// Everything evaluated at one node for one (u, t).
struct NodeEvaluation {
  NodeJet jet;
  ConformalFrame frame;
  SymTensor U;                       // g0^{-1} U^t, orthonormal frame
  QuotientEvaluation<double> quotient;
  std::array<double, kMaxDim> beta{};
  double forcing = 0.0;              // t alpha e^{2u}
  double residual = 0.0;             // G + forcing
};

/// Background plus coefficients: the t-family of equations on one grid.
class HomotopyFamily {
 public:
  HomotopyFamily(BackgroundField background, CoefficientData coefficients)
      : background_(std::move(background)), coefficients_(std::move(coefficients)) {
    validate_coefficients(coefficients_, background_.grid());
    constant_ = homotopy_constant(background_.dim(), coefficients_.k);
  }

  [[nodiscard]] const BackgroundField& background() const noexcept { return background_; }
  [[nodiscard]] const CoefficientData& coefficients() const noexcept { return coefficients_; }
  [[nodiscard]] const PeriodicGrid& grid() const noexcept { return background_.grid(); }
  [[nodiscard]] int dim() const noexcept { return background_.dim(); }
  [[nodiscard]] int k() const noexcept { return coefficients_.k; }
  [[nodiscard]] double tau() const noexcept { return background_.tau(); }
  /// c(n, k) of the t = 0 end.
  [[nodiscard]] double constant() const noexcept { return constant_; }

  [[nodiscard]] std::array<double, kMaxDim> beta(NodeIndex i, double u, double t) const noexcept {
    std::array<double, kMaxDim> b{};
    for (int l = 0; l <= k() - 2; ++l) {
      const double al = coefficients_.alpha_l[static_cast<std::size_t>(l)][i];
      b[l] = ((1.0 - t) * constant_ + t * al) * std::exp(2.0 * (k() - l) * u);
    }
    return b;
  }

  [[nodiscard]] SymTensor assemble(const NodeJet& jet, NodeIndex i, double t) const {
    return assemble_U(jet, background_.schouten(i), tau(), t, background_.frame(i));
  }

  /// Throws InadmissibleNode unless sigma_j(U^t) > margin for all j <= k-1.
  [[nodiscard]] NodeEvaluation evaluate(const ScalarField& u, NodeIndex i, double t, double margin,
                                        bool with_gradient) const {
    NodeEvaluation e;
    e.jet = node_jet(u, i);
    e.frame = background_.frame(i);
    e.U = assemble_U(e.jet, background_.schouten(i), tau(), t, e.frame);
    e.beta = beta(i, e.jet.value, t);
    try {
      e.quotient = evaluate_quotient(e.U, k(), std::span<const double>(e.beta.data(), static_cast<std::size_t>(k() - 1)),
                                     with_gradient, margin);
    } catch (const InadmissibleState& s) {
      throw InadmissibleNode(i, s.failing_order(), s.failing_value(), eigenvalues(e.U));
    }
    e.forcing = t * coefficients_.alpha[i] * std::exp(2.0 * e.jet.value);
    e.residual = e.quotient.value + e.forcing;
    return e;
  }

 private:
  BackgroundField background_;
  CoefficientData coefficients_;
  double constant_ = 0.0;
};

/// F(u; t) at every node.
[[nodiscard]] inline ScalarField residual(const ScalarField& u, double t, const HomotopyFamily& family,
                                          double margin = 0.0) {
  ScalarField out(u.grid());
  for (NodeIndex i = 0; i < u.size(); ++i) out[i] = family.evaluate(u, i, t, margin, false).residual;
  return out;
}

/// Minimum over nodes of min_{j<=k-1} sigma_j(U^t); no throw.
[[nodiscard]] inline double admissibility_margin(const ScalarField& u, double t, const HomotopyFamily& family) {
  double m = std::numeric_limits<double>::infinity();
  for (NodeIndex i = 0; i < u.size(); ++i) {
    const auto U = family.assemble(node_jet(u, i), i, t);
    m = std::min(m, cone_margin(U, family.k() - 1));
  }
  return m;
}

/// Frozen-coefficient form of the Frechet derivative of F at (u, t):
///   (L v)(x) = sum_ij a_ij v_ij + sum_j b_j v_j + c v
/// with
///   a = s (G + q tr G I),
///   b = s [ -2 G (dphi + du) + tr G ((1 + q(n-2)) dphi + (2 - tau) du) ],
///   c = sum_l 2(k-l) beta_l G_l + 2 t alpha e^{2u},
/// s = e^{-2 phi}, q = (1-tau)/(n-2), G = G^{ij}. Applying L to the discrete
/// jet of v gives the exact derivative of the discrete residual.
class Linearization {
 public:
  Linearization(const HomotopyFamily& family, const ScalarField& u, double t, double margin = 0.0)
      : grid_(u.grid()), residual_(u.grid()) {
    const int n = family.dim();
    const int k = family.k();
    const double tau = family.tau();
    const double q = (1.0 - tau) / (n - 2);
    const double h = grid_.spacing();
    second_.resize(u.size());
    first_.resize(u.size());
    zeroth_.resize(u.size());
    diagonal_.resize(u.size());
    for (NodeIndex i = 0; i < u.size(); ++i) {
      const auto e = family.evaluate(u, i, t, margin, true);
      residual_[i] = e.residual;
      const auto& g = e.quotient.grad;
      const double s = e.frame.scale;
      const double trg = g.trace();
      SymTensor a = g;
      for (int d = 0; d < n; ++d) a(d, d) += q * trg;
      a *= s;
      std::array<double, kMaxDim> b{};
      for (int j = 0; j < n; ++j) {
        double gw = 0.0;
        for (int r = 0; r < n; ++r) gw += g(j, r) * (e.frame.phi_gradient[r] + e.jet.gradient[r]);
        b[j] = s * (-2.0 * gw + trg * ((1.0 + q * (n - 2)) * e.frame.phi_gradient[j] + (2.0 - tau) * e.jet.gradient[j]));
      }
      double c = 2.0 * e.forcing;
      for (int l = 0; l <= k - 2; ++l) c += 2.0 * (k - l) * e.beta[l] * e.quotient.lower[l];
      double diag = c;
      for (int d = 0; d < n; ++d) diag += -2.0 * a(d, d) / (h * h);
      second_[i] = a;
      first_[i] = b;
      zeroth_[i] = c;
      diagonal_[i] = diag;
    }
  }

  [[nodiscard]] const PeriodicGrid& grid() const noexcept { return grid_; }
  [[nodiscard]] const ScalarField& residual() const noexcept { return residual_; }
  [[nodiscard]] std::span<const double> diagonal() const noexcept { return diagonal_; }

  void apply(std::span<const double> v, std::span<double> out) const {
    const int n = grid_.dim();
    const double h = grid_.spacing();
    const double inv2h = 1.0 / (2.0 * h);
    const double invh2 = 1.0 / (h * h);
    const double inv4h2 = 0.25 * invh2;
    std::array<NodeIndex, kMaxDim> plus{};
    std::array<NodeIndex, kMaxDim> minus{};
    for (NodeIndex i = 0; i < grid_.node_count(); ++i) {
      const auto& a = second_[i];
      const auto& b = first_[i];
      const double v0 = v[i];
      double acc = zeroth_[i] * v0;
      for (int d = 0; d < n; ++d) {
        plus[d] = grid_.neighbor(i, d, 1);
        minus[d] = grid_.neighbor(i, d, -1);
        const double vp = v[plus[d]];
        const double vm = v[minus[d]];
        acc += b[d] * (vp - vm) * inv2h + a(d, d) * (vp - 2.0 * v0 + vm) * invh2;
      }
      for (int d = 0; d < n; ++d) {
        for (int e = d + 1; e < n; ++e) {
          const double cross = v[grid_.neighbor(plus[d], e, 1)] - v[grid_.neighbor(plus[d], e, -1)] -
                               v[grid_.neighbor(minus[d], e, 1)] + v[grid_.neighbor(minus[d], e, -1)];
          acc += 2.0 * a(d, e) * cross * inv4h2;
        }
      }
      out[i] = acc;
    }
  }

  [[nodiscard]] ScalarField apply(const ScalarField& v) const {
    ScalarField out(grid_);
    apply(v.values(), out.values());
    return out;
  }

 private:
  PeriodicGrid grid_;
  ScalarField residual_;
  std::vector<SymTensor> second_;
  std::vector<std::array<double, kMaxDim>> first_;
  std::vector<double> zeroth_;
  std::vector<double> diagonal_;
};

/// Matrix-free action of dF/du at (u, t) on v.
[[nodiscard]] inline ScalarField linearize_apply(const ScalarField& u, double t, const ScalarField& v,
                                                 const HomotopyFamily& family, double margin = 0.0) {
  return Linearization(family, u, t, margin).apply(v);
}

}  // namespace ksig
