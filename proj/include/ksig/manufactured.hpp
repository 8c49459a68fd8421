#pragma once

// Manufactured problems: pick u*, solve the t = 1 equation for alpha.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ksig/expression.hpp"
#include "ksig/geometry.hpp"
#include "ksig/grid.hpp"

namespace ksig {

class ManufactureRejected : public std::invalid_argument {
 public:
  ManufactureRejected(NodeIndex worst_node, int failing_order, double margin)
      : std::invalid_argument("u_star leaves Gamma_" + std::to_string(failing_order) + ": worst node " +
                              std::to_string(worst_node) + " has sigma_" + std::to_string(failing_order) + " = " +
                              std::to_string(margin)),
        worst_node_(worst_node),
        failing_order_(failing_order),
        margin_(margin) {}

  [[nodiscard]] NodeIndex worst_node() const noexcept { return worst_node_; }
  [[nodiscard]] int failing_order() const noexcept { return failing_order_; }
  [[nodiscard]] double margin() const noexcept { return margin_; }

 private:
  NodeIndex worst_node_;
  int failing_order_;
  double margin_;
};

struct ManufacturedProblem {
  ScalarField u_star;
  CoefficientData coefficients;
};

/// alpha = -e^{-2u*} [ sigma_k/sigma_{k-1}(U*) - sum_l alpha_l e^{2(k-l)u*} sigma_l/sigma_{k-1}(U*) ]
/// with U* = U^1(u*) built from the given jets. Rejected unless every node
/// has sigma_j(U*) > margin for j <= k-1.
[[nodiscard]] inline CoefficientData manufacture_alpha(const JetField& u_star, const std::vector<ScalarField>& alpha_l,
                                                       const BackgroundField& background, int k, double margin = 0.0) {
  const auto& grid = u_star.grid();
  if (!(grid == background.grid())) throw GridError("u_star grid does not match background grid");
  CoefficientData out{k, ScalarField(grid), alpha_l};
  validate_coefficients(out, grid);

  std::vector<SymTensor> U(grid.node_count());
  double worst = std::numeric_limits<double>::infinity();
  NodeIndex worst_node = 0;
  int worst_order = 1;
  for (NodeIndex i = 0; i < grid.node_count(); ++i) {
    U[i] = assemble_U(u_star[i], background.schouten(i), background.tau(), 1.0, background.frame(i));
    const auto ex = newton_expansion(U[i], k - 1);
    for (int j = 1; j <= k - 1; ++j) {
      if (ex.sigma[j] < worst) {
        worst = ex.sigma[j];
        worst_node = i;
        worst_order = j;
      }
    }
  }
  if (!(worst > margin)) throw ManufactureRejected(worst_node, worst_order, worst);

  std::vector<double> al(static_cast<std::size_t>(k - 1));
  for (NodeIndex i = 0; i < grid.node_count(); ++i) {
    for (int l = 0; l <= k - 2; ++l) al[static_cast<std::size_t>(l)] = alpha_l[static_cast<std::size_t>(l)][i];
    const double u = u_star[i].value;
    const auto beta = beta_weights(al, grid.dim(), k, u, 1.0);
    const double g = operator_G(U[i], k, std::span<const double>(beta.data(), static_cast<std::size_t>(k - 1)));
    out.alpha[i] = -std::exp(-2.0 * u) * g;
  }
  return out;
}

/// Manufactured problem from a builtin expression, using its exact jets.
[[nodiscard]] inline ManufacturedProblem manufacture(const Expression& u_star, const std::vector<ScalarField>& alpha_l,
                                                     const BackgroundField& background, int k, double margin = 0.0) {
  const auto jets = exact_jet(u_star, background.grid());
  ManufacturedProblem p;
  p.coefficients = manufacture_alpha(jets, alpha_l, background, k, margin);
  p.u_star = jets.values();
  return p;
}

}  // namespace ksig
