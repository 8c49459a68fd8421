#pragma once

// Per-step diagnostics along the homotopy. Every quantity is one that can be
// asserted literally: cone margins, eigenvalue minima, per-node slacks and
// observed sup-norms. Non-explicit a priori constants are never asserted.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ksig/linalg.hpp"
#include "ksig/newton.hpp"
#include "ksig/residual.hpp"

namespace ksig {

struct MonitorReport {
  double t = 0.0;
  double sup_u = 0.0;
  double sup_grad_u = 0.0;        // |du|_{g0}
  double sup_lap_u = 0.0;         // Laplacian of g0
  double cone_margin = 0.0;       // min over nodes, j <= k-1 of sigma_j(U^t)
  double min_eig_Gij = 0.0;       // min over nodes of lambda_min(G^{ij})
  double trace_slack = 0.0;       // min over nodes of tr G_k^{ij} - (n-k+1)/k
  double max_sigma_ratio = 0.0;   // max over nodes and l of sigma_l/sigma_{k-1}
  double eq33_slack = 0.0;        // min over nodes of G^{ij}U_ij + t alpha e^{2u}
  int newton_iters = 0;
  double residual = 0.0;          // sup |F(u; t)|

  // Newton-MacLaurin branch: nodes with sigma_k/sigma_{k-1} > 1, where
  // sigma_l/sigma_{k-1} <= C(n,k,l) holds. Slack = C - ratio, min over them.
  int nm_branch_nodes = 0;
  double nm_branch_slack = std::numeric_limits<double>::infinity();

  // Maximum-point comparison at the discrete argmax of u. Smooth maxima have
  // a negative semi-definite Hessian and vanishing gradient; grid maxima only
  // approximately, so a failure is a warning.
  double argmax_slack = 0.0;
  bool argmax_consistent = true;
};

/// Snapshot of an admissible state. Does not modify the state.
[[nodiscard]] inline MonitorReport snapshot(const ContinuationState& state, const HomotopyFamily& family,
                                            int newton_iters = 0) {
  const auto& u = state.u;
  const double t = state.t;
  const int n = family.dim();
  const int k = family.k();
  const double trace_bound = static_cast<double>(n - k + 1) / k;

  MonitorReport r;
  r.t = t;
  r.newton_iters = newton_iters;
  r.cone_margin = std::numeric_limits<double>::infinity();
  r.min_eig_Gij = std::numeric_limits<double>::infinity();
  r.trace_slack = std::numeric_limits<double>::infinity();
  r.eq33_slack = std::numeric_limits<double>::infinity();
  r.max_sigma_ratio = -std::numeric_limits<double>::infinity();

  NodeIndex argmax = 0;
  for (NodeIndex i = 0; i < u.size(); ++i) {
    const auto e = family.evaluate(u, i, t, 0.0, true);
    const auto& q = e.quotient;
    const double s = e.frame.scale;

    if (u[i] > u[argmax]) argmax = i;
    r.sup_u = std::max(r.sup_u, std::abs(u[i]));
    double grad2 = 0.0;
    double phi_dot_u = 0.0;
    for (int a = 0; a < n; ++a) {
      grad2 += e.jet.gradient[a] * e.jet.gradient[a];
      phi_dot_u += e.frame.phi_gradient[a] * e.jet.gradient[a];
    }
    r.sup_grad_u = std::max(r.sup_grad_u, std::sqrt(s * grad2));
    r.sup_lap_u = std::max(r.sup_lap_u, std::abs(s * (e.jet.laplacian + (n - 2) * phi_dot_u)));
    r.residual = std::max(r.residual, std::abs(e.residual));

    for (int j = 1; j <= k - 1; ++j) r.cone_margin = std::min(r.cone_margin, q.sigma[j]);
    r.min_eig_Gij = std::min(r.min_eig_Gij, min_eigenvalue(q.grad));
    r.trace_slack = std::min(r.trace_slack, q.grad_leading.trace() - trace_bound);
    for (int l = 0; l <= k - 2; ++l) r.max_sigma_ratio = std::max(r.max_sigma_ratio, -q.lower[l]);
    r.eq33_slack = std::min(r.eq33_slack, q.grad.contract(e.U) + e.forcing);

    if (q.leading > 1.0) {
      ++r.nm_branch_nodes;
      for (int l = 0; l <= k - 2; ++l) {
        r.nm_branch_slack = std::min(r.nm_branch_slack, newton_maclaurin_constant(n, k, l) + q.lower[l]);
      }
    }
  }

  // sigma_k/sigma_{k-1}(B_t) >= sigma_k/sigma_{k-1}(U^t) and
  // sigma_l/sigma_{k-1}(B_t) <= sigma_l/sigma_{k-1}(U^t) at the maximum,
  // B_t = -t A^tau_{g0} + (1-t) g0.
  {
    const auto e = family.evaluate(u, argmax, t, 0.0, false);
    SymTensor bt = -t * family.background().schouten_orthonormal(argmax);
    for (int d = 0; d < n; ++d) bt(d, d) += 1.0 - t;
    const auto ex = newton_expansion(bt, k);
    double slack = ex.sigma[k] / ex.sigma[k - 1] - e.quotient.leading;
    for (int l = 0; l <= k - 2; ++l) slack = std::min(slack, -e.quotient.lower[l] - ex.sigma[l] / ex.sigma[k - 1]);
    r.argmax_slack = slack;
    r.argmax_consistent = slack >= -1e-8;
  }
  return r;
}

struct TraceSummary {
  double max_sup_u = 0.0;
  double max_sup_grad_u = 0.0;
  double max_sup_lap_u = 0.0;
  double max_sigma_ratio = 0.0;
  double min_cone_margin = std::numeric_limits<double>::infinity();
  bool blow_up = false;
  std::vector<std::string> warnings;
};

/// Observed bounds across the homotopy. A traced quantity growing by more
/// than `growth_limit` between consecutive reports is flagged.
[[nodiscard]] inline TraceSummary estimate_trace_series(const std::vector<MonitorReport>& reports,
                                                        double growth_limit = 10.0) {
  if (reports.empty()) throw std::invalid_argument("estimate_trace_series needs a nonempty series");
  TraceSummary s;
  s.max_sigma_ratio = reports.front().max_sigma_ratio;
  for (const auto& r : reports) {
    s.max_sup_u = std::max(s.max_sup_u, r.sup_u);
    s.max_sup_grad_u = std::max(s.max_sup_grad_u, r.sup_grad_u);
    s.max_sup_lap_u = std::max(s.max_sup_lap_u, r.sup_lap_u);
    s.max_sigma_ratio = std::max(s.max_sigma_ratio, r.max_sigma_ratio);
    s.min_cone_margin = std::min(s.min_cone_margin, r.cone_margin);
  }
  auto check = [&](const char* name, double prev, double next, double t) {
    if (prev > 1e-12 && next > growth_limit * prev) {
      s.blow_up = true;
      s.warnings.push_back(std::string(name) + " grew by " + std::to_string(next / prev) + "x at t = " +
                           std::to_string(t));
    }
  };
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const auto& a = reports[i - 1];
    const auto& b = reports[i];
    check("sup_u", a.sup_u, b.sup_u, b.t);
    check("sup_grad_u", a.sup_grad_u, b.sup_grad_u, b.t);
    check("sup_lap_u", a.sup_lap_u, b.sup_lap_u, b.t);
    check("max_sigma_ratio", a.max_sigma_ratio, b.max_sigma_ratio, b.t);
  }
  for (const auto& r : reports) {
    if (!r.argmax_consistent) {
      s.warnings.push_back("maximum-point comparison off by " + std::to_string(r.argmax_slack) + " at t = " +
                           std::to_string(r.t) + " (discrete argmax)");
    }
  }
  return s;
}

}  // namespace ksig
