#pragma once

// Damped Newton at fixed t with Gamma_{k-1} safeguards.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ksig/krylov.hpp"
#include "ksig/residual.hpp"

namespace ksig {

struct SolverConfig {
  double residual_tolerance = 1e-9;  // sup-norm
  int max_newton_iterations = 30;
  double dt_initial = 0.1;
  double dt_min = 1e-4;
  double damping_shrink = 0.5;
  double cone_margin = 1e-10;
  double linear_tolerance = 1e-10;
  int linear_max_iterations = 2000;
  int linear_restart = 60;
  double min_step_length = 1e-8;

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0)) throw std::invalid_argument(std::string(name) + " must be positive");
    };
    positive(residual_tolerance, "residual tolerance");
    positive(dt_min, "dt_min");
    positive(cone_margin, "cone margin");
    positive(linear_tolerance, "linear tolerance");
    positive(min_step_length, "min step length");
    if (max_newton_iterations < 1) throw std::invalid_argument("max Newton iterations must be >= 1");
    if (linear_max_iterations < 1 || linear_restart < 1) throw std::invalid_argument("linear solver limits must be >= 1");
    if (!(damping_shrink > 0.0 && damping_shrink < 1.0)) throw std::invalid_argument("damping shrink must lie in (0, 1)");
    if (!(dt_min < dt_initial && dt_initial <= 1.0)) throw std::invalid_argument("need dt_min < dt_initial <= 1");
  }
};

struct StepRecord {
  double t = 0.0;
  double dt = 0.0;
  bool accepted = false;
  int newton_iterations = 0;
  double residual = 0.0;
  std::string note;
};

struct ContinuationState {
  double t = 0.0;
  ScalarField u;
  double last_residual = 0.0;
  std::vector<int> newton_iterations;  // per accepted step
  std::vector<StepRecord> steps;       // accepted and rejected
};

enum class NewtonFailure { inadmissible_start, linear_stagnation, damping_underflow, iteration_limit };

[[nodiscard]] inline const char* to_string(NewtonFailure f) noexcept {
  switch (f) {
    case NewtonFailure::inadmissible_start: return "inadmissible initial guess";
    case NewtonFailure::linear_stagnation: return "linear solver stagnation";
    case NewtonFailure::damping_underflow: return "damping underflow";
    case NewtonFailure::iteration_limit: return "iteration limit";
  }
  return "";
}

class NewtonError : public std::runtime_error {
 public:
  NewtonError(NewtonFailure kind, double final_residual, const std::string& detail)
      : std::runtime_error(std::string("Newton failed (") + to_string(kind) + ", residual " +
                           std::to_string(final_residual) + ")" + (detail.empty() ? "" : ": " + detail)),
        kind_(kind),
        final_residual_(final_residual) {}

  [[nodiscard]] NewtonFailure kind() const noexcept { return kind_; }
  [[nodiscard]] double final_residual() const noexcept { return final_residual_; }

 private:
  NewtonFailure kind_;
  double final_residual_;
};

struct NewtonReport {
  int iterations = 0;
  std::vector<double> residual_history;  // sup-norms, initial first
  std::vector<double> step_lengths;
  std::vector<int> linear_iterations;
};

/// Solves F(u; state.t) = 0 from state.u. On success state.u and
/// state.last_residual are updated; on failure state is left untouched.
inline NewtonReport newton_solve_at_t(ContinuationState& state, const HomotopyFamily& family,
                                      const SolverConfig& config) {
  NewtonReport report;
  const double t = state.t;
  ScalarField u = state.u;
  ScalarField trial(u.grid());
  std::vector<double> rhs(u.size());
  std::vector<double> delta(u.size());

  double r = 0.0;
  try {
    r = sup_norm(residual(u, t, family, config.cone_margin));
  } catch (const InadmissibleNode& e) {
    throw NewtonError(NewtonFailure::inadmissible_start, std::numeric_limits<double>::quiet_NaN(), e.what());
  }
  if (!std::isfinite(r)) throw NewtonError(NewtonFailure::inadmissible_start, r, "non-finite residual");
  report.residual_history.push_back(r);

  while (r > config.residual_tolerance) {
    if (report.iterations >= config.max_newton_iterations) {
      throw NewtonError(NewtonFailure::iteration_limit, r, "");
    }
    const Linearization lin(family, u, t, config.cone_margin);
    const auto diag = lin.diagonal();
    for (NodeIndex i = 0; i < u.size(); ++i) rhs[i] = -lin.residual()[i];

    const auto kr = gmres([&](std::span<const double> in, std::span<double> out) { lin.apply(in, out); },
                          [&](std::span<const double> in, std::span<double> out) {
                            for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] / diag[i];
                          },
                          rhs, delta, config.linear_tolerance, config.linear_max_iterations, config.linear_restart);
    if (!kr.converged) {
      throw NewtonError(NewtonFailure::linear_stagnation, r,
                        "relative linear residual " + std::to_string(kr.relative_residual) + " after " +
                            std::to_string(kr.iterations) + " iterations");
    }

    double step = 1.0;
    double r_trial = 0.0;
    for (;;) {
      for (NodeIndex i = 0; i < u.size(); ++i) trial[i] = u[i] + step * delta[i];
      bool ok = true;
      try {
        r_trial = sup_norm(residual(trial, t, family, config.cone_margin));
        ok = std::isfinite(r_trial) && r_trial < r;
      } catch (const InadmissibleNode&) {
        ok = false;
      }
      if (ok) break;
      step *= config.damping_shrink;
      if (step < config.min_step_length) throw NewtonError(NewtonFailure::damping_underflow, r, "");
    }
    std::swap(u, trial);
    r = r_trial;
    ++report.iterations;
    report.residual_history.push_back(r);
    report.step_lengths.push_back(step);
    report.linear_iterations.push_back(kr.iterations);
  }

  state.u = std::move(u);
  state.last_residual = r;
  return report;
}

}  // namespace ksig
