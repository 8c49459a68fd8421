#pragma once

// Parameter continuation along t in [0, 1] from the trivial root u = 0.

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ksig/monitors.hpp"
#include "ksig/newton.hpp"
#include "ksig/residual.hpp"

namespace ksig {

struct ContinuationResult {
  ContinuationState state;
  std::vector<MonitorReport> reports;  // one per accepted t, t = 0 first
  std::vector<NewtonReport> newton;    // parallel to reports
};

/// Step size fell below dt_min. Carries the last accepted state.
class ContinuationStall : public std::runtime_error {
 public:
  ContinuationStall(ContinuationResult last_good, const std::string& detail)
      : std::runtime_error("continuation stalled at t = " + std::to_string(last_good.state.t) + ": " + detail),
        last_good_(std::move(last_good)) {}

  [[nodiscard]] const ContinuationResult& last_good() const noexcept { return last_good_; }

 private:
  ContinuationResult last_good_;
};

/// Checks the invariants every accepted step must satisfy; throws on breach.
inline void check_accepted_step(const MonitorReport& r, const SolverConfig& config) {
  if (!(r.cone_margin >= config.cone_margin)) {
    throw std::logic_error("accepted step below cone margin at t = " + std::to_string(r.t));
  }
}

/// Advances t from 0 to 1. dt halves on a Newton failure and returns to
/// dt_initial after two consecutive successes; the last step is clipped to
/// land on t = 1. Each accepted step is followed by a monitor snapshot.
/// `initial` defaults to u = 0.
[[nodiscard]] inline ContinuationResult continuation_run(const HomotopyFamily& family, const SolverConfig& config,
                                                         const ScalarField* initial = nullptr,
                                                         const std::function<void(const MonitorReport&)>& on_accept = {}) {
  config.validate();
  validate_background(family.background(), family.k());

  ContinuationResult result;
  auto& state = result.state;
  state.t = 0.0;
  state.u = initial ? *initial : ScalarField(family.grid(), 0.0);

  auto accept = [&](const NewtonReport& nr, double dt) {
    const int iters = nr.iterations;
    state.newton_iterations.push_back(iters);
    state.steps.push_back({state.t, dt, true, iters, state.last_residual, ""});
    result.newton.push_back(nr);
    auto report = snapshot(state, family, iters);
    check_accepted_step(report, config);
    result.reports.push_back(report);
    if (on_accept) on_accept(report);
  };

  {
    const auto rep = newton_solve_at_t(state, family, config);
    accept(rep, 0.0);
  }

  double dt = config.dt_initial;
  int successes = 0;
  while (state.t < 1.0) {
    double t_next = std::min(1.0, state.t + dt);
    if (1.0 - t_next < 1e-12) t_next = 1.0;

    ContinuationState trial;
    trial.t = t_next;
    trial.u = state.u;
    try {
      const auto rep = newton_solve_at_t(trial, family, config);
      const double taken = t_next - state.t;
      state.t = t_next;
      state.u = std::move(trial.u);
      state.last_residual = trial.last_residual;
      accept(rep, taken);
      if (++successes >= 2) {
        dt = config.dt_initial;
        successes = 0;
      }
    } catch (const NewtonError& e) {
      state.steps.push_back({t_next, t_next - state.t, false, 0, e.final_residual(), e.what()});
      successes = 0;
      dt *= 0.5;
      if (dt < config.dt_min) throw ContinuationStall(result, e.what());
    }
  }
  return result;
}

}  // namespace ksig
