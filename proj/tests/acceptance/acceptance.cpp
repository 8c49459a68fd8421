// Acceptance gate: one pass/fail line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "ksig/ksig.hpp"
#include "oracles.hpp"

using namespace ksig;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

HomotopyFamily family_on(const BackgroundField& bg, int k, const std::string& alpha, double alpha_l) {
  const auto& g = bg.grid();
  return HomotopyFamily(bg, CoefficientData{k, sample_expression(Expression::parse(alpha), g),
                                            std::vector<ScalarField>(static_cast<std::size_t>(k - 1),
                                                                     ScalarField(g, alpha_l))});
}

ScalarField random_smooth(const PeriodicGrid& g, CounterRng& rng, double amplitude) {
  std::string e = "0";
  for (int a = 1; a <= g.dim(); ++a) {
    e += " + " + std::to_string(amplitude * rng.uniform(-1, 1)) + "*sin(" + std::to_string(1 + a % 2) + "*x" +
         std::to_string(a) + ")";
    e += " + " + std::to_string(amplitude * rng.uniform(-1, 1)) + "*cos(x" + std::to_string(a) + ")*sin(x" +
         std::to_string(1 + a % g.dim()) + ")";
  }
  return sample_expression(Expression::parse(e), g);
}

double l2(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v * v;
  return std::sqrt(s);
}

Outcome cone_inequalities() {
  double worst = 0.0;
  std::string failures;
  int pairs = 0;
  for (int n = 3; n <= 5; ++n) {
    for (int k = 3; k <= n; ++k) {
      const auto r = run_lemma_suite(n, k, 10000, 42, 1e-10);
      ++pairs;
      for (const auto& p : r.properties) {
        worst = std::max(worst, p.max_violation);
        if (!p.passed) failures += " " + p.name + "(n=" + std::to_string(n) + ",k=" + std::to_string(k) + ")";
      }
      if (r.equality_slack_at_e != 0.0) failures += " equality_at_e(n=" + std::to_string(n) + ",k=" + std::to_string(k) + ")";
    }
  }
  return {failures.empty(), std::to_string(pairs) + " (n,k) pairs x 1e4 samples, max relative violation " +
                                fmt("%.3g", worst) + (failures.empty() ? "" : "; failing:" + failures)};
}

Outcome linearization() {
  const PeriodicGrid g(3, 16);
  const auto f = family_on(BackgroundField::hyperbolic_like(g, 0.0), 3, "0.2*sin(x1)", 1.0);
  CounterRng rng(2024);
  double worst = 0.0;
  int states = 0;
  while (states < 20) {
    const double t = rng.uniform(0, 1);
    const auto u = random_smooth(g, rng, 0.03);
    if (!(admissibility_margin(u, t, f) > 0.0)) continue;
    const auto v = random_smooth(g, rng, 1.0);
    const auto lv = linearize_apply(u, t, v, f);
    const double eps = 1e-6;
    ScalarField up = u, um = u;
    for (NodeIndex i = 0; i < u.size(); ++i) {
      up[i] += eps * v[i];
      um[i] -= eps * v[i];
    }
    const auto rp = residual(up, t, f);
    const auto rm = residual(um, t, f);
    ScalarField diff(g);
    for (NodeIndex i = 0; i < u.size(); ++i) diff[i] = (rp[i] - rm[i]) / (2 * eps) - lv[i];
    worst = std::max(worst, l2(diff) / l2(lv));
    ++states;
  }
  const auto ones = linearize_apply(ScalarField(g, 0.0), 0.0, ScalarField(g, 1.0), f);
  double anchor = 0.0;
  for (double v : ones.values()) anchor = std::max(anchor, std::abs(v + 1.5));
  return {worst <= 1e-5 && anchor <= 1e-12,
          "20 states, max relative L2 error vs central differences " + fmt("%.3g", worst) +
              "; |L(0,0)1 + 1.5| = " + fmt("%.3g", anchor)};
}

Outcome trivial_anchor() {
  CounterRng rng(7);
  double worst = 0.0;
  int backgrounds = 0;
  for (int n = 3; n <= 5; ++n) {
    const PeriodicGrid g(n, 8);
    std::vector<BackgroundField> bgs{BackgroundField::hyperbolic_like(g, 0.0), BackgroundField::hyperbolic_like(g, -2.0),
                                     BackgroundField::uniform(g, 0.5, spaceform_schouten(-3.0, n, 0.5))};
    std::vector<SymTensor> field(g.node_count());
    for (auto& b : field) b = -1.0 * sample_cone_matrix(n, n, rng);
    bgs.push_back(BackgroundField::prescribed(g, 0.3, field));
    for (const auto& bg : bgs) {
      for (int k = 3; k <= n; ++k) {
        validate_background(bg, k);
        const auto f = family_on(bg, k, "0.5*sin(x1)*cos(x2) - 0.3", 1.7);
        worst = std::max(worst, sup_norm(residual(ScalarField(g, 0.0), 0.0, f)));
        ++backgrounds;
      }
    }
  }
  const PeriodicGrid g(3, 16);
  const auto f = family_on(BackgroundField::hyperbolic_like(g, 0.0), 3, "0.2*sin(x1)", 1.0);
  ContinuationState s;
  s.u = sample_expression(Expression::parse("0.01*sin(x1)"), g);
  const auto rep = newton_solve_at_t(s, f, SolverConfig{});
  const double back = sup_norm(s.u);
  return {worst <= 1e-12 && back <= 1e-8,
          std::to_string(backgrounds) + " (background, k) cases, max sup|F(0;0)| " + fmt("%.3g", worst) +
              "; Newton from 0.01 sin(x1): sup|u| = " + fmt("%.3g", back) + " after " +
              std::to_string(rep.iterations) + " iterations"};
}

Outcome manufactured_convergence() {
  const auto u_star = Expression::parse("0.1*sin(x1)*cos(x2)");
  std::vector<double> errors;
  std::string detail;
  for (int N : {16, 32}) {
    const PeriodicGrid g(3, N);
    const auto bg = BackgroundField::hyperbolic_like(g, 0.0);
    const auto p = manufacture(u_star, {ScalarField(g, 1.0), ScalarField(g, 1.0)}, bg, 3);
    const HomotopyFamily f(bg, p.coefficients);
    ContinuationState s;
    s.t = 1.0;
    s.u = p.u_star;
    try {
      (void)newton_solve_at_t(s, f, SolverConfig{});
    } catch (const NewtonError& e) {
      return {false, "Newton failed at N = " + std::to_string(N) + ": " + e.what()};
    }
    double err = 0.0;
    for (NodeIndex i = 0; i < s.u.size(); ++i) err = std::max(err, std::abs(s.u[i] - p.u_star[i]));
    errors.push_back(err);
    detail += "N=" + std::to_string(N) + " error " + fmt("%.4g", err) + ", ";
    if (N == 16) {
      // The continuation run on the same problem, reported alongside.
      try {
        const auto run = continuation_run(f, SolverConfig{});
        double dist = 0.0;
        for (NodeIndex i = 0; i < run.state.u.size(); ++i) dist = std::max(dist, std::abs(run.state.u[i] - p.u_star[i]));
        detail += "continuation at N=16 reaches t=1, sup|u - u_star| " + fmt("%.3g", dist) + ", ";
      } catch (const std::exception& e) {
        detail += std::string("continuation at N=16 did not finish (") + e.what() + "), ";
      }
    }
  }
  const double order = std::log2(errors[0] / errors[1]);
  return {order >= 1.8 && order <= 2.2, detail + "observed order " + fmt("%.4f", order)};
}

Outcome end_to_end() {
  const auto cfg = load_run_config(fs::path(KSIG_CONFIG_DIR) / "default.ini");
  const auto problem = build_problem(cfg);
  std::string breach;
  double min_margin = INFINITY, min_eig = INFINITY, min_slack = INFINITY;
  const auto run = continuation_run(problem.family, cfg.solver, nullptr, [&](const MonitorReport& r) {
    min_margin = std::min(min_margin, r.cone_margin);
    min_eig = std::min(min_eig, r.min_eig_Gij);
    min_slack = std::min(min_slack, r.eq33_slack);
    // cone_margin is min_{j<=k-1} sigma_j, a lower bound for sigma_{k-1}.
    if (!(r.cone_margin > 0.0 && r.cone_margin >= 1e-10)) breach += " margin@t=" + fmt("%.4g", r.t);
    if (!(r.min_eig_Gij > 0.0)) breach += " ellipticity@t=" + fmt("%.4g", r.t);
    if (!(r.eq33_slack >= -1e-8)) breach += " slack@t=" + fmt("%.4g", r.t);
  });
  const double final_res = sup_norm(residual(run.state.u, 1.0, problem.family));
  const bool ok = run.state.t == 1.0 && final_res <= 1e-9 && breach.empty();
  return {ok, std::to_string(run.reports.size()) + " accepted steps, final sup|F| " + fmt("%.3g", final_res) +
                  ", min cone margin " + fmt("%.4g", min_margin) + ", min eig G " + fmt("%.4g", min_eig) +
                  ", min G^ij U_ij + t alpha e^2u " + fmt("%.4g", min_slack) + (breach.empty() ? "" : ";" + breach)};
}

const char* kGateConfig = R"([problem]
n = 3
k = 3
tau = TAU
N = 8
background = BACKGROUND
alpha = 0.2*sin(x1)
alpha_l = ALPHA_L

[output]
dir = out
)";

std::string gate_config(const std::string& tau, const std::string& bg, const std::string& al) {
  std::string s = kGateConfig;
  s.replace(s.find("TAU"), 3, tau);
  s.replace(s.find("BACKGROUND"), 10, bg);
  s.replace(s.find("ALPHA_L"), 7, al);
  return s;
}

Outcome hypothesis_gating() {
  struct Case {
    std::string config, statement;
  };
  const std::vector<Case> cases{{gate_config("1.5", "hyperbolic-like", "1"), "tau < 1"},
                                {gate_config("0", "hyperbolic-like", "0"), "alpha_l > 0"},
                                {gate_config("0", "hyperbolic-like", "1, -0.2"), "alpha_l > 0"},
                                {gate_config("0", "spaceform:1", "1"), "lambda(-A^tau_{g0}) in Gamma_k"},
                                {gate_config("0.5", "spaceform:0", "1"), "lambda(-A^tau_{g0}) in Gamma_k"}};
  std::string problems;
  int i = 0;
  for (const auto& c : cases) {
    const auto dir = oracle::scratch_dir("acceptance_gate_" + std::to_string(i++));
    std::ofstream(dir / "run.ini") << c.config;
    std::ostringstream out, err;
    const int code = cmd_solve(dir / "run.ini", out, err);
    std::size_t entries = 0;
    for ([[maybe_unused]] const auto& e : fs::recursive_directory_iterator(dir)) ++entries;
    if (code != 2) problems += " exit " + std::to_string(code) + " for " + c.statement + ";";
    if (err.str().find(c.statement) == std::string::npos) problems += " message lacks \"" + c.statement + "\";";
    if (entries != 1) problems += " partial output for " + c.statement + ";";
  }
  return {problems.empty(), std::to_string(cases.size()) + " violating configs rejected with exit 2, hypothesis named, "
                                                          "no output written" +
                                (problems.empty() ? "" : ";" + problems)};
}

Outcome determinism() {
  std::string problems;
  std::vector<fs::path> dirs{oracle::scratch_dir("acceptance_rerun_a"), oracle::scratch_dir("acceptance_rerun_b")};
  for (const auto& d : dirs) {
    setenv(kOutputDirEnv, d.c_str(), 1);
    std::ostringstream out, err;
    if (cmd_solve(fs::path(KSIG_CONFIG_DIR) / "default.ini", out, err) != 0) problems += " solve failed;";
    if (cmd_report(d, out, err) != 0) problems += " report failed;";
  }
  unsetenv(kOutputDirEnv);
  int compared = 0;
  for (const auto& e : fs::directory_iterator(dirs[0])) {
    const auto name = e.path().filename();
    if (name == "timing.json") continue;  // wall-clock only
    if (oracle::slurp(e.path()) != oracle::slurp(dirs[1] / name)) problems += " " + name.string() + " differs;";
    ++compared;
  }

  CounterRng rng(99);
  const PeriodicGrid g(4, 8);
  ScalarField f(g);
  for (NodeIndex i = 0; i < f.size(); ++i) f[i] = std::ldexp(rng.normal(), static_cast<int>(rng.uniform(-1000, 1000)));
  f[0] = -0.0;
  f[1] = std::numeric_limits<double>::denorm_min();
  f[2] = std::numeric_limits<double>::max();
  const auto dir = oracle::scratch_dir("acceptance_roundtrip");
  write_field(dir / "f.ksig", f);
  const auto back = read_field(dir / "f.ksig");
  if (std::memcmp(back.values().data(), f.values().data(), f.size() * sizeof(double)) != 0) problems += " scalar round trip;";
  std::vector<SymTensor> tensors(g.node_count(), SymTensor(4));
  for (auto& t : tensors)
    for (auto& v : t.packed()) v = rng.normal();
  write_tensor_field(dir / "b.ksig", g, tensors);
  const auto tback = read_tensor_field(dir / "b.ksig", g);
  for (NodeIndex i = 0; i < g.node_count(); ++i)
    if (!(tback[i] == tensors[i])) {
      problems += " tensor round trip;";
      break;
    }
  return {problems.empty() && compared >= 10,
          std::to_string(compared) + " run artifacts byte-identical across reruns; scalar and tensor fields round-trip "
                                     "bit-exactly" +
              (problems.empty() ? "" : ";" + problems)};
}

}  // namespace

int main() {
  unsetenv(kOutputDirEnv);
  const std::vector<Criterion> criteria{
      {"cone inequality suite", 60.0, cone_inequalities},
      {"linearization vs finite differences", 30.0, linearization},
      {"trivial anchor and local uniqueness", 60.0, trivial_anchor},
      {"manufactured solution convergence order", 300.0, manufactured_convergence},
      {"end-to-end continuation", 180.0, end_to_end},
      {"hypothesis gating", 60.0, hypothesis_gating},
      {"determinism and field round trip", 120.0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = s <= c.budget_seconds;
    const bool ok = o.passed && in_budget;
    failed += ok ? 0 : 1;
    std::printf("[%s] %s: %s (%.2f s, budget %.0f s%s)\n", ok ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(), s,
                c.budget_seconds, in_budget ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
