#pragma once

// Subcommand implementations for the ksig tool. Each returns a process exit
// code and writes human-readable progress to `out` and problems to `err`.
//
//   solve        0 ok, 2 validation failure (nothing written), 3 continuation stall
//   verify       0 all properties pass, 1 a property failed, 2 usage error
//   manufacture  0 ok, 2 validation failure or cone rejection
//   report       0 ok, 2 missing or malformed monitors.csv

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ksig/config.hpp"
#include "ksig/continuation.hpp"
#include "ksig/expression.hpp"
#include "ksig/field_io.hpp"
#include "ksig/lemma_suite.hpp"
#include "ksig/manufactured.hpp"
#include "ksig/monitors.hpp"
#include "ksig/svg.hpp"

namespace ksig {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr const char* kMonitorsHeader =
    "t,sup_u,sup_grad_u,sup_lap_u,cone_margin,min_eig_Gij,trace_slack,max_sigma_ratio,eq33_slack,newton_iters";

namespace detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

inline std::string node_label(const PeriodicGrid& g, NodeIndex i) {
  const auto m = g.unravel(i);
  std::string s = std::to_string(i) + " (";
  for (int a = 0; a < g.dim(); ++a) s += (a ? "," : "") + std::to_string(m[a]);
  return s + ")";
}

}  // namespace detail

[[nodiscard]] inline std::string monitors_csv(const std::vector<MonitorReport>& reports) {
  using detail::num;
  std::string s = std::string(kMonitorsHeader) + "\n";
  for (const auto& r : reports) {
    s += num(r.t) + "," + num(r.sup_u) + "," + num(r.sup_grad_u) + "," + num(r.sup_lap_u) + "," + num(r.cone_margin) +
         "," + num(r.min_eig_Gij) + "," + num(r.trace_slack) + "," + num(r.max_sigma_ratio) + "," +
         num(r.eq33_slack) + "," + std::to_string(r.newton_iters) + "\n";
  }
  return s;
}

[[nodiscard]] inline std::string steps_csv(const std::vector<StepRecord>& steps) {
  using detail::num;
  std::string s = "t,dt,accepted,newton_iterations,residual,note\n";
  for (const auto& r : steps) {
    std::string note = r.note;
    for (char& c : note)
      if (c == ',' || c == '\n' || c == '"') c = ' ';
    s += num(r.t) + "," + num(r.dt) + "," + (r.accepted ? "1" : "0") + "," + std::to_string(r.newton_iterations) + "," +
         num(r.residual) + "," + note + "\n";
  }
  return s;
}

/// One row per Newton iterate of every accepted t.
[[nodiscard]] inline std::string newton_csv(const ContinuationResult& run) {
  using detail::num;
  std::string s = "t,iteration,residual,step_length,linear_iterations\n";
  for (std::size_t a = 0; a < run.newton.size() && a < run.reports.size(); ++a) {
    const auto& nr = run.newton[a];
    for (std::size_t j = 0; j < nr.residual_history.size(); ++j) {
      const bool has_step = j > 0 && j - 1 < nr.step_lengths.size();
      s += num(run.reports[a].t) + "," + std::to_string(j) + "," + num(nr.residual_history[j]) + "," +
           (has_step ? num(nr.step_lengths[j - 1]) : "") + "," +
           (has_step ? std::to_string(nr.linear_iterations[j - 1]) : "") + "\n";
    }
  }
  return s;
}

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses monitors.csv; the header must match the documented schema.
[[nodiscard]] inline std::vector<MonitorReport> read_monitors_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw CsvError(path.string() + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMonitorsHeader) throw CsvError(path.string() + ": unexpected header");
  std::vector<MonitorReport> out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double d = std::strtod(cell.c_str(), &end);
      if (cell.empty() || *end != '\0') throw CsvError(path.string() + ": bad number at row " + std::to_string(row));
      v.push_back(d);
    }
    if (v.size() != 10) throw CsvError(path.string() + ": expected 10 columns at row " + std::to_string(row));
    MonitorReport r;
    r.t = v[0];
    r.sup_u = v[1];
    r.sup_grad_u = v[2];
    r.sup_lap_u = v[3];
    r.cone_margin = v[4];
    r.min_eig_Gij = v[5];
    r.trace_slack = v[6];
    r.max_sigma_ratio = v[7];
    r.eq33_slack = v[8];
    r.newton_iters = static_cast<int>(v[9]);
    out.push_back(r);
  }
  if (out.empty()) throw CsvError(path.string() + " has no data rows");
  return out;
}

namespace detail {

/// (t, residual) of accepted steps from steps.csv, if present and readable.
inline std::optional<Series> read_residual_series(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,dt,accepted,newton_iterations,residual", 0) != 0) return std::nullopt;
  Series s{"sup |F|", {}, {}};
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 5) return std::nullopt;
    if (cells[2] != "1") continue;
    s.x.push_back(std::strtod(cells[0].c_str(), nullptr));
    s.y.push_back(std::strtod(cells[4].c_str(), nullptr));
  }
  return s;
}

inline Series column(const std::vector<MonitorReport>& r, const char* label, double MonitorReport::*field) {
  Series s{label, {}, {}};
  for (const auto& m : r) {
    s.x.push_back(m.t);
    s.y.push_back(m.*field);
  }
  return s;
}

inline std::string convergence_chart(const ContinuationResult& run) {
  Series res{"sup |F|", {}, {}};
  for (const auto& r : run.reports) {
    res.x.push_back(r.t);
    res.y.push_back(r.residual);
  }
  return render_line_chart({res, column(run.reports, "sup |u|", &MonitorReport::sup_u),
                            column(run.reports, "sup |du|", &MonitorReport::sup_grad_u),
                            column(run.reports, "sup |Lap u|", &MonitorReport::sup_lap_u)},
                           {"Residual and sup-norms along the homotopy", "t", "value (log scale)", true});
}

struct SolveArtifacts {
  const RunConfig* config = nullptr;
  const ContinuationResult* run = nullptr;
  std::string status;
  std::string message;
  double seconds = 0.0;
};

inline void write_solve_outputs(const std::filesystem::path& dir, const SolveArtifacts& a) {
  const auto& cfg = *a.config;
  const auto& run = *a.run;
  write_field(dir / "u.ksig", run.state.u);
  if (cfg.output.csv) {
    write_text(dir / "monitors.csv", monitors_csv(run.reports));
    write_text(dir / "steps.csv", steps_csv(run.state.steps));
    write_text(dir / "newton.csv", newton_csv(run));
    write_field_csv(dir / "u.csv", run.state.u);
  }
  if (cfg.output.json) {
    nlohmann::ordered_json j;
    j["version"] = kVersion;
    j["status"] = a.status;
    if (!a.message.empty()) j["message"] = a.message;
    j["t_reached"] = run.state.t;
    j["final_residual"] = run.state.last_residual;
    int rejected = 0;
    for (const auto& s : run.state.steps) rejected += s.accepted ? 0 : 1;
    j["accepted_steps"] = run.reports.size();
    j["rejected_steps"] = rejected;
    int newton_total = 0;
    for (int v : run.state.newton_iterations) newton_total += v;
    j["newton_iterations"] = newton_total;
    if (!run.reports.empty()) {
      const auto trace = estimate_trace_series(run.reports);
      j["observed"] = {{"max_sup_u", trace.max_sup_u},
                       {"max_sup_grad_u", trace.max_sup_grad_u},
                       {"max_sup_lap_u", trace.max_sup_lap_u},
                       {"max_sigma_ratio", trace.max_sigma_ratio},
                       {"min_cone_margin", trace.min_cone_margin},
                       {"blow_up", trace.blow_up},
                       {"warnings", trace.warnings}};
    }
    j["config"] = to_json(cfg);
    write_text(dir / "summary.json", j.dump(2) + "\n");
    nlohmann::ordered_json timing;
    timing["wall_seconds"] = a.seconds;
    write_text(dir / "timing.json", timing.dump(2) + "\n");
  }
  if (cfg.output.svg && !run.reports.empty()) write_text(dir / "convergence.svg", convergence_chart(run));
}

}  // namespace detail

/// Runs the continuation described by a config file.
inline int cmd_solve(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::optional<Problem> problem;
  try {
    cfg = load_run_config(config_path);
    problem.emplace(build_problem(cfg));
  } catch (const HypothesisError& e) {
    err << "validation failed: hypothesis \"" << hypothesis_statement(e.which()) << "\" violated: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "validation failed: " << e.what() << "\n";
    return 2;
  }

  const auto dir = cfg.output_dir();
  std::filesystem::create_directories(dir);
  const auto t0 = std::chrono::steady_clock::now();
  auto seconds = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

  try {
    const auto run = continuation_run(problem->family, cfg.solver, problem->u0 ? &*problem->u0 : nullptr,
                                      [&](const MonitorReport& r) {
                                        out << "t = " << r.t << "  residual = " << r.residual
                                            << "  newton = " << r.newton_iters << "\n";
                                      });
    detail::write_solve_outputs(dir, {&cfg, &run, "converged", "", seconds()});
    out << "reached t = 1 with residual " << run.state.last_residual << "; outputs in " << dir.string() << "\n";
    return 0;
  } catch (const ContinuationStall& e) {
    detail::write_solve_outputs(dir, {&cfg, &e.last_good(), "stalled", e.what(), seconds()});
    err << e.what() << "\nlast good state (t = " << e.last_good().state.t << ") written to " << dir.string() << "\n";
    return 3;
  } catch (const NewtonError& e) {
    // The t = 0 solve failed: nothing was accepted.
    ContinuationResult empty;
    empty.state.t = 0.0;
    empty.state.u = problem->u0 ? *problem->u0 : ScalarField(problem->grid, 0.0);
    empty.state.last_residual = e.final_residual();
    detail::write_solve_outputs(dir, {&cfg, &empty, "stalled", e.what(), seconds()});
    err << "continuation could not start: " << e.what() << "\n";
    return 3;
  }
}

/// Runs the randomized property suite and writes lemmas.json to `out_path`.
inline int cmd_verify(int n, int k, long samples, std::uint64_t seed, const std::filesystem::path& out_path,
                      std::ostream& out, std::ostream& err) {
  if (n < 3 || n > kMaxDim || k < 3 || k > n) {
    err << "usage error: need 3 <= k <= n <= 5, got n=" << n << " k=" << k << "\n";
    return 2;
  }
  if (samples < 1) {
    err << "usage error: samples must be >= 1\n";
    return 2;
  }
  const auto result = run_lemma_suite(n, k, samples, seed);
  if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());
  detail::write_text(out_path, to_json(result).dump(2) + "\n");
  for (const auto& p : result.properties) {
    (p.passed ? out : err) << (p.passed ? "pass  " : "FAIL  ") << p.name << "  max violation " << p.max_violation
                           << "  (" << p.samples << " checked, " << p.skipped << " skipped)\n";
  }
  out << "wrote " << out_path.string() << "\n";
  return result.passed() ? 0 : 1;
}

/// Builds alpha for the config's [manufacture] u_star and writes alpha.ksig,
/// u_star.ksig, the alpha_l fields and a ready-to-solve manufactured.ini.
inline int cmd_manufacture(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  ManufacturedProblem mp;
  BackgroundField background;
  std::optional<PeriodicGrid> grid;
  try {
    cfg = load_run_config(config_path);
    if (!cfg.u_star) throw ConfigError("[manufacture] u_star is required");
    validate_order(cfg.n, cfg.k);
    validate_tau(cfg.tau);
    cfg.solver.validate();
    grid.emplace(cfg.n, cfg.resolution);
    const auto specs = cfg.alpha_l_specs();
    if (static_cast<int>(specs.size()) != cfg.k - 1) throw ConfigError("problem.alpha_l needs 1 or k-1 entries");
    std::vector<ScalarField> alpha_l;
    for (const auto& s : specs) alpha_l.push_back(load_field_spec(cfg, s, *grid));
    background = load_background(cfg, *grid);
    validate_background(background, cfg.k);
    mp = manufacture(Expression::parse(*cfg.u_star), alpha_l, background, cfg.k);
  } catch (const ManufactureRejected& e) {
    err << "rejected: " << e.what() << " at node " << detail::node_label(*grid, e.worst_node()) << "\n";
    return 2;
  } catch (const HypothesisError& e) {
    err << "validation failed: hypothesis \"" << hypothesis_statement(e.which()) << "\" violated: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "validation failed: " << e.what() << "\n";
    return 2;
  }

  double res = 0.0;
  try {
    const HomotopyFamily family(background, mp.coefficients);
    res = sup_norm(residual(mp.u_star, 1.0, family));
  } catch (const InadmissibleNode& e) {
    err << "rejected: discrete jets of u_star leave the cone: " << e.what() << "\n";
    return 2;
  }

  const auto dir = cfg.output_dir();
  std::filesystem::create_directories(dir);
  write_field(dir / "alpha.ksig", mp.coefficients.alpha);
  write_field(dir / "u_star.ksig", mp.u_star);
  RunConfig ready = cfg;
  ready.base_dir = dir;
  ready.alpha = "file:alpha.ksig";
  ready.alpha_l.clear();
  for (std::size_t l = 0; l < mp.coefficients.alpha_l.size(); ++l) {
    const auto name = "alpha_l" + std::to_string(l) + ".ksig";
    write_field(dir / name, mp.coefficients.alpha_l[l]);
    ready.alpha_l.push_back("file:" + name);
  }
  for (const char* prefix : {"tensor-file:", "phi-file:"}) {
    if (detail::starts_with(cfg.background, prefix)) {
      const auto len = std::string(prefix).size();
      ready.background = prefix + std::filesystem::absolute(cfg.resolve(detail::trim(cfg.background.substr(len)))).string();
    }
  }
  if (ready.u0 && detail::starts_with(*ready.u0, "file:")) {
    ready.u0 = "file:" + std::filesystem::absolute(cfg.resolve(detail::trim(ready.u0->substr(5)))).string();
  }
  ready.output.dir = "solve";
  detail::write_text(dir / "manufactured.ini", to_ini(ready));

  const double h = grid->spacing();
  out << "u_star residual at t = 1: sup |F| = " << detail::num(res) << " (h^2 = " << detail::num(h * h) << ")\n";
  out << "alpha range [" << *std::min_element(mp.coefficients.alpha.values().begin(), mp.coefficients.alpha.values().end())
      << ", " << *std::max_element(mp.coefficients.alpha.values().begin(), mp.coefficients.alpha.values().end())
      << "]\nwrote " << (dir / "manufactured.ini").string() << "\n";
  return 0;
}

/// Renders residual.svg, sup_norms.svg and cone_margin.svg from a run directory.
inline int cmd_report(const std::filesystem::path& run_dir, std::ostream& out, std::ostream& err) {
  std::vector<MonitorReport> reports;
  try {
    reports = read_monitors_csv(run_dir / "monitors.csv");
  } catch (const CsvError& e) {
    err << "report: " << e.what() << "\n";
    return 2;
  }
  auto residual = detail::read_residual_series(run_dir / "steps.csv");
  const std::string residual_title =
      residual ? "Residual at accepted steps" : "Residual at accepted steps (steps.csv not found)";
  if (!residual) residual = Series{"sup |F|", {}, {}};

  using detail::column;
  detail::write_text(run_dir / "residual.svg",
                     render_line_chart({*residual}, {residual_title, "t", "sup |F| (log scale)", true}));
  detail::write_text(run_dir / "sup_norms.svg",
                     render_line_chart({column(reports, "sup |u|", &MonitorReport::sup_u),
                                        column(reports, "sup |du|", &MonitorReport::sup_grad_u),
                                        column(reports, "sup |Lap u|", &MonitorReport::sup_lap_u)},
                                       {"Observed sup-norms", "t", "value", false}));
  detail::write_text(run_dir / "cone_margin.svg",
                     render_line_chart({column(reports, "cone margin", &MonitorReport::cone_margin),
                                        column(reports, "min eig G^ij", &MonitorReport::min_eig_Gij)},
                                       {"Cone margin and ellipticity", "t", "value (log scale)", true}));
  out << "wrote residual.svg, sup_norms.svg, cone_margin.svg in " << run_dir.string() << "\n";
  return 0;
}

}  // namespace ksig
