#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ksig/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Continuation solver and property checks for sigma_k quotient equations on the flat torus"};
  app.set_version_flag("--version", ksig::kVersion);
  app.require_subcommand(1);

  std::string solve_config;
  auto* solve = app.add_subcommand("solve", "run the continuation from t = 0 to t = 1");
  solve->add_option("config", solve_config, "run configuration (INI)")->required();

  int n = 3, k = 3;
  long samples = 10000;
  std::uint64_t seed = 42;
  std::string out_path;
  auto* verify = app.add_subcommand("verify", "randomized checks of the cone inequalities");
  verify->add_option("--n", n, "dimension")->required();
  verify->add_option("--k", k, "order")->required();
  verify->add_option("--samples", samples, "samples per property")->capture_default_str();
  verify->add_option("--seed", seed, "generator seed")->capture_default_str();
  verify->add_option("--out", out_path, "output JSON (default lemmas.json in the output directory)");

  std::string manufacture_config;
  auto* manufacture = app.add_subcommand("manufacture", "build alpha for a prescribed solution u_star");
  manufacture->add_option("config", manufacture_config, "configuration with a [manufacture] section")->required();

  std::string report_dir;
  auto* report = app.add_subcommand("report", "render SVG charts from a run directory");
  report->add_option("dir", report_dir, "directory containing monitors.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*solve) return ksig::cmd_solve(solve_config, std::cout, std::cerr);
    if (*verify) {
      std::filesystem::path path = out_path;
      if (path.empty()) {
        const char* env = std::getenv(ksig::kOutputDirEnv);
        path = std::filesystem::path(env && *env ? env : ".") / "lemmas.json";
      }
      return ksig::cmd_verify(n, k, samples, seed, path, std::cout, std::cerr);
    }
    if (*manufacture) return ksig::cmd_manufacture(manufacture_config, std::cout, std::cerr);
    if (*report) return ksig::cmd_report(report_dir, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
