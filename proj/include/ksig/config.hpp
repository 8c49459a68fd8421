#pragma once

// Run configuration: an INI file with [problem], [solver], [output] and
// [manufacture] sections plus an optional top-level `seed`. Lines starting
// with ';' or '#' are comments. See configs/ for annotated samples.
//
// Field values are either builtin expressions (see expression.hpp) or
// `file:<path>` pointing at a KSIG field file. Relative paths resolve against
// the directory of the config file. The background is one of
//   hyperbolic-like      A^tau_{g0} = -g0 on the flat torus
//   spaceform:<kappa>    constant A^tau_{g0} of a space form of curvature kappa
//   tensor-file:<path>   per-node coordinate components of A^tau_{g0}
//   phi:<expr>           g0 = e^{2 phi} delta
//   phi-file:<path>      same, phi read from a field file

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "ksig/expression.hpp"
#include "ksig/field_io.hpp"
#include "ksig/geometry.hpp"
#include "ksig/newton.hpp"
#include "ksig/residual.hpp"

namespace ksig {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr const char* kOutputDirEnv = "KSIG_OUTPUT_DIR";

struct OutputConfig {
  std::string dir = "out";
  bool csv = true;
  bool json = true;
  bool svg = true;
};

struct RunConfig {
  int n = 3;
  int k = 3;
  double tau = 0.0;
  int resolution = 16;
  std::string background = "hyperbolic-like";
  std::string alpha = "0";
  std::vector<std::string> alpha_l{"1"};  // one entry is broadcast to every l
  std::optional<std::string> u0;
  std::optional<std::string> u_star;
  SolverConfig solver;
  OutputConfig output;
  std::uint64_t seed = 0;
  std::filesystem::path base_dir = ".";

  /// alpha_l specs expanded to exactly k - 1 entries.
  [[nodiscard]] std::vector<std::string> alpha_l_specs() const {
    if (alpha_l.size() == 1) return std::vector<std::string>(static_cast<std::size_t>(std::max(k - 1, 0)), alpha_l[0]);
    return alpha_l;
  }

  [[nodiscard]] std::filesystem::path resolve(const std::string& p) const {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  }

  /// Output directory after the environment override.
  [[nodiscard]] std::filesystem::path output_dir() const {
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return std::filesystem::path(env);
    return resolve(output.dir);
  }
};

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

template <class T>
T parse_value(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  T v{};
  in >> v;
  if (in.fail() || !(in >> std::ws).eof()) throw ConfigError("bad value for " + key + ": \"" + text + "\"");
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("bad boolean for " + key + ": \"" + text + "\"");
}

inline bool starts_with(const std::string& s, const char* prefix) { return s.rfind(prefix, 0) == 0; }

}  // namespace detail

[[nodiscard]] inline RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir = ".") {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.message() + " at line " + std::to_string(e.line()));
  }

  RunConfig c;
  c.base_dir = base_dir;
  const std::set<std::string> sections{"problem", "solver", "output", "manufacture"};
  for (const auto& [name, node] : tree) {
    const auto value = detail::trim(node.data());
    if (node.empty() && !sections.count(name)) {
      if (name == "seed") c.seed = detail::parse_value<std::uint64_t>(name, value);
      else throw ConfigError("unknown top-level key \"" + name + "\"");
      continue;
    }
    if (!sections.count(name)) throw ConfigError("unknown section [" + name + "]");
    for (const auto& [key, child] : node) {
      const auto v = detail::trim(child.data());
      const auto full = name + "." + key;
      using detail::parse_bool;
      using detail::parse_value;
      if (name == "problem") {
        if (key == "n") c.n = parse_value<int>(full, v);
        else if (key == "k") c.k = parse_value<int>(full, v);
        else if (key == "tau") c.tau = parse_value<double>(full, v);
        else if (key == "N") c.resolution = parse_value<int>(full, v);
        else if (key == "background") c.background = v;
        else if (key == "alpha") c.alpha = v;
        else if (key == "alpha_l") c.alpha_l = detail::split_list(v);
        else if (key == "u0") c.u0 = v;
        else throw ConfigError("unknown key " + full);
      } else if (name == "solver") {
        auto& s = c.solver;
        if (key == "residual_tolerance") s.residual_tolerance = parse_value<double>(full, v);
        else if (key == "max_newton_iterations") s.max_newton_iterations = parse_value<int>(full, v);
        else if (key == "dt_initial") s.dt_initial = parse_value<double>(full, v);
        else if (key == "dt_min") s.dt_min = parse_value<double>(full, v);
        else if (key == "damping_shrink") s.damping_shrink = parse_value<double>(full, v);
        else if (key == "cone_margin") s.cone_margin = parse_value<double>(full, v);
        else if (key == "linear_tolerance") s.linear_tolerance = parse_value<double>(full, v);
        else if (key == "linear_max_iterations") s.linear_max_iterations = parse_value<int>(full, v);
        else if (key == "linear_restart") s.linear_restart = parse_value<int>(full, v);
        else if (key == "min_step_length") s.min_step_length = parse_value<double>(full, v);
        else throw ConfigError("unknown key " + full);
      } else if (name == "output") {
        if (key == "dir") c.output.dir = v;
        else if (key == "csv") c.output.csv = parse_bool(full, v);
        else if (key == "json") c.output.json = parse_bool(full, v);
        else if (key == "svg") c.output.svg = parse_bool(full, v);
        else throw ConfigError("unknown key " + full);
      } else {
        if (key == "u_star") c.u_star = v;
        else throw ConfigError("unknown key " + full);
      }
    }
  }
  if (c.alpha_l.empty() || (c.alpha_l.size() == 1 && c.alpha_l[0].empty())) {
    throw ConfigError("problem.alpha_l must list at least one field");
  }
  return c;
}

[[nodiscard]] inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_run_config(in, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

/// INI text that parses back to the same configuration.
[[nodiscard]] inline std::string to_ini(const RunConfig& c) {
  std::ostringstream o;
  o.imbue(std::locale::classic());
  o.precision(17);
  auto list = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
    return s;
  };
  o << "seed = " << c.seed << "\n\n[problem]\n"
    << "n = " << c.n << "\nk = " << c.k << "\ntau = " << c.tau << "\nN = " << c.resolution
    << "\nbackground = " << c.background << "\nalpha = " << c.alpha << "\nalpha_l = " << list(c.alpha_l) << "\n";
  if (c.u0) o << "u0 = " << *c.u0 << "\n";
  const auto& s = c.solver;
  o << "\n[solver]\nresidual_tolerance = " << s.residual_tolerance << "\nmax_newton_iterations = "
    << s.max_newton_iterations << "\ndt_initial = " << s.dt_initial << "\ndt_min = " << s.dt_min
    << "\ndamping_shrink = " << s.damping_shrink << "\ncone_margin = " << s.cone_margin
    << "\nlinear_tolerance = " << s.linear_tolerance << "\nlinear_max_iterations = " << s.linear_max_iterations
    << "\nlinear_restart = " << s.linear_restart << "\nmin_step_length = " << s.min_step_length << "\n";
  o << "\n[output]\ndir = " << c.output.dir << "\ncsv = " << (c.output.csv ? "true" : "false")
    << "\njson = " << (c.output.json ? "true" : "false") << "\nsvg = " << (c.output.svg ? "true" : "false") << "\n";
  if (c.u_star) o << "\n[manufacture]\nu_star = " << *c.u_star << "\n";
  return o.str();
}

[[nodiscard]] inline nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["problem"] = {{"n", c.n},
                  {"k", c.k},
                  {"tau", c.tau},
                  {"N", c.resolution},
                  {"background", c.background},
                  {"alpha", c.alpha},
                  {"alpha_l", c.alpha_l}};
  if (c.u0) j["problem"]["u0"] = *c.u0;
  const auto& s = c.solver;
  j["solver"] = {{"residual_tolerance", s.residual_tolerance},
                 {"max_newton_iterations", s.max_newton_iterations},
                 {"dt_initial", s.dt_initial},
                 {"dt_min", s.dt_min},
                 {"damping_shrink", s.damping_shrink},
                 {"cone_margin", s.cone_margin},
                 {"linear_tolerance", s.linear_tolerance},
                 {"linear_max_iterations", s.linear_max_iterations},
                 {"linear_restart", s.linear_restart},
                 {"min_step_length", s.min_step_length}};
  j["output"] = {{"dir", c.output.dir}, {"csv", c.output.csv}, {"json", c.output.json}, {"svg", c.output.svg}};
  if (c.u_star) j["manufacture"] = {{"u_star", *c.u_star}};
  return j;
}

/// Field spec: `file:<path>` or a builtin expression.
[[nodiscard]] inline ScalarField load_field_spec(const RunConfig& c, const std::string& spec, const PeriodicGrid& grid) {
  if (detail::starts_with(spec, "file:")) return read_field(c.resolve(detail::trim(spec.substr(5))), grid);
  return sample_expression(Expression::parse(spec), grid);
}

[[nodiscard]] inline BackgroundField load_background(const RunConfig& c, const PeriodicGrid& grid) {
  const auto& b = c.background;
  if (b == "hyperbolic-like") return BackgroundField::hyperbolic_like(grid, c.tau);
  if (detail::starts_with(b, "spaceform:")) {
    const double kappa = detail::parse_value<double>("problem.background", detail::trim(b.substr(10)));
    return BackgroundField::uniform(grid, c.tau, spaceform_schouten(kappa, grid.dim(), c.tau));
  }
  if (detail::starts_with(b, "tensor-file:")) {
    return BackgroundField::prescribed(grid, c.tau, read_tensor_field(c.resolve(detail::trim(b.substr(12))), grid));
  }
  if (detail::starts_with(b, "phi:")) {
    return BackgroundField::conformally_flat(sample_expression(Expression::parse(b.substr(4)), grid), c.tau);
  }
  if (detail::starts_with(b, "phi-file:")) {
    return BackgroundField::conformally_flat(read_field(c.resolve(detail::trim(b.substr(9))), grid), c.tau);
  }
  throw ConfigError("unknown background \"" + b + "\"");
}

/// Everything a solve needs, validated.
struct Problem {
  PeriodicGrid grid;
  HomotopyFamily family;
  std::optional<ScalarField> u0;
};

/// Loads fields and checks every hypothesis before any compute: 3 <= k <= n,
/// tau < 1, alpha_l > 0, lambda(-A^tau_{g0}) in Gamma_k. Throws
/// HypothesisError, ConfigError, FieldIoError or GridError.
[[nodiscard]] inline Problem build_problem(const RunConfig& c) {
  validate_order(c.n, c.k);
  validate_tau(c.tau);
  c.solver.validate();
  const PeriodicGrid grid(c.n, c.resolution);

  CoefficientData coeff;
  coeff.k = c.k;
  coeff.alpha = load_field_spec(c, c.alpha, grid);
  const auto specs = c.alpha_l_specs();
  if (static_cast<int>(specs.size()) != c.k - 1) {
    throw ConfigError("problem.alpha_l needs 1 or k-1 = " + std::to_string(c.k - 1) + " entries, got " +
                      std::to_string(specs.size()));
  }
  for (const auto& s : specs) coeff.alpha_l.push_back(load_field_spec(c, s, grid));
  validate_coefficients(coeff, grid);

  auto background = load_background(c, grid);
  validate_background(background, c.k);

  std::optional<ScalarField> u0;
  if (c.u0) u0 = load_field_spec(c, *c.u0, grid);
  return Problem{grid, HomotopyFamily(std::move(background), std::move(coeff)), std::move(u0)};
}

}  // namespace ksig
