// curvkit: batch driver for the curvature-set verification suites.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "curvkit/report.hpp"

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument(item);
    out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace curvkit;
  CLI::App app{"Numerical verification of Bianchi-convex and ODE-invariant curvature sets"};
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  std::optional<int> rotations;
  std::vector<std::string> tols;
  std::vector<std::string> extra;
  std::optional<std::string> set_name;
  std::optional<std::string> f_name;
  std::optional<double> a, c, b, lambda_star, dt, t_end;
  std::optional<int> grid, dims;
  std::optional<std::string> init, r0;

  std::string command_help = "one of:";
  for (const auto& n : command_names()) command_help += " " + n;
  app.add_option("command", command, command_help)->required();
  app.add_option("--config", config_path, "JSON configuration (or a previous report)");
  app.add_option("--seed", seed, "global 64-bit seed");
  app.add_option("--out", out_dir, "output directory for report.json and data files");
  app.add_option("--samples", samples, "sample budget");
  app.add_option("--rotations", rotations, "rotations per direct sample");
  app.add_option("--tol", tols, "tolerance override key=value (repeatable)");
  app.add_option("--param", extra, "extra parameter key=value (repeatable)");
  app.add_option("--set", set_name, "set name");
  app.add_option("--f", f_name, "eigenvalue function name");
  app.add_option("--a", a, "parameter a");
  app.add_option("--c", c, "parameter c");
  app.add_option("--b", b, "parameter b");
  app.add_option("--lambda-star", lambda_star, "star-shape center lambda (S = lambda I)");
  app.add_option("--grid", grid, "grid cells per axis");
  app.add_option("--dims", dims, "grid dimension (1 or 2)");
  app.add_option("--dt", dt, "time step");
  app.add_option("--T", t_end, "end time or horizon");
  app.add_option("--init", init, "initial field: psd, random, constant");
  app.add_option("--r0", r0, "initial operator: 3 diagonal or 9 entries, comma separated");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) fail(ErrorKind::Config, "cannot read config '" + config_path + "'");
      nlohmann::json j;
      try {
        is >> j;
      } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Config, "config '" + config_path + "' is not valid JSON: " + e.what());
      }
      cfg = config_from_json(j);
    }
    cfg.command = command;
    if (seed) cfg.seed = *seed;
    if (samples) cfg.samples = *samples;
    if (rotations) cfg.rotations = *rotations;
    if (set_name) cfg.set_name = *set_name;
    if (f_name) cfg.f_name = *f_name;
    if (a) cfg.params["a"] = *a;
    if (c) cfg.params["c"] = *c;
    if (b) cfg.params["b"] = *b;
    if (lambda_star) cfg.params["lambda_star"] = *lambda_star;
    if (grid) cfg.grid = *grid;
    if (dims) cfg.dims = *dims;
    if (dt) cfg.dt = *dt;
    if (t_end) cfg.t_end = *t_end;
    if (init) cfg.init = *init;
    auto split = [](const std::string& kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) fail(ErrorKind::Config, "expected key=value, got '" + kv + "'");
      try {
        std::size_t used = 0;
        const std::string value = kv.substr(eq + 1);
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return std::pair{kv.substr(0, eq), v};
      } catch (const std::logic_error&) {
        fail(ErrorKind::Config, "bad number in '" + kv + "'");
      }
    };
    for (const auto& kv : tols) {
      const auto [k, v] = split(kv);
      cfg.tolerances[k] = v;
    }
    for (const auto& kv : extra) {
      const auto [k, v] = split(kv);
      cfg.params[k] = v;
    }
    if (r0) {
      try {
        cfg.r0 = parse_list(*r0);
      } catch (const std::logic_error&) {
        fail(ErrorKind::Config, "bad --r0 list '" + *r0 + "'");
      }
    }

    const Report report = run_command(cfg);
    for (const auto& w : report.body["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
    if (!out_dir.empty()) emit_report(report, out_dir);
    else std::cout << report.body.dump(2) << "\n";
    std::cerr << command << ": " << to_string(report.verdict) << "\n";
    return report.exit_code;
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
