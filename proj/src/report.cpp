#include "curvkit/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "curvkit/ode.hpp"
#include "curvkit/rd.hpp"

namespace curvkit {
namespace {

bool needs_ac(const RunConfig& c) {
  if (c.command == "check-bianchi-eigen" || c.command == "cross-validate") return c.f_name == "f-ac";
  if (c.command == "min-b-scan") return true;
  return c.set_name == "omega-ac" || c.set_name == "omega-tilde-ac" ||
         (c.set_name == "omega-f" && c.f_name == "f-ac");
}

void set_default(std::map<std::string, double>& m, const std::string& key, double value) {
  m.try_emplace(key, value);
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {
      "calibrate",          "check-bianchi-eigen", "check-bianchi-direct", "cross-validate", "check-ode-invariance",
      "min-b-scan",         "star-shape",          "simulate-ode",         "simulate-rd",
  };
  return names;
}

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> tol = {
      {"band", 1e-6},        // eigen margins in [-band, 0] are marginal passes
      {"direct", 1e-8},      // direct margins above this fail
      {"gap_rel", 1e-4},     // spectral gap exclusion
      {"tangent", 1e-6},     // tangent-cone margin per (1 + |Phi|)
      {"monitor", 1e-6},     // trajectory exit margin per (1 + |R|)
      {"calibrate", 1e-10},  // sharp(I) and Ric(I) identities
      {"sharp", 1e-9},       // adjugate vs structure-constant sharp
      {"kernel_gap", 1e6},   // retained / discarded singular values
      {"star", 1e-8},        // halfspace closed form
      {"containment", 1e-6}, // simulator exit margin per (1 + max norm)
      {"ode", 1e-8},         // integrator error target per unit time
  };
  return tol;
}

RunConfig resolve_config(const RunConfig& config) {
  RunConfig c = config;
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), c.command) == names.end())
    fail(ErrorKind::Config, "unknown command '" + c.command + "'");
  for (const auto& [k, v] : c.tolerances) {
    if (!default_tolerances().count(k)) fail(ErrorKind::Config, "unknown tolerance key '" + k + "'");
    if (!std::isfinite(v) || v < 0.0) fail(ErrorKind::Config, "tolerance '" + k + "' must be finite and >= 0");
  }
  for (const auto& [k, v] : default_tolerances()) c.tolerances.try_emplace(k, v);
  for (const auto& [k, v] : c.params)
    if (!std::isfinite(v)) fail(ErrorKind::Config, "parameter '" + k + "' must be finite");
  for (double v : c.r0)
    if (!std::isfinite(v)) fail(ErrorKind::Config, "r0 entries must be finite");
  if (c.samples < 0) fail(ErrorKind::Config, "samples must be non-negative");
  if (c.rotations < 1) fail(ErrorKind::Config, "rotations must be at least 1");
  if (!std::isfinite(c.dt) || !std::isfinite(c.t_end)) fail(ErrorKind::Config, "dt and T must be finite");

  const std::string& cmd = c.command;
  if (c.set_name.empty()) {
    if (cmd == "check-bianchi-direct") c.set_name = "omega-ac";
    if (cmd == "check-ode-invariance" || cmd == "star-shape") c.set_name = "omega-tilde-ac";
    if (cmd == "simulate-rd") c.set_name = "psd";
  }
  if (needs_ac(c)) {
    set_default(c.params, "a", 0.35);
    set_default(c.params, "c", 1.0);
  }
  if (c.f_name == "sphere" && (cmd == "check-bianchi-eigen" || cmd == "cross-validate" || c.set_name == "omega-f"))
    set_default(c.params, "radius", 1.0);
  if (c.set_name == "omega-tilde-ac") set_default(c.params, "b", b_formula(c.params.at("a"), c.params.at("c")));
  if (c.set_name == "halfspace-scal") set_default(c.params, "b", 1.0);

  static const std::map<std::string, int> budgets = {
      {"calibrate", 1000},  {"check-bianchi-eigen", 2000}, {"check-bianchi-direct", 500},
      {"cross-validate", 500}, {"check-ode-invariance", 500}, {"min-b-scan", 200},
      {"star-shape", 500},  {"simulate-ode", 0},            {"simulate-rd", 0},
  };
  if (c.samples == 0) c.samples = budgets.at(cmd);

  if (cmd == "check-ode-invariance") {
    set_default(c.params, "starts", 100);
    set_default(c.params, "horizon", 10.0);
    set_default(c.params, "scal_stop", 1e3);
  }
  if (cmd == "star-shape") {
    const double b = c.params.count("b") ? c.params.at("b") : 1.0;
    set_default(c.params, "lambda_star", 1.1 * b / 3.0);
    set_default(c.params, "k_radius", std::max(10.0 * std::abs(b), 1.0));
  }
  if (cmd == "min-b-scan") set_default(c.params, "steps", 64);
  if (cmd == "simulate-ode") {
    if (c.r0.empty()) c.r0 = {1.0, 2.0, 3.0};
    if (c.r0.size() != 3 && c.r0.size() != 9)
      fail(ErrorKind::Config, "r0 must list 3 diagonal entries or 9 matrix entries");
    if (c.t_end == 0.0) c.t_end = 1.0;
  }
  if (cmd == "simulate-rd") {
    if (c.t_end == 0.0) c.t_end = 0.5;
    set_default(c.params, "cfl_safety", 0.9);
    set_default(c.params, "cadence", 20);
    set_default(c.params, "blowup", 1e3);
    set_default(c.params, "amplitude", 1.0);
    set_default(c.params, "constant", 1.0);
    set_default(c.params, "spot_epsilon", 0.0);
    set_default(c.params, "spot_band", 1e-3);
    set_default(c.params, "reaction", 1.0);
    if (c.grid < 3) fail(ErrorKind::Config, "grid needs at least 3 cells");
    if (c.dims != 1 && c.dims != 2) fail(ErrorKind::Config, "dims must be 1 or 2");
    initial_field_from_string(c.init);
  }
  return c;
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["command"] = c.command;
  j["set"] = c.set_name;
  j["f"] = c.f_name;
  j["params"] = c.params;
  j["samples"] = c.samples;
  j["rotations"] = c.rotations;
  j["seed"] = c.seed;
  j["tolerances"] = c.tolerances;
  j["grid"] = c.grid;
  j["dims"] = c.dims;
  j["dt"] = c.dt;
  j["T"] = c.t_end;
  j["init"] = c.init;
  j["r0"] = c.r0;
  return j;
}

RunConfig config_from_json(const nlohmann::json& input, RunConfig c) {
  const nlohmann::json& j = input.contains("config") && input["config"].is_object() ? input["config"] : input;
  if (!j.is_object()) fail(ErrorKind::Config, "configuration must be a JSON object");
  try {
    if (j.contains("command")) c.command = j["command"].get<std::string>();
    if (j.contains("set")) c.set_name = j["set"].get<std::string>();
    if (j.contains("f")) c.f_name = j["f"].get<std::string>();
    if (j.contains("params"))
      for (const auto& [k, v] : j["params"].items()) c.params[k] = v.get<double>();
    if (j.contains("samples")) c.samples = j["samples"].get<int>();
    if (j.contains("rotations")) c.rotations = j["rotations"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("tolerances"))
      for (const auto& [k, v] : j["tolerances"].items()) c.tolerances[k] = v.get<double>();
    if (j.contains("grid")) c.grid = j["grid"].get<int>();
    if (j.contains("dims")) c.dims = j["dims"].get<int>();
    if (j.contains("dt")) c.dt = j["dt"].get<double>();
    if (j.contains("T")) c.t_end = j["T"].get<double>();
    if (j.contains("init")) c.init = j["init"].get<std::string>();
    if (j.contains("r0")) c.r0 = j["r0"].get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Config, std::string("malformed configuration: ") + e.what());
  }
  return c;
}

void emit_report(const Report& report, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create output directory '" + dir + "': " + ec.message());
  auto write = [&](const std::string& name, const std::string& text) {
    const fs::path path = fs::path(dir) / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
    os << text;
    if (!os) fail(ErrorKind::Io, "write to '" + path.string() + "' failed");
  };
  write("report.json", report.body.dump(2) + "\n");
  write("report.volatile.json", report.volatile_fields.dump(2) + "\n");
  for (const auto& [name, text] : report.files) write(name, text);
}

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::Pass: return kExitPass;
    case Verdict::Fail: return kExitFail;
    case Verdict::Indeterminate: return kExitNumeric;
  }
  return kExitNumeric;
}

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::InvalidInput:
    case ErrorKind::Capability:
    case ErrorKind::Domain:
    case ErrorKind::Config: return kExitUsage;
    default: return kExitNumeric;
  }
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace curvkit
