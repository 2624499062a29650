#pragma once

// Run configuration, command dispatch and deterministic reports.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "curvkit/convexity.hpp"
#include "curvkit/errors.hpp"

namespace curvkit {

inline constexpr const char* kToolkitVersion = "0.1.0";

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitNumeric = 70;

/// Commands understood by run_command.
const std::vector<std::string>& command_names();

struct RunConfig {
  std::string command;
  /// Empty: the command's default set.
  std::string set_name;
  std::string f_name = "f-ac";
  /// a, c, b, lambda_star and command-specific knobs (starts, steps, k_radius, ...).
  std::map<std::string, double> params;
  /// 0: the command's default budget.
  int samples = 0;
  int rotations = 8;
  std::uint64_t seed = 0;
  std::map<std::string, double> tolerances;
  int grid = 128;
  int dims = 1;
  double dt = 0.0;
  double t_end = 0.0;
  std::string init = "psd";
  std::vector<double> r0;
};

/// Default tolerances; --tol keys must be among these.
const std::map<std::string, double>& default_tolerances();

/// Fills every default so the returned config reproduces the run by itself.
/// Throws a configuration error on unknown commands, keys or non-finite values.
RunConfig resolve_config(const RunConfig& config);

nlohmann::json to_json(const RunConfig& config);
/// Reads the keys written by to_json; a whole report is accepted and its
/// "config" section used. Missing keys keep the values of `base`.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});

struct Report {
  /// Stable body: toolkit, config, environment, checks, verdict, exit_code.
  nlohmann::json body;
  /// Timestamp and timings, kept out of the body.
  nlohmann::json volatile_fields;
  /// Sibling data files (name -> contents).
  std::map<std::string, std::string> files;
  Verdict verdict = Verdict::Pass;
  int exit_code = kExitPass;
};

Report run_command(const RunConfig& config);

/// Writes report.json, report.volatile.json and the data files into dir.
void emit_report(const Report& report, const std::string& dir);

int exit_code(Verdict v);
int exit_code(const Error& e);

nlohmann::json matrix_json(const Eigen::MatrixXd& m);

}  // namespace curvkit
