#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "curvkit/report.hpp"

using namespace curvkit;
namespace fs = std::filesystem;

namespace {

RunConfig command(const std::string& name) {
  RunConfig c;
  c.command = name;
  c.seed = 42;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("resolve_config fills command defaults") {
  const RunConfig eigen = resolve_config(command("check-bianchi-eigen"));
  CHECK(eigen.samples == 2000);
  CHECK(eigen.params.at("a") == 0.35);
  CHECK(eigen.params.at("c") == 1.0);
  CHECK(eigen.tolerances.size() == default_tolerances().size());
  CHECK(eigen.tolerances.at("band") == 1e-6);

  const RunConfig star = resolve_config(command("star-shape"));
  CHECK(star.set_name == "omega-tilde-ac");
  CHECK(star.params.at("b") == doctest::Approx(16.4933).epsilon(1e-5));

  const RunConfig ode = resolve_config(command("simulate-ode"));
  CHECK(ode.r0 == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(ode.t_end == 1.0);

  // Resolving twice changes nothing.
  CHECK(to_json(resolve_config(eigen)) == to_json(eigen));
  CHECK(command_names().size() == 9);
}

TEST_CASE("resolve_config rejects unknown commands, tolerances and non-finite values") {
  auto kind_of = [](const RunConfig& c) {
    try {
      resolve_config(c);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;
  };
  CHECK(kind_of(command("frobnicate")) == ErrorKind::Config);
  RunConfig tol = command("calibrate");
  tol.tolerances["nonsense"] = 1.0;
  CHECK(kind_of(tol) == ErrorKind::Config);
  RunConfig nan = command("calibrate");
  nan.tolerances["band"] = std::nan("");
  CHECK(kind_of(nan) == ErrorKind::Config);
}

TEST_CASE("config JSON round trip, also from a whole report") {
  RunConfig c = resolve_config(command("cross-validate"));
  c.params["a"] = 0.37;
  c.tolerances["band"] = 2e-6;
  const nlohmann::json j = to_json(c);
  CHECK(to_json(config_from_json(j)) == j);
  nlohmann::json report;
  report["config"] = j;
  report["verdict"] = "PASS";
  CHECK(to_json(config_from_json(report)) == j);
  CHECK(to_json(config_from_json(nlohmann::json::parse(j.dump()))) == j);
}

TEST_CASE("exit codes") {
  CHECK(exit_code(Verdict::Pass) == 0);
  CHECK(exit_code(Verdict::Fail) == 2);
  CHECK(exit_code(Verdict::Indeterminate) == 70);
  CHECK(exit_code(Error(ErrorKind::InvalidInput, "x")) == 64);
  CHECK(exit_code(Error(ErrorKind::Config, "x")) == 64);
  CHECK(exit_code(Error(ErrorKind::Domain, "x")) == 64);
  CHECK(exit_code(Error(ErrorKind::Capability, "x")) == 64);
  CHECK(exit_code(Error(ErrorKind::Numeric, "x")) == 70);
  CHECK(exit_code(Error(ErrorKind::EmptySample, "x")) == 70);
}

TEST_CASE("report body layout and determinism") {
  RunConfig c = command("calibrate");
  c.samples = 50;
  const Report a = run_command(c);
  const Report b = run_command(c);
  CHECK(a.body.dump() == b.body.dump());
  for (const char* key : {"toolkit", "config", "environment", "checks", "verdict", "exit_code"})
    CHECK(a.body.contains(key));
  CHECK(a.body["verdict"] == "PASS");
  CHECK(a.exit_code == 0);
  CHECK(!a.body.contains("timestamp"));
  CHECK(a.volatile_fields.contains("timestamp"));

  const fs::path dir = fs::temp_directory_path() / "curvkit_report_test";
  fs::remove_all(dir);
  emit_report(a, dir.string());
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "report.volatile.json"));
  const nlohmann::json back = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(back == a.body);
  // The written report reproduces its own config.
  CHECK(to_json(resolve_config(config_from_json(back))) == back["config"]);
  fs::remove_all(dir);
}

TEST_CASE("commands write their data files") {
  RunConfig eigen = command("check-bianchi-eigen");
  eigen.samples = 100;
  const Report r = run_command(eigen);
  CHECK(r.files.count("samples.csv") == 1);
  CHECK(r.verdict == Verdict::Pass);

  RunConfig fail = eigen;
  fail.params["a"] = 0.45;
  const Report f = run_command(fail);
  CHECK(f.verdict == Verdict::Fail);
  CHECK(f.exit_code == 2);

  RunConfig ode = command("simulate-ode");
  ode.t_end = 0.1;
  const Report o = run_command(ode);
  CHECK(o.files.count("trajectory.csv") == 1);

  RunConfig scan = command("min-b-scan");
  scan.samples = 40;
  scan.params["steps"] = 8;
  const Report s = run_command(scan);
  CHECK(s.files.count("min_b_scan.csv") == 1);
}

TEST_CASE("matrix json is row-major nested arrays") {
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 3, 4;
  CHECK(matrix_json(m).dump() == "[[1.0,2.0],[3.0,4.0]]");
}
