#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <limits>
#include <sstream>

#include "curvkit/bianchi_tuple.hpp"
#include "curvkit/ode.hpp"
#include "curvkit/rd.hpp"
#include "curvkit/report.hpp"

namespace curvkit {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

struct Context {
  const RunConfig& cfg;
  Report& report;
  json checks = json::array();
  json timings = json::object();
  std::vector<std::string> warnings;

  double tol(const std::string& key) const { return cfg.tolerances.at(key); }
  double param(const std::string& key) const {
    auto it = cfg.params.find(key);
    if (it == cfg.params.end()) fail(ErrorKind::Config, "missing parameter '" + key + "'");
    return it->second;
  }
  void add(json check, Verdict v) {
    check["verdict"] = to_string(v);
    checks.push_back(std::move(check));
  }
};

template <typename F>
auto timed(Context& ctx, const std::string& name, F&& f) {
  const auto start = Clock::now();
  auto out = f();
  ctx.timings[name] = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string dat(const std::string& header, const std::vector<double>& x, const std::vector<double>& y) {
  std::ostringstream os;
  os << std::setprecision(17) << "# " << header << "\n";
  for (size_t i = 0; i < x.size() && i < y.size(); ++i) os << x[i] << " " << y[i] << "\n";
  return os.str();
}

ConvexityTolerances convexity_tolerances(const Context& ctx) {
  ConvexityTolerances t;
  t.band = ctx.tol("band");
  t.direct = ctx.tol("direct");
  t.gap_rel = ctx.tol("gap_rel");
  return t;
}

void warn_a_range(Context& ctx) {
  auto it = ctx.cfg.params.find("a");
  if (it == ctx.cfg.params.end()) return;
  if (!(it->second > 1.0 / 3.0 && it->second < 0.4))
    ctx.warnings.push_back("a = " + num(it->second) + " lies outside (1/3, 2/5)");
}

std::string samples_csv(const ConvexityReport& rep) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "index,lambda1,lambda2,lambda3,condition_one,condition_two,eigen_margin,direct_margin,eigen_verdict,"
        "direct_verdict\n";
  const bool has_eigen = rep.check != "direct";
  for (size_t i = 0; i < rep.samples.size(); ++i) {
    const auto& s = rep.samples[i];
    os << i << "," << s.lambda(0) << "," << s.lambda(1) << "," << s.lambda(2) << ",";
    if (has_eigen) os << s.condition_one << "," << s.condition_two << "," << s.eigen_margin;
    else os << ",,";
    os << ",";
    if (s.direct_margin) os << *s.direct_margin;
    os << "," << (has_eigen ? to_string(s.eigen_verdict) : "") << ",";
    if (s.direct_verdict) os << to_string(*s.direct_verdict);
    os << "\n";
  }
  return os.str();
}

json convexity_json(const ConvexityReport& rep) {
  json j;
  j["set"] = rep.set_name;
  j["params"] = rep.params;
  j["requested"] = rep.requested;
  j["accepted"] = rep.samples.size();
  j["attempts"] = rep.attempts;
  j["excluded_gap"] = rep.excluded_gap;
  j["skipped"] = rep.skipped;
  j["rotations"] = rep.rotations;
  j["any_marginal"] = rep.any_marginal;
  if (rep.check != "direct") {
    j["eigen_verdict"] = to_string(rep.eigen_verdict);
    j["worst_eigen_margin"] = rep.worst_eigen_margin;
    if (rep.eigen_witness) {
      const auto& s = rep.samples[*rep.eigen_witness];
      j["eigen_witness"] = {{"index", *rep.eigen_witness},
                            {"lambda", vector_json(s.lambda)},
                            {"condition_one", s.condition_one},
                            {"condition_two", s.condition_two}};
    }
  }
  if (rep.direct_verdict) {
    j["direct_verdict"] = to_string(*rep.direct_verdict);
    j["worst_direct_margin"] = rep.worst_direct_margin;
    j["rotation_spread"] = rep.rotation_spread;
    if (rep.direct_witness) {
      const auto& s = rep.samples[*rep.direct_witness];
      j["direct_witness"] = {{"index", *rep.direct_witness},
                             {"lambda", vector_json(s.lambda)},
                             {"r", matrix_json(s.r.matrix())},
                             {"margin", *s.direct_margin}};
    }
  }
  if (rep.check == "cross-validate") {
    j["agreement"] = rep.agreement;
    j["agreements"] = rep.agreements;
    j["indeterminate"] = rep.indeterminate;
    j["disagreements"] = rep.disagreements;
  }
  return j;
}

Verdict cmd_calibrate(Context& ctx) {
  Verdict overall = Verdict::Pass;
  auto note = [&](json j, bool ok) {
    const Verdict v = ok ? Verdict::Pass : Verdict::Fail;
    if (!ok) overall = Verdict::Fail;
    ctx.add(std::move(j), v);
  };

  timed(ctx, "sharp-identity", [&] {
    json per = json::object();
    double worst = 0.0;
    for (int n = 3; n <= 6; ++n) {
      const auto id = CurvatureOperatord::identity(n);
      const double err = (sharp(id) - (n - 2.0) * id).matrix().cwiseAbs().maxCoeff();
      per[std::to_string(n)] = err;
      worst = std::max(worst, err);
    }
    note({{"name", "sharp-identity"}, {"max_error", worst}, {"per_n", per}, {"tolerance", ctx.tol("calibrate")}},
         worst <= ctx.tol("calibrate"));
    return 0;
  });

  timed(ctx, "ricci-identity", [&] {
    double worst = 0.0;
    for (int n = 3; n <= 6; ++n) {
      const Eigen::MatrixXd ric = ricci(2.0 * CurvatureOperatord::identity(n));
      worst = std::max(worst, (ric - (n - 1.0) * Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff());
    }
    note({{"name", "ricci-of-2I"}, {"max_error", worst}, {"tolerance", ctx.tol("calibrate")}},
         worst <= ctx.tol("calibrate"));
    return 0;
  });

  timed(ctx, "sharp-adjugate", [&] {
    double worst = 0.0;
    for (int i = 0; i < ctx.cfg.samples; ++i) {
      Rng rng(ctx.cfg.seed, "calibrate/sharp", static_cast<std::uint64_t>(i));
      const CurvatureOperatord r = random_curvature(rng, 3);
      const double err = (sharp(r) - sharp_structure(r)).norm() / (1.0 + r.squaredNorm());
      worst = std::max(worst, err);
    }
    note({{"name", "sharp-adjugate"},
          {"samples", ctx.cfg.samples},
          {"max_relative_error", worst},
          {"tolerance", ctx.tol("sharp")}},
         worst <= ctx.tol("sharp"));
    return 0;
  });

  timed(ctx, "bianchi-kernel", [&] {
    const SubspaceBasis basis = tuple_space_basis(3);
    const Eigen::MatrixXd c = bianchi_constraint_matrix(3);
    Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(c.cols(), c.cols());
    padded.topRows(c.rows()) = c;
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(padded).singularValues();
    const int rank = basis.constraint_rank;
    const double floor = std::numeric_limits<double>::epsilon() * sv(0);
    const double gap = sv(rank - 1) / std::max(sv(rank), floor);
    note({{"name", "bianchi-kernel"},
          {"kernel_dimension", basis.dimension()},
          {"ambient_dimension", basis.ambient_dim},
          {"singular_values", vector_json(sv)},
          {"gap_ratio", gap},
          {"tolerance", ctx.tol("kernel_gap")}},
         basis.dimension() == 15 && gap >= ctx.tol("kernel_gap"));
    return 0;
  });

  timed(ctx, "first-bianchi", [&] {
    const auto d4 = bianchi_subspace(4).kernel.cols();
    const auto d5 = bianchi_subspace(5).kernel.cols();
    note({{"name", "first-bianchi-dimensions"}, {"n4", d4}, {"n5", d5}}, d4 == 20 && d5 == 50);
    return 0;
  });
  return overall;
}

Verdict cmd_eigen(Context& ctx) {
  warn_a_range(ctx);
  const EigenFunctionSpec f = make_eigen_function(ctx.cfg.f_name, ctx.cfg.params);
  EigenSamplerConfig sc;
  sc.count = ctx.cfg.samples;
  sc.seed = ctx.cfg.seed;
  const ConvexityReport rep = timed(ctx, "bianchi-eigen", [&] { return verify_eigen(f, sc, convexity_tolerances(ctx)); });
  json j = convexity_json(rep);
  j["name"] = "bianchi-eigen";
  j["f"] = f.name;
  ctx.add(j, rep.verdict);
  ctx.report.files["samples.csv"] = samples_csv(rep);
  return rep.verdict;
}

Verdict cmd_direct(Context& ctx) {
  warn_a_range(ctx);
  const SetSpec set = make_set(ctx.cfg.set_name, ctx.cfg.params, ctx.cfg.f_name);
  SamplerConfig sc;
  sc.count = ctx.cfg.samples;
  sc.seed = ctx.cfg.seed;
  sc.stream = "direct";
  const ConvexityReport rep = timed(ctx, "bianchi-direct", [&] {
    return verify_direct(set, sc, ctx.cfg.rotations, convexity_tolerances(ctx));
  });
  json j = convexity_json(rep);
  j["name"] = "bianchi-direct";
  ctx.add(j, rep.verdict);
  ctx.report.files["samples.csv"] = samples_csv(rep);

  if (!set.declared_convex) {
    const auto w = timed(ctx, "nonconvexity", [&] { return nonconvexity_witness(set, 40, ctx.cfg.seed); });
    json nj = {{"name", "nonconvexity-witness"}, {"found", w.has_value()}};
    if (w) {
      nj["r1"] = matrix_json(w->r1.matrix());
      nj["r2"] = matrix_json(w->r2.matrix());
      nj["midpoint_margin"] = w->midpoint_margin;
    }
    nj["informational"] = true;
    ctx.add(nj, Verdict::Pass);
  }
  return rep.verdict;
}

Verdict cmd_cross_validate(Context& ctx) {
  warn_a_range(ctx);
  const EigenFunctionSpec f = make_eigen_function(ctx.cfg.f_name, ctx.cfg.params);
  CrossValidationBudget budget;
  budget.samples = ctx.cfg.samples;
  budget.rotations = ctx.cfg.rotations;
  budget.seed = ctx.cfg.seed;
  const ConvexityReport rep =
      timed(ctx, "cross-validate", [&] { return cross_validate(f, budget, convexity_tolerances(ctx)); });
  json j = convexity_json(rep);
  j["name"] = "cross-validate";
  j["f"] = f.name;
  ctx.add(j, rep.verdict);
  ctx.report.files["samples.csv"] = samples_csv(rep);
  return rep.verdict;
}

Verdict cmd_ode_invariance(Context& ctx) {
  warn_a_range(ctx);
  const SetSpec set = make_set(ctx.cfg.set_name, ctx.cfg.params, ctx.cfg.f_name);
  SamplerConfig sc;
  sc.count = ctx.cfg.samples;
  sc.seed = ctx.cfg.seed;
  sc.stream = "ode-tangent";
  const TangentConeReport tc =
      timed(ctx, "tangent-cone", [&] { return tangent_cone_ode_test(set, sc, ctx.tol("tangent")); });
  ctx.add({{"name", "tangent-cone"},
           {"set", set.name},
           {"samples", tc.samples},
           {"attempts", tc.attempts},
           {"skipped", tc.skipped},
           {"worst_margin", tc.worst_margin},
           {"witness", matrix_json(tc.witness.matrix())},
           {"tolerance", ctx.tol("tangent")}},
          tc.pass ? Verdict::Pass : Verdict::Fail);

  SamplerConfig starts_cfg;
  starts_cfg.count = static_cast<int>(ctx.param("starts"));
  starts_cfg.seed = ctx.cfg.seed;
  starts_cfg.stream = "monitor-starts";
  MonitorOptions mo;
  mo.horizon = ctx.param("horizon");
  mo.scal_stop = ctx.param("scal_stop");
  mo.tol_rel = ctx.tol("monitor");
  mo.integrator.tolerance = ctx.tol("ode");
  const MonitorReport mr = timed(ctx, "invariance-monitor", [&] {
    return invariance_monitor(set, interior_sampler(set, starts_cfg), mo);
  });
  json terms = json::object();
  for (int t = 0; t < 4; ++t) terms[to_string(static_cast<Termination>(t))] = mr.terminations[static_cast<size_t>(t)];
  ctx.add({{"name", "invariance-monitor"},
           {"starts", mr.starts},
           {"max_exit_margin", mr.max_exit_margin},
           {"worst_start", mr.worst_start},
           {"worst_time", mr.worst_time},
           {"terminations", terms},
           {"gronwall_rate", mr.gronwall_rate},
           {"tolerance", ctx.tol("monitor")}},
          mr.pass ? Verdict::Pass : Verdict::Fail);
  std::ostringstream os;
  os << std::setprecision(17) << "t,s\n";
  for (size_t k = 0; k < mr.gronwall_series.size(); ++k)
    os << mr.gronwall_times[k] << "," << mr.gronwall_series[k] << "\n";
  ctx.report.files["gronwall.csv"] = os.str();
  std::ostringstream tm;
  tm << std::setprecision(17) << "index,margin\n";
  for (size_t k = 0; k < tc.margins.size(); ++k) tm << k << "," << tc.margins[k] << "\n";
  ctx.report.files["tangent_margins.csv"] = tm.str();
  return tc.pass && mr.pass ? Verdict::Pass : Verdict::Fail;
}

Verdict cmd_min_b_scan(Context& ctx) {
  warn_a_range(ctx);
  const double a = ctx.param("a");
  const double c = ctx.param("c");
  const int steps = static_cast<int>(ctx.param("steps"));
  const MinBScan scan =
      timed(ctx, "min-b-scan", [&] { return min_b_scan(a, c, steps, ctx.cfg.samples, ctx.cfg.seed, ctx.tol("tangent")); });
  const bool ok = scan.min_b && *scan.min_b <= scan.b_formula;
  json j = {{"name", "min-b-scan"}, {"a", a}, {"c", c}, {"b_formula", scan.b_formula}, {"steps", steps}};
  j["min_b"] = scan.min_b ? json(*scan.min_b) : json(nullptr);
  if (!scan.min_b) j["note"] = "no passing b on the grid";
  ctx.add(j, ok ? Verdict::Pass : Verdict::Fail);
  std::ostringstream os;
  os << std::setprecision(17) << "b,worst_margin,passed\n";
  for (size_t k = 0; k < scan.grid.size(); ++k)
    os << scan.grid[k] << "," << scan.worst_margins[k] << "," << (scan.passed[k] ? 1 : 0) << "\n";
  ctx.report.files["min_b_scan.csv"] = os.str();
  ctx.report.files["min_b_scan.dat"] = dat("b worst_margin", scan.grid, scan.worst_margins);
  return ok ? Verdict::Pass : Verdict::Fail;
}

Verdict cmd_star_shape(Context& ctx) {
  warn_a_range(ctx);
  const SetSpec set = make_set(ctx.cfg.set_name, ctx.cfg.params, ctx.cfg.f_name);
  const double lambda = ctx.param("lambda_star");
  const double k_radius = ctx.param("k_radius");
  const CurvatureOperatord center = lambda * CurvatureOperatord::identity(set.n);
  const StarShapeResult res = timed(ctx, "star-shape", [&] {
    return star_shape_margin(set, center, k_radius, ctx.cfg.samples, ctx.cfg.seed);
  });
  json j = {{"name", "star-shape"},
            {"set", set.name},
            {"lambda_star", lambda},
            {"k_radius", k_radius},
            {"a_est", res.a_est},
            {"points_used", res.points_used},
            {"skipped", res.skipped},
            {"witness_r", matrix_json(res.witness_r.matrix())},
            {"witness_value", res.witness_value}};
  bool ok = res.points_used > 0 && res.a_est > 0.0;
  if (set.name == "halfspace-scal") {
    const double b = ctx.param("b");
    const double dim = static_cast<double>(center.size());
    const double closed = (dim * lambda - b) / std::sqrt(dim);
    const double err = std::abs(res.a_est - closed);
    j["closed_form"] = closed;
    j["closed_form_error"] = err;
    j["tolerance"] = ctx.tol("star");
    ok = ok && err <= ctx.tol("star") * (1.0 + std::abs(closed));
  }
  ctx.add(j, ok ? Verdict::Pass : Verdict::Fail);
  return ok ? Verdict::Pass : Verdict::Fail;
}

Verdict cmd_simulate_ode(Context& ctx) {
  const auto& r0v = ctx.cfg.r0;
  Eigen::MatrixXd m(3, 3);
  if (r0v.size() == 3) m = Eigen::Vector3d(r0v[0], r0v[1], r0v[2]).asDiagonal();
  else
    for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = r0v[static_cast<size_t>(i)];
  const CurvatureOperatord r0(3, m);
  IntegratorOptions opt;
  opt.tolerance = ctx.tol("ode");
  Trajectory traj = timed(ctx, "integrate", [&] { return integrate(r0, ctx.cfg.t_end, opt); });
  std::optional<SetSpec> set;
  if (!ctx.cfg.set_name.empty()) set = make_set(ctx.cfg.set_name, ctx.cfg.params, ctx.cfg.f_name);
  annotate(traj, set ? &*set : nullptr);
  const bool ok = traj.termination != Termination::StepFailure;
  ctx.add({{"name", "simulate-ode"},
           {"termination", to_string(traj.termination)},
           {"final_time", traj.times.back()},
           {"final_scal", traj.scal.back()},
           {"final_eigenvalues", vector_json(traj.eigenvalues.back())},
           {"steps", traj.steps},
           {"rejected", traj.rejected},
           {"records", traj.times.size()}},
          ok ? Verdict::Pass : Verdict::Fail);
  ctx.report.files["trajectory.csv"] = trajectory_csv(traj);
  ctx.report.files["scal.dat"] = dat("t scal", traj.times, traj.scal);
  return ok ? Verdict::Pass : Verdict::Fail;
}

Verdict cmd_simulate_rd(Context& ctx) {
  SimConfig sc;
  sc.grid = ctx.cfg.grid;
  sc.dims = ctx.cfg.dims;
  sc.dt = ctx.cfg.dt;
  sc.t_end = ctx.cfg.t_end;
  sc.cfl_safety = ctx.param("cfl_safety");
  sc.cadence = static_cast<int>(ctx.param("cadence"));
  sc.blowup = ctx.param("blowup");
  sc.amplitude = ctx.param("amplitude");
  sc.constant = ctx.param("constant");
  sc.spot_epsilon = ctx.param("spot_epsilon");
  sc.spot_band = ctx.param("spot_band");
  sc.reaction_on = ctx.param("reaction") != 0.0;
  sc.seed = ctx.cfg.seed;
  sc.init = initial_field_from_string(ctx.cfg.init);
  sc.set_name = ctx.cfg.set_name;
  sc.set_params = ctx.cfg.params;
  const SimResult res = timed(ctx, "simulate-rd", [&] { return run(sc); });
  const SetSpec set = make_set(sc.set_name, sc.set_params);

  double exit_margin = -std::numeric_limits<double>::infinity();
  double monotone_defect = 0.0;
  for (size_t k = 0; k < res.rows.size(); ++k) {
    const auto& row = res.rows[k];
    for (double g : row.worst_margins) exit_margin = std::max(exit_margin, g / (1.0 + row.max_norm));
    if (k > 0) monotone_defect = std::max(monotone_defect, res.rows[k - 1].min_scal - row.min_scal);
  }
  const double h = res.config.h;
  const double monotone_tol = 10.0 * (res.config.dt + h * h);
  const bool contained = exit_margin <= ctx.tol("containment");
  const bool monotone = !sc.reaction_on || monotone_defect <= monotone_tol;
  json j = {{"name", "simulate-rd"},
            {"set", set.name},
            {"resolved_dt", res.config.dt},
            {"resolved_h", h},
            {"steps", res.steps},
            {"blew_up", res.blew_up},
            {"final_time", res.rows.back().t},
            {"max_exit_margin", exit_margin},
            {"min_scal_defect", monotone_defect},
            {"min_scal_tolerance", monotone_tol}};
  bool ok = monotone;
  if (set.declared_convex) {
    ok = ok && contained;
    j["containment_checked"] = true;
  } else {
    j["containment_checked"] = false;
    j["note"] = "set is not convex; exit margins are exploratory";
  }
  ctx.add(j, ok ? Verdict::Pass : Verdict::Fail);
  ctx.report.files["diagnostics.csv"] = diagnostics_csv(res);
  std::vector<double> t, e;
  for (const auto& row : res.rows) {
    t.push_back(row.t);
    e.push_back(row.min_eig);
  }
  ctx.report.files["min_eig.dat"] = dat("t min_eig", t, e);
  return ok ? Verdict::Pass : Verdict::Fail;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace

Report run_command(const RunConfig& input) {
  const RunConfig cfg = resolve_config(input);
  Report report;
  Context ctx{cfg, report, json::array(), json::object(), {}};
  const auto start = Clock::now();

  Verdict v = Verdict::Pass;
  const std::string& cmd = cfg.command;
  if (cmd == "calibrate") v = cmd_calibrate(ctx);
  else if (cmd == "check-bianchi-eigen") v = cmd_eigen(ctx);
  else if (cmd == "check-bianchi-direct") v = cmd_direct(ctx);
  else if (cmd == "cross-validate") v = cmd_cross_validate(ctx);
  else if (cmd == "check-ode-invariance") v = cmd_ode_invariance(ctx);
  else if (cmd == "min-b-scan") v = cmd_min_b_scan(ctx);
  else if (cmd == "star-shape") v = cmd_star_shape(ctx);
  else if (cmd == "simulate-ode") v = cmd_simulate_ode(ctx);
  else if (cmd == "simulate-rd") v = cmd_simulate_rd(ctx);

  report.verdict = v;
  report.exit_code = exit_code(v);
  int dimension = 3;
  if (!cfg.set_name.empty() && cmd != "calibrate") dimension = make_set(cfg.set_name, cfg.params, cfg.f_name).n;
  report.body = {{"toolkit", {{"name", "curvkit"}, {"version", kToolkitVersion}}},
                 {"config", to_json(cfg)},
                 {"environment", {{"seed", cfg.seed}, {"dimension", dimension}}},
                 {"warnings", ctx.warnings},
                 {"checks", ctx.checks},
                 {"verdict", to_string(v)},
                 {"exit_code", report.exit_code}};
  std::vector<std::string> names;
  for (const auto& [name, text] : report.files) names.push_back(name);
  report.body["files"] = names;
  report.volatile_fields = {{"timestamp", utc_timestamp()},
                            {"timings", ctx.timings},
                            {"total_seconds", std::chrono::duration<double>(Clock::now() - start).count()}};
  return report;
}

}  // namespace curvkit
