#include "curvkit/ode.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace curvkit {
namespace {

double state_norm(const CurvatureOperatord& r) { return r.norm(); }
double state_norm(const Eigen::Vector3d& v) { return v.norm(); }
bool state_finite(const CurvatureOperatord& r) { return r.matrix().allFinite(); }
bool state_finite(const Eigen::Vector3d& v) { return v.allFinite(); }

template <typename State, typename Rhs>
State rk4(const State& y, double h, const Rhs& f) {
  const State k1 = f(y);
  const State k2 = f(y + (0.5 * h) * k1);
  const State k3 = f(y + (0.5 * h) * k2);
  const State k4 = f(y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct DriveResult {
  Termination termination = Termination::Horizon;
  int steps = 0;
  int rejected = 0;
};

// Step-doubling RK4 with local extrapolation. record(t, y) is called at t = 0,
// at each output (or accepted step) and at the terminating state.
template <typename State, typename Rhs, typename Record, typename Stop>
DriveResult drive(State y, double horizon, const IntegratorOptions& opt, const Rhs& f, const Record& record,
                  const Stop& stop) {
  if (!std::isfinite(horizon)) fail(ErrorKind::InvalidInput, "horizon must be finite");
  if (!(opt.tolerance > 0.0) || !(opt.initial_step > 0.0) || !(opt.max_step > 0.0))
    fail(ErrorKind::InvalidInput, "integrator step controls must be positive");
  DriveResult res;
  const double dir = horizon < 0.0 ? -1.0 : 1.0;
  const double span = std::abs(horizon);

  std::vector<double> targets;
  for (double s : opt.output_times) {
    const double a = dir * s;
    if (a > 0.0 && a < span) targets.push_back(a);
  }
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  targets.push_back(span);
  const bool every_step = opt.output_times.empty();

  record(0.0, y);
  if (span == 0.0) return res;
  if (stop(y)) {
    res.termination = Termination::Stopped;
    return res;
  }

  const bool fixed = opt.fixed_step > 0.0;
  double h = fixed ? std::abs(opt.fixed_step) : std::min(opt.initial_step, opt.max_step);
  double tau = 0.0;  // elapsed |t|
  size_t next = 0;
  while (next < targets.size()) {
    const double target = targets[next];
    const double remaining = target - tau;
    const bool truncated = remaining <= h;
    const double hh = truncated ? remaining : h;
    State ynew;
    if (fixed) {
      ynew = rk4(y, dir * hh, f);
    } else {
      const State full = rk4(y, dir * hh, f);
      const State half = rk4(rk4(y, 0.5 * dir * hh, f), 0.5 * dir * hh, f);
      const double err = state_norm(State(half - full)) / 15.0;
      const double allowed = opt.tolerance * hh * std::max(1.0, state_norm(half));
      if (!std::isfinite(err) || !state_finite(half) || err > allowed) {
        ++res.rejected;
        const double factor = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(allowed / err, 0.25)) : 0.2;
        h = hh * factor;
        if (h < opt.min_step) {
          res.termination = Termination::StepFailure;
          record(dir * tau, y);
          return res;
        }
        continue;
      }
      ynew = half + (1.0 / 15.0) * State(half - full);
      const double grow = err > 0.0 ? std::min(4.0, 0.9 * std::pow(allowed / err, 0.25)) : 4.0;
      const double proposal = std::min(opt.max_step, hh * grow);
      h = truncated ? std::max(h, proposal) : proposal;
      h = std::min(h, opt.max_step);
    }
    ++res.steps;
    y = ynew;
    tau = truncated ? target : tau + hh;
    bool recorded = false;
    if (truncated) ++next;
    if (every_step || truncated) {
      record(dir * tau, y);
      recorded = true;
    }
    if (!state_finite(y) || state_norm(y) >= opt.blowup) {
      if (!recorded) record(dir * tau, y);
      res.termination = Termination::BlowUp;
      return res;
    }
    if (stop(y)) {
      if (!recorded) record(dir * tau, y);
      res.termination = Termination::Stopped;
      return res;
    }
  }
  return res;
}

}  // namespace

const char* to_string(Termination t) {
  switch (t) {
    case Termination::Horizon: return "horizon";
    case Termination::BlowUp: return "blow-up";
    case Termination::StepFailure: return "step-failure";
    case Termination::Stopped: return "stopped";
  }
  return "?";
}

CurvatureOperatord ode_rhs(const CurvatureOperatord& r) { return phi(r); }

Trajectory integrate(const CurvatureOperatord& r0, double horizon, const IntegratorOptions& options) {
  validate(r0);
  Trajectory traj;
  const auto record = [&](double t, const CurvatureOperatord& y) {
    traj.times.push_back(t);
    traj.states.push_back(y);
  };
  const auto stop = [&](const CurvatureOperatord& y) { return options.stop && options.stop(y); };
  const DriveResult res = drive(r0, horizon, options, ode_rhs, record, stop);
  traj.termination = res.termination;
  traj.steps = res.steps;
  traj.rejected = res.rejected;
  return traj;
}

void annotate(Trajectory& traj, const SetSpec* set) {
  traj.scal.clear();
  traj.eigenvalues.clear();
  traj.margins.clear();
  traj.constraint_names.clear();
  if (set)
    for (const auto& g : set->constraints) traj.constraint_names.push_back(g.name);
  for (const auto& r : traj.states) {
    traj.scal.push_back(scalar(r));
    traj.eigenvalues.push_back(r.matrix().allFinite() ? eigen_sorted(r).values
                                                      : Eigen::VectorXd::Constant(r.size(), std::nan("")));
    std::vector<double> m;
    if (set)
      for (const auto& g : set->constraints) m.push_back(g.value(r));
    traj.margins.push_back(std::move(m));
  }
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  os << std::setprecision(17);
  const Eigen::Index N = traj.states.empty() ? 0 : traj.states.front().size();
  os << "t";
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = i; j < N; ++j) os << ",r" << i << j;
  if (!traj.eigenvalues.empty())
    for (Eigen::Index i = 0; i < N; ++i) os << ",lambda" << i + 1;
  if (!traj.scal.empty()) os << ",scal";
  for (const auto& name : traj.constraint_names) os << ",g_" << name;
  os << "\n";
  for (size_t k = 0; k < traj.states.size(); ++k) {
    os << traj.times[k];
    const auto& m = traj.states[k].matrix();
    for (Eigen::Index i = 0; i < N; ++i)
      for (Eigen::Index j = i; j < N; ++j) os << "," << m(i, j);
    if (k < traj.eigenvalues.size())
      for (Eigen::Index i = 0; i < N; ++i) os << "," << traj.eigenvalues[k](i);
    if (k < traj.scal.size()) os << "," << traj.scal[k];
    if (k < traj.margins.size())
      for (double g : traj.margins[k]) os << "," << g;
    os << "\n";
  }
  return os.str();
}

Eigen::Vector3d eigen_ode_rhs(const Eigen::Vector3d& l) {
  return {l(0) * l(0) + l(1) * l(2), l(1) * l(1) + l(0) * l(2), l(2) * l(2) + l(0) * l(1)};
}

EigenTrajectory integrate_eigen(const Eigen::Vector3d& lambda0, double horizon, const IntegratorOptions& options) {
  EigenTrajectory traj;
  const auto record = [&](double t, const Eigen::Vector3d& y) {
    traj.times.push_back(t);
    traj.values.push_back(y);
  };
  const auto stop = [](const Eigen::Vector3d&) { return false; };
  const auto rhs = [](const Eigen::Vector3d& l) { return eigen_ode_rhs(l); };
  traj.termination = drive(Eigen::Vector3d(lambda0), horizon, options, rhs, record, stop).termination;
  return traj;
}

double eigen_vs_matrix_consistency(const CurvatureOperatord& r0, double horizon, int outputs) {
  if (r0.dim() != 3) fail(ErrorKind::Capability, "eigenvalue ODE is only available for n = 3");
  if (outputs < 1) fail(ErrorKind::InvalidInput, "need at least one output time");
  IntegratorOptions opt;
  for (int k = 1; k <= outputs; ++k) opt.output_times.push_back(horizon * k / outputs);
  const Trajectory mat = integrate(r0, horizon, opt);
  const EigenTrajectory eig = integrate_eigen(eigen_sorted(r0).values, horizon, opt);
  double worst = 0.0;
  const size_t count = std::min(mat.times.size(), eig.times.size());
  for (size_t k = 0; k < count; ++k) {
    if (mat.times[k] != eig.times[k]) break;
    Eigen::Vector3d lam = eig.values[k];
    std::sort(lam.data(), lam.data() + 3);
    const Eigen::Vector3d got = eigen_sorted(mat.states[k]).values;
    worst = std::max(worst, (got - lam).norm() / (1.0 + lam.norm()));
  }
  return worst;
}

TangentConeReport tangent_cone_ode_test(const SetSpec& set, const SamplerConfig& sampler, double tol_rel) {
  TangentConeReport rep;
  rep.set_name = set.name;
  const SampleBatch batch = boundary_sampler(set, sampler);
  rep.attempts = batch.attempts;
  rep.skipped = batch.skipped;
  rep.worst_margin = -std::numeric_limits<double>::infinity();
  for (const auto& p : batch.points) {
    const CurvatureOperatord v = ode_rhs(p.r);
    const double m = tangent_cone_test(p, v) / (1.0 + v.norm());
    rep.margins.push_back(m);
    if (m > rep.worst_margin) {
      rep.worst_margin = m;
      rep.witness = p.r;
    }
  }
  rep.samples = static_cast<int>(batch.points.size());
  rep.pass = rep.worst_margin <= tol_rel;
  return rep;
}

MonitorReport invariance_monitor(const SetSpec& set, const std::vector<CurvatureOperatord>& starts,
                                 const MonitorOptions& options) {
  if (starts.empty()) fail(ErrorKind::EmptySample, "no starts for the invariance monitor");
  MonitorReport rep;
  rep.terminations.assign(4, 0);
  rep.max_exit_margin = -std::numeric_limits<double>::infinity();
  IntegratorOptions opt = options.integrator;
  const double scal_stop = options.scal_stop;
  opt.stop = [scal_stop](const CurvatureOperatord& r) { return scalar(r) >= scal_stop; };

  for (size_t i = 0; i < starts.size(); ++i) {
    const Membership mem = membership(set, starts[i]);
    if (mem.location == Location::Exterior)
      fail(ErrorKind::InvalidInput, "invariance start " + std::to_string(i) + " lies outside the set");
    const Trajectory traj = integrate(starts[i], options.horizon, opt);
    ++rep.terminations[static_cast<size_t>(traj.termination)];
    std::vector<double> series;
    double local = -std::numeric_limits<double>::infinity();
    double local_time = 0.0;
    for (size_t k = 0; k < traj.states.size(); ++k) {
      const auto& r = traj.states[k];
      if (!r.matrix().allFinite()) break;
      const double m = signed_distance_estimate(set, r) / (1.0 + r.norm());
      series.push_back(m > 0.0 ? m * m : 0.0);
      if (m > local) {
        local = m;
        local_time = traj.times[k];
      }
    }
    if (local > rep.max_exit_margin) {
      rep.max_exit_margin = local;
      rep.worst_start = static_cast<int>(i);
      rep.worst_time = local_time;
      rep.gronwall_times.assign(traj.times.begin(), traj.times.begin() + static_cast<long>(series.size()));
      rep.gronwall_series = series;
    }
  }
  rep.starts = static_cast<int>(starts.size());
  rep.gronwall_rate = 0.0;
  for (size_t k = 0; k + 1 < rep.gronwall_series.size(); ++k) {
    const double s0 = rep.gronwall_series[k];
    const double s1 = rep.gronwall_series[k + 1];
    const double dt = rep.gronwall_times[k + 1] - rep.gronwall_times[k];
    if (s0 > 0.0 && s1 > 0.0 && dt > 0.0) rep.gronwall_rate = std::max(rep.gronwall_rate, std::log(s1 / s0) / dt);
  }
  rep.pass = rep.max_exit_margin <= options.tol_rel;
  return rep;
}

double b_formula(double a, double c) {
  if (!std::isfinite(a) || !std::isfinite(c)) fail(ErrorKind::InvalidInput, "a and c must be finite");
  if (a <= 1.0 / 3.0) fail(ErrorKind::Domain, "b_formula needs a > 1/3");
  if (c <= 0.0) fail(ErrorKind::Domain, "b_formula needs c > 0");
  return std::sqrt(3.0 * c / (3.0 * a - 1.0)) * std::sinh(1.5);
}

MinBScan min_b_scan(double a, double c, int steps, int samples, std::uint64_t seed, double tol_rel) {
  if (steps < 1) fail(ErrorKind::InvalidInput, "scan needs at least one grid point");
  MinBScan scan;
  scan.a = a;
  scan.c = c;
  scan.b_formula = b_formula(a, c);
  for (int k = 1; k <= steps; ++k) {
    const double b = scan.b_formula * k / steps;
    SamplerConfig sc;
    sc.count = samples;
    sc.seed = seed;
    sc.stream = "min-b-scan";
    double worst = std::numeric_limits<double>::infinity();
    bool ok = false;
    try {
      const TangentConeReport rep = tangent_cone_ode_test(omega_tilde_ac_set(a, c, b), sc, tol_rel);
      worst = rep.worst_margin;
      ok = rep.pass;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::EmptySample) throw;
    }
    scan.grid.push_back(b);
    scan.worst_margins.push_back(worst);
    scan.passed.push_back(ok);
    if (ok && !scan.min_b) scan.min_b = b;
  }
  return scan;
}

}  // namespace curvkit
