#pragma once

// The reaction ODE R' = R^2 + R^# and invariance certification for sets of
// curvature operators.

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "curvkit/set_geometry.hpp"

namespace curvkit {

enum class Termination { Horizon, BlowUp, StepFailure, Stopped };
const char* to_string(Termination t);

struct IntegratorOptions {
  /// Local error target per unit time, relative to max(1, |R|).
  double tolerance = 1e-8;
  double initial_step = 1e-3;
  double min_step = 1e-12;
  double max_step = 0.05;
  double blowup = 1e6;
  /// If non-empty, only these times (within the horizon) are recorded and
  /// the integrator lands on each exactly. Otherwise every accepted step is.
  std::vector<double> output_times;
  /// Early stop once this returns true on an accepted state.
  std::function<bool(const CurvatureOperatord&)> stop;
  /// Classical RK4 with constant step |fixed_step| when positive.
  double fixed_step = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<CurvatureOperatord> states;
  Termination termination = Termination::Horizon;
  int steps = 0;
  int rejected = 0;

  // Filled by annotate().
  std::vector<double> scal;
  std::vector<Eigen::VectorXd> eigenvalues;
  std::vector<std::vector<double>> margins;
  std::vector<std::string> constraint_names;
};

/// Right-hand side R^2 + R^#.
CurvatureOperatord ode_rhs(const CurvatureOperatord& r);

/// Integrates from t = 0 to horizon (negative horizons run backwards).
Trajectory integrate(const CurvatureOperatord& r0, double horizon, const IntegratorOptions& options = {});

/// Scalar curvature, eigenvalues and, when a set is given, per-constraint
/// values g_m at every recorded state.
void annotate(Trajectory& traj, const SetSpec* set = nullptr);

/// CSV with header: t, upper-triangle wedge entries, eigenvalues, scal, margins.
std::string trajectory_csv(const Trajectory& traj);

/// (l1^2 + l2 l3, l2^2 + l1 l3, l3^2 + l1 l2).
Eigen::Vector3d eigen_ode_rhs(const Eigen::Vector3d& lambda);

struct EigenTrajectory {
  std::vector<double> times;
  std::vector<Eigen::Vector3d> values;
  Termination termination = Termination::Horizon;
};
EigenTrajectory integrate_eigen(const Eigen::Vector3d& lambda0, double horizon, const IntegratorOptions& options = {});

/// Max over common output times of |sorted eig(R(t)) - lambda(t)| / (1 + |lambda(t)|).
double eigen_vs_matrix_consistency(const CurvatureOperatord& r0, double horizon, int outputs = 200);

struct TangentConeReport {
  std::string set_name;
  int samples = 0;
  int attempts = 0;
  int skipped = 0;
  /// max over samples of tangent_cone_test(P, Phi(R)) / (1 + |Phi(R)|).
  double worst_margin = 0.0;
  CurvatureOperatord witness;
  std::vector<double> margins;
  bool pass = false;
};
TangentConeReport tangent_cone_ode_test(const SetSpec& set, const SamplerConfig& sampler, double tol_rel = 1e-6);

struct MonitorOptions {
  double horizon = 10.0;
  /// Trajectories stop once scal reaches this.
  double scal_stop = 1e3;
  double tol_rel = 1e-6;
  IntegratorOptions integrator;
};

struct MonitorReport {
  int starts = 0;
  /// max over starts and times of max_m g_m / |grad g_m|, divided by 1 + |R|.
  double max_exit_margin = 0.0;
  int worst_start = -1;
  double worst_time = 0.0;
  std::vector<int> terminations;  // count per Termination value
  /// s(t) = (positive part of the margin)^2 along the worst trajectory.
  std::vector<double> gronwall_times;
  std::vector<double> gronwall_series;
  /// max of log(s_{k+1} / s_k) / dt over consecutive positive entries; 0 if none.
  double gronwall_rate = 0.0;
  bool pass = false;
};
MonitorReport invariance_monitor(const SetSpec& set, const std::vector<CurvatureOperatord>& starts,
                                 const MonitorOptions& options = {});

/// sqrt(3c / (3a - 1)) sinh(3/2).
double b_formula(double a, double c);

struct MinBScan {
  double a = 0.0;
  double c = 0.0;
  double b_formula = 0.0;
  std::vector<double> grid;
  std::vector<double> worst_margins;
  std::vector<bool> passed;
  std::optional<double> min_b;
};
/// Tangent-cone test on omega-tilde-ac over the grid b_formula k / steps,
/// k = 1..steps.
MinBScan min_b_scan(double a, double c, int steps, int samples, std::uint64_t seed, double tol_rel = 1e-6);

}  // namespace curvkit
