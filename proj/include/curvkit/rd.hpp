#pragma once

// Reaction-diffusion dR/dt = Laplacian(R) + R^2 + R^# for a periodic grid of
// 3D curvature operators.

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "curvkit/set_geometry.hpp"

namespace curvkit {

/// 1D (G cells) or 2D (G x G cells, row-major) periodic lattice of n = 3
/// operators stored as 3x3 wedge matrices.
struct MatrixField {
  int grid = 0;
  int dims = 1;
  double h = 0.0;
  std::vector<Eigen::Matrix3d> cells;

  MatrixField() = default;
  MatrixField(int grid, int dims, double h);

  size_t size() const { return cells.size(); }
  CurvatureOperatord cell(size_t i) const { return {3, Eigen::MatrixXd(cells[i])}; }
  double max_norm() const;
  /// Mean over cells.
  Eigen::Matrix3d mean() const;
};

enum class InitialField { Random, Psd, Constant };
const char* to_string(InitialField f);
InitialField initial_field_from_string(const std::string& s);

struct SimConfig {
  int grid = 128;
  int dims = 1;
  double h = 0.0;  // 0: 1 / grid
  double dt = 0.0;  // 0: cfl_safety h^2 / (2 dims)
  double t_end = 1.0;
  double cfl_safety = 0.9;
  bool reaction_on = true;
  std::uint64_t seed = 0;
  int cadence = 10;  // diagnostics every cadence steps
  InitialField init = InitialField::Psd;
  double amplitude = 1.0;
  /// Constant fields: c0 I.
  double constant = 1.0;
  /// Fourier modes per entry (at most 4).
  int modes = 4;
  /// Move initial cells outside the set toward its anchor.
  bool retract = false;
  /// Runs stop once the max cell norm reaches this.
  double blowup = 1e3;
  /// Set under test and its registry parameters.
  std::string set_name = "psd";
  std::map<std::string, double> set_params;
  /// Spot check: epsilon and the relative band that marks near-boundary cells.
  double spot_epsilon = 0.0;
  double spot_band = 1e-3;
};

/// Checks dt against cfl_safety h^2 / (2 dims) and resolves defaults.
SimConfig resolve(const SimConfig& config);

/// Seeded smooth field with at most `modes` Fourier modes per entry; PSD
/// fields are M M^T with M such a field.
MatrixField make_initial_field(const SimConfig& config);

/// Cell-wise retraction toward anchor: cells outside the set move along the
/// segment to the anchor until they are inside.
void retract_into(MatrixField& field, const SetSpec& set, const Eigen::Matrix3d& anchor);

/// Periodic second-difference stencil, summed over axes.
MatrixField laplacian(const MatrixField& field);

/// R^2 + adj(R) on a single 3x3 cell.
Eigen::Matrix3d reaction(const Eigen::Matrix3d& r);

/// One RK4 step. Throws a configuration error on CFL violation.
MatrixField step(const MatrixField& field, double dt, bool reaction_on, double cfl_safety = 1.0);

struct SpotCheck {
  double worst = 0.0;
  int cells = 0;
};
/// max over near-boundary cells of <Lap R, nu> - epsilon sum_axes |D R|^2.
std::optional<SpotCheck> laplace_inward_spot_check(const MatrixField& field, const SetSpec& set, double epsilon,
                                                   double band);

struct DiagnosticsRow {
  double t = 0.0;
  double min_scal = 0.0;
  double max_scal = 0.0;
  double min_eig = 0.0;
  double max_norm = 0.0;
  std::vector<double> worst_margins;  // per constraint, max over cells
  std::optional<double> spot;
};

struct SimResult {
  SimConfig config;
  std::vector<std::string> constraint_names;
  std::vector<DiagnosticsRow> rows;
  MatrixField final_field;
  bool blew_up = false;
  int steps = 0;
};

SimResult run(const SimConfig& config);

/// CSV with header t,min_scal,max_scal,min_eig,max_norm,worst_<g>...,spot.
std::string diagnostics_csv(const SimResult& result);

}  // namespace curvkit
