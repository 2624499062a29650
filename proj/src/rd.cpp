#include "curvkit/rd.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "curvkit/random.hpp"

namespace curvkit {
namespace {

using Cells = std::vector<Eigen::Matrix3d>;

size_t neighbor(const MatrixField& f, size_t i, int axis, int offset) {
  const long g = f.grid;
  const long x = static_cast<long>(i) % g;
  const long y = static_cast<long>(i) / g;
  if (axis == 0) return static_cast<size_t>(y * g + (x + offset + g) % g);
  return static_cast<size_t>(((y + offset + g) % g) * g + x);
}

Cells rhs(const MatrixField& f, bool reaction_on) {
  Cells out = laplacian(f).cells;
  if (reaction_on)
    for (size_t i = 0; i < out.size(); ++i) out[i] += reaction(f.cells[i]);
  return out;
}

MatrixField axpy(const MatrixField& f, double s, const Cells& k) {
  MatrixField out = f;
  for (size_t i = 0; i < out.cells.size(); ++i) out.cells[i] += s * k[i];
  return out;
}

double min_eigenvalue(const Eigen::Matrix3d& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Smooth periodic scalar field from `modes` random Fourier modes.
std::vector<double> fourier_entry(const SimConfig& c, std::uint64_t index) {
  Rng rng(c.seed, "rd-init", index);
  const auto g = static_cast<size_t>(c.grid);
  const size_t total = c.dims == 2 ? g * g : g;
  std::vector<double> out(total, 0.0);
  for (int m = 0; m < c.modes; ++m) {
    const int kx = 1 + static_cast<int>(rng.uniform() * 3.0);
    const int ky = c.dims == 2 ? static_cast<int>(rng.uniform() * 4.0) : 0;
    const double alpha = rng.normal();
    const double beta = rng.normal();
    for (size_t i = 0; i < total; ++i) {
      const double x = static_cast<double>(i % g) / static_cast<double>(g);
      const double y = c.dims == 2 ? static_cast<double>(i / g) / static_cast<double>(g) : 0.0;
      const double phase = 2.0 * std::numbers::pi * (kx * x + ky * y);
      out[i] += c.amplitude * (alpha * std::cos(phase) + beta * std::sin(phase)) / c.modes;
    }
  }
  return out;
}

}  // namespace

MatrixField::MatrixField(int grid_, int dims_, double h_) : grid(grid_), dims(dims_), h(h_) {
  if (grid < 3) fail(ErrorKind::Config, "grid needs at least 3 cells per axis");
  if (dims != 1 && dims != 2) fail(ErrorKind::Config, "grid dimension must be 1 or 2");
  if (!(h > 0.0)) fail(ErrorKind::Config, "grid spacing must be positive");
  const auto g = static_cast<size_t>(grid);
  cells.assign(dims == 2 ? g * g : g, Eigen::Matrix3d::Zero());
}

double MatrixField::max_norm() const {
  double m = 0.0;
  for (const auto& c : cells) {
    const double v = c.norm();
    if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
    m = std::max(m, v);
  }
  return m;
}

Eigen::Matrix3d MatrixField::mean() const {
  Eigen::Matrix3d s = Eigen::Matrix3d::Zero();
  for (const auto& c : cells) s += c;
  return s / static_cast<double>(cells.size());
}

const char* to_string(InitialField f) {
  switch (f) {
    case InitialField::Random: return "random";
    case InitialField::Psd: return "psd";
    case InitialField::Constant: return "constant";
  }
  return "?";
}

InitialField initial_field_from_string(const std::string& s) {
  if (s == "random") return InitialField::Random;
  if (s == "psd") return InitialField::Psd;
  if (s == "constant") return InitialField::Constant;
  fail(ErrorKind::Config, "unknown initial field '" + s + "'");
}

SimConfig resolve(const SimConfig& config) {
  SimConfig c = config;
  if (c.grid < 3) fail(ErrorKind::Config, "grid needs at least 3 cells per axis");
  if (c.dims != 1 && c.dims != 2) fail(ErrorKind::Config, "grid dimension must be 1 or 2");
  if (!(c.cfl_safety > 0.0 && c.cfl_safety <= 1.0)) fail(ErrorKind::Config, "cfl_safety must lie in (0, 1]");
  if (c.modes < 0 || c.modes > 4) fail(ErrorKind::Config, "modes must lie in [0, 4]");
  if (c.cadence < 1) fail(ErrorKind::Config, "cadence must be at least 1");
  if (!(c.t_end >= 0.0) || !std::isfinite(c.t_end)) fail(ErrorKind::Config, "end time must be finite and >= 0");
  if (c.h <= 0.0) c.h = 1.0 / c.grid;
  const double limit = c.cfl_safety * c.h * c.h / (2.0 * c.dims);
  if (c.dt <= 0.0) c.dt = limit;
  if (c.dt > limit * (1.0 + 1e-12))
    fail(ErrorKind::Config, "dt = " + std::to_string(c.dt) + " violates the CFL bound " + std::to_string(limit));
  return c;
}

MatrixField make_initial_field(const SimConfig& config) {
  MatrixField f(config.grid, config.dims, config.h > 0.0 ? config.h : 1.0 / config.grid);
  switch (config.init) {
    case InitialField::Constant:
      for (auto& c : f.cells) c = config.constant * Eigen::Matrix3d::Identity();
      break;
    case InitialField::Random: {
      std::uint64_t idx = 0;
      for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b) {
          const auto e = fourier_entry(config, idx++);
          for (size_t i = 0; i < f.size(); ++i) {
            f.cells[i](a, b) += e[i];
            if (a != b) f.cells[i](b, a) += e[i];
          }
        }
      for (auto& c : f.cells) c += config.constant * Eigen::Matrix3d::Identity();
      break;
    }
    case InitialField::Psd: {
      std::vector<Eigen::Matrix3d> m(f.size(), Eigen::Matrix3d::Identity() * std::sqrt(std::abs(config.constant)));
      std::uint64_t idx = 0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const auto e = fourier_entry(config, idx++);
          for (size_t i = 0; i < f.size(); ++i) m[i](a, b) += e[i];
        }
      for (size_t i = 0; i < f.size(); ++i) {
        const Eigen::Matrix3d p = m[i] * m[i].transpose();
        f.cells[i] = 0.5 * (p + p.transpose());
      }
      break;
    }
  }
  return f;
}

void retract_into(MatrixField& field, const SetSpec& set, const Eigen::Matrix3d& anchor) {
  const CurvatureOperatord s(3, Eigen::MatrixXd(anchor));
  if (membership(set, s).location != Location::Interior)
    fail(ErrorKind::InvalidInput, "retraction anchor is not an interior point");
  for (auto& c : field.cells) {
    const CurvatureOperatord r(3, Eigen::MatrixXd(c));
    if (membership(set, r).location == Location::Interior) continue;
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      const CurvatureOperatord p = s + mid * (r - s);
      (membership(set, p).location == Location::Interior ? lo : hi) = mid;
    }
    c = anchor + 0.999 * lo * (c - anchor);
  }
}

MatrixField laplacian(const MatrixField& field) {
  MatrixField out = field;
  const double inv = 1.0 / (field.h * field.h);
  for (size_t i = 0; i < field.size(); ++i) {
    Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
    for (int axis = 0; axis < field.dims; ++axis)
      acc += field.cells[neighbor(field, i, axis, 1)] - 2.0 * field.cells[i] + field.cells[neighbor(field, i, axis, -1)];
    out.cells[i] = inv * acc;
  }
  return out;
}

Eigen::Matrix3d reaction(const Eigen::Matrix3d& r) {
  const Eigen::Matrix3d sq = r * r;
  const Eigen::Matrix3d sum = sq + adjugate3(r);
  return 0.5 * (sum + sum.transpose());
}

MatrixField step(const MatrixField& field, double dt, bool reaction_on, double cfl_safety) {
  if (dt < 0.0) fail(ErrorKind::Config, "dt must be non-negative");
  const double limit = cfl_safety * field.h * field.h / (2.0 * field.dims);
  if (dt > limit * (1.0 + 1e-12))
    fail(ErrorKind::Config, "dt = " + std::to_string(dt) + " violates the CFL bound " + std::to_string(limit));
  if (dt == 0.0) return field;
  const Cells k1 = rhs(field, reaction_on);
  const Cells k2 = rhs(axpy(field, 0.5 * dt, k1), reaction_on);
  const Cells k3 = rhs(axpy(field, 0.5 * dt, k2), reaction_on);
  const Cells k4 = rhs(axpy(field, dt, k3), reaction_on);
  MatrixField out = field;
  for (size_t i = 0; i < out.size(); ++i) out.cells[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

std::optional<SpotCheck> laplace_inward_spot_check(const MatrixField& field, const SetSpec& set, double epsilon,
                                                   double band) {
  if (set.n != 3) fail(ErrorKind::InvalidInput, "spot check needs a set in A_3");
  const MatrixField lap = laplacian(field);
  SpotCheck out;
  out.worst = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < field.size(); ++i) {
    const CurvatureOperatord r = field.cell(i);
    int active = -1;
    double gmax = -std::numeric_limits<double>::infinity();
    for (size_t m = 0; m < set.constraints.size(); ++m) {
      const double g = set.constraints[m].value(r);
      if (g > gmax) {
        gmax = g;
        active = static_cast<int>(m);
      }
    }
    if (active < 0 || std::abs(gmax) > band * (1.0 + r.norm())) continue;
    const CurvatureOperatord grad = set.constraints[static_cast<size_t>(active)].gradient(r);
    const double gn = grad.norm();
    if (gn < kRegularValueGuard) continue;
    double value = lap.cell(i).dot(grad) / gn;
    for (int axis = 0; axis < field.dims; ++axis) {
      const Eigen::Matrix3d d =
          (field.cells[neighbor(field, i, axis, 1)] - field.cells[neighbor(field, i, axis, -1)]) / (2.0 * field.h);
      value -= epsilon * d.squaredNorm();
    }
    out.worst = std::max(out.worst, value);
    ++out.cells;
  }
  if (out.cells == 0) return std::nullopt;
  return out;
}

namespace {

DiagnosticsRow diagnose(double t, const MatrixField& f, const SetSpec& set, const SimConfig& c) {
  DiagnosticsRow row;
  row.t = t;
  row.min_scal = std::numeric_limits<double>::infinity();
  row.max_scal = -std::numeric_limits<double>::infinity();
  row.min_eig = std::numeric_limits<double>::infinity();
  row.worst_margins.assign(set.constraints.size(), -std::numeric_limits<double>::infinity());
  for (size_t i = 0; i < f.size(); ++i) {
    const double s = f.cells[i].trace();
    row.min_scal = std::min(row.min_scal, s);
    row.max_scal = std::max(row.max_scal, s);
    row.min_eig = std::min(row.min_eig, min_eigenvalue(f.cells[i]));
    const CurvatureOperatord r = f.cell(i);
    for (size_t m = 0; m < set.constraints.size(); ++m)
      row.worst_margins[m] = std::max(row.worst_margins[m], set.constraints[m].value(r));
  }
  row.max_norm = f.max_norm();
  if (const auto spot = laplace_inward_spot_check(f, set, c.spot_epsilon, c.spot_band)) row.spot = spot->worst;
  return row;
}

}  // namespace

SimResult run(const SimConfig& config) {
  SimResult res;
  res.config = resolve(config);
  const SimConfig& c = res.config;
  const SetSpec set = make_set(c.set_name, c.set_params);
  if (set.n != 3) fail(ErrorKind::Config, "the simulator needs a set in A_3");
  for (const auto& g : set.constraints) res.constraint_names.push_back(g.name);

  MatrixField field = make_initial_field(c);
  if (c.retract) retract_into(field, set, Eigen::Matrix3d(set.anchor.matrix()));

  const long nsteps = c.t_end > 0.0 ? static_cast<long>(std::ceil(c.t_end / c.dt - 1e-9)) : 0;
  const double dt = nsteps > 0 ? c.t_end / static_cast<double>(nsteps) : 0.0;
  res.rows.push_back(diagnose(0.0, field, set, c));
  for (long k = 1; k <= nsteps; ++k) {
    field = step(field, dt, c.reaction_on, c.cfl_safety);
    ++res.steps;
    const double t = k == nsteps ? c.t_end : static_cast<double>(k) * dt;
    const double norm = field.max_norm();
    const bool blown = !std::isfinite(norm) || norm >= c.blowup;
    if (blown) {
      res.blew_up = true;
      if (std::isfinite(norm)) res.rows.push_back(diagnose(t, field, set, c));
      break;
    }
    if (k % c.cadence == 0 || k == nsteps) res.rows.push_back(diagnose(t, field, set, c));
  }
  res.final_field = std::move(field);
  return res;
}

std::string diagnostics_csv(const SimResult& result) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "t,min_scal,max_scal,min_eig,max_norm";
  for (const auto& name : result.constraint_names) os << ",worst_" << name;
  os << ",spot\n";
  for (const auto& row : result.rows) {
    os << row.t << "," << row.min_scal << "," << row.max_scal << "," << row.min_eig << "," << row.max_norm;
    for (double m : row.worst_margins) os << "," << m;
    os << ",";
    if (row.spot) os << *row.spot;
    os << "\n";
  }
  return os.str();
}

}  // namespace curvkit
