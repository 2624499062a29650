#include "curvkit/set_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "curvkit/bianchi_tuple.hpp"

namespace curvkit {
namespace {

Eigen::VectorXd coords(const CurvatureOperatord& r) {
  const auto& basis = curvature_space_basis(r.dim());
  Eigen::VectorXd c(static_cast<Eigen::Index>(basis.size()));
  for (size_t b = 0; b < basis.size(); ++b)
    c(static_cast<Eigen::Index>(b)) = (basis[b].array() * r.matrix().array()).sum();
  return c;
}

CurvatureOperatord from_coords(const Eigen::VectorXd& c, int n) {
  const auto& basis = curvature_space_basis(n);
  const int N = WedgeBasis::get(n).size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(N, N);
  for (size_t b = 0; b < basis.size(); ++b) m += c(static_cast<Eigen::Index>(b)) * basis[b];
  return {n, m};
}

double residual_bound(const SamplerConfig& config, const CurvatureOperatord& r) {
  return config.residual_tolerance * std::max(1.0, r.squaredNorm());
}

// Smallest t > 0 at which g(P + tD) crosses zero from below; nullopt when the
// ray stays inside up to t_max or starts outside.
std::optional<double> first_crossing(const Constraint& g, const CurvatureOperatord& p, const CurvatureOperatord& d,
                                     double t_max) {
  const double g0 = g.value(p);
  if (g0 > 0.0) return std::nullopt;
  if (g.quadratic) {
    const double s = 1.0 + p.norm();
    const double gp = g.value(p + s * d);
    const double gm = g.value(p - s * d);
    const double alpha = (gp + gm - 2.0 * g0) / (2.0 * s * s);
    const double beta = (gp - gm) / (2.0 * s);
    double root = std::numeric_limits<double>::infinity();
    if (std::abs(alpha) <= 1e-14 * (std::abs(beta) + std::abs(g0) + 1.0)) {
      if (beta > 0.0) root = -g0 / beta;
    } else {
      const double disc = beta * beta - 4.0 * alpha * g0;
      if (disc >= 0.0) {
        const double q = -0.5 * (beta + std::copysign(std::sqrt(disc), beta));
        for (double t : {q / alpha, q != 0.0 ? g0 / q : std::numeric_limits<double>::infinity()})
          if (t > 0.0 && t < root && 2.0 * alpha * t + beta >= 0.0) root = t;
      }
    }
    if (!std::isfinite(root) || root > t_max) return std::nullopt;
    return root;
  }
  double lo = 0.0;
  double hi = 1e-3 * (1.0 + p.norm());
  while (g.value(p + hi * d) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 2.0 * t_max) return std::nullopt;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g.value(p + mid * d) <= 0.0 ? lo : hi) = mid;
  }
  const double t = 0.5 * (lo + hi);
  if (t > t_max) return std::nullopt;
  return t;
}

struct RayExit {
  double t;
  size_t constraint;
};

std::optional<RayExit> ray_exit(const SetSpec& set, const CurvatureOperatord& p, const CurvatureOperatord& d,
                                double t_max) {
  std::optional<RayExit> best;
  for (size_t m = 0; m < set.constraints.size(); ++m) {
    if (set.constraints[m].value(p) > 0.0) return std::nullopt;
    if (auto t = first_crossing(set.constraints[m], p, d, t_max); t && (!best || *t < best->t)) best = RayExit{*t, m};
  }
  return best;
}

std::optional<CurvatureOperatord> polish_on_ray(const Constraint& g, const CurvatureOperatord& p,
                                                const CurvatureOperatord& d, double t, double tol_scale) {
  CurvatureOperatord r = p + t * d;
  for (int it = 0; it < 20; ++it) {
    const double v = g.value(r);
    if (std::abs(v) <= 1e-3 * tol_scale * std::max(1.0, r.squaredNorm())) break;
    const double slope = g.gradient(r).dot(d);
    if (!(std::abs(slope) > 0.0)) return std::nullopt;
    t -= v / slope;
    r = p + t * d;
  }
  return r;
}

std::optional<CurvatureOperatord> project_onto(const SetSpec& set, CurvatureOperatord x, const std::vector<size_t>& which,
                                               double tol_scale) {
  const auto k = static_cast<Eigen::Index>(which.size());
  for (int it = 0; it < 80; ++it) {
    Eigen::VectorXd g(k);
    const Eigen::Index d = static_cast<Eigen::Index>(curvature_space_basis(set.n).size());
    Eigen::MatrixXd jac(k, d);
    for (Eigen::Index i = 0; i < k; ++i) {
      const auto& c = set.constraints[which[static_cast<size_t>(i)]];
      g(i) = c.value(x);
      jac.row(i) = coords(c.gradient(x)).transpose();
    }
    if (g.cwiseAbs().maxCoeff() <= 1e-3 * tol_scale * std::max(1.0, x.squaredNorm())) return x;
    const Eigen::MatrixXd jjt = jac * jac.transpose();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(jjt);
    if (ldlt.info() != Eigen::Success || jjt.diagonal().minCoeff() < 1e-24) return std::nullopt;
    const Eigen::VectorXd step = -jac.transpose() * ldlt.solve(g);
    x = x + from_coords(step, set.n);
    if (!x.matrix().allFinite()) return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

const char* to_string(Location loc) {
  switch (loc) {
    case Location::Interior: return "interior";
    case Location::Boundary: return "boundary";
    case Location::Exterior: return "exterior";
  }
  return "?";
}

const char* to_string(SamplerStrategy s) {
  switch (s) {
    case SamplerStrategy::RadialRoot: return "radial-root";
    case SamplerStrategy::RandomWalkProjection: return "random-walk-projection";
    case SamplerStrategy::Native: return "native";
  }
  return "?";
}

SamplerStrategy sampler_strategy_from_string(const std::string& s) {
  if (s == "radial-root") return SamplerStrategy::RadialRoot;
  if (s == "random-walk-projection") return SamplerStrategy::RandomWalkProjection;
  if (s == "native") return SamplerStrategy::Native;
  fail(ErrorKind::InvalidInput, "unknown sampler strategy '" + s + "'");
}

double activity_tolerance(const CurvatureOperatord& r) { return 1e-8 * (1.0 + r.norm()); }

Membership membership(const SetSpec& set, const CurvatureOperatord& r, std::optional<double> tau_act) {
  if (set.constraints.empty()) fail(ErrorKind::InvalidInput, "set has no constraints");
  Membership out;
  out.margin = -std::numeric_limits<double>::infinity();
  for (size_t m = 0; m < set.constraints.size(); ++m) {
    const double v = set.constraints[m].value(r);
    if (v > out.margin) {
      out.margin = v;
      out.worst_constraint = static_cast<int>(m);
    }
  }
  const double tau = tau_act.value_or(activity_tolerance(r));
  out.location = out.margin > tau ? Location::Exterior : (out.margin >= -tau ? Location::Boundary : Location::Interior);
  return out;
}

double signed_distance_estimate(const SetSpec& set, const CurvatureOperatord& r) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& g : set.constraints) {
    const double gn = g.gradient(r).norm();
    const double v = g.value(r);
    best = std::max(best, gn > 0.0 ? v / gn : (v > 0.0 ? std::numeric_limits<double>::infinity() : v));
  }
  return best;
}

BoundaryPoint make_boundary_point(const SetSpec& set, const CurvatureOperatord& r, std::optional<double> tau_act) {
  const double tau = tau_act.value_or(activity_tolerance(r));
  BoundaryPoint p;
  p.r = r;
  for (size_t m = 0; m < set.constraints.size(); ++m) {
    const auto& g = set.constraints[m];
    if (std::abs(g.value(r)) > tau) continue;
    const CurvatureOperatord grad = g.gradient(r);
    const double gn = grad.norm();
    if (gn < kRegularValueGuard)
      fail(ErrorKind::Numeric, "gradient of constraint '" + g.name + "' vanishes at a boundary point");
    p.active.push_back(static_cast<int>(m));
    p.normals.push_back((1.0 / gn) * grad);
    p.gradient_norms.push_back(gn);
  }
  if (p.active.empty()) fail(ErrorKind::InvalidInput, "point is not on the boundary of '" + set.name + "'");
  return p;
}

Eigen::MatrixXd hessian_matrix(const Constraint& g, const CurvatureOperatord& r) {
  const auto& basis = curvature_space_basis(r.dim());
  const auto d = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd h(d, d);
  for (Eigen::Index b = 0; b < d; ++b) {
    const CurvatureOperatord hb = g.hessian(r, CurvatureOperatord(r.dim(), basis[static_cast<size_t>(b)]));
    h.col(b) = coords(hb);
  }
  return 0.5 * (h + h.transpose());
}

double second_fundamental_form(const SetSpec& set, const BoundaryPoint& p, const CurvatureOperatord& t,
                               const CurvatureOperatord& s, size_t which) {
  if (which >= p.active.size()) fail(ErrorKind::InvalidInput, "no such active constraint");
  const auto& nu = p.normals[which];
  if (std::abs(nu.dot(t)) > 1e-8 * t.norm() || std::abs(nu.dot(s)) > 1e-8 * s.norm())
    fail(ErrorKind::InvalidInput, "second fundamental form arguments must be tangent to the level set");
  const auto& g = set.constraints[static_cast<size_t>(p.active[which])];
  return -g.hessian(p.r, t).dot(s) / p.gradient_norms[which];
}

Eigen::MatrixXd second_fundamental_form_matrix(const SetSpec& set, const BoundaryPoint& p, size_t which) {
  if (which >= p.active.size()) fail(ErrorKind::InvalidInput, "no such active constraint");
  const auto& g = set.constraints[static_cast<size_t>(p.active[which])];
  const Eigen::VectorXd nu = coords(p.normals[which]);
  const auto d = nu.size();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(nu);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd tangent = q.rightCols(d - 1);
  return -(tangent.transpose() * hessian_matrix(g, p.r) * tangent) / p.gradient_norms[which];
}

double tangent_cone_test(const BoundaryPoint& p, const CurvatureOperatord& v) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& nu : p.normals) worst = std::max(worst, nu.dot(v));
  return worst;
}

SampleBatch boundary_sampler(const SetSpec& set, const SamplerConfig& config) {
  if (config.count < 1) fail(ErrorKind::InvalidInput, "sample budget must be at least 1");
  if (config.strategy == SamplerStrategy::Native && !set.native_sampler)
    fail(ErrorKind::InvalidInput, "set '" + set.name + "' has no native sampler");
  const std::vector<CurvatureOperatord> anchors =
      config.anchors.empty() ? std::vector<CurvatureOperatord>{set.anchor} : config.anchors;
  const double max_radius = config.max_radius > 0.0 ? config.max_radius : set.sample_radius;
  const auto dim = static_cast<Eigen::Index>(curvature_space_basis(set.n).size());

  SampleBatch batch;
  const int max_attempts = config.count * config.max_attempts_factor;
  while (static_cast<int>(batch.points.size()) < config.count && batch.attempts < max_attempts) {
    Rng rng(config.seed, config.stream, static_cast<std::uint64_t>(batch.attempts));
    ++batch.attempts;
    const auto& anchor = anchors[static_cast<size_t>(rng.uniform(0.0, 1.0) * static_cast<double>(anchors.size())) %
                                 anchors.size()];
    std::optional<CurvatureOperatord> candidate;
    switch (config.strategy) {
      case SamplerStrategy::RadialRoot: {
        const CurvatureOperatord dir = from_coords(rng.unit_vector(dim), set.n);
        const double t_max = max_radius + anchor.norm();
        if (auto exit = ray_exit(set, anchor, dir, t_max))
          candidate = polish_on_ray(set.constraints[exit->constraint], anchor, dir, exit->t, config.residual_tolerance);
        break;
      }
      case SamplerStrategy::RandomWalkProjection: {
        const CurvatureOperatord start =
            anchor + (config.walk_radius * rng.uniform()) * from_coords(rng.unit_vector(dim), set.n);
        std::vector<size_t> which;
        const size_t k = set.constraints.size();
        const size_t first = static_cast<size_t>(rng.uniform() * static_cast<double>(k)) % k;
        which.push_back(first);
        if (k >= 2 && rng.uniform() < 0.25) which.push_back((first + 1 + static_cast<size_t>(rng.uniform() * static_cast<double>(k - 1)) % (k - 1)) % k);
        candidate = project_onto(set, start, which, config.residual_tolerance);
        break;
      }
      case SamplerStrategy::Native:
        candidate = set.native_sampler(rng);
        break;
    }
    if (!candidate || candidate->norm() > max_radius) {
      ++batch.skipped;
      continue;
    }
    const double bound = residual_bound(config, *candidate);
    bool feasible = true;
    bool on_boundary = false;
    for (const auto& g : set.constraints) {
      const double v = g.value(*candidate);
      if (v > bound) feasible = false;
      if (std::abs(v) <= bound) on_boundary = true;
    }
    if (!feasible || !on_boundary) {
      ++batch.skipped;
      continue;
    }
    try {
      batch.points.push_back(
          make_boundary_point(set, *candidate, std::max(activity_tolerance(*candidate), 2.0 * bound)));
    } catch (const Error&) {
      ++batch.skipped;
    }
  }
  if (batch.points.empty())
    fail(ErrorKind::EmptySample, "no boundary points sampled for '" + set.name + "' after " +
                                     std::to_string(batch.attempts) + " attempts");
  return batch;
}

std::vector<CurvatureOperatord> interior_sampler(const SetSpec& set, const SamplerConfig& config) {
  const std::vector<CurvatureOperatord> anchors =
      config.anchors.empty() ? std::vector<CurvatureOperatord>{set.anchor} : config.anchors;
  const double max_radius = config.max_radius > 0.0 ? config.max_radius : set.sample_radius;
  const auto dim = static_cast<Eigen::Index>(curvature_space_basis(set.n).size());
  std::vector<CurvatureOperatord> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < config.count && attempts < config.count * config.max_attempts_factor) {
    Rng rng(config.seed, config.stream, static_cast<std::uint64_t>(attempts++));
    const auto& anchor = anchors[static_cast<size_t>(rng.uniform() * static_cast<double>(anchors.size())) % anchors.size()];
    const CurvatureOperatord dir = from_coords(rng.unit_vector(dim), set.n);
    const double reach = std::max(0.0, max_radius - anchor.norm());
    const auto exit = ray_exit(set, anchor, dir, reach);
    const double t = rng.uniform(0.0, 0.95) * (exit ? exit->t : reach);
    CurvatureOperatord r = anchor + t * dir;
    if (membership(set, r).location == Location::Interior) out.push_back(r);
  }
  if (out.empty()) fail(ErrorKind::EmptySample, "no interior points sampled for '" + set.name + "'");
  return out;
}

StarShapeResult star_shape_margin_at(const CurvatureOperatord& center, const std::vector<BoundaryPoint>& points) {
  StarShapeResult out;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    const CurvatureOperatord dir = center - p.r;
    for (const auto& nu : p.normals) {
      const double v = nu.dot(dir);
      if (v > worst) {
        worst = v;
        out.witness_r = p.r;
        out.witness_normal = nu;
        out.witness_value = v;
      }
    }
    ++out.points_used;
  }
  if (points.empty()) fail(ErrorKind::EmptySample, "no boundary points inside K");
  out.a_est = -worst;
  return out;
}

StarShapeResult star_shape_margin(const SetSpec& set, const CurvatureOperatord& center, double k_radius, int samples,
                                  std::uint64_t seed) {
  if (samples < 1) fail(ErrorKind::InvalidInput, "sample budget must be at least 1");
  SamplerConfig radial;
  radial.strategy = SamplerStrategy::RadialRoot;
  radial.count = samples;
  radial.seed = seed;
  radial.stream = "star-shape/radial";
  radial.anchors = {center};
  radial.max_radius = k_radius;
  std::vector<BoundaryPoint> points;
  int skipped = 0;
  try {
    auto batch = boundary_sampler(set, radial);
    points = std::move(batch.points);
    skipped += batch.skipped;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::EmptySample) throw;
  }
  if (set.constraints.size() > 1) {
    // Projection samples reach the corners where several constraints are active.
    SamplerConfig walk = radial;
    walk.strategy = SamplerStrategy::RandomWalkProjection;
    walk.stream = "star-shape/walk";
    walk.count = std::max(1, samples / 4);
    walk.walk_radius = 0.5 * k_radius;
    try {
      auto batch = boundary_sampler(set, walk);
      points.insert(points.end(), batch.points.begin(), batch.points.end());
      skipped += batch.skipped;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::EmptySample) throw;
    }
  }
  StarShapeResult out = star_shape_margin_at(center, points);
  out.skipped = skipped;
  return out;
}

std::optional<NonconvexityWitness> nonconvexity_witness(const SetSpec& set, int samples, std::uint64_t seed) {
  SamplerConfig cfg;
  cfg.count = samples;
  cfg.seed = seed;
  cfg.stream = "nonconvexity";
  const auto batch = boundary_sampler(set, cfg);
  std::optional<NonconvexityWitness> best;
  auto consider = [&](const CurvatureOperatord& r1, const CurvatureOperatord& r2) {
    const CurvatureOperatord mid = 0.5 * (r1 + r2);
    const double margin = membership(set, mid).margin;
    if (margin > 0.0 && (!best || margin > best->midpoint_margin)) best = NonconvexityWitness{r1, r2, mid, margin};
  };
  for (size_t i = 0; i < batch.points.size(); ++i)
    for (size_t j = i + 1; j < batch.points.size(); ++j) consider(batch.points[i].r, batch.points[j].r);

  // Chords along the most positive curvature direction of each boundary point.
  for (const auto& p : batch.points) {
    if (p.active.size() != 1) continue;
    const Eigen::VectorXd nu = coords(p.normals[0]);
    const auto d = nu.size();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(nu);
    const Eigen::MatrixXd tangent = (qr.householderQ() * Eigen::MatrixXd::Identity(d, d)).rightCols(d - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(second_fundamental_form_matrix(set, p));
    if (es.info() != Eigen::Success || es.eigenvalues()(d - 2) <= 0.0) continue;
    const CurvatureOperatord v = from_coords(tangent * es.eigenvectors().col(d - 2), set.n);
    const std::vector<size_t> which{static_cast<size_t>(p.active[0])};
    for (double eps : {0.05, 0.1, 0.2, 0.5, 1.0, 2.0}) {
      const double step = eps * (1.0 + p.r.norm());
      const auto r1 = project_onto(set, p.r + step * v, which, cfg.residual_tolerance);
      const auto r2 = project_onto(set, p.r - step * v, which, cfg.residual_tolerance);
      if (!r1 || !r2) continue;
      if (membership(set, *r1).location == Location::Exterior || membership(set, *r2).location == Location::Exterior)
        continue;
      consider(*r1, *r2);
    }
  }
  return best;
}

DerivativeAudit audit_derivatives(const SetSpec& set, int samples, std::uint64_t seed) {
  DerivativeAudit audit;
  const auto& basis = curvature_space_basis(set.n);
  const double scale = 1.0 + set.anchor.norm();
  for (int s = 0; s < samples; ++s) {
    Rng rng(seed, "derivative-audit", static_cast<std::uint64_t>(s));
    const CurvatureOperatord r = set.anchor + scale * random_curvature(rng, set.n);
    if (set.n == 3 && spectral_gap(eigen_sorted(r).values) < 1e-3 * (1.0 + r.norm())) continue;
    const double h = 1e-5 * (1.0 + r.norm());
    for (const auto& g : set.constraints) {
      const Eigen::VectorXd grad = coords(g.gradient(r));
      Eigen::VectorXd fd(grad.size());
      Eigen::MatrixXd hess_fd(grad.size(), grad.size());
      const Eigen::MatrixXd hess = hessian_matrix(g, r);
      for (size_t b = 0; b < basis.size(); ++b) {
        const CurvatureOperatord e(set.n, basis[b]);
        fd(static_cast<Eigen::Index>(b)) = (g.value(r + h * e) - g.value(r - h * e)) / (2.0 * h);
        hess_fd.col(static_cast<Eigen::Index>(b)) = (coords(g.gradient(r + h * e)) - coords(g.gradient(r - h * e))) / (2.0 * h);
      }
      audit.gradient_error = std::max(audit.gradient_error, (fd - grad).norm() / (1.0 + grad.norm()));
      audit.hessian_error = std::max(audit.hessian_error, (hess_fd - hess).norm() / (1.0 + hess.norm()));
      if (set.o_n_invariant) {
        const Eigen::MatrixXd q = haar_rotation(rng, set.n, false);
        const double v = g.value(r);
        audit.invariance_error =
            std::max(audit.invariance_error, std::abs(g.value(rotate<double>(q, r)) - v) / (1.0 + std::abs(v)));
      }
    }
    ++audit.samples;
  }
  return audit;
}

}  // namespace curvkit
