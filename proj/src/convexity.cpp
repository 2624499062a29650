#include "curvkit/convexity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "curvkit/bianchi_tuple.hpp"

namespace curvkit {
namespace {

// {i, j, k} partitions with i the free index.
constexpr int kOthers[3][2] = {{1, 2}, {0, 2}, {0, 1}};

void require_admissible(const Eigen::Vector3d& lambda, const ConvexityTolerances& tol) {
  if (!(lambda(0) <= lambda(1) && lambda(1) <= lambda(2)))
    fail(ErrorKind::InvalidInput, "spectrum must be sorted ascending");
  if (spectral_gap(lambda) < gap_threshold(lambda, tol))
    fail(ErrorKind::DegenerateSpectrum, "spectral gap below threshold");
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("eigensolver failed", m.norm());
  return es.eigenvalues()(0);
}

double max_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("eigensolver failed", m.norm());
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

double default_radius(const EigenFunctionSpec& f) {
  if (auto it = f.params.find("c"); it != f.params.end()) return 20.0 * std::sqrt(std::abs(it->second));
  return 100.0 * (1.0 + f.anchor.norm());
}

std::optional<double> ray_root(const EigenFunctionSpec& f, const Eigen::Vector3d& p, const Eigen::Vector3d& d,
                               double t_max) {
  const double g0 = f.value(p);
  if (g0 > 0.0) return std::nullopt;
  double t = std::numeric_limits<double>::infinity();
  if (f.quadratic) {
    const double s = 1.0 + p.norm();
    const double gp = f.value(p + s * d);
    const double gm = f.value(p - s * d);
    const double alpha = (gp + gm - 2.0 * g0) / (2.0 * s * s);
    const double beta = (gp - gm) / (2.0 * s);
    if (std::abs(alpha) <= 1e-14 * (std::abs(beta) + std::abs(g0) + 1.0)) {
      if (beta > 0.0) t = -g0 / beta;
    } else {
      const double disc = beta * beta - 4.0 * alpha * g0;
      if (disc >= 0.0) {
        const double q = -0.5 * (beta + std::copysign(std::sqrt(disc), beta));
        for (double r : {q / alpha, q != 0.0 ? g0 / q : std::numeric_limits<double>::infinity()})
          if (r > 0.0 && r < t && 2.0 * alpha * r + beta >= 0.0) t = r;
      }
    }
  } else {
    double lo = 0.0;
    double hi = 1e-3 * (1.0 + p.norm());
    while (f.value(p + hi * d) <= 0.0) {
      lo = hi;
      hi *= 2.0;
      if (hi > 2.0 * t_max) return std::nullopt;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (f.value(p + mid * d) <= 0.0 ? lo : hi) = mid;
    }
    t = 0.5 * (lo + hi);
  }
  if (!std::isfinite(t) || t > t_max) return std::nullopt;
  for (int it = 0; it < 8; ++it) {
    const Eigen::Vector3d x = p + t * d;
    const double v = f.value(x);
    const double slope = f.gradient(x).dot(d);
    if (std::abs(v) <= 1e-15 * std::max(1.0, x.squaredNorm()) || slope == 0.0) break;
    t -= v / slope;
  }
  return t;
}

void finalize_eigen(ConvexityReport& report) {
  report.eigen_verdict = Verdict::Pass;
  report.worst_eigen_margin = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < report.samples.size(); ++i) {
    auto& s = report.samples[i];
    if (s.eigen_margin < report.worst_eigen_margin) {
      report.worst_eigen_margin = s.eigen_margin;
      report.eigen_witness = i;
    }
    if (s.eigen_verdict == Verdict::Fail) report.eigen_verdict = Verdict::Fail;
    report.any_marginal = report.any_marginal || s.marginal;
  }
}

void finalize_direct(ConvexityReport& report) {
  report.direct_verdict = Verdict::Pass;
  report.worst_direct_margin = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < report.samples.size(); ++i) {
    const auto& s = report.samples[i];
    if (!s.direct_margin) continue;
    if (*s.direct_margin > report.worst_direct_margin) {
      report.worst_direct_margin = *s.direct_margin;
      report.direct_witness = i;
    }
    if (s.direct_verdict == Verdict::Fail) report.direct_verdict = Verdict::Fail;
  }
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Indeterminate: return "INDETERMINATE";
  }
  return "?";
}

double gap_threshold(const Eigen::Vector3d& lambda, const ConvexityTolerances& tol) {
  return tol.gap_rel * (1.0 + lambda.norm());
}

Eigen::Vector3d z_values(const EigenFunctionSpec& f, const Eigen::Vector3d& lambda, const ConvexityTolerances& tol) {
  require_admissible(lambda, tol);
  const Eigen::Vector3d df = f.gradient(lambda);
  Eigen::Vector3d z;
  for (int i = 0; i < 3; ++i) {
    const int j = kOthers[i][0];
    const int k = kOthers[i][1];
    z(i) = (df(k) - df(j)) / (lambda(k) - lambda(j));
  }
  return z;
}

double condition_one(const EigenFunctionSpec& f, const Eigen::Vector3d& lambda, const ConvexityTolerances& tol) {
  require_admissible(lambda, tol);
  const Eigen::Vector3d df = f.gradient(lambda);
  return std::min(df(1) - df(0), df(2) - df(1));
}

double condition_two(const EigenFunctionSpec& f, const Eigen::Vector3d& lambda, const ConvexityTolerances& tol) {
  const Eigen::Vector3d z = z_values(f, lambda, tol);
  const Eigen::Vector3d df = f.gradient(lambda);
  if (df.norm() < kRegularValueGuard) fail(ErrorKind::Numeric, "0 is not a regular value of f at this point");
  const Eigen::Matrix3d hess = f.hessian(lambda);

  // Orthonormal basis of ker df.
  const Eigen::MatrixXd dfm = df;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(dfm);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(3, 3);
  const Eigen::MatrixXd kernel = q.rightCols(2);

  const double zscale = 1e-12 * (1.0 + df.cwiseAbs().maxCoeff() / (1.0 + lambda.norm()));
  if (z.cwiseAbs().maxCoeff() <= zscale) return min_eigenvalue(kernel.transpose() * hess * kernel);

  double margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    const double zi = z(kOthers[k][0]);
    const double zj = z(kOthers[k][1]);
    double coeff = 0.0;
    if (std::abs(zi) <= zscale && std::abs(zj) <= zscale) {
      coeff = 0.0;
    } else if (std::abs(zi + zj) <= zscale) {
      fail(ErrorKind::Convention, "Z_i + Z_j = 0 with (Z_i, Z_j) != (0, 0)");
    } else {
      coeff = zi * zj / (zi + zj);
    }
    Eigen::Matrix3d shifted = hess;
    shifted(k, k) += 2.0 * coeff;
    margin = std::min(margin, min_eigenvalue(kernel.transpose() * shifted * kernel));
  }
  return margin;
}

EigenSamples sample_zero_set(const EigenFunctionSpec& f, const EigenSamplerConfig& config,
                             const ConvexityTolerances& tol) {
  if (config.count < 1) fail(ErrorKind::InvalidInput, "sample budget must be at least 1");
  const double radius = config.max_radius > 0.0 ? config.max_radius : default_radius(f);
  EigenSamples out;
  const int max_attempts = 50 * config.count;
  while (static_cast<int>(out.lambdas.size()) < config.count && out.attempts < max_attempts) {
    Rng rng(config.seed, "zero-set", static_cast<std::uint64_t>(out.attempts++));
    const Eigen::Vector3d d = rng.unit_vector(3);
    const auto t = ray_root(f, f.anchor, d, radius + f.anchor.norm());
    if (!t) {
      ++out.skipped;
      continue;
    }
    Eigen::Vector3d lam = f.anchor + *t * d;
    if (lam.norm() > radius) {
      ++out.skipped;
      continue;
    }
    std::sort(lam.data(), lam.data() + 3);
    if (spectral_gap(lam) < gap_threshold(lam, tol)) {
      ++out.excluded_gap;
      continue;
    }
    out.lambdas.push_back(lam);
  }
  if (out.lambdas.empty())
    fail(ErrorKind::EmptySample, "no admissible points of f^-1(0) sampled for '" + f.name + "'");
  return out;
}

ConvexityReport verify_eigen(const EigenFunctionSpec& f, const EigenSamplerConfig& config,
                             const ConvexityTolerances& tol) {
  ConvexityReport report;
  report.check = "eigen";
  report.set_name = "omega-f:" + f.name;
  report.params = f.params;
  report.seed = config.seed;
  report.tolerances = tol;
  report.requested = config.count;
  const EigenSamples zs = sample_zero_set(f, config, tol);
  report.attempts = zs.attempts;
  report.excluded_gap = zs.excluded_gap;
  report.skipped = zs.skipped;
  for (const auto& lam : zs.lambdas) {
    SampleRecord rec;
    rec.lambda = lam;
    rec.r = CurvatureOperatord::diagonal(3, lam);
    rec.condition_one = condition_one(f, lam, tol);
    rec.condition_two = condition_two(f, lam, tol);
    rec.eigen_margin = std::min(rec.condition_one, rec.condition_two);
    rec.eigen_verdict = rec.eigen_margin >= -tol.band ? Verdict::Pass : Verdict::Fail;
    rec.marginal = rec.eigen_margin >= -tol.band && rec.eigen_margin <= 0.0;
    report.samples.push_back(rec);
  }
  finalize_eigen(report);
  report.verdict = report.eigen_verdict;
  return report;
}

std::vector<Eigen::MatrixXd> rotation_sample(int count, std::uint64_t seed) {
  std::vector<Eigen::MatrixXd> out{Eigen::MatrixXd::Identity(3, 3)};
  for (int i = 1; i < count; ++i) {
    Rng rng(seed, "rotations", static_cast<std::uint64_t>(i));
    out.push_back(haar_rotation(rng, 3));
  }
  return out;
}

Eigen::MatrixXd direct_quadratic_form(const SetSpec& set, const BoundaryPoint& p, const Eigen::MatrixXd& rotation) {
  if (p.active.size() != 1)
    fail(ErrorKind::InvalidInput, "direct margin needs exactly one active constraint, got " +
                                      std::to_string(p.active.size()));
  const auto& g = set.constraints[static_cast<size_t>(p.active[0])];
  const CurvatureOperatord r = rotate<double>(rotation, p.r);
  const CurvatureOperatord grad = g.gradient(r);
  const double gn = grad.norm();
  if (gn < kRegularValueGuard) fail(ErrorKind::Numeric, "degenerate normal in direct margin");
  const CurvatureOperatord nu = (1.0 / gn) * grad;
  const SubspaceBasis tangent = tangent_bianchi_subspace(std::span<const CurvatureOperatord>(&nu, 1), set.n);

  const Eigen::MatrixXd hess = hessian_matrix(g, r);
  const Eigen::Index d = hess.rows();
  Eigen::MatrixXd form = Eigen::MatrixXd::Zero(set.n * d, set.n * d);
  for (int i = 0; i < set.n; ++i) form.block(i * d, i * d, d, d) = -hess / gn;
  const Eigen::MatrixXd projected = tangent.columns.transpose() * form * tangent.columns;
  return 0.5 * (projected + projected.transpose());
}

DirectMargin direct_margin(const SetSpec& set, const BoundaryPoint& p, const std::vector<Eigen::MatrixXd>& rotations,
                           const ConvexityTolerances& tol) {
  if (rotations.empty()) fail(ErrorKind::InvalidInput, "rotation sample is empty");
  if (p.active.size() == 1 && !set.constraints[static_cast<size_t>(p.active[0])].quadratic && set.n == 3) {
    const Eigen::Vector3d lam = eigen_sorted(p.r).values;
    if (spectral_gap(lam) < gap_threshold(lam, tol))
      fail(ErrorKind::DegenerateSpectrum, "spectral Hessian requested at a near-degenerate spectrum");
  }
  DirectMargin out;
  out.margin = -std::numeric_limits<double>::infinity();
  for (const auto& q : rotations) {
    const Eigen::MatrixXd form = direct_quadratic_form(set, p, q);
    out.subspace_dim = form.rows();
    const double top = form.rows() ? max_eigenvalue(form) : -std::numeric_limits<double>::infinity();
    out.per_rotation.push_back(top);
    out.margin = std::max(out.margin, top);
  }
  return out;
}

ConvexityReport verify_direct(const SetSpec& set, const SamplerConfig& sampler, int rotations,
                              const ConvexityTolerances& tol) {
  ConvexityReport report;
  report.check = "direct";
  report.set_name = set.name;
  report.params = set.params;
  report.seed = sampler.seed;
  report.tolerances = tol;
  report.requested = sampler.count;
  report.rotations = rotations;
  const auto rots = rotation_sample(rotations, sampler.seed);
  const SampleBatch batch = boundary_sampler(set, sampler);
  report.attempts = batch.attempts;
  report.skipped = batch.skipped;
  for (const auto& p : batch.points) {
    if (p.active.size() != 1) {
      ++report.skipped;
      continue;
    }
    SampleRecord rec;
    rec.r = p.r;
    rec.lambda = eigen_sorted(p.r).values.head<3>();
    DirectMargin dm;
    try {
      dm = direct_margin(set, p, rots, tol);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateSpectrum) throw;
      ++report.excluded_gap;
      continue;
    }
    rec.direct_margin = dm.margin;
    rec.direct_verdict = dm.margin <= tol.direct ? Verdict::Pass : Verdict::Fail;
    const auto [lo, hi] = std::minmax_element(dm.per_rotation.begin(), dm.per_rotation.end());
    report.rotation_spread = std::max(report.rotation_spread, *hi - *lo);
    report.samples.push_back(rec);
  }
  if (report.samples.empty()) fail(ErrorKind::EmptySample, "no smooth boundary points for the direct check");
  finalize_direct(report);
  report.verdict = *report.direct_verdict;
  return report;
}

SetSpec set_for_eigen_function(const EigenFunctionSpec& f) {
  if (f.name == "f-ac") return omega_ac_set(f.params.at("a"), f.params.at("c"));
  return omega_f_set(f);
}

ConvexityReport cross_validate(const EigenFunctionSpec& f, const CrossValidationBudget& budget,
                               const ConvexityTolerances& tol) {
  EigenSamplerConfig ecfg;
  ecfg.count = budget.samples;
  ecfg.seed = budget.seed;
  ecfg.max_radius = budget.max_radius;
  ConvexityReport report = verify_eigen(f, ecfg, tol);
  report.check = "cross-validate";
  report.rotations = budget.rotations;

  const SetSpec set = set_for_eigen_function(f);
  const auto rots = rotation_sample(budget.rotations, budget.seed);
  for (size_t i = 0; i < report.samples.size(); ++i) {
    auto& rec = report.samples[i];
    // Shared sample: the eigen-check spectrum placed in a seeded random frame.
    Rng rng(budget.seed, "cross-validate/frame", i);
    rec.r = rotate<double>(haar_rotation(rng, 3), CurvatureOperatord::diagonal(3, rec.lambda));
    const BoundaryPoint p =
        make_boundary_point(set, rec.r, std::max(activity_tolerance(rec.r), 1e-9 * std::max(1.0, rec.r.squaredNorm())));
    const DirectMargin dm = direct_margin(set, p, rots, tol);
    rec.direct_margin = dm.margin;
    rec.direct_verdict = dm.margin <= tol.direct ? Verdict::Pass : Verdict::Fail;
    const auto [lo, hi] = std::minmax_element(dm.per_rotation.begin(), dm.per_rotation.end());
    report.rotation_spread = std::max(report.rotation_spread, *hi - *lo);

    if (std::abs(rec.eigen_margin) <= tol.band || std::abs(dm.margin) <= tol.band) {
      ++report.indeterminate;
    } else if ((rec.eigen_margin > 0.0) == (dm.margin < 0.0)) {
      ++report.agreements;
    } else {
      ++report.disagreements;
    }
  }
  finalize_direct(report);
  if (report.disagreements > 0) {
    report.agreement = "disagree";
    report.verdict = Verdict::Indeterminate;
  } else if (report.eigen_verdict == *report.direct_verdict) {
    report.agreement = std::string("agree-") + to_string(report.eigen_verdict);
    report.verdict = report.eigen_verdict;
  } else {
    // Sample-wise agreement up to the band but differing global verdicts:
    // every failing sample sits inside the band.
    report.agreement = "disagree";
    report.verdict = Verdict::Indeterminate;
  }
  return report;
}

}  // namespace curvkit
