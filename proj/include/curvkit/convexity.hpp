#pragma once

// Bianchi-convexity of spectral sublevel sets {f(lambda(R)) <= 0} in A_3,
// certified by the eigenvalue characterization and, independently, by
// maximizing sum_i II(T_i, T_i) over tangent tuples satisfying the second
// Bianchi identity.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "curvkit/set_geometry.hpp"
#include "curvkit/spectral.hpp"

namespace curvkit {

struct ConvexityTolerances {
  /// Eigen margins in [-band, 0] pass with the marginal flag.
  double band = 1e-6;
  /// Direct margins <= this pass.
  double direct = 1e-8;
  /// Relative spectral gap below which samples are excluded: gap_rel (1 + |lambda|).
  double gap_rel = 1e-4;
};

/// Minimum admissible gap between sorted eigenvalues at lambda.
double gap_threshold(const Eigen::Vector3d& lambda, const ConvexityTolerances& tol = {});

/// Z_i = (d_k f - d_j f) / (lambda_k - lambda_j), {i,j,k} = {1,2,3}.
Eigen::Vector3d z_values(const EigenFunctionSpec& f, const Eigen::Vector3d& lambda, const ConvexityTolerances& tol = {});

/// min(d_2 f - d_1 f, d_3 f - d_2 f).
double condition_one(const EigenFunctionSpec& f, const Eigen::Vector3d& lambda, const ConvexityTolerances& tol = {});

/// Smallest eigenvalue over k of Hess f + 2 (Z_i Z_j / (Z_i + Z_j)) e_k e_k^T
/// restricted to ker df; the Hessian alone on that plane when all Z vanish.
double condition_two(const EigenFunctionSpec& f, const Eigen::Vector3d& lambda, const ConvexityTolerances& tol = {});

enum class Verdict { Pass, Fail, Indeterminate };
const char* to_string(Verdict v);

struct SampleRecord {
  Eigen::Vector3d lambda = Eigen::Vector3d::Zero();
  CurvatureOperatord r;
  double condition_one = 0.0;
  double condition_two = 0.0;
  double eigen_margin = 0.0;  // min of both conditions; >= 0 passes
  std::optional<double> direct_margin;  // <= 0 passes
  Verdict eigen_verdict = Verdict::Pass;
  std::optional<Verdict> direct_verdict;
  bool marginal = false;
};

struct ConvexityReport {
  std::string check;
  std::string set_name;
  std::map<std::string, double> params;
  std::uint64_t seed = 0;
  ConvexityTolerances tolerances;
  int requested = 0;
  int attempts = 0;
  int excluded_gap = 0;
  int skipped = 0;
  int rotations = 0;
  std::vector<SampleRecord> samples;

  Verdict eigen_verdict = Verdict::Pass;
  std::optional<Verdict> direct_verdict;
  std::optional<size_t> eigen_witness;   // index of the most negative eigen margin
  std::optional<size_t> direct_witness;  // index of the largest direct margin
  double worst_eigen_margin = 0.0;
  double worst_direct_margin = 0.0;
  /// Largest spread of the direct margin across the rotation sample.
  double rotation_spread = 0.0;

  // Cross-validation.
  int agreements = 0;
  int indeterminate = 0;
  int disagreements = 0;
  std::string agreement;  // "agree-PASS", "agree-FAIL", "disagree", or empty

  Verdict verdict = Verdict::Pass;
  bool any_marginal = false;
};

struct EigenSamplerConfig {
  int count = 2000;
  std::uint64_t seed = 0;
  double max_radius = 0.0;  // 0: 100 (1 + |anchor|), or 20 sqrt(c) when f has parameter c
};

/// Points of f^{-1}(0) with sorted, pairwise separated coordinates.
struct EigenSamples {
  std::vector<Eigen::Vector3d> lambdas;
  int attempts = 0;
  int excluded_gap = 0;
  int skipped = 0;
};
EigenSamples sample_zero_set(const EigenFunctionSpec& f, const EigenSamplerConfig& config,
                             const ConvexityTolerances& tol = {});

ConvexityReport verify_eigen(const EigenFunctionSpec& f, const EigenSamplerConfig& config,
                             const ConvexityTolerances& tol = {});

/// Identity followed by count - 1 seeded Haar rotations of SO(3).
std::vector<Eigen::MatrixXd> rotation_sample(int count, std::uint64_t seed);

struct DirectMargin {
  double margin = 0.0;  // max over rotations of the top eigenvalue
  std::vector<double> per_rotation;
  Eigen::Index subspace_dim = 0;
};

/// For each rotation Q: top eigenvalue of T -> sum_i II(T_i, T_i) on unit
/// tangent tuples at rotate(Q, R) satisfying the second Bianchi identity.
DirectMargin direct_margin(const SetSpec& set, const BoundaryPoint& p, const std::vector<Eigen::MatrixXd>& rotations,
                           const ConvexityTolerances& tol = {});

/// The projected quadratic form at one rotation, for inspection and oracles.
Eigen::MatrixXd direct_quadratic_form(const SetSpec& set, const BoundaryPoint& p, const Eigen::MatrixXd& rotation);

/// Direct check over sampled boundary points of an arbitrary smooth set.
ConvexityReport verify_direct(const SetSpec& set, const SamplerConfig& sampler, int rotations,
                              const ConvexityTolerances& tol = {});

struct CrossValidationBudget {
  int samples = 500;
  int rotations = 8;
  std::uint64_t seed = 0;
  double max_radius = 0.0;
};

/// The set checked directly for f: the ambient polynomial for "f-ac",
/// spectral derivatives otherwise.
SetSpec set_for_eigen_function(const EigenFunctionSpec& f);

ConvexityReport cross_validate(const EigenFunctionSpec& f, const CrossValidationBudget& budget,
                               const ConvexityTolerances& tol = {});

}  // namespace curvkit
