#pragma once

#include <optional>
#include <string>
#include <vector>

#include "curvkit/set_spec.hpp"

namespace curvkit {

enum class Location { Interior, Boundary, Exterior };
const char* to_string(Location loc);

/// Scale-aware activity tolerance 1e-8 (1 + |R|).
double activity_tolerance(const CurvatureOperatord& r);

/// Gradient norms below this are treated as a singular level set.
inline constexpr double kRegularValueGuard = 1e-6;

struct Membership {
  Location location = Location::Interior;
  double margin = 0.0;  // max_m g_m(R)
  int worst_constraint = 0;
};

/// Classifies R by max_m g_m(R) against the activity tolerance (default
/// activity_tolerance(R)).
Membership membership(const SetSpec& set, const CurvatureOperatord& r, std::optional<double> tau_act = {});

/// First-order signed distance max_m g_m(R) / |grad g_m(R)|.
double signed_distance_estimate(const SetSpec& set, const CurvatureOperatord& r);

struct BoundaryPoint {
  CurvatureOperatord r;
  std::vector<int> active;
  std::vector<CurvatureOperatord> normals;  // unit outward, one per active constraint
  std::vector<double> gradient_norms;
};

/// Collects the active constraints at R; throws if none is active or an
/// active gradient falls under the regular-value guard.
BoundaryPoint make_boundary_point(const SetSpec& set, const CurvatureOperatord& r, std::optional<double> tau_act = {});

/// Hess g_m(R) as a matrix in curvature_space_basis(n) coordinates.
Eigen::MatrixXd hessian_matrix(const Constraint& g, const CurvatureOperatord& r);

/// Level-set second fundamental form -Hess g(T, S) / |grad g| for the active
/// constraint `which` (index into P.active). T and S must be tangent.
double second_fundamental_form(const SetSpec& set, const BoundaryPoint& p, const CurvatureOperatord& t,
                               const CurvatureOperatord& s, size_t which = 0);

/// The form above restricted to the tangent hyperplane, as a matrix in an
/// orthonormal basis of that hyperplane.
Eigen::MatrixXd second_fundamental_form_matrix(const SetSpec& set, const BoundaryPoint& p, size_t which = 0);

/// max over active normals of <nu, v>; v can lie in the tangent cone only if
/// this is <= 0.
double tangent_cone_test(const BoundaryPoint& p, const CurvatureOperatord& v);

enum class SamplerStrategy { RadialRoot, RandomWalkProjection, Native };
const char* to_string(SamplerStrategy s);
SamplerStrategy sampler_strategy_from_string(const std::string& s);

struct SamplerConfig {
  SamplerStrategy strategy = SamplerStrategy::RadialRoot;
  int count = 100;
  std::uint64_t seed = 0;
  std::string stream = "boundary";
  /// Ray origins (radial) or walk centers (projection); empty means set.anchor.
  std::vector<CurvatureOperatord> anchors;
  /// Radius of the walk around each anchor for projection sampling.
  double walk_radius = 1.0;
  /// Overrides set.sample_radius when positive.
  double max_radius = 0.0;
  int max_attempts_factor = 50;
  double residual_tolerance = 1e-10;
};

struct SampleBatch {
  std::vector<BoundaryPoint> points;
  int attempts = 0;
  int skipped = 0;
};

/// Boundary points with |g_m| <= residual_tolerance * max(1, |R|^2) after
/// polishing. Radial roots of quadratic constraints are solved in closed form.
/// Throws an empty-sample error if no point survives.
SampleBatch boundary_sampler(const SetSpec& set, const SamplerConfig& config);

/// Interior starts: points on rays from the anchors strictly before the first
/// boundary crossing, at a uniform fraction of the exit distance.
std::vector<CurvatureOperatord> interior_sampler(const SetSpec& set, const SamplerConfig& config);

struct StarShapeResult {
  double a_est = 0.0;
  CurvatureOperatord witness_r;
  CurvatureOperatord witness_normal;
  double witness_value = 0.0;
  int points_used = 0;
  int skipped = 0;
};

/// a_est = -max <nu, S - R> over sampled boundary points R with |R| <= K and
/// their active unit normals.
StarShapeResult star_shape_margin(const SetSpec& set, const CurvatureOperatord& center, double k_radius,
                                  int samples, std::uint64_t seed);
StarShapeResult star_shape_margin_at(const CurvatureOperatord& center, const std::vector<BoundaryPoint>& points);

struct NonconvexityWitness {
  CurvatureOperatord r1;
  CurvatureOperatord r2;
  CurvatureOperatord midpoint;
  double midpoint_margin = 0.0;
};

/// Searches pairs of sampled boundary points for the midpoint farthest
/// outside the set.
std::optional<NonconvexityWitness> nonconvexity_witness(const SetSpec& set, int samples, std::uint64_t seed);

/// Finite-difference audit of a set's analytic derivatives and declared
/// O(n)-invariance.
struct DerivativeAudit {
  double gradient_error = 0.0;  // max |fd - analytic| / (1 + |analytic|)
  double hessian_error = 0.0;
  double invariance_error = 0.0;
  int samples = 0;
};
DerivativeAudit audit_derivatives(const SetSpec& set, int samples, std::uint64_t seed);

}  // namespace curvkit
