#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "curvkit/set_geometry.hpp"

using namespace curvkit;

namespace {

CurvatureOperatord unit_direction(std::uint64_t seed, int n = 3) {
  Rng rng(seed, "geometry/direction");
  const auto r = random_curvature(rng, n);
  return (1.0 / r.norm()) * r;
}

}  // namespace

TEST_CASE("membership and first-order signed distance on the unit ball") {
  const SetSpec ball = ball_set(3, 1.0);
  CHECK(membership(ball, CurvatureOperatord::zero(3)).location == Location::Interior);
  CHECK(membership(ball, CurvatureOperatord::identity(3)).location == Location::Exterior);
  const CurvatureOperatord u = unit_direction(1);
  CHECK(membership(ball, u).location == Location::Boundary);
  CHECK(membership(ball, (1.0 + 1e-12) * u).location == Location::Boundary);
  // g = 3 and |grad g| = 4 at 2u.
  CHECK(signed_distance_estimate(ball, 2.0 * u) == doctest::Approx(0.75));
  CHECK_THROWS_AS(make_boundary_point(ball, 0.5 * u), Error);
}

TEST_CASE("second fundamental form of the ball is -I/r, of a halfspace is 0") {
  for (double radius : {0.5, 1.0, 3.0}) {
    const SetSpec ball = ball_set(3, radius);
    const BoundaryPoint p = make_boundary_point(ball, radius * unit_direction(2));
    const Eigen::MatrixXd ii = second_fundamental_form_matrix(ball, p);
    CHECK(ii.rows() == 5);
    CHECK((ii + Eigen::MatrixXd::Identity(5, 5) / radius).cwiseAbs().maxCoeff() < 1e-12);
  }
  const SetSpec half = halfspace_scal_set(3, 2.0);
  const BoundaryPoint p = make_boundary_point(half, (2.0 / 3.0) * CurvatureOperatord::identity(3));
  CHECK(second_fundamental_form_matrix(half, p).cwiseAbs().maxCoeff() == 0.0);
  CHECK(p.normals[0].dot(CurvatureOperatord::identity(3)) == doctest::Approx(-std::sqrt(3.0)));
}

TEST_CASE("second fundamental form rejects non-tangent arguments") {
  const SetSpec ball = ball_set(3, 1.0);
  const CurvatureOperatord u = unit_direction(3);
  const BoundaryPoint p = make_boundary_point(ball, u);
  CHECK_THROWS_AS(second_fundamental_form(ball, p, u, u), Error);
}

TEST_CASE("omega-ac has positive boundary curvature directions") {
  const SetSpec omega = omega_ac_set(0.35, 1.0);
  SamplerConfig sc;
  sc.count = 20;
  sc.seed = 5;
  const SampleBatch batch = boundary_sampler(omega, sc);
  double top = -1.0;
  for (const auto& p : batch.points) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(second_fundamental_form_matrix(omega, p));
    top = std::max(top, es.eigenvalues().maxCoeff());
  }
  CHECK(top > 0.0);
}

TEST_CASE("tangent cone test on the ball") {
  const SetSpec ball = ball_set(3, 1.0);
  const CurvatureOperatord u = unit_direction(4);
  const BoundaryPoint p = make_boundary_point(ball, u);
  CHECK(tangent_cone_test(p, -1.0 * u) == doctest::Approx(-1.0));
  CHECK(tangent_cone_test(p, u) == doctest::Approx(1.0));
}

TEST_CASE("boundary sampler: residuals, determinism, strategies") {
  const SetSpec sets[] = {ball_set(3, 1.0), ball_set(4, 2.0), halfspace_scal_set(3, 1.0), omega_ac_set(0.35, 1.0),
                          omega_tilde_ac_set(0.35, 1.0, 16.0), psd_cone_set(), omega_f_set(f_sphere(2.0))};
  for (const auto& set : sets) {
    SamplerConfig sc;
    sc.count = 30;
    sc.seed = 42;
    const SampleBatch a = boundary_sampler(set, sc);
    const SampleBatch b = boundary_sampler(set, sc);
    CHECK(a.points.size() == 30);
    for (size_t i = 0; i < a.points.size(); ++i) {
      const auto& r = a.points[i].r;
      CHECK((r - b.points[i].r).norm() == 0.0);
      CHECK(!a.points[i].active.empty());
      double worst = -1e300;
      for (const auto& g : set.constraints) worst = std::max(worst, g.value(r));
      CHECK(std::abs(worst) <= 1e-10 * std::max(1.0, r.squaredNorm()));
      if (set.n >= 4) CHECK(first_bianchi_residual(r.matrix(), set.n) < 1e-10 * (1.0 + r.norm()));
    }
  }
  SamplerConfig walk;
  walk.strategy = SamplerStrategy::RandomWalkProjection;
  walk.count = 20;
  walk.walk_radius = 5.0;
  const SampleBatch w = boundary_sampler(omega_tilde_ac_set(0.35, 1.0, 16.0), walk);
  CHECK(w.points.size() == 20);

  SamplerConfig native;
  native.strategy = SamplerStrategy::Native;
  native.count = 10;
  for (const auto& p : boundary_sampler(psd_cone_set(), native).points)
    CHECK(eigen_sorted(p.r).values(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(boundary_sampler(ball_set(3, 1.0), native), Error);

  SamplerConfig tiny;
  tiny.count = 5;
  tiny.max_radius = 0.1;
  try {
    boundary_sampler(ball_set(3, 1.0), tiny);
    FAIL("expected an empty sample");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptySample);
  }
}

TEST_CASE("sampler strategy names round-trip") {
  for (auto s : {SamplerStrategy::RadialRoot, SamplerStrategy::RandomWalkProjection, SamplerStrategy::Native})
    CHECK(sampler_strategy_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(sampler_strategy_from_string("nope"), Error);
}

TEST_CASE("interior sampler returns interior points") {
  const SetSpec set = omega_tilde_ac_set(0.35, 1.0, 16.5);
  SamplerConfig sc;
  sc.count = 50;
  sc.seed = 3;
  const auto pts = interior_sampler(set, sc);
  CHECK(pts.size() == 50);
  for (const auto& r : pts) CHECK(membership(set, r).location == Location::Interior);
}

TEST_CASE("star shape: halfspace closed form and omega-tilde") {
  const double b = 2.0;
  const double lambda = 1.5;
  const SetSpec half = halfspace_scal_set(3, b);
  const StarShapeResult res = star_shape_margin(half, lambda * CurvatureOperatord::identity(3), 20.0, 50, 1);
  CHECK(res.points_used > 0);
  CHECK(std::abs(res.a_est - (3.0 * lambda - b) / std::sqrt(3.0)) < 1e-8);

  const SetSpec tilde = omega_tilde_ac_set(0.35, 1.0, 16.4933);
  const StarShapeResult t = star_shape_margin(tilde, (1.1 * 16.4933 / 3.0) * CurvatureOperatord::identity(3),
                                              10.0 * 16.4933, 200, 2);
  CHECK(t.a_est > 0.0);
  // Below b/3 the center fails on the scal = b piece.
  const StarShapeResult low = star_shape_margin(tilde, (0.9 * 16.4933 / 3.0) * CurvatureOperatord::identity(3),
                                                10.0 * 16.4933, 200, 2);
  CHECK(low.a_est < 0.0);
}

TEST_CASE("non-convexity witness for omega-ac, none for the ball") {
  const auto w = nonconvexity_witness(omega_ac_set(0.35, 1.0), 40, 42);
  REQUIRE(w.has_value());
  CHECK(w->midpoint_margin > 1e-3);
  const SetSpec omega = omega_ac_set(0.35, 1.0);
  CHECK(membership(omega, w->r1).location != Location::Exterior);
  CHECK(membership(omega, w->r2).location != Location::Exterior);
  CHECK(!nonconvexity_witness(ball_set(3, 1.0), 40, 42).has_value());
}

TEST_CASE("analytic derivatives agree with finite differences") {
  const SetSpec sets[] = {ball_set(3, 1.0), ball_set(4, 1.0), halfspace_scal_set(3, 1.0), omega_ac_set(0.35, 1.0),
                          psd_cone_set(), omega_f_set(f_ac(0.35, 1.0)), omega_f_set(f_sphere(1.0))};
  for (const auto& set : sets) {
    const DerivativeAudit audit = audit_derivatives(set, 10, 7);
    CHECK(audit.samples > 0);
    CHECK(audit.gradient_error < 1e-6);
    CHECK(audit.hessian_error < 1e-5);
    CHECK(audit.invariance_error < 1e-10);
  }
}
