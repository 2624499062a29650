#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "curvkit/convexity.hpp"

using namespace curvkit;

namespace {

EigenSamplerConfig eigen_config(int count, std::uint64_t seed) {
  EigenSamplerConfig c;
  c.count = count;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("Z values and conditions on closed-form examples") {
  const Eigen::Vector3d lam(1.0, 2.0, 3.0);
  const EigenFunctionSpec sphere = f_sphere(std::sqrt(14.0));
  CHECK((z_values(sphere, lam) - Eigen::Vector3d::Constant(2.0)).norm() < 1e-14);
  CHECK(condition_one(sphere, lam) == doctest::Approx(2.0));
  CHECK(condition_two(sphere, lam) > 0.0);

  const EigenFunctionSpec sum = f_sum();
  CHECK(z_values(sum, lam).norm() == 0.0);
  CHECK(condition_one(sum, lam) == 0.0);
  CHECK(std::abs(condition_two(sum, lam)) < 1e-14);

  CHECK(condition_one(f_neg_sphere(14.0), lam) == doctest::Approx(-2.0));

  // f-ac: Z = 2 and Hess = 2 I - 2a 11^T.
  const EigenFunctionSpec fac = f_ac(0.35, 1.0);
  CHECK((z_values(fac, lam) - Eigen::Vector3d::Constant(2.0)).norm() < 1e-13);
  CHECK(condition_one(fac, lam) == doctest::Approx(2.0));
}

TEST_CASE("conditions reject a degenerate spectrum") {
  try {
    condition_one(f_sphere(1.0), Eigen::Vector3d(0.5, 0.5, 0.5));
    FAIL("expected a degenerate-spectrum error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateSpectrum);
  }
  CHECK(gap_threshold(Eigen::Vector3d::Zero()) == doctest::Approx(1e-4));
}

TEST_CASE("eigen check: sum is marginal, sphere passes, neg-sphere fails") {
  const ConvexityReport sum = verify_eigen(f_sum(), eigen_config(100, 1));
  CHECK(sum.verdict == Verdict::Pass);
  CHECK(sum.any_marginal);

  const ConvexityReport sphere = verify_eigen(f_sphere(1.0), eigen_config(200, 2));
  CHECK(sphere.verdict == Verdict::Pass);
  CHECK(sphere.worst_eigen_margin > 0.0);

  const ConvexityReport neg = verify_eigen(f_neg_sphere(4.0), eigen_config(200, 3));
  CHECK(neg.verdict == Verdict::Fail);
  REQUIRE(neg.eigen_witness.has_value());
  CHECK(neg.samples[*neg.eigen_witness].eigen_margin < 0.0);
}

TEST_CASE("eigen check on f-ac: 0.35 passes, 0.45 fails with a witness") {
  const ConvexityReport pass = verify_eigen(f_ac(0.35, 1.0), eigen_config(500, 42));
  CHECK(pass.verdict == Verdict::Pass);
  CHECK(pass.samples.size() == 500);
  for (const auto& s : pass.samples) CHECK(std::abs(f_ac(0.35, 1.0).value(s.lambda)) < 1e-10 * (1.0 + s.lambda.squaredNorm()));

  const ConvexityReport fail = verify_eigen(f_ac(0.45, 1.0), eigen_config(500, 42));
  CHECK(fail.verdict == Verdict::Fail);
  REQUIRE(fail.eigen_witness.has_value());
  CHECK(fail.worst_eigen_margin < -1e-6);
}

TEST_CASE("sample_zero_set is deterministic and separated") {
  const EigenSamples a = sample_zero_set(f_ac(0.35, 1.0), eigen_config(50, 9));
  const EigenSamples b = sample_zero_set(f_ac(0.35, 1.0), eigen_config(50, 9));
  REQUIRE(a.lambdas.size() == 50);
  for (size_t i = 0; i < a.lambdas.size(); ++i) {
    CHECK((a.lambdas[i] - b.lambdas[i]).norm() == 0.0);
    CHECK(spectral_gap(a.lambdas[i]) >= gap_threshold(a.lambdas[i]));
  }
}

TEST_CASE("direct form of the ball is -1/r on every Bianchi tangent tuple") {
  const double radius = 2.0;
  const SetSpec ball = ball_set(3, radius);
  SamplerConfig sc;
  sc.count = 5;
  sc.seed = 4;
  const auto rots = rotation_sample(4, 4);
  CHECK((rots[0] - Eigen::MatrixXd::Identity(3, 3)).norm() == 0.0);
  for (const auto& p : boundary_sampler(ball, sc).points) {
    const Eigen::MatrixXd form = direct_quadratic_form(ball, p, rots[1]);
    CHECK(form.rows() == 12);
    CHECK((form + Eigen::MatrixXd::Identity(12, 12) / radius).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(direct_margin(ball, p, rots).margin == doctest::Approx(-1.0 / radius));
  }
}

TEST_CASE("direct check: halfspace marginal, ball passes, omega-ac verdicts") {
  SamplerConfig sc;
  sc.count = 40;
  sc.seed = 6;
  const ConvexityReport half = verify_direct(halfspace_scal_set(3, 1.0), sc, 4);
  CHECK(half.verdict == Verdict::Pass);
  CHECK(std::abs(half.worst_direct_margin) < 1e-12);

  CHECK(verify_direct(ball_set(3, 1.0), sc, 4).verdict == Verdict::Pass);

  const ConvexityReport pass = verify_direct(omega_ac_set(0.35, 1.0), sc, 8);
  CHECK(pass.verdict == Verdict::Pass);
  CHECK(pass.rotation_spread < 1e-12);

  SamplerConfig big = sc;
  big.count = 200;
  const ConvexityReport fail = verify_direct(omega_ac_set(0.45, 1.0), big, 8);
  CHECK(fail.verdict == Verdict::Fail);
  REQUIRE(fail.direct_witness.has_value());
  CHECK(*fail.samples[*fail.direct_witness].direct_margin > 1e-8);
}

TEST_CASE("ambient and spectral derivatives give the same direct margin") {
  const EigenFunctionSpec f = f_ac(0.37, 2.0);
  const SetSpec ambient = set_for_eigen_function(f);
  const SetSpec spectral = omega_f_set(f);
  SamplerConfig sc;
  sc.count = 10;
  sc.seed = 11;
  const auto rots = rotation_sample(3, 11);
  for (const auto& p : boundary_sampler(ambient, sc).points) {
    const BoundaryPoint q = make_boundary_point(spectral, p.r, 1e-8 * (1.0 + p.r.squaredNorm()));
    CHECK(direct_margin(ambient, p, rots).margin ==
          doctest::Approx(direct_margin(spectral, q, rots).margin).epsilon(1e-6));
  }
}

TEST_CASE("direct margin refuses spectral Hessians at repeated eigenvalues") {
  EigenFunctionSpec f = f_sphere(std::sqrt(3.0));
  f.name = "sphere-spectral";
  f.quadratic = false;
  const SetSpec set = omega_f_set(f);
  const BoundaryPoint p = make_boundary_point(set, CurvatureOperatord::identity(3));
  try {
    direct_margin(set, p, rotation_sample(2, 1));
    FAIL("expected a degenerate-spectrum error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateSpectrum);
  }
}

TEST_CASE("cross-validation: agree-PASS at 0.35, agree-FAIL at 0.42") {
  CrossValidationBudget budget;
  budget.samples = 150;
  budget.rotations = 8;
  budget.seed = 42;
  const ConvexityReport pass = cross_validate(f_ac(0.35, 1.0), budget);
  CHECK(pass.agreement == "agree-PASS");
  CHECK(pass.verdict == Verdict::Pass);
  CHECK(pass.disagreements == 0);
  CHECK(pass.worst_direct_margin <= 1e-8);

  const ConvexityReport fail = cross_validate(f_ac(0.42, 1.0), budget);
  CHECK(fail.eigen_verdict == Verdict::Fail);
  CHECK(fail.direct_verdict == Verdict::Fail);
  CHECK(fail.agreement == "agree-FAIL");
  CHECK(fail.verdict == Verdict::Fail);
}

TEST_CASE("verdict names") {
  CHECK(std::string(to_string(Verdict::Pass)) == "PASS");
  CHECK(std::string(to_string(Verdict::Fail)) == "FAIL");
  CHECK(std::string(to_string(Verdict::Indeterminate)) == "INDETERMINATE");
}
