#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "curvkit/ode.hpp"
#include "curvkit/rd.hpp"

using namespace curvkit;

namespace {

double energy(const MatrixField& f) {
  double e = 0.0;
  for (const auto& c : f.cells) e += c.squaredNorm();
  return e;
}

Eigen::Matrix3d sample_matrix() {
  Eigen::Matrix3d a;
  a << 1.0, 0.3, -0.2, 0.3, 2.0, 0.5, -0.2, 0.5, -1.0;
  return a;
}

}  // namespace

TEST_CASE("laplacian: constants, Fourier symbol, linearity, 2D") {
  const int g = 32;
  MatrixField f(g, 1, 1.0 / g);
  for (auto& c : f.cells) c = sample_matrix();
  CHECK(laplacian(f).max_norm() == 0.0);

  const double pi2 = 2.0 * std::numbers::pi;
  for (int k : {1, 3}) {
    for (int i = 0; i < g; ++i) f.cells[static_cast<size_t>(i)] = std::cos(pi2 * k * i * f.h) * sample_matrix();
    const double symbol = -(2.0 / (f.h * f.h)) * (1.0 - std::cos(pi2 * k * f.h));
    const MatrixField lap = laplacian(f);
    double err = 0.0;
    for (size_t i = 0; i < f.size(); ++i) err = std::max(err, (lap.cells[i] - symbol * f.cells[i]).norm());
    CHECK(err < 1e-12 * std::abs(symbol) * sample_matrix().norm());
  }

  MatrixField a(g, 1, 1.0 / g), b(g, 1, 1.0 / g), sum(g, 1, 1.0 / g);
  for (int i = 0; i < g; ++i) {
    a.cells[static_cast<size_t>(i)] = std::sin(pi2 * i / g) * sample_matrix();
    b.cells[static_cast<size_t>(i)] = (i % 5) * Eigen::Matrix3d::Identity();
    sum.cells[static_cast<size_t>(i)] = 2.0 * a.cells[static_cast<size_t>(i)] - b.cells[static_cast<size_t>(i)];
  }
  const MatrixField la = laplacian(a), lb = laplacian(b), ls = laplacian(sum);
  for (size_t i = 0; i < a.size(); ++i) CHECK((ls.cells[i] - (2.0 * la.cells[i] - lb.cells[i])).norm() < 1e-9);

  // 2D: a mode along one axis has the 1D symbol.
  const int g2 = 8;
  MatrixField p(g2, 2, 1.0 / g2);
  REQUIRE(p.size() == static_cast<size_t>(g2 * g2));
  for (int r = 0; r < g2; ++r)
    for (int c = 0; c < g2; ++c)
      p.cells[static_cast<size_t>(r * g2 + c)] = std::cos(pi2 * c * p.h) * sample_matrix();
  const double symbol = -(2.0 / (p.h * p.h)) * (1.0 - std::cos(pi2 * p.h));
  const MatrixField lp = laplacian(p);
  for (size_t i = 0; i < p.size(); ++i) CHECK((lp.cells[i] - symbol * p.cells[i]).norm() < 1e-11);
}

TEST_CASE("reaction matches the ODE right-hand side") {
  const Eigen::Matrix3d r = sample_matrix();
  CHECK((reaction(r) - ode_rhs(CurvatureOperatord(3, Eigen::MatrixXd(r))).matrix()).norm() < 1e-14);
}

TEST_CASE("step: dt = 0 is the identity, CFL violations throw") {
  SimConfig c;
  c.grid = 16;
  c.seed = 1;
  const MatrixField f = make_initial_field(resolve(c));
  const MatrixField same = step(f, 0.0, true);
  for (size_t i = 0; i < f.size(); ++i) CHECK(same.cells[i] == f.cells[i]);
  try {
    step(f, f.h * f.h, true, 0.9);
    FAIL("expected a configuration error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }
  SimConfig bad = c;
  bad.dt = 1.0;
  CHECK_THROWS_AS(resolve(bad), Error);
  const SimConfig ok = resolve(c);
  CHECK(ok.dt == doctest::Approx(0.9 / (16.0 * 16.0 * 2.0)));
}

TEST_CASE("a constant field follows the ODE") {
  SimConfig c;
  c.grid = 16;
  c.init = InitialField::Constant;
  c.constant = 1.0;
  c.t_end = 0.4;
  c.set_name = "halfspace-scal";
  c.set_params = {{"b", 1.0}};
  const SimResult res = run(c);
  CHECK(!res.blew_up);
  IntegratorOptions opts;
  opts.tolerance = 1e-10;
  const Trajectory traj = integrate(CurvatureOperatord::identity(3), 0.4, opts);
  const Eigen::Matrix3d expect = traj.states.back().matrix();
  for (const auto& cell : res.final_field.cells) CHECK((cell - expect).norm() / expect.norm() < 1e-8);
  CHECK(expect(0, 0) == doctest::Approx(5.0).epsilon(1e-8));
}

TEST_CASE("pure diffusion: energy decreases, mean conserved, symmetry exact") {
  for (int dims : {1, 2}) {
    SimConfig c;
    c.grid = dims == 1 ? 64 : 16;
    c.dims = dims;
    c.init = InitialField::Random;
    c.reaction_on = false;
    c.seed = 3;
    const SimConfig r = resolve(c);
    MatrixField f = make_initial_field(r);
    const Eigen::Matrix3d mean0 = f.mean();
    double e = energy(f);
    for (int k = 0; k < 50; ++k) {
      f = step(f, r.dt, false, r.cfl_safety);
      const double en = energy(f);
      CHECK(en <= e * (1.0 + 1e-14));
      e = en;
    }
    CHECK((f.mean() - mean0).cwiseAbs().maxCoeff() < 1e-12);
    for (const auto& cell : f.cells) CHECK((cell - cell.transpose()).norm() == 0.0);
  }
}

TEST_CASE("PSD initial data stays PSD and min scal is monotone") {
  SimConfig c;
  c.grid = 32;
  c.t_end = 0.2;
  c.seed = 5;
  c.cadence = 5;
  const SimResult res = run(c);
  REQUIRE(res.rows.size() > 2);
  for (const auto& row : res.rows) CHECK(row.min_eig >= -1e-6 * (1.0 + row.max_norm));
  for (size_t k = 1; k < res.rows.size(); ++k) CHECK(res.rows[k].min_scal >= res.rows[k - 1].min_scal - 1e-12);
  for (const auto& cell : res.final_field.cells) CHECK((cell - cell.transpose()).norm() == 0.0);
  const std::string csv = diagnostics_csv(res);
  CHECK(csv.rfind("t,min_scal,max_scal,min_eig,max_norm,worst_", 0) == 0);
}

TEST_CASE("initial fields are deterministic and named") {
  SimConfig c;
  c.grid = 16;
  c.seed = 9;
  const MatrixField a = make_initial_field(resolve(c));
  const MatrixField b = make_initial_field(resolve(c));
  for (size_t i = 0; i < a.size(); ++i) CHECK(a.cells[i] == b.cells[i]);
  for (auto f : {InitialField::Random, InitialField::Psd, InitialField::Constant})
    CHECK(initial_field_from_string(to_string(f)) == f);
  CHECK_THROWS_AS(initial_field_from_string("nope"), Error);
}

TEST_CASE("laplace inward spot check") {
  const int g = 16;
  const SetSpec psd = psd_cone_set();
  MatrixField f(g, 1, 1.0 / g);
  for (auto& c : f.cells) c = Eigen::Vector3d(0.0, 1.0, 2.0).asDiagonal();
  const auto flat = laplace_inward_spot_check(f, psd, 0.0, 1e-3);
  REQUIRE(flat.has_value());
  CHECK(flat->cells == g);
  CHECK(flat->worst == 0.0);

  // One cell on the boundary, neighbors outside: the Laplacian points out.
  for (int i = 0; i < g; ++i) {
    const double s = -std::pow((i - g / 2) * f.h, 2);
    f.cells[static_cast<size_t>(i)] = Eigen::Vector3d(s, 1.0, 2.0).asDiagonal();
  }
  const auto out = laplace_inward_spot_check(f, psd, 0.0, 1e-3);
  REQUIRE(out.has_value());
  CHECK(out->worst == doctest::Approx(2.0));

  for (auto& c : f.cells) c = Eigen::Matrix3d::Identity();
  CHECK(!laplace_inward_spot_check(f, psd, 0.0, 1e-3).has_value());
}
