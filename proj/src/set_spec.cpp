#include "curvkit/set_spec.hpp"

#include <cmath>

namespace curvkit {
namespace {

double required(const std::map<std::string, double>& params, const std::string& key, const std::string& set) {
  auto it = params.find(key);
  if (it == params.end()) fail(ErrorKind::InvalidInput, "set '" + set + "' needs parameter '" + key + "'");
  if (!std::isfinite(it->second)) fail(ErrorKind::InvalidInput, "parameter '" + key + "' is not finite");
  return it->second;
}

Constraint omega_ac_constraint(double a, double c) {
  Constraint g;
  g.name = "omega-ac";
  g.value = [a, c](const CurvatureOperatord& r) { return r.squaredNorm() - a * r.trace() * r.trace() - c; };
  g.gradient = [a](const CurvatureOperatord& r) {
    return 2.0 * r - (2.0 * a * r.trace()) * CurvatureOperatord::identity(r.dim());
  };
  g.hessian = [a](const CurvatureOperatord&, const CurvatureOperatord& t) {
    return 2.0 * t - (2.0 * a * t.trace()) * CurvatureOperatord::identity(t.dim());
  };
  g.quadratic = true;
  return g;
}

Constraint scal_lower_bound(double b) {
  Constraint g;
  g.name = "scal-lower";
  g.value = [b](const CurvatureOperatord& r) { return b - r.trace(); };
  g.gradient = [](const CurvatureOperatord& r) { return -CurvatureOperatord::identity(r.dim()); };
  g.hessian = [](const CurvatureOperatord&, const CurvatureOperatord& t) { return CurvatureOperatord::zero(t.dim()); };
  g.quadratic = true;
  return g;
}

}  // namespace

SetSpec ball_set(int n, double radius) {
  SetSpec s;
  s.name = "ball";
  s.n = n;
  s.params = {{"radius", radius}};
  s.declared_convex = true;
  Constraint g;
  g.name = "ball";
  const double r2 = radius * radius;
  g.value = [r2](const CurvatureOperatord& r) { return r.squaredNorm() - r2; };
  g.gradient = [](const CurvatureOperatord& r) { return 2.0 * r; };
  g.hessian = [](const CurvatureOperatord&, const CurvatureOperatord& t) { return 2.0 * t; };
  g.quadratic = true;
  s.constraints.push_back(g);
  s.anchor = CurvatureOperatord::zero(n);
  s.sample_radius = 2.0 * radius + 1.0;
  return s;
}

SetSpec halfspace_scal_set(int n, double b) {
  SetSpec s;
  s.name = "halfspace-scal";
  s.n = n;
  s.params = {{"b", b}};
  s.declared_convex = true;
  s.constraints.push_back(scal_lower_bound(b));
  const double N = WedgeBasis::get(n).size();
  s.anchor = ((b + N) / N) * CurvatureOperatord::identity(n);
  s.sample_radius = 10.0 * (std::abs(b) + 1.0);
  return s;
}

SetSpec omega_ac_set(double a, double c) {
  if (!(c > 0.0)) fail(ErrorKind::InvalidInput, "omega-ac needs c > 0");
  SetSpec s;
  s.name = "omega-ac";
  s.params = {{"a", a}, {"c", c}};
  s.constraints.push_back(omega_ac_constraint(a, c));
  s.anchor = CurvatureOperatord::zero(3);
  s.sample_radius = 20.0 * std::sqrt(c);
  return s;
}

SetSpec omega_tilde_ac_set(double a, double c, double b) {
  SetSpec s = omega_ac_set(a, c);
  s.name = "omega-tilde-ac";
  s.params["b"] = b;
  s.constraints.push_back(scal_lower_bound(b));
  s.anchor = (1.1 * b / 3.0) * CurvatureOperatord::identity(3);
  s.sample_radius = 10.0 * std::abs(b) + 1.0;
  return s;
}

SetSpec omega_f_set(const EigenFunctionSpec& f) {
  SetSpec s;
  s.name = "omega-f:" + f.name;
  s.params = f.params;
  Constraint g;
  g.name = f.name;
  g.value = [f](const CurvatureOperatord& r) { return f.value(eigen_sorted(r).values); };
  g.gradient = [f](const CurvatureOperatord& r) { return spectral_gradient(f, r); };
  g.hessian = [f](const CurvatureOperatord& r, const CurvatureOperatord& t) { return spectral_hessian_apply(f, r, t); };
  g.quadratic = f.quadratic;
  s.constraints.push_back(g);
  s.anchor = CurvatureOperatord::diagonal(3, f.anchor);
  s.sample_radius = 20.0 * (1.0 + f.anchor.norm());
  if (auto it = f.params.find("c"); it != f.params.end()) s.sample_radius = 20.0 * std::sqrt(std::abs(it->second));
  return s;
}

SetSpec psd_cone_set() {
  SetSpec s;
  s.name = "psd";
  s.declared_convex = true;
  // -lambda_1 as a function of the sorted spectrum; smooth where lambda_1 is simple.
  EigenFunctionSpec neg_min;
  neg_min.name = "neg-min";
  neg_min.value = [](const Eigen::Vector3d& x) { return -x(0); };
  neg_min.gradient = [](const Eigen::Vector3d&) { return Eigen::Vector3d(-1.0, 0.0, 0.0); };
  neg_min.hessian = [](const Eigen::Vector3d&) { return Eigen::Matrix3d::Zero().eval(); };
  Constraint g;
  g.name = "neg-min-eigenvalue";
  g.value = [neg_min](const CurvatureOperatord& r) { return neg_min.value(eigen_sorted(r).values); };
  g.gradient = [neg_min](const CurvatureOperatord& r) { return spectral_gradient(neg_min, r); };
  g.hessian = [neg_min](const CurvatureOperatord& r, const CurvatureOperatord& t) {
    return spectral_hessian_apply(neg_min, r, t);
  };
  s.constraints.push_back(g);
  s.anchor = CurvatureOperatord::identity(3);
  s.sample_radius = 1e3;
  // Rank-deficient A diag(0, d2, d3) A^T with A Haar on O(3).
  s.native_sampler = [](Rng& rng) {
    const Eigen::MatrixXd a = haar_rotation(rng, 3, false);
    const Eigen::Vector3d d(0.0, rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0));
    return CurvatureOperatord(3, a * d.asDiagonal() * a.transpose());
  };
  return s;
}

SetSpec make_set(const std::string& name, const std::map<std::string, double>& params, const std::string& f_name) {
  auto get = [&](const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  if (name == "ball") return ball_set(static_cast<int>(get("n", 3)), get("radius", 1.0));
  if (name == "halfspace-scal") return halfspace_scal_set(static_cast<int>(get("n", 3)), required(params, "b", name));
  if (name == "omega-ac") return omega_ac_set(required(params, "a", name), required(params, "c", name));
  if (name == "omega-tilde-ac")
    return omega_tilde_ac_set(required(params, "a", name), required(params, "c", name), required(params, "b", name));
  if (name == "omega-f") return omega_f_set(make_eigen_function(f_name.empty() ? "f-ac" : f_name, params));
  if (name == "psd") return psd_cone_set();
  fail(ErrorKind::InvalidInput, "unknown set '" + name + "'");
}

}  // namespace curvkit
