#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "curvkit/curvature.hpp"
#include "curvkit/random.hpp"
#include "curvkit/spectral.hpp"

namespace curvkit {

/// One smooth inequality g(R) <= 0 with analytic derivatives.
struct Constraint {
  std::string name;
  std::function<double(const CurvatureOperatord&)> value;
  std::function<CurvatureOperatord(const CurvatureOperatord&)> gradient;
  /// Hess g(R) applied to T, so that Hess g(R)(T, S) = <hessian(R, T), S>.
  std::function<CurvatureOperatord(const CurvatureOperatord&, const CurvatureOperatord&)> hessian;
  /// g restricted to any line is a polynomial of degree <= 2.
  bool quadratic = false;
};

/// Closed set {R in A_n : g_m(R) <= 0 for all m}.
struct SetSpec {
  std::string name;
  int n = 3;
  std::vector<Constraint> constraints;
  std::map<std::string, double> params;
  bool o_n_invariant = true;
  bool declared_convex = false;
  /// Interior point used as the default center of radial sampling.
  CurvatureOperatord anchor;
  /// Optional set-specific boundary sampler.
  std::function<CurvatureOperatord(Rng&)> native_sampler;
  /// Radius cap for boundary sampling (points farther from the origin are skipped).
  double sample_radius = 100.0;
};

SetSpec ball_set(int n = 3, double radius = 1.0);
/// {scal(R) >= b}.
SetSpec halfspace_scal_set(int n, double b);
/// {|R|^2 - a scal(R)^2 <= c} in A_3 via the ambient polynomial.
SetSpec omega_ac_set(double a, double c);
/// omega-ac intersected with {scal >= b}.
SetSpec omega_tilde_ac_set(double a, double c, double b);
/// {f(lambda(R)) <= 0} in A_3 via spectral derivatives.
SetSpec omega_f_set(const EigenFunctionSpec& f);
/// Positive semidefinite operators in A_3, g = -lambda_min.
SetSpec psd_cone_set();

/// Registry for the CLI: "ball", "halfspace-scal", "omega-ac", "omega-tilde-ac",
/// "omega-f" (with f_name), "psd".
SetSpec make_set(const std::string& name, const std::map<std::string, double>& params,
                 const std::string& f_name = "");

}  // namespace curvkit
