#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>

#include "curvkit/curvature.hpp"

namespace curvkit {

/// A function of the sorted spectrum lambda_1 <= lambda_2 <= lambda_3 with
/// first and second derivatives.
struct EigenFunctionSpec {
  std::string name;
  std::map<std::string, double> params;
  std::function<double(const Eigen::Vector3d&)> value;
  std::function<Eigen::Vector3d(const Eigen::Vector3d&)> gradient;
  std::function<Eigen::Matrix3d(const Eigen::Vector3d&)> hessian;
  /// A point with f < 0, used as the center of radial sampling.
  Eigen::Vector3d anchor = Eigen::Vector3d::Zero();
  /// f o lambda is a polynomial of degree <= 2 in R.
  bool quadratic = false;
};

/// x1 + x2 + x3.
EigenFunctionSpec f_sum();
/// |x|^2 - radius^2.
EigenFunctionSpec f_sphere(double radius = 1.0);
/// |x|^2 - a (x1+x2+x3)^2 - c.
EigenFunctionSpec f_ac(double a, double c);
/// offset - |x|^2 (orders of the partials reversed on positive spectra).
EigenFunctionSpec f_neg_sphere(double offset);

/// Registry lookup: "sum", "sphere" (radius), "f-ac" (a, c), "neg-sphere" (offset).
EigenFunctionSpec make_eigen_function(const std::string& name, const std::map<std::string, double>& params);

/// Smallest gap between consecutive sorted eigenvalues.
double spectral_gap(const Eigen::VectorXd& sorted_values);

/// Gradient of f o lambda at R: sum_i d_i f(lambda) u_i u_i^T.
CurvatureOperatord spectral_gradient(const EigenFunctionSpec& f, const CurvatureOperatord& r);

/// Hessian of f o lambda at R applied to T, with t = U^T T U:
/// diagonal (sum_j d2_ij f t_jj), off-diagonal ((d_i f - d_j f)/(lambda_i - lambda_j)) t_ij.
CurvatureOperatord spectral_hessian_apply(const EigenFunctionSpec& f, const CurvatureOperatord& r,
                                          const CurvatureOperatord& t);

}  // namespace curvkit
