#include "curvkit/spectral.hpp"

#include <cmath>
#include <limits>

namespace curvkit {
namespace {

double param(const std::map<std::string, double>& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

double required(const std::map<std::string, double>& params, const std::string& key, const std::string& fn) {
  auto it = params.find(key);
  if (it == params.end()) fail(ErrorKind::InvalidInput, "eigen function '" + fn + "' needs parameter '" + key + "'");
  return it->second;
}

}  // namespace

EigenFunctionSpec f_sum() {
  EigenFunctionSpec f;
  f.name = "sum";
  f.value = [](const Eigen::Vector3d& x) { return x.sum(); };
  f.gradient = [](const Eigen::Vector3d&) { return Eigen::Vector3d::Ones().eval(); };
  f.hessian = [](const Eigen::Vector3d&) { return Eigen::Matrix3d::Zero().eval(); };
  f.anchor = -Eigen::Vector3d::Ones();
  f.quadratic = true;
  return f;
}

EigenFunctionSpec f_sphere(double radius) {
  EigenFunctionSpec f;
  f.name = "sphere";
  f.params = {{"radius", radius}};
  const double r2 = radius * radius;
  f.value = [r2](const Eigen::Vector3d& x) { return x.squaredNorm() - r2; };
  f.gradient = [](const Eigen::Vector3d& x) { return (2.0 * x).eval(); };
  f.hessian = [](const Eigen::Vector3d&) { return (2.0 * Eigen::Matrix3d::Identity()).eval(); };
  f.quadratic = true;
  return f;
}

EigenFunctionSpec f_ac(double a, double c) {
  EigenFunctionSpec f;
  f.name = "f-ac";
  f.params = {{"a", a}, {"c", c}};
  f.value = [a, c](const Eigen::Vector3d& x) { return x.squaredNorm() - a * x.sum() * x.sum() - c; };
  f.gradient = [a](const Eigen::Vector3d& x) { return (2.0 * x - 2.0 * a * x.sum() * Eigen::Vector3d::Ones()).eval(); };
  f.hessian = [a](const Eigen::Vector3d&) {
    return (2.0 * Eigen::Matrix3d::Identity() - 2.0 * a * Eigen::Matrix3d::Ones()).eval();
  };
  f.quadratic = true;
  return f;
}

EigenFunctionSpec f_neg_sphere(double offset) {
  EigenFunctionSpec f;
  f.name = "neg-sphere";
  f.params = {{"offset", offset}};
  f.value = [offset](const Eigen::Vector3d& x) { return offset - x.squaredNorm(); };
  f.gradient = [](const Eigen::Vector3d& x) { return (-2.0 * x).eval(); };
  f.hessian = [](const Eigen::Vector3d&) { return (-2.0 * Eigen::Matrix3d::Identity()).eval(); };
  f.anchor = Eigen::Vector3d::Constant(2.0 * std::sqrt(std::abs(offset) / 3.0) + 1.0);
  f.quadratic = true;
  return f;
}

EigenFunctionSpec make_eigen_function(const std::string& name, const std::map<std::string, double>& params) {
  if (name == "sum") return f_sum();
  if (name == "sphere") return f_sphere(param(params, "radius", 1.0));
  if (name == "f-ac") return f_ac(required(params, "a", name), required(params, "c", name));
  if (name == "neg-sphere") return f_neg_sphere(required(params, "offset", name));
  fail(ErrorKind::InvalidInput, "unknown eigen function '" + name + "'");
}

double spectral_gap(const Eigen::VectorXd& v) {
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i + 1 < v.size(); ++i) gap = std::min(gap, v(i + 1) - v(i));
  return gap;
}

CurvatureOperatord spectral_gradient(const EigenFunctionSpec& f, const CurvatureOperatord& r) {
  if (r.dim() != 3) fail(ErrorKind::Capability, "spectral functions are defined for n = 3");
  const auto e = eigen_sorted(r);
  const Eigen::Vector3d df = f.gradient(e.values);
  return {3, e.frame * df.asDiagonal() * e.frame.transpose()};
}

CurvatureOperatord spectral_hessian_apply(const EigenFunctionSpec& f, const CurvatureOperatord& r,
                                          const CurvatureOperatord& t) {
  if (r.dim() != 3) fail(ErrorKind::Capability, "spectral functions are defined for n = 3");
  const auto e = eigen_sorted(r);
  const Eigen::Vector3d lam = e.values;
  const Eigen::Vector3d df = f.gradient(lam);
  const Eigen::Matrix3d d2f = f.hessian(lam);
  const Eigen::Matrix3d tt = e.frame.transpose() * t.matrix() * e.frame;
  Eigen::Matrix3d out = Eigen::Matrix3d::Zero();
  const double scale = 1.0 + lam.cwiseAbs().maxCoeff();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out(i, i) += d2f(i, j) * tt(j, j);
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      const double gap = lam(i) - lam(j);
      // Coalescing eigenvalues: the divided difference tends to d2_ii f - d2_ij f.
      const double z = std::abs(gap) > 1e-12 * scale ? (df(i) - df(j)) / gap : d2f(i, i) - d2f(i, j);
      out(i, j) = z * tt(i, j);
    }
  }
  return {3, e.frame * out * e.frame.transpose()};
}

}  // namespace curvkit
