#include "curvkit/structure_constants.hpp"

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <string>

#include "curvkit/errors.hpp"
#include "curvkit/wedge_basis.hpp"

namespace curvkit {
namespace {

StructureConstants build(int n) {
  const WedgeBasis& basis = WedgeBasis::get(n);
  const int N = basis.size();
  std::vector<Eigen::MatrixXd> skew;
  for (int a = 0; a < N; ++a) skew.push_back(basis.skew(a));

  StructureConstants sc;
  sc.n = n;
  sc.by_first.resize(static_cast<size_t>(N));
  Eigen::MatrixXd casimir = Eigen::MatrixXd::Zero(N, N);
  for (int a = 0; a < N; ++a) {
    for (int b = 0; b < N; ++b) {
      const Eigen::MatrixXd bracket = skew[a] * skew[b] - skew[b] * skew[a];
      if (bracket.cwiseAbs().maxCoeff() == 0.0) continue;
      for (int d = 0; d < N; ++d) {
        const double v = -0.5 * (bracket * skew[d]).trace();
        if (std::abs(v) > 1e-14) sc.by_first[static_cast<size_t>(a)].push_back({b, d, v});
      }
    }
  }
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      double s = 0.0;
      for (const auto& ea : sc.by_first[static_cast<size_t>(a)])
        for (const auto& eb : sc.by_first[static_cast<size_t>(b)])
          if (ea.b == eb.b && ea.d == eb.d) s += ea.value * eb.value;
      casimir(a, b) = s;
    }

  if (n == 2) {
    sc.kappa = 0.0;  // so(2) is abelian; sharp vanishes identically
    return sc;
  }
  const double diag = casimir(0, 0);
  const Eigen::MatrixXd residual = casimir - diag * Eigen::MatrixXd::Identity(N, N);
  if (residual.cwiseAbs().maxCoeff() > 1e-12 * diag)
    throw NumericError("so(" + std::to_string(n) + ") Casimir is not a multiple of the identity",
                       residual.cwiseAbs().maxCoeff());
  sc.kappa = static_cast<double>(n - 2) / diag;
  return sc;
}

}  // namespace

const StructureConstants& StructureConstants::get(int n) {
  if (n < 2 || n > kMaxDimension)
    fail(ErrorKind::Capability, "no structure constants for n = " + std::to_string(n));
  static std::array<std::unique_ptr<StructureConstants>, kMaxDimension + 1> cache;
  static std::once_flag flags[kMaxDimension + 1];
  std::call_once(flags[n],
                 [n] { cache[static_cast<size_t>(n)] = std::make_unique<StructureConstants>(build(n)); });
  return *cache[static_cast<size_t>(n)];
}

}  // namespace curvkit
