#include "curvkit/first_bianchi.hpp"

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "curvkit/errors.hpp"
#include "curvkit/wedge_basis.hpp"

namespace curvkit {
namespace {

std::vector<Eigen::MatrixXd> make_symmetric_basis(int N) {
  std::vector<Eigen::MatrixXd> out;
  for (int i = 0; i < N; ++i) {
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(N, N);
    e(i, i) = 1.0;
    out.push_back(e);
  }
  const double r = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(N, N);
      e(i, j) = e(j, i) = r;
      out.push_back(e);
    }
  return out;
}

BianchiSubspace build_subspace(int n) {
  const WedgeBasis& wb = WedgeBasis::get(n);
  const int N = wb.size();
  const auto& sym = symmetric_basis(N);
  const int dim = static_cast<int>(sym.size());

  // One row per ordered 4-tuple of distinct indices; tuples with a repeated
  // index satisfy the identity for every symmetric form.
  std::vector<Eigen::RowVectorXd> rows;
  auto term = [&](const Eigen::MatrixXd& e, int x, int y, int z, int w) {
    const auto s1 = wb.slot(x, y);
    const auto s2 = wb.slot(z, w);
    return s1.sign * s2.sign * e(s1.index, s2.index);
  };
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z)
        for (int w = 0; w < n; ++w) {
          if (x == y || x == z || x == w || y == z || y == w || z == w) continue;
          Eigen::RowVectorXd row(dim);
          for (int b = 0; b < dim; ++b) {
            const auto& e = sym[static_cast<size_t>(b)];
            row(b) = term(e, x, y, z, w) + term(e, y, z, x, w) + term(e, z, x, y, w);
          }
          rows.push_back(row);
        }
  Eigen::MatrixXd system(static_cast<Eigen::Index>(rows.size()), dim);
  for (size_t r = 0; r < rows.size(); ++r) system.row(static_cast<Eigen::Index>(r)) = rows[r];

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(system, Eigen::ComputeFullV);
  BianchiSubspace out;
  out.n = n;
  out.singular_values = svd.singularValues();
  const double cutoff = 1e-8 * out.singular_values(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < out.singular_values.size(); ++i)
    if (out.singular_values(i) > cutoff) ++rank;
  out.rank = rank;
  out.kernel = svd.matrixV().rightCols(dim - rank);
  return out;
}

}  // namespace

const std::vector<Eigen::MatrixXd>& symmetric_basis(int N) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<std::vector<Eigen::MatrixXd>>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[N];
  if (!slot) slot = std::make_unique<std::vector<Eigen::MatrixXd>>(make_symmetric_basis(N));
  return *slot;
}

Eigen::VectorXd to_symmetric_coords(const Eigen::MatrixXd& m) {
  const auto N = static_cast<int>(m.rows());
  const auto& basis = symmetric_basis(N);
  Eigen::VectorXd c(static_cast<Eigen::Index>(basis.size()));
  for (size_t b = 0; b < basis.size(); ++b) c(static_cast<Eigen::Index>(b)) = (basis[b].array() * m.array()).sum();
  return c;
}

Eigen::MatrixXd from_symmetric_coords(const Eigen::VectorXd& coords, int N) {
  const auto& basis = symmetric_basis(N);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(N, N);
  for (size_t b = 0; b < basis.size(); ++b) m += coords(static_cast<Eigen::Index>(b)) * basis[b];
  return m;
}

const BianchiSubspace& bianchi_subspace(int n) {
  if (n < 4 || n > kMaxDimension)
    fail(ErrorKind::Capability, "first Bianchi subspace is only built for 4 <= n <= " +
                                    std::to_string(kMaxDimension) + ", got " + std::to_string(n));
  static std::array<std::unique_ptr<BianchiSubspace>, kMaxDimension + 1> cache;
  static std::once_flag flags[kMaxDimension + 1];
  std::call_once(flags[n],
                 [n] { cache[static_cast<size_t>(n)] = std::make_unique<BianchiSubspace>(build_subspace(n)); });
  return *cache[static_cast<size_t>(n)];
}

Eigen::MatrixXd first_bianchi_projection(const Eigen::MatrixXd& s, int n) {
  if (n <= 3)
    fail(ErrorKind::Capability, "first Bianchi projection requested for n = " + std::to_string(n) +
                                    " where every symmetric form already qualifies");
  const auto& sub = bianchi_subspace(n);
  const auto N = static_cast<int>(s.rows());
  const Eigen::VectorXd c = to_symmetric_coords(0.5 * (s + s.transpose()));
  return from_symmetric_coords(sub.kernel * (sub.kernel.transpose() * c), N);
}

double first_bianchi_residual(const Eigen::MatrixXd& s, int n) {
  if (n <= 3) return 0.0;
  return (s - first_bianchi_projection(s, n)).norm();
}

const std::vector<Eigen::MatrixXd>& curvature_space_basis(int n) {
  static std::array<std::unique_ptr<std::vector<Eigen::MatrixXd>>, kMaxDimension + 1> cache;
  static std::once_flag flags[kMaxDimension + 1];
  if (n < 2 || n > kMaxDimension) fail(ErrorKind::Capability, "unsupported dimension " + std::to_string(n));
  std::call_once(flags[n], [n] {
    const int N = WedgeBasis::get(n).size();
    auto basis = std::make_unique<std::vector<Eigen::MatrixXd>>();
    if (n <= 3) {
      *basis = symmetric_basis(N);
    } else {
      const auto& sub = bianchi_subspace(n);
      for (Eigen::Index k = 0; k < sub.kernel.cols(); ++k)
        basis->push_back(from_symmetric_coords(sub.kernel.col(k), N));
    }
    cache[static_cast<size_t>(n)] = std::move(basis);
  });
  return *cache[static_cast<size_t>(n)];
}

}  // namespace curvkit
