#include "curvkit/bianchi_tuple.hpp"

#include <string>

namespace curvkit {
namespace {

constexpr double kKernelCutoff = 1e-8;

void check_ceiling(int n, int ceiling) {
  if (n < 3) fail(ErrorKind::InvalidInput, "tuple spaces need n >= 3");
  if (n > ceiling)
    fail(ErrorKind::Capability, "tuple space for n = " + std::to_string(n) + " exceeds ceiling " +
                                    std::to_string(ceiling));
}

// Orthonormal kernel of `system` by full SVD with a relative threshold.
Eigen::MatrixXd svd_kernel(const Eigen::MatrixXd& system, Eigen::VectorXd& singular_values, int& rank) {
  const Eigen::Index cols = system.cols();
  if (system.rows() == 0) {
    singular_values.resize(0);
    rank = 0;
    return Eigen::MatrixXd::Identity(cols, cols);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(system, Eigen::ComputeFullV);
  singular_values = svd.singularValues();
  const double cutoff = kKernelCutoff * (singular_values.size() ? singular_values(0) : 0.0);
  rank = 0;
  for (Eigen::Index i = 0; i < singular_values.size(); ++i)
    if (singular_values(i) > cutoff) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

}  // namespace

CurvatureTuple CurvatureTuple::zero(int n) {
  return {n, std::vector<CurvatureOperatord>(static_cast<size_t>(n), CurvatureOperatord::zero(n))};
}

Eigen::Index curvature_space_dim(int n) { return static_cast<Eigen::Index>(curvature_space_basis(n).size()); }

Eigen::VectorXd tuple_coords(const CurvatureTuple& t) {
  const auto& basis = curvature_space_basis(t.n);
  const auto d = static_cast<Eigen::Index>(basis.size());
  Eigen::VectorXd c(t.n * d);
  for (int i = 0; i < t.n; ++i)
    for (Eigen::Index b = 0; b < d; ++b)
      c(i * d + b) = (basis[static_cast<size_t>(b)].array() * t.tensors[static_cast<size_t>(i)].matrix().array()).sum();
  return c;
}

CurvatureTuple tuple_from_coords(const Eigen::VectorXd& coords, int n) {
  const auto& basis = curvature_space_basis(n);
  const auto d = static_cast<Eigen::Index>(basis.size());
  if (coords.size() != n * d) fail(ErrorKind::InvalidInput, "tuple coordinate vector has wrong length");
  CurvatureTuple t{n, {}};
  const int N = WedgeBasis::get(n).size();
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(N, N);
    for (Eigen::Index b = 0; b < d; ++b) m += coords(i * d + b) * basis[static_cast<size_t>(b)];
    t.tensors.emplace_back(n, m);
  }
  return t;
}

Eigen::VectorXd bianchi_defect(const CurvatureTuple& t, const Eigen::MatrixXd& basis) {
  const int n = t.n;
  if (static_cast<int>(t.tensors.size()) != n) fail(ErrorKind::InvalidInput, "tuple must have n slots");
  const WedgeBasis& wb = WedgeBasis::get(n);
  const int N = wb.size();
  std::vector<Eigen::VectorXd> cols;
  for (int i = 0; i < n; ++i) cols.emplace_back(basis.col(i));
  auto w = [&](int x, int y) { return wb.wedge<double>(cols[static_cast<size_t>(x)], cols[static_cast<size_t>(y)]); };
  auto slot = [&](int i) -> const Eigen::MatrixXd& { return t.tensors[static_cast<size_t>(i)].matrix(); };

  std::vector<Eigen::VectorXd> blocks;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) blocks.push_back(slot(i) * w(j, k) + slot(j) * w(k, i) + slot(k) * w(i, j));
  Eigen::VectorXd out(static_cast<Eigen::Index>(blocks.size()) * N);
  for (size_t b = 0; b < blocks.size(); ++b) out.segment(static_cast<Eigen::Index>(b) * N, N) = blocks[b];
  return out;
}

double bianchi_residual(const CurvatureTuple& t) {
  return bianchi_defect(t, Eigen::MatrixXd::Identity(t.n, t.n)).norm();
}

double bianchi_residual(const CurvatureTuple& t, const Eigen::MatrixXd& basis) {
  require_orthogonal<double>(basis, t.n);
  return bianchi_defect(t, basis).norm();
}

double bianchi_residual_all_triples(const CurvatureTuple& t) {
  const int n = t.n;
  const WedgeBasis& wb = WedgeBasis::get(n);
  auto apply = [&](int i, int x, int y) -> Eigen::VectorXd {
    const auto s = wb.slot(x, y);
    if (s.sign == 0) return Eigen::VectorXd::Zero(wb.size());
    return s.sign * t.tensors[static_cast<size_t>(i)].matrix().col(s.index);
  };
  double sq = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) sq += (apply(i, j, k) + apply(j, k, i) + apply(k, i, j)).squaredNorm();
  return std::sqrt(sq);
}

Eigen::MatrixXd bianchi_constraint_matrix(int n) {
  const auto d = curvature_space_dim(n);
  const int N = WedgeBasis::get(n).size();
  const int triples = n * (n - 1) * (n - 2) / 6;
  Eigen::MatrixXd c(static_cast<Eigen::Index>(triples) * N, n * d);
  // The defect is linear in the tuple, so column q is the defect of the q-th
  // coordinate tuple.
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n * d);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index q = 0; q < n * d; ++q) {
    e(q) = 1.0;
    c.col(q) = bianchi_defect(tuple_from_coords(e, n), id);
    e(q) = 0.0;
  }
  return c;
}

SubspaceBasis tuple_space_basis(int n, int ceiling) {
  check_ceiling(n, ceiling);
  SubspaceBasis out;
  out.n = n;
  out.tag = SubspaceTag::Bianchi;
  const Eigen::MatrixXd c = bianchi_constraint_matrix(n);
  out.ambient_dim = c.cols();
  out.columns = svd_kernel(c, out.singular_values, out.constraint_rank);
  return out;
}

SubspaceBasis tangent_bianchi_subspace(std::span<const CurvatureOperatord> normals, int n, int ceiling) {
  if (normals.empty()) fail(ErrorKind::InvalidInput, "tangent subspace needs at least one normal");
  check_ceiling(n, ceiling);
  // The Bianchi kernel depends only on n.
  static thread_local int cached_n = 0;
  static thread_local SubspaceBasis cached;
  if (cached_n != n) {
    cached = tuple_space_basis(n, ceiling);
    cached_n = n;
  }
  const auto& basis = curvature_space_basis(n);
  const auto d = static_cast<Eigen::Index>(basis.size());

  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(normals.size()) * n, n * d);
  for (size_t m = 0; m < normals.size(); ++m) {
    const auto& nu = normals[m];
    if (nu.dim() != n) fail(ErrorKind::InvalidInput, "normal dimension mismatch");
    const double norm = nu.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) fail(ErrorKind::InvalidInput, "degenerate (zero) normal");
    Eigen::VectorXd coeff(d);
    for (Eigen::Index b = 0; b < d; ++b) coeff(b) = (basis[static_cast<size_t>(b)].array() * nu.matrix().array()).sum();
    coeff /= norm;
    for (int i = 0; i < n; ++i) rows.block(static_cast<Eigen::Index>(m) * n + i, i * d, 1, d) = coeff.transpose();
  }
  SubspaceBasis out;
  out.n = n;
  out.tag = SubspaceTag::BianchiTangent;
  out.ambient_dim = n * d;
  const Eigen::MatrixXd reduced = rows * cached.columns;
  const Eigen::MatrixXd inner = svd_kernel(reduced, out.singular_values, out.constraint_rank);
  out.columns = cached.columns * inner;
  return out;
}

CurvatureTuple rotate_tuple(const Eigen::MatrixXd& q, const CurvatureTuple& t) {
  require_orthogonal<double>(q, t.n);
  CurvatureTuple out{t.n, {}};
  for (const auto& slot : t.tensors) out.tensors.push_back(rotate<double>(q, slot));
  return out;
}

CurvatureTuple mix_slots(const Eigen::MatrixXd& m, const CurvatureTuple& t) {
  CurvatureTuple out = CurvatureTuple::zero(t.n);
  for (int i = 0; i < t.n; ++i)
    for (int j = 0; j < t.n; ++j) out.tensors[static_cast<size_t>(i)] += m(j, i) * t.tensors[static_cast<size_t>(j)];
  return out;
}

}  // namespace curvkit
