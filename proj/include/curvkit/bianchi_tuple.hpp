#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "curvkit/curvature.hpp"

namespace curvkit {

/// Highest n for which tuple spaces are built unless the caller raises it.
inline constexpr int kDefaultTupleCeiling = 4;

/// (T_1, ..., T_n), the carrier of the second Bianchi identity.
struct CurvatureTuple {
  int n = 3;
  std::vector<CurvatureOperatord> tensors;

  static CurvatureTuple zero(int n);
};

enum class SubspaceTag { Bianchi, BianchiTangent };

/// Orthonormal columns spanning a subspace of tuple coordinates. Tuple
/// coordinates stack the coordinates of each slot in curvature_space_basis(n).
struct SubspaceBasis {
  int n = 3;
  Eigen::Index ambient_dim = 0;
  Eigen::MatrixXd columns;
  SubspaceTag tag = SubspaceTag::Bianchi;
  Eigen::VectorXd singular_values;  // of the imposed constraint system
  int constraint_rank = 0;

  Eigen::Index dimension() const { return columns.cols(); }
};

Eigen::Index curvature_space_dim(int n);

Eigen::VectorXd tuple_coords(const CurvatureTuple& t);
CurvatureTuple tuple_from_coords(const Eigen::VectorXd& coords, int n);

/// Stacked identity T_i(b_j^b_k) + T_j(b_k^b_i) + T_k(b_i^b_j) over i<j<k,
/// for the orthonormal basis given by the columns of `basis`.
Eigen::VectorXd bianchi_defect(const CurvatureTuple& t, const Eigen::MatrixXd& basis);

double bianchi_residual(const CurvatureTuple& t);
double bianchi_residual(const CurvatureTuple& t, const Eigen::MatrixXd& basis);

/// Same identity expanded over all n^3 ordered triples. Each unordered triple
/// of distinct indices appears six times up to sign and repeated indices give
/// zero, so this equals sqrt(6) * bianchi_residual(t).
double bianchi_residual_all_triples(const CurvatureTuple& t);

/// Rows: one per (triple i<j<k, wedge coordinate); columns: tuple coordinates.
Eigen::MatrixXd bianchi_constraint_matrix(int n);

SubspaceBasis tuple_space_basis(int n, int ceiling = kDefaultTupleCeiling);

/// Bianchi tuples with <nu, T_i> = 0 for every normal nu and every slot i.
SubspaceBasis tangent_bianchi_subspace(std::span<const CurvatureOperatord> normals, int n,
                                       int ceiling = kDefaultTupleCeiling);

/// Slot-wise rho(Q): maps a tuple satisfying the identity for the standard
/// basis to one satisfying it for the basis (Q e_1, ..., Q e_n), with equal
/// residuals.
CurvatureTuple rotate_tuple(const Eigen::MatrixXd& q, const CurvatureTuple& t);

/// Recombines slots, T'_i = sum_j M_ji T_j. For orthogonal M this preserves
/// sum_i |T_i|^2 and maps standard-basis Bianchi tuples to tuples that satisfy
/// the identity for the basis (M e_1, ..., M e_n).
CurvatureTuple mix_slots(const Eigen::MatrixXd& m, const CurvatureTuple& t);

}  // namespace curvkit
