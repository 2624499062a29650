#pragma once

#include <Eigen/Dense>
#include <vector>

namespace curvkit {

/// Orthonormal basis of symmetric N x N matrices under <R,S> = tr(RS):
/// E_ii first, then (E_ij + E_ji)/sqrt(2) for i < j.
const std::vector<Eigen::MatrixXd>& symmetric_basis(int N);

Eigen::VectorXd to_symmetric_coords(const Eigen::MatrixXd& m);
Eigen::MatrixXd from_symmetric_coords(const Eigen::VectorXd& coords, int N);

/// Kernel of the first Bianchi identity inside Sym(Lambda^2 R^n), n >= 4,
/// as orthonormal columns in symmetric coordinates.
struct BianchiSubspace {
  int n = 0;
  Eigen::MatrixXd kernel;
  Eigen::VectorXd singular_values;  // of the constraint system, descending
  int rank = 0;
};

const BianchiSubspace& bianchi_subspace(int n);

/// Orthogonal projection onto algebraic curvature tensors. n <= 3 is a
/// capability error: the projection is the identity there.
Eigen::MatrixXd first_bianchi_projection(const Eigen::MatrixXd& s, int n);

/// || S - P S ||, zero for n <= 3.
double first_bianchi_residual(const Eigen::MatrixXd& s, int n);

/// Orthonormal basis of A_n as N x N matrices (Sym basis for n <= 3).
const std::vector<Eigen::MatrixXd>& curvature_space_basis(int n);

}  // namespace curvkit
