#pragma once

// Algebraic curvature operators on Lambda^2 R^n in wedge coordinates, and the
// quadratic maps of the Ricci flow reaction term.

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "curvkit/errors.hpp"
#include "curvkit/first_bianchi.hpp"
#include "curvkit/structure_constants.hpp"
#include "curvkit/wedge_basis.hpp"

namespace curvkit {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// A symmetric operator on Lambda^2 R^n. Construction enforces size and
/// symmetry; membership in A_n for n >= 4 is checked by validate().
template <typename Scalar>
class CurvatureOperator {
 public:
  using Matrix = MatrixX<Scalar>;

  CurvatureOperator() = default;

  CurvatureOperator(int n, Matrix mat) : n_(n), mat_(std::move(mat)) {
    const int N = WedgeBasis::get(n).size();
    if (mat_.rows() != N || mat_.cols() != N)
      fail(ErrorKind::InvalidInput, "curvature operator for n = " + std::to_string(n) + " must be " +
                                        std::to_string(N) + "x" + std::to_string(N));
    using std::abs;
    const Scalar scale = Scalar(1) + (mat_.size() ? mat_.cwiseAbs().maxCoeff() : Scalar(0));
    if ((mat_ - mat_.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale)
      fail(ErrorKind::InvalidInput, "curvature operator matrix is not symmetric");
    mat_ = (mat_ + mat_.transpose()) / Scalar(2);
  }

  static CurvatureOperator zero(int n) {
    const int N = WedgeBasis::get(n).size();
    return {n, Matrix::Zero(N, N)};
  }
  static CurvatureOperator identity(int n) {
    const int N = WedgeBasis::get(n).size();
    return {n, Matrix::Identity(N, N)};
  }
  /// Diagonal in wedge coordinates; mainly for n = 3 spectra.
  static CurvatureOperator diagonal(int n, const VectorX<Scalar>& values) {
    return {n, Matrix(values.asDiagonal())};
  }

  int dim() const { return n_; }
  Eigen::Index size() const { return mat_.rows(); }
  const Matrix& matrix() const { return mat_; }

  Scalar dot(const CurvatureOperator& other) const { return (mat_.array() * other.mat_.array()).sum(); }
  Scalar squaredNorm() const { return mat_.squaredNorm(); }
  Scalar norm() const { return mat_.norm(); }
  Scalar trace() const { return mat_.trace(); }

  CurvatureOperator& operator+=(const CurvatureOperator& o) {
    mat_ += o.mat_;
    return *this;
  }
  CurvatureOperator& operator-=(const CurvatureOperator& o) {
    mat_ -= o.mat_;
    return *this;
  }
  CurvatureOperator& operator*=(Scalar s) {
    mat_ *= s;
    return *this;
  }
  friend CurvatureOperator operator+(CurvatureOperator a, const CurvatureOperator& b) { return a += b; }
  friend CurvatureOperator operator-(CurvatureOperator a, const CurvatureOperator& b) { return a -= b; }
  friend CurvatureOperator operator*(Scalar s, CurvatureOperator a) { return a *= s; }
  friend CurvatureOperator operator*(CurvatureOperator a, Scalar s) { return a *= s; }
  friend CurvatureOperator operator-(CurvatureOperator a) { return a *= Scalar(-1); }

 private:
  int n_ = 3;
  Matrix mat_;
};

using CurvatureOperatord = CurvatureOperator<double>;

/// Checks the A_n invariants: symmetry (by construction) and, for n >= 4, the
/// first Bianchi identity to 1e-10 relative.
inline void validate(const CurvatureOperatord& r) {
  if (!r.matrix().allFinite()) fail(ErrorKind::InvalidInput, "curvature operator has non-finite entries");
  if (r.dim() >= 4) {
    const double res = first_bianchi_residual(r.matrix(), r.dim());
    if (res > 1e-10 * r.norm())
      fail(ErrorKind::InvalidInput, "operator violates the first Bianchi identity (residual " +
                                        std::to_string(res) + ")");
  }
}

inline CurvatureOperatord first_bianchi_project(const Eigen::MatrixXd& s, int n) {
  return {n, first_bianchi_projection(s, n)};
}

/// Ric(R)_{vw} = 1/2 sum_i R(e_v ^ e_i, e_w ^ e_i).
template <typename Scalar>
MatrixX<Scalar> ricci(const CurvatureOperator<Scalar>& r) {
  const int n = r.dim();
  const WedgeBasis& wb = WedgeBasis::get(n);
  MatrixX<Scalar> ric = MatrixX<Scalar>::Zero(n, n);
  for (int v = 0; v < n; ++v)
    for (int w = 0; w < n; ++w) {
      Scalar s(0);
      for (int i = 0; i < n; ++i) {
        const auto a = wb.slot(v, i);
        const auto b = wb.slot(w, i);
        if (a.sign == 0 || b.sign == 0) continue;
        s += Scalar(a.sign * b.sign) * r.matrix()(a.index, b.index);
      }
      ric(v, w) = s / Scalar(2);
    }
  return ric;
}

template <typename Scalar>
Scalar scalar(const CurvatureOperator<Scalar>& r) {
  return r.trace();
}

/// The 3D sharp product: adjugate of the wedge-coordinate matrix.
template <typename Derived>
typename Derived::PlainObject adjugate3(const Eigen::MatrixBase<Derived>& m) {
  typename Derived::PlainObject adj(3, 3);
  adj(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  adj(0, 1) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
  adj(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
  adj(1, 0) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
  adj(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
  adj(1, 2) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
  adj(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
  adj(2, 1) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
  adj(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return adj;
}

/// sharp(R)_{ab} = kappa * sum c_{acd} c_{bef} R_{ce} R_{df}, with kappa from
/// the calibration sharp(I) = (n-2) I.
template <typename Scalar>
CurvatureOperator<Scalar> sharp_structure(const CurvatureOperator<Scalar>& r) {
  const auto& sc = StructureConstants::get(r.dim());
  const auto N = r.size();
  const auto& m = r.matrix();
  MatrixX<Scalar> out = MatrixX<Scalar>::Zero(N, N);
  for (Eigen::Index a = 0; a < N; ++a)
    for (Eigen::Index b = a; b < N; ++b) {
      Scalar s(0);
      for (const auto& ea : sc.by_first[static_cast<size_t>(a)])
        for (const auto& eb : sc.by_first[static_cast<size_t>(b)])
          s += Scalar(ea.value * eb.value) * m(ea.b, eb.b) * m(ea.d, eb.d);
      out(a, b) = out(b, a) = Scalar(sc.kappa) * s;
    }
  return {r.dim(), std::move(out)};
}

template <typename Scalar>
CurvatureOperator<Scalar> sharp(const CurvatureOperator<Scalar>& r) {
  if (r.dim() > kMaxDimension)
    fail(ErrorKind::Capability, "sharp not available for n = " + std::to_string(r.dim()));
  if (r.dim() == 3) return {3, adjugate3(r.matrix())};
  return sharp_structure(r);
}

/// Reaction term R^2 + R^#.
template <typename Scalar>
CurvatureOperator<Scalar> phi(const CurvatureOperator<Scalar>& r) {
  MatrixX<Scalar> sq = r.matrix() * r.matrix();
  return CurvatureOperator<Scalar>(r.dim(), (sq + sq.transpose()) / Scalar(2)) + sharp(r);
}

template <typename Scalar>
void require_orthogonal(const MatrixX<Scalar>& q, int n) {
  if (q.rows() != n || q.cols() != n)
    fail(ErrorKind::InvalidInput, "rotation must be " + std::to_string(n) + "x" + std::to_string(n));
  const Scalar defect = (q.transpose() * q - MatrixX<Scalar>::Identity(n, n)).cwiseAbs().maxCoeff();
  if (!(defect <= Scalar(1e-10)))
    fail(ErrorKind::InvalidInput, "matrix is not orthogonal (|Q^T Q - I| = " +
                                      std::to_string(static_cast<double>(defect)) + ")");
}

/// rho(Q) R: conjugation by Lambda^2 Q.
template <typename Scalar>
CurvatureOperator<Scalar> rotate(const MatrixX<Scalar>& q, const CurvatureOperator<Scalar>& r) {
  require_orthogonal(q, r.dim());
  const MatrixX<Scalar> l = WedgeBasis::get(r.dim()).induced(q);
  return {r.dim(), l * r.matrix() * l.transpose()};
}

template <typename Scalar>
struct EigenData {
  VectorX<Scalar> values;  // ascending
  MatrixX<Scalar> frame;   // columns match values
};

/// Ascending eigenvalues; each eigenvector is oriented so that its first
/// component above 1e-12 in magnitude is positive.
template <typename Scalar>
EigenData<Scalar> eigen_sorted(const CurvatureOperator<Scalar>& r) {
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(r.matrix());
  if (es.info() != Eigen::Success) {
    throw NumericError("symmetric eigensolver did not converge", static_cast<double>(r.norm()));
  }
  EigenData<Scalar> out{es.eigenvalues(), es.eigenvectors()};
  for (Eigen::Index k = 0; k < out.frame.cols(); ++k) {
    for (Eigen::Index i = 0; i < out.frame.rows(); ++i) {
      using std::abs;
      if (abs(out.frame(i, k)) > Scalar(1e-12)) {
        if (out.frame(i, k) < Scalar(0)) out.frame.col(k) *= Scalar(-1);
        break;
      }
    }
  }
  return out;
}

}  // namespace curvkit
