#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace curvkit {

/// Largest base dimension for which tables (structure constants, Bianchi
/// projectors) are built.
inline constexpr int kMaxDimension = 8;

struct WedgePair {
  int first;
  int second;
};

/// Ordered basis e_i ^ e_j of Lambda^2 R^n, declared orthonormal.
///
/// n = 3 uses the Hodge order (e2^e3, e3^e1, e1^e2) so that the induced action
/// of Q in SO(3) on Lambda^2 is Q itself; every other n is lexicographic.
/// Indices are zero-based.
class WedgeBasis {
 public:
  explicit WedgeBasis(int n);

  /// Shared immutable instance for 2 <= n <= kMaxDimension.
  static const WedgeBasis& get(int n);

  int n() const { return n_; }
  int size() const { return static_cast<int>(pairs_.size()); }
  std::span<const WedgePair> pairs() const { return pairs_; }

  /// Coordinate carrying e_i ^ e_j, and the sign with which it appears
  /// (e_i ^ e_j = sign * basis[index]). sign is 0 when i == j.
  struct Slot {
    int index;
    int sign;
  };
  Slot slot(int i, int j) const { return slots_[static_cast<size_t>(i * n_ + j)]; }

  /// Coordinates of u ^ v.
  template <typename Scalar>
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> wedge(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& u,
                                                 const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v) const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w(size());
    for (int a = 0; a < size(); ++a) {
      const auto [i, j] = pairs_[static_cast<size_t>(a)];
      w(a) = u(i) * v(j) - u(j) * v(i);
    }
    return w;
  }

  /// Lambda^2 Q: the N x N matrix of Q acting on 2-vectors.
  template <typename Scalar>
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> induced(
      const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& q) const {
    const int N = size();
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(N, N);
    for (int a = 0; a < N; ++a) {
      const auto [i, j] = pairs_[static_cast<size_t>(a)];
      for (int b = 0; b < N; ++b) {
        const auto [k, l] = pairs_[static_cast<size_t>(b)];
        out(a, b) = q(i, k) * q(j, l) - q(j, k) * q(i, l);
      }
    }
    return out;
  }

  /// Skew-symmetric n x n matrix identified with basis element a
  /// (e_i ^ e_j <-> E_ij - E_ji, unit norm under <A,B> = -tr(AB)/2).
  Eigen::MatrixXd skew(int a) const;

 private:
  int n_;
  std::vector<WedgePair> pairs_;
  std::vector<Slot> slots_;
};

}  // namespace curvkit
