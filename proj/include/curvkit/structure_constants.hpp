#pragma once

#include <vector>

namespace curvkit {

/// Nonzero structure constants c_{abd} = <[w_a, w_b], w_d> of so(n) in the
/// orthonormal wedge basis, grouped by the first index, together with the
/// prefactor kappa that makes the sharp product satisfy sharp(I) = (n-2) I.
struct StructureConstants {
  struct Entry {
    int b;
    int d;
    double value;
  };

  int n = 0;
  double kappa = 0.0;
  std::vector<std::vector<Entry>> by_first;

  /// Shared immutable table; kappa is measured from the calibration identity
  /// and the Casimir diagonal is verified, throwing if so(n) does not produce
  /// a multiple of the identity.
  static const StructureConstants& get(int n);
};

}  // namespace curvkit
