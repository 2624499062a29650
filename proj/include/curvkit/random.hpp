#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string_view>

#include "curvkit/curvature.hpp"

namespace curvkit {

/// Seed for the named substream (module, sample index) of a global seed.
/// Adding samples to one stream never perturbs another.
std::uint64_t substream_seed(std::uint64_t seed, std::string_view name, std::uint64_t index = 0);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, std::string_view name, std::uint64_t index = 0)
      : engine_(substream_seed(seed, name, index)) {}

  double normal() { return normal_(engine_); }
  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }
  Eigen::VectorXd normal_vector(Eigen::Index dim);
  Eigen::VectorXd unit_vector(Eigen::Index dim);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Haar-distributed element of SO(n) (or O(n) with special = false).
Eigen::MatrixXd haar_rotation(Rng& rng, int n, bool special = true);

/// Symmetric N x N with independent standard normal upper-triangle entries.
Eigen::MatrixXd random_symmetric(Rng& rng, int N);

/// Random element of A_n (projected onto the first Bianchi subspace for n >= 4).
CurvatureOperatord random_curvature(Rng& rng, int n);

}  // namespace curvkit
