#include "curvkit/wedge_basis.hpp"

#include <array>
#include <memory>
#include <mutex>
#include <string>

#include "curvkit/errors.hpp"

namespace curvkit {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::Capability: return "capability";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::DegenerateSpectrum: return "degenerate-spectrum";
    case ErrorKind::EmptySample: return "empty-sample";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Config: return "config";
    case ErrorKind::Convention: return "convention";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

WedgeBasis::WedgeBasis(int n) : n_(n) {
  if (n < 2) fail(ErrorKind::InvalidInput, "wedge basis needs n >= 2, got " + std::to_string(n));
  if (n == 3) {
    pairs_ = {{1, 2}, {2, 0}, {0, 1}};
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) pairs_.push_back({i, j});
  }
  slots_.assign(static_cast<size_t>(n * n), Slot{0, 0});
  for (int a = 0; a < size(); ++a) {
    const auto [i, j] = pairs_[static_cast<size_t>(a)];
    slots_[static_cast<size_t>(i * n + j)] = {a, 1};
    slots_[static_cast<size_t>(j * n + i)] = {a, -1};
  }
}

const WedgeBasis& WedgeBasis::get(int n) {
  if (n < 2 || n > kMaxDimension)
    fail(ErrorKind::Capability, "dimension " + std::to_string(n) + " outside supported range [2, " +
                                    std::to_string(kMaxDimension) + "]");
  static std::array<std::unique_ptr<WedgeBasis>, kMaxDimension + 1> cache;
  static std::once_flag flags[kMaxDimension + 1];
  std::call_once(flags[n], [n] { cache[static_cast<size_t>(n)] = std::make_unique<WedgeBasis>(n); });
  return *cache[static_cast<size_t>(n)];
}

Eigen::MatrixXd WedgeBasis::skew(int a) const {
  const auto [i, j] = pairs_[static_cast<size_t>(a)];
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_, n_);
  m(i, j) = 1.0;
  m(j, i) = -1.0;
  return m;
}

}  // namespace curvkit
