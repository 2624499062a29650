#include "curvkit/random.hpp"

namespace curvkit {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t seed, std::string_view name, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ fnv1a(name) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

Eigen::VectorXd Rng::normal_vector(Eigen::Index dim) {
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = normal();
  return v;
}

Eigen::VectorXd Rng::unit_vector(Eigen::Index dim) {
  Eigen::VectorXd v = normal_vector(dim);
  while (v.norm() < 1e-12) v = normal_vector(dim);
  return v.normalized();
}

Eigen::MatrixXd haar_rotation(Rng& rng, int n, bool special) {
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < n; ++k)
    if (r(k, k) < 0) q.col(k) *= -1.0;
  if (special && q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

Eigen::MatrixXd random_symmetric(Rng& rng, int N) {
  Eigen::MatrixXd m(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) m(i, j) = m(j, i) = rng.normal();
  return m;
}

CurvatureOperatord random_curvature(Rng& rng, int n) {
  const int N = WedgeBasis::get(n).size();
  Eigen::MatrixXd m = random_symmetric(rng, N);
  if (n >= 4) m = first_bianchi_projection(m, n);
  return {n, m};
}

}  // namespace curvkit
