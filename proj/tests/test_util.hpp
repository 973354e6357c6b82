#pragma once

#include <random>

#include "blockgivens/matrix.hpp"

namespace testutil {

inline blockgivens::Matrix uniform(std::mt19937_64& rng, blockgivens::Index m,
                                   blockgivens::Index n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  blockgivens::Matrix M(m, n);
  for (blockgivens::Index j = 0; j < n; ++j)
    for (blockgivens::Index i = 0; i < m; ++i) M(i, j) = u(rng);
  return M;
}

inline blockgivens::Index pick(std::mt19937_64& rng, blockgivens::Index lo, blockgivens::Index hi) {
  return std::uniform_int_distribution<blockgivens::Index>(lo, hi)(rng);
}

// Haar-ish orthogonal matrix from the QR of a Gaussian matrix.
inline blockgivens::Matrix random_orthogonal(std::mt19937_64& rng, blockgivens::Index n) {
  std::normal_distribution<double> g;
  blockgivens::Matrix X(n, n);
  for (blockgivens::Index j = 0; j < n; ++j)
    for (blockgivens::Index i = 0; i < n; ++i) X(i, j) = g(rng);
  Eigen::HouseholderQR<blockgivens::Matrix> qr(X);
  return qr.householderQ() * blockgivens::Matrix::Identity(n, n);
}

}  // namespace testutil
