#include "blockgivens/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

namespace blockgivens {

Matrix SVDFactors::Sigma() const {
  Matrix S = Matrix::Zero(Q.rows(), Qp.rows());
  for (Index i = 0; i < sigma.size(); ++i) S(i, i) = sigma(i);
  return S;
}

namespace kernels {
namespace {

// Rotates columns p and q of W (and V) so that they become orthogonal.
// Returns true when a rotation was applied.
bool rotate_pair(Matrix& W, Matrix* V, Index p, Index q, double threshold) {
  const double alpha = W.col(p).squaredNorm();
  const double beta = W.col(q).squaredNorm();
  const double gamma = W.col(p).dot(W.col(q));
  if (alpha == 0.0 || beta == 0.0) return false;
  if (std::abs(gamma) <= threshold * std::sqrt(alpha) * std::sqrt(beta)) return false;

  const double zeta = (beta - alpha) / (2.0 * gamma);
  const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
  const double c = 1.0 / std::hypot(1.0, t);
  const double s = c * t;

  auto apply = [&](Matrix& X) {
    for (Index i = 0; i < X.rows(); ++i) {
      const double xp = X(i, p);
      const double xq = X(i, q);
      X(i, p) = c * xp - s * xq;
      X(i, q) = s * xp + c * xq;
    }
  };
  apply(W);
  if (V != nullptr) apply(*V);
  return true;
}

// Circle-method schedule: round r pairs slot i with slot n-1-i, where slot 0
// is fixed and the rest rotate. Pairs within a round are disjoint.
std::vector<std::pair<Index, Index>> round_robin_round(Index n_even, Index round) {
  std::vector<Index> slots(n_even);
  slots[0] = 0;
  for (Index i = 1; i < n_even; ++i) {
    slots[i] = 1 + (i - 1 + round) % (n_even - 1);
  }
  std::vector<std::pair<Index, Index>> pairs;
  pairs.reserve(n_even / 2);
  for (Index i = 0; i < n_even / 2; ++i) {
    Index a = slots[i];
    Index b = slots[n_even - 1 - i];
    if (a > b) std::swap(a, b);
    pairs.emplace_back(a, b);
  }
  return pairs;
}

}  // namespace

int jacobi_orthogonalize(Matrix& W, Matrix* V, const SvdOptions& opts) {
  const Index n = W.cols();
  const double threshold =
      std::sqrt(static_cast<double>(std::max<Index>(W.rows(), 1))) *
      std::numeric_limits<double>::epsilon();
  if (n < 2) return 0;

  const Index n_even = n + (n % 2);
  std::vector<std::vector<std::pair<Index, Index>>> schedule;
  if (opts.ordering == JacobiOrdering::parallel_round_robin) {
    for (Index r = 0; r < n_even - 1; ++r) schedule.push_back(round_robin_round(n_even, r));
  }

  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    long rotations = 0;
    if (opts.ordering == JacobiOrdering::serial_cyclic) {
      for (Index p = 0; p + 1 < n; ++p) {
        for (Index q = p + 1; q < n; ++q) {
          rotations += rotate_pair(W, V, p, q, threshold) ? 1 : 0;
        }
      }
    } else {
      for (const auto& round : schedule) {
        const auto npairs = static_cast<long>(round.size());
#pragma omp parallel for schedule(static) reduction(+ : rotations)
        for (long j = 0; j < npairs; ++j) {
          const auto [p, q] = round[static_cast<std::size_t>(j)];
          if (q >= n) continue;  // padding slot
          rotations += rotate_pair(W, V, p, q, threshold) ? 1 : 0;
        }
      }
    }
    if (rotations == 0) return sweep;
  }

  // Report the worst remaining relative column coupling.
  double worst = 0.0;
  for (Index p = 0; p + 1 < n; ++p) {
    for (Index q = p + 1; q < n; ++q) {
      const double denom = W.col(p).norm() * W.col(q).norm();
      if (denom > 0.0) worst = std::max(worst, std::abs(W.col(p).dot(W.col(q))) / denom);
    }
  }
  throw convergence_failure("jacobi svd: no convergence after " +
                                std::to_string(opts.max_sweeps) + " sweeps",
                            worst);
}

}  // namespace kernels

namespace {

struct TallSvd {
  Matrix U;  // rows x rows
  Matrix V;  // cols x cols
  Vector sigma;
};

// SVD of a matrix with rows >= cols, conventional orientation T = U S V^T.
TallSvd tall_svd(const Matrix& T, const SvdOptions& opts, bool want_vectors) {
  const Index m = T.rows();
  const Index n = T.cols();
  Matrix W = T;
  Matrix V = Matrix::Identity(n, n);
  kernels::jacobi_orthogonalize(W, want_vectors ? &V : nullptr, opts);

  Vector norms(n);
  for (Index j = 0; j < n; ++j) norms(j) = W.col(j).norm();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return norms(a) > norms(b); });

  TallSvd out;
  out.sigma.resize(n);
  for (Index j = 0; j < n; ++j) out.sigma(j) = norms(order[static_cast<std::size_t>(j)]);
  if (!want_vectors) return out;

  out.V.resize(n, n);
  for (Index j = 0; j < n; ++j) out.V.col(j) = V.col(order[static_cast<std::size_t>(j)]);

  // Left vectors for nonzero singular values, then a Householder completion
  // to a full orthogonal basis.
  Index r = 0;
  while (r < n && out.sigma(r) > 0.0) ++r;
  Matrix Ur(m, r);
  for (Index j = 0; j < r; ++j) {
    Ur.col(j) = W.col(order[static_cast<std::size_t>(j)]) / out.sigma(j);
  }
  if (r == 0) {
    out.U = Matrix::Identity(m, m);
    return out;
  }
  Eigen::HouseholderQR<Matrix> qr(Ur);
  out.U = qr.householderQ() * Matrix::Identity(m, m);
  const Matrix Rfac = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  for (Index j = 0; j < r; ++j) {
    if (Rfac(j, j) < 0.0) out.U.col(j) = -out.U.col(j);
  }
  return out;
}

}  // namespace

SVDFactors svd(const Matrix& M, const SvdOptions& opts) {
  require_valid(M, "svd");
  SVDFactors f;
  if (M.rows() >= M.cols()) {
    TallSvd t = tall_svd(M, opts, true);
    f.Q = t.U.transpose();
    f.Qp = std::move(t.V);
    f.sigma = std::move(t.sigma);
  } else {
    TallSvd t = tall_svd(M.transpose(), opts, true);
    // M = V S^T U^T, so the left factor is V and the right factor is U.
    f.Q = t.V.transpose();
    f.Qp = std::move(t.U);
    f.sigma = std::move(t.sigma);
  }
  return f;
}

ThinSVD thin_svd(const Matrix& M, const SvdOptions& opts) {
  require_valid(M, "thin_svd");
  const bool wide = M.rows() < M.cols();
  const Matrix T = wide ? Matrix(M.transpose()) : M;
  const Index m = T.rows();
  const Index n = T.cols();

  // Tall-skinny inputs are reduced to their triangular factor first.
  Matrix W;
  Matrix Qthin;
  const bool reduce = m > 2 * n;
  if (reduce) {
    Eigen::HouseholderQR<Matrix> qr(T);
    Qthin = qr.householderQ() * Matrix::Identity(m, n);
    W = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  } else {
    W = T;
  }
  Matrix V = Matrix::Identity(n, n);
  kernels::jacobi_orthogonalize(W, &V, opts);

  Vector norms(n);
  for (Index j = 0; j < n; ++j) norms(j) = W.col(j).norm();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return norms(a) > norms(b); });

  ThinSVD out;
  out.sigma.resize(n);
  Matrix U = Matrix::Zero(W.rows(), n);
  Matrix Vs(n, n);
  for (Index j = 0; j < n; ++j) {
    const Index src = order[static_cast<std::size_t>(j)];
    out.sigma(j) = norms(src);
    Vs.col(j) = V.col(src);
    if (norms(src) > 0.0) U.col(j) = W.col(src) / norms(src);
  }
  if (reduce) U = Qthin * U;
  if (wide) {
    out.U = std::move(Vs);
    out.V = std::move(U);
  } else {
    out.U = std::move(U);
    out.V = std::move(Vs);
  }
  return out;
}

Vector singular_values(const Matrix& M, const SvdOptions& opts) {
  require_valid(M, "singular_values");
  if (M.rows() >= M.cols()) return tall_svd(M, opts, false).sigma;
  return tall_svd(M.transpose(), opts, false).sigma;
}

}  // namespace blockgivens
