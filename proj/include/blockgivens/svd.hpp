#pragma once

// One-sided (Hestenes) Jacobi singular value decomposition.
//
// Factors are stored in the orientation Q * M * Qp = Sigma, i.e. Q is the
// transpose of the conventional left factor U and Qp is the conventional V.

#include "blockgivens/matrix.hpp"

namespace blockgivens {

struct SVDFactors {
  Matrix Q;      // m x m, orthogonal
  Matrix Qp;     // n x n, orthogonal
  Vector sigma;  // min(m, n), non-increasing, non-negative

  /// The m x n diagonal matrix with sigma on its diagonal.
  Matrix Sigma() const;
};

enum class JacobiOrdering {
  /// Round-robin tournament: each round rotates n/2 disjoint column pairs
  /// concurrently under OpenMP.
  parallel_round_robin,
  /// Row-cyclic pair ordering on one thread. Kept as the reference kernel.
  serial_cyclic,
};

struct SvdOptions {
  JacobiOrdering ordering = JacobiOrdering::parallel_round_robin;
  int max_sweeps = 80;
};

SVDFactors svd(const Matrix& M, const SvdOptions& opts = {});

/// Thin factors in the conventional orientation M = U diag(sigma) V^T with
/// r = min(m, n) columns each. V (U when m < n) is always orthonormal; the
/// other factor has zero columns where sigma is zero. Tall-skinny inputs are
/// QR-reduced before the Jacobi sweeps.
struct ThinSVD {
  Matrix U;  // m x r
  Vector sigma;
  Matrix V;  // n x r
};

ThinSVD thin_svd(const Matrix& M, const SvdOptions& opts = {});

/// Singular values only, non-increasing.
Vector singular_values(const Matrix& M, const SvdOptions& opts = {});

namespace kernels {

/// Orthogonalizes the columns of W (rows >= cols) in place by plane rotations,
/// applying the same rotations to the columns of V when V is non-null.
/// Returns the number of sweeps used; throws convergence_failure past max_sweeps.
int jacobi_orthogonalize(Matrix& W, Matrix* V, const SvdOptions& opts);

}  // namespace kernels

}  // namespace blockgivens
