#pragma once

// Closed-form block-Givens rotations.
//
// For a partition R = [A B; C D] with invertible A, the right rotation G_R
// annihilates B in R * G_R and the left rotation G_L annihilates C in G_L * R.
// Both depend only on a "tangent" block: T = A^{-1} B (right) or
// S = C A^{-1} (left).

#include "blockgivens/matrix.hpp"

namespace blockgivens {

/// The trig blocks of a right rotation built from (A, B).
struct BlockTrig {
  Matrix cosAB;  // k x k, (I + T T^T)^{-1/2}
  Matrix cosBA;  // (n-k) x (n-k), (I + T^T T)^{-1/2}
  Matrix sinAB;  // k x (n-k), T (I + T^T T)^{-1/2}
  Matrix b0;     // k x k PSD polar radial part of T
  Matrix qB;     // k x (n-k) polar isometric part, b0 * qB = T
};

/// Throws invalid_input when sigma_k(A) <= rel_threshold * ||[A B]||.
BlockTrig block_trig(const Matrix& A, const Matrix& B, double rel_threshold = 1e-13);

enum class Side { left, right };

/// A block-Givens rotation in implicit form, stored through the SVD of the
/// tangent; the dense matrix is only formed on request.
class BlockRotation {
public:
  /// Right rotation from the tangent T = A^{-1} B (k x (n-k)).
  static BlockRotation right(Matrix tangent);
  /// Left rotation from the tangent S = C A^{-1} ((m-k) x k).
  static BlockRotation left(Matrix tangent);

  Side side() const noexcept { return side_; }
  Index k() const noexcept { return k_; }
  /// Order of the orthogonal matrix (n for right, m for left).
  Index order() const noexcept { return order_; }
  const Matrix& tangent() const noexcept { return tangent_; }
  /// Singular values of the tangent, non-increasing.
  const Vector& tangent_sigma() const noexcept { return sigma_; }
  /// True when the tangent is zero and the rotation is the identity.
  bool degenerate() const noexcept { return degenerate_; }

  /// X * G for a right rotation (X has order() columns).
  Matrix apply_right(const Matrix& X) const;
  /// G * X for a left rotation (X has order() rows).
  Matrix apply_left(const Matrix& X) const;

  Matrix dense() const;

private:
  BlockRotation(Side side, Matrix tangent);

  Side side_;
  Matrix tangent_;
  Index k_ = 0;
  Index order_ = 0;
  bool degenerate_ = false;
  // With W = T (right) or S^T (left) = U diag(sigma) V^T, thin to r = min dims:
  Matrix cos_small_;  // k x k, (I + W W^T)^{-1/2}
  Matrix u_;          // k x r
  Matrix v_;          // (order - k) x r
  Vector sin_diag_;   // sigma / sqrt(1 + sigma^2)
  Vector vers_diag_;  // 1 - 1 / sqrt(1 + sigma^2)
  Vector sigma_;

  // X * G_R(W); the left rotation is G_R(S^T)^T.
  Matrix right_multiply(const Matrix& X) const;
};

struct BlockGivens {
  Matrix matrix;  // orthogonal, n x n (right) or m x m (left)
  Side side;
  Index k;
  Matrix tangent;
  bool degenerate;
};

/// G_R with (R * G_R)[1:k, k+1:n] = 0.
BlockGivens build_right_rotation(const BlockPartition& p, double rel_threshold = 1e-13);
/// G_L with (G_L * R)[k+1:m, 1:k] = 0.
BlockGivens build_left_rotation(const BlockPartition& p, double rel_threshold = 1e-13);

/// Orthogonal matrix mapping (a, v) to (sqrt(a^2 + |v|^2), 0, ..., 0). Requires a != 0.
Matrix householder_block(double a, const Vector& v);

struct RotationWeight {
  double omega = 1.0;
  bool degenerate = false;
  Index rank = 0;
};

/// max{ 1/sqrt(1 + sigma_r(T)^2), sigma_1(T)/sqrt(1 + sigma_1(T)^2) } with r the
/// numerical rank of the tangent.
RotationWeight rotation_weight(const BlockGivens& g);
RotationWeight rotation_weight(const Matrix& tangent);

/// Factorization Q = diag(q1, q2) * M * diag(q1p, q2p) with
/// M = I_r (+) [c -s; s c] (+) I_l, c and s diagonal of size k - r.
struct BlockRotationFactors {
  Matrix q1, q1p;  // k x k
  Matrix q2, q2p;  // (n-k) x (n-k)
  Vector c, s;     // length k - r; s >= 0, c^2 + s^2 = 1
  Index r = 0;
  Index l = 0;

  Matrix middle() const;
  Matrix reassemble() const;
  /// max{ max|c|, max|s| }, or 1 when there is no rotation block.
  double weight() const;
};

BlockRotationFactors block_rotation_decompose(const Matrix& Q, Index k);

}  // namespace blockgivens
