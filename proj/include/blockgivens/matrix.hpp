#pragma once

// Dense matrix substrate shared by every module.

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace blockgivens {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thrown when an input violates an operation's precondition.
class invalid_input : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an iterative method fails to reach its tolerance.
class convergence_failure : public std::runtime_error {
public:
  convergence_failure(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

/// Process-wide numerical tolerances. Set once at startup; read everywhere.
struct Tolerances {
  double orthogonality = 1e-12;   // per unit dimension
  double reconstruction = 1e-10;  // per unit dimension, relative to ||M||
  double symmetry = 1e-12;        // relative asymmetry accepted by psd_apply
  double rank = 1e-12;            // numerical rank threshold relative to sigma_1
};

const Tolerances& tolerances();
void set_tolerances(const Tolerances& t);

/// Throws invalid_input unless M has at least one row and column and only finite entries.
void require_valid(const Matrix& M, const char* what = "matrix");

/// 1-based inclusive slice M[r0:r1, c0:c1]. An empty range (r1 == r0 - 1) is allowed.
Matrix submatrix(const Matrix& M, Index r0, Index r1, Index c0, Index c1);

/// Max absolute row sum.
double norm_inf(const Matrix& M);
/// Max absolute column sum.
double norm_one(const Matrix& M);

/// sigma_1(M); zero for empty matrices.
double operator_norm(const Matrix& M);

/// sqrt(||M||_inf * ||M||_1), an upper bound for the operator norm.
double schur_test_bound(const Matrix& M);

/// ||M^T M - I|| in the operator norm.
double orthogonality_defect(const Matrix& M);

/// Row-wise 2x2 block partition of a tall matrix with a k x k leading block.
class BlockPartition {
public:
  BlockPartition(Matrix base, Index k);

  const Matrix& base() const noexcept { return base_; }
  Index k() const noexcept { return k_; }
  Index rows() const noexcept { return base_.rows(); }
  Index cols() const noexcept { return base_.cols(); }

  Matrix A() const { return base_.topLeftCorner(k_, k_); }
  Matrix B() const { return base_.topRightCorner(k_, cols() - k_); }
  Matrix C() const { return base_.bottomLeftCorner(rows() - k_, k_); }
  Matrix D() const { return base_.bottomRightCorner(rows() - k_, cols() - k_); }

  /// Columns 1..k and k+1..n of the base matrix.
  Matrix left_band() const { return base_.leftCols(k_); }
  Matrix right_band() const { return base_.rightCols(cols() - k_); }

  /// The base with D replaced by zeros.
  Matrix zeroed_corner() const;

private:
  Matrix base_;
  Index k_;
};

}  // namespace blockgivens
