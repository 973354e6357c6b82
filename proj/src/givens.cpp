#include "blockgivens/givens.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "blockgivens/spectral.hpp"
#include "blockgivens/svd.hpp"

namespace blockgivens {

namespace {

double inv_sqrt1p(double x) { return 1.0 / std::sqrt(1.0 + x); }

// (1 - (1+x)^{-1/2}) / x written without cancellation.
double h_fn(double x) {
  const double r = std::sqrt(1.0 + x);
  return 1.0 / (r * (r + 1.0));
}

void require_invertible(const Matrix& A, double band_norm, double rel_threshold,
                        const char* who) {
  const Vector sv = singular_values(A);
  const double smin = sv(sv.size() - 1);
  if (!(smin > rel_threshold * band_norm)) {
    throw invalid_input(std::string(who) + ": leading block numerically singular, sigma_k(A) = " +
                        std::to_string(smin));
  }
}

// f(X^T X) for f applied to the squared singular values of X, built from the
// SVD of X rather than from the Gram matrix so that small singular values keep
// their accuracy when |X| is large. Returns a cols(X) x cols(X) matrix.
Matrix gram_function(const Matrix& X, double (*f)(double)) {
  const Index c = X.cols();
  if (X.rows() == 0) return f(0.0) * Matrix::Identity(c, c);
  const SVDFactors d = svd(X);
  Vector fv = Vector::Constant(c, f(0.0));
  for (Index i = 0; i < d.sigma.size(); ++i) fv(i) = f(d.sigma(i) * d.sigma(i));
  return d.Qp * fv.asDiagonal() * d.Qp.transpose();
}

Matrix right_tangent(const Matrix& A, const Matrix& B) {
  return A.colPivHouseholderQr().solve(B);
}

Matrix left_tangent(const Matrix& A, const Matrix& C) {
  return A.transpose().colPivHouseholderQr().solve(C.transpose()).transpose();
}

}  // namespace

BlockTrig block_trig(const Matrix& A, const Matrix& B, double rel_threshold) {
  if (A.rows() != A.cols() || B.rows() != A.rows()) {
    throw invalid_input("block_trig: A must be k x k and B must have k rows");
  }
  require_valid(A, "block_trig A");
  Matrix AB(A.rows(), A.cols() + B.cols());
  AB << A, B;
  require_invertible(A, operator_norm(AB), rel_threshold, "block_trig");

  const Matrix T = right_tangent(A, B);

  BlockTrig out;
  out.cosAB = gram_function(T.transpose(), inv_sqrt1p);
  out.cosBA = gram_function(T, inv_sqrt1p);
  out.sinAB = out.cosAB * T;

  // Polar factors from a thin SVD of T.
  const SVDFactors f = svd(T);
  const Index r = f.sigma.size();
  const Matrix U = f.Q.transpose().leftCols(r);
  const Matrix V = f.Qp.leftCols(r);
  out.b0 = U * f.sigma.asDiagonal() * U.transpose();
  out.qB = U * V.transpose();
  return out;
}

BlockRotation::BlockRotation(Side side, Matrix tangent)
    : side_(side), tangent_(std::move(tangent)) {
  if (!tangent_.allFinite()) throw invalid_input("block rotation: non-finite tangent");
  order_ = tangent_.rows() + tangent_.cols();
  k_ = side_ == Side::right ? tangent_.rows() : tangent_.cols();
  degenerate_ = tangent_.size() == 0 || tangent_.cwiseAbs().maxCoeff() == 0.0;
  const Matrix W = side_ == Side::right ? tangent_ : Matrix(tangent_.transpose());
  const ThinSVD d = thin_svd(W);
  const Index r = d.sigma.size();
  u_ = d.U;
  v_ = d.V;
  sigma_ = d.sigma;
  sin_diag_.resize(r);
  vers_diag_.resize(r);
  for (Index i = 0; i < r; ++i) {
    const double x = d.sigma(i) * d.sigma(i);
    sin_diag_(i) = d.sigma(i) * inv_sqrt1p(x);
    vers_diag_(i) = x * h_fn(x);
  }
  // (I + W W^T)^{-1/2} = I - U (1 - c) U^T.
  cos_small_ = Matrix::Identity(k_, k_) - u_ * vers_diag_.asDiagonal() * u_.transpose();
}

BlockRotation BlockRotation::right(Matrix tangent) {
  return BlockRotation(Side::right, std::move(tangent));
}

BlockRotation BlockRotation::left(Matrix tangent) {
  return BlockRotation(Side::left, std::move(tangent));
}

// G_R(W) = [ C        -U s V^T       ]
//          [ V s U^T   I - V (1-c) V^T ]
// with C = (I + W W^T)^{-1/2}. Every factor is bounded by one.
Matrix BlockRotation::right_multiply(const Matrix& X) const {
  const auto XL = X.leftCols(k_);
  const auto XR = X.rightCols(order_ - k_);
  const Matrix XRV = XR * v_;
  const Matrix XLU = XL * u_;
  Matrix out(X.rows(), X.cols());
  out.leftCols(k_) = XL * cos_small_ + XRV * sin_diag_.asDiagonal() * u_.transpose();
  out.rightCols(order_ - k_) =
      XR - (XRV * vers_diag_.asDiagonal() + XLU * sin_diag_.asDiagonal()) * v_.transpose();
  return out;
}

Matrix BlockRotation::apply_right(const Matrix& X) const {
  if (side_ != Side::right) throw invalid_input("apply_right: rotation is a left rotation");
  if (X.cols() != order_) throw invalid_input("apply_right: column count mismatch");
  if (degenerate_) return X;
  return right_multiply(X);
}

Matrix BlockRotation::apply_left(const Matrix& X) const {
  if (side_ != Side::left) throw invalid_input("apply_left: rotation is a right rotation");
  if (X.rows() != order_) throw invalid_input("apply_left: row count mismatch");
  if (degenerate_) return X;
  return right_multiply(X.transpose()).transpose();
}

Matrix BlockRotation::dense() const {
  const Matrix I = Matrix::Identity(order_, order_);
  return side_ == Side::right ? apply_right(I) : apply_left(I);
}

BlockGivens build_right_rotation(const BlockPartition& p, double rel_threshold) {
  const Matrix A = p.A();
  const Matrix B = p.B();
  require_invertible(A, operator_norm(p.base().topRows(p.k())), rel_threshold,
                     "build_right_rotation");
  BlockRotation rot = BlockRotation::right(right_tangent(A, B));
  return {rot.dense(), Side::right, p.k(), rot.tangent(), rot.degenerate()};
}

BlockGivens build_left_rotation(const BlockPartition& p, double rel_threshold) {
  const Matrix A = p.A();
  const Matrix C = p.C();
  require_invertible(A, operator_norm(p.left_band()), rel_threshold, "build_left_rotation");
  BlockRotation rot = BlockRotation::left(left_tangent(A, C));
  return {rot.dense(), Side::left, p.k(), rot.tangent(), rot.degenerate()};
}

Matrix householder_block(double a, const Vector& v) {
  if (a == 0.0 || !std::isfinite(a)) throw invalid_input("householder_block: a must be nonzero");
  if (!v.allFinite()) throw invalid_input("householder_block: non-finite v");
  // Left rotation of the (1 + |v|) x 1 column (a; v) with tangent v / a.
  Matrix G = BlockRotation::left(Matrix(v / a)).dense();
  if (a < 0.0) G = -G;
  return G;
}

RotationWeight rotation_weight(const Matrix& tangent) {
  RotationWeight w;
  if (tangent.size() == 0 || tangent.cwiseAbs().maxCoeff() == 0.0) {
    w.degenerate = true;
    return w;
  }
  const Vector sv = singular_values(tangent);
  const Index r = numerical_rank(sv, tolerances().rank);
  w.rank = r;
  const double s1 = sv(0);
  const double sr = sv(r - 1);
  w.omega = std::max(1.0 / std::sqrt(1.0 + sr * sr), s1 / std::sqrt(1.0 + s1 * s1));
  return w;
}

RotationWeight rotation_weight(const BlockGivens& g) {
  RotationWeight w = rotation_weight(g.tangent);
  w.degenerate = w.degenerate || g.degenerate;
  return w;
}

Matrix BlockRotationFactors::middle() const {
  const Index k = q1.rows();
  const Index q = q2.rows();
  const Index t = c.size();
  Matrix M = Matrix::Zero(k + q, k + q);
  for (Index i = 0; i < r; ++i) M(i, i) = 1.0;
  for (Index i = 0; i < t; ++i) {
    M(r + i, r + i) = c(i);
    M(r + i, k + i) = -s(i);
    M(k + i, r + i) = s(i);
    M(k + i, k + i) = c(i);
  }
  for (Index i = k + t; i < k + q; ++i) M(i, i) = 1.0;
  return M;
}

Matrix BlockRotationFactors::reassemble() const {
  const Index k = q1.rows();
  const Index q = q2.rows();
  Matrix L = Matrix::Zero(k + q, k + q);
  Matrix Rr = Matrix::Zero(k + q, k + q);
  L.topLeftCorner(k, k) = q1;
  L.bottomRightCorner(q, q) = q2;
  Rr.topLeftCorner(k, k) = q1p;
  Rr.bottomRightCorner(q, q) = q2p;
  return L * middle() * Rr;
}

double BlockRotationFactors::weight() const {
  if (c.size() == 0) return 1.0;
  return std::max(c.cwiseAbs().maxCoeff(), s.cwiseAbs().maxCoeff());
}

BlockRotationFactors block_rotation_decompose(const Matrix& Q, Index k) {
  require_valid(Q, "block_rotation_decompose");
  const Index n = Q.rows();
  if (Q.cols() != n) throw invalid_input("block_rotation_decompose: matrix is not square");
  if (k < 1 || k >= n) throw invalid_input("block_rotation_decompose: split outside [1, n-1]");
  const double defect = orthogonality_defect(Q);
  if (defect > 1e3 * tolerances().orthogonality * static_cast<double>(n)) {
    throw invalid_input("block_rotation_decompose: input not orthogonal, defect " +
                        std::to_string(defect));
  }
  const Index q = n - k;
  const Index p = std::min(k, q);
  const Matrix Q11 = Q.topLeftCorner(k, k);
  const Matrix Q12 = Q.topRightCorner(k, q);
  const Matrix Q21 = Q.bottomLeftCorner(q, k);
  const Matrix Q22 = Q.bottomRightCorner(q, q);

  // Sines from the SVD of the lower-left block: Q21 = U2 S V1^T.
  const SVDFactors f = svd(Q21);
  const Matrix U2 = f.Q.transpose();
  const Matrix V1 = f.Qp;
  Vector s = Vector::Zero(k);
  s.head(p) = f.sigma.head(p);

  // Cosines: the columns of Q11 V1 are orthogonal with norms sqrt(1 - s^2).
  // Householder QR with the largest columns first keeps U1 accurate.
  const Matrix X = Q11 * V1;
  const Matrix Xrev = X.rowwise().reverse();
  Eigen::HouseholderQR<Matrix> qr(Xrev);
  const Matrix Urev = qr.householderQ() * Matrix::Identity(k, k);
  const Matrix Rrev = qr.matrixQR();
  Matrix U1(k, k);
  Vector c(k);
  for (Index j = 0; j < k; ++j) {
    U1.col(j) = Urev.col(k - 1 - j);
    c(j) = Rrev(k - 1 - j, k - 1 - j);
  }

  constexpr double trivial_sine = 1e-10;
  std::vector<Index> top_trivial, pairs, bottom_trivial;
  for (Index j = 0; j < k; ++j) {
    if (j < p && s(j) > trivial_sine) {
      pairs.push_back(j);
    } else {
      top_trivial.push_back(j);
      if (c(j) < 0.0) {
        U1.col(j) = -U1.col(j);
        c(j) = -c(j);
      }
    }
  }
  for (Index j = 0; j < q; ++j) {
    if (!(j < p && s(j) > trivial_sine)) bottom_trivial.push_back(j);
  }

  // Right factor of the second block from the rows of U1^T Q12 and U2^T Q22.
  const Matrix Z12 = U1.transpose() * Q12;
  const Matrix Z22 = U2.transpose() * Q22;
  Matrix V2(q, q);
  for (Index j = 0; j < q; ++j) {
    const bool paired = j < p && s(j) > trivial_sine;
    if (paired && s(j) >= std::sqrt(0.5)) {
      V2.col(j) = -Z12.row(j).transpose() / s(j);
    } else if (paired) {
      V2.col(j) = Z22.row(j).transpose() / c(j);
    } else {
      const double nrm = Z22.row(j).norm();
      V2.col(j) = Z22.row(j).transpose() / (nrm > 0.0 ? nrm : 1.0);
    }
  }
  // Polar cleanup removes rounding drift from the row-wise construction.
  {
    const SVDFactors g = svd(V2);
    V2 = g.Q.transpose() * g.Qp.transpose();
  }

  BlockRotationFactors out;
  out.r = static_cast<Index>(top_trivial.size());
  out.l = static_cast<Index>(bottom_trivial.size());
  const Index t = static_cast<Index>(pairs.size());
  out.c.resize(t);
  out.s.resize(t);

  std::vector<Index> top_order = top_trivial;
  top_order.insert(top_order.end(), pairs.begin(), pairs.end());
  std::vector<Index> bottom_order = pairs;
  bottom_order.insert(bottom_order.end(), bottom_trivial.begin(), bottom_trivial.end());

  Matrix q1(k, k), V1p(k, k), q2(q, q), V2p(q, q);
  for (Index i = 0; i < k; ++i) {
    const Index j = top_order[static_cast<std::size_t>(i)];
    q1.col(i) = U1.col(j);
    V1p.col(i) = V1.col(j);
  }
  for (Index i = 0; i < q; ++i) {
    const Index j = bottom_order[static_cast<std::size_t>(i)];
    q2.col(i) = U2.col(j);
    V2p.col(i) = V2.col(j);
  }
  for (Index i = 0; i < t; ++i) {
    const Index j = pairs[static_cast<std::size_t>(i)];
    out.c(i) = c(j);
    out.s(i) = s(j);
  }
  out.q1 = std::move(q1);
  out.q1p = V1p.transpose();
  out.q2 = std::move(q2);
  out.q2p = V2p.transpose();
  return out;
}

}  // namespace blockgivens
