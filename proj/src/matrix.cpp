#include "blockgivens/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "blockgivens/spectral.hpp"

namespace blockgivens {

namespace {
Tolerances g_tolerances;
}

const Tolerances& tolerances() { return g_tolerances; }
void set_tolerances(const Tolerances& t) { g_tolerances = t; }

void require_valid(const Matrix& M, const char* what) {
  if (M.rows() < 1 || M.cols() < 1) {
    throw invalid_input(std::string(what) + ": empty matrix");
  }
  if (!M.allFinite()) {
    throw invalid_input(std::string(what) + ": non-finite entry");
  }
}

Matrix submatrix(const Matrix& M, Index r0, Index r1, Index c0, Index c1) {
  auto bad = [&](Index lo, Index hi, Index n) { return lo < 1 || hi > n || hi < lo - 1; };
  if (bad(r0, r1, M.rows()) || bad(c0, c1, M.cols())) {
    throw invalid_input("submatrix: range [" + std::to_string(r0) + ":" + std::to_string(r1) +
                        ", " + std::to_string(c0) + ":" + std::to_string(c1) +
                        "] outside " + std::to_string(M.rows()) + "x" +
                        std::to_string(M.cols()));
  }
  return M.block(r0 - 1, c0 - 1, r1 - r0 + 1, c1 - c0 + 1);
}

double norm_inf(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  return M.cwiseAbs().rowwise().sum().maxCoeff();
}

double norm_one(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  return M.cwiseAbs().colwise().sum().maxCoeff();
}

double operator_norm(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  if (M.rows() == 1 || M.cols() == 1) return M.norm();
  const double scale = M.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  // Scale to keep the Gram matrix away from overflow and underflow.
  const Matrix X = M / scale;
  const Matrix G = X.rows() >= X.cols() ? Matrix(X.transpose() * X) : Matrix(X * X.transpose());
  const double top = sym_eigenvalues(G)(0);
  return scale * std::sqrt(std::max(top, 0.0));
}

double schur_test_bound(const Matrix& M) { return std::sqrt(norm_inf(M) * norm_one(M)); }

double orthogonality_defect(const Matrix& M) {
  const Matrix E = M.transpose() * M - Matrix::Identity(M.cols(), M.cols());
  return operator_norm(E);
}

BlockPartition::BlockPartition(Matrix base, Index k) : base_(std::move(base)), k_(k) {
  require_valid(base_, "block partition");
  if (base_.rows() < base_.cols()) {
    throw invalid_input("block partition: need rows >= cols, got " +
                        std::to_string(base_.rows()) + "x" + std::to_string(base_.cols()));
  }
  if (k_ < 1 || k_ >= base_.cols() || k_ >= base_.rows()) {
    throw invalid_input("block partition: split k=" + std::to_string(k_) + " outside [1, " +
                        std::to_string(base_.cols() - 1) + "]");
  }
}

Matrix BlockPartition::zeroed_corner() const {
  Matrix R0 = base_;
  R0.bottomRightCorner(rows() - k_, cols() - k_).setZero();
  return R0;
}

}  // namespace blockgivens
