#include "blockgivens/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "blockgivens/svd.hpp"

namespace blockgivens {

SymEigen sym_eigen(const Matrix& S) {
  if (S.rows() != S.cols()) throw invalid_input("sym_eigen: matrix is not square");
  SymEigen out;
  if (S.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  if (es.info() != Eigen::Success) {
    throw convergence_failure("sym_eigen: eigensolver failed", 0.0);
  }
  // Eigen returns ascending order.
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();
  return out;
}

Vector sym_eigenvalues(const Matrix& S) {
  if (S.rows() != S.cols()) throw invalid_input("sym_eigenvalues: matrix is not square");
  if (S.rows() == 0) return Vector();
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw convergence_failure("sym_eigenvalues: eigensolver failed", 0.0);
  }
  return es.eigenvalues().reverse();
}

Matrix psd_apply(const std::function<double(double)>& f, const Matrix& S) {
  if (S.rows() != S.cols()) throw invalid_input("psd_apply: matrix is not square");
  if (S.rows() == 0) return S;
  if (!S.allFinite()) throw invalid_input("psd_apply: non-finite entry");
  const double scale = std::max(S.cwiseAbs().maxCoeff(), 1e-300);
  const double asym = (S - S.transpose()).cwiseAbs().maxCoeff();
  if (asym > tolerances().symmetry * scale * static_cast<double>(S.rows())) {
    throw invalid_input("psd_apply: asymmetry " + std::to_string(asym) + " exceeds tolerance");
  }
  const Matrix sym = 0.5 * (S + S.transpose());
  const SymEigen e = sym_eigen(sym);
  const double floor = -1e-10 * std::max(e.values(0), 0.0) - 1e-300;
  Vector fv(e.values.size());
  for (Index i = 0; i < e.values.size(); ++i) {
    double lambda = e.values(i);
    if (lambda < floor) {
      throw invalid_input("psd_apply: matrix has negative eigenvalue " + std::to_string(lambda));
    }
    fv(i) = f(std::max(lambda, 0.0));
  }
  return e.vectors * fv.asDiagonal() * e.vectors.transpose();
}

Vector gram_singular_values(const Matrix& M) {
  const Index r = std::min(M.rows(), M.cols());
  if (r == 0) return Vector();
  const double scale = M.cwiseAbs().maxCoeff();
  if (scale == 0.0) return Vector::Zero(r);
  const Matrix X = M / scale;
  const Matrix G = M.rows() >= M.cols() ? Matrix(X.transpose() * X) : Matrix(X * X.transpose());
  Vector ev = sym_eigenvalues(G);
  for (Index i = 0; i < ev.size(); ++i) ev(i) = scale * std::sqrt(std::max(ev(i), 0.0));
  return ev;
}

Index numerical_rank(const Vector& sigma, double rel) {
  if (sigma.size() == 0 || sigma(0) == 0.0) return 0;
  const double cutoff = rel * sigma(0);
  Index r = 0;
  while (r < sigma.size() && sigma(r) > cutoff) ++r;
  return r;
}

double kernel_restricted_norm(const Matrix& D, const Matrix& K) {
  if (K.cols() != D.cols()) {
    throw invalid_input("kernel_restricted_norm: K has " + std::to_string(K.cols()) +
                        " columns, D has " + std::to_string(D.cols()));
  }
  if (D.size() == 0) return 0.0;
  if (K.size() == 0 || K.cwiseAbs().maxCoeff() == 0.0) return operator_norm(D);
  // D N N^T = D - D V_r V_r^T, and |D N| = |D N N^T|.
  const ThinSVD f = thin_svd(K);
  const Index r = numerical_rank(f.sigma, tolerances().rank);
  const Matrix Vr = f.V.leftCols(r);
  return operator_norm(D - (D * Vr) * Vr.transpose());
}

}  // namespace blockgivens
