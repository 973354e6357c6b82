#pragma once

// Symmetric eigendecomposition and spectral functions of PSD matrices.

#include <functional>

#include "blockgivens/matrix.hpp"

namespace blockgivens {

struct SymEigen {
  Vector values;   // non-increasing
  Matrix vectors;  // columns match values
};

/// Eigendecomposition of a symmetric matrix (only the lower triangle is read).
SymEigen sym_eigen(const Matrix& S);

/// Eigenvalues of a symmetric matrix, non-increasing.
Vector sym_eigenvalues(const Matrix& S);

/// V f(Lambda) V^T for symmetric PSD S = V Lambda V^T.
///
/// Rejects S when its asymmetry exceeds tolerances().symmetry * ||S|| or
/// when an eigenvalue is negative beyond rounding. Rounding-level negative
/// eigenvalues are clamped to zero before f is evaluated.
Matrix psd_apply(const std::function<double(double)>& f, const Matrix& S);

/// Singular values of M computed from the Gram matrix of its smaller side.
/// Accurate in absolute terms (relative to sigma_1); cheap for tall-skinny M.
Vector gram_singular_values(const Matrix& M);

/// |D N| where the columns of N span the numerical kernel of K (rank threshold
/// tolerances().rank relative to sigma_1(K)). K must have as many columns as D.
/// Zero when K has full column rank; |D| when K is zero.
double kernel_restricted_norm(const Matrix& D, const Matrix& K);

/// Numerical rank at threshold rel * sigma_1.
Index numerical_rank(const Vector& sigma, double rel);

}  // namespace blockgivens
