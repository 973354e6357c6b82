#pragma once

// Perturbation bounds for zeroing the bottom-right block D of a partition
// R = [A B; C D]. R0 denotes R with D replaced by zeros.
//
// Every bound is returned as a BoundReport: an interval [lower, upper] that
// must contain a named quantity, together with that quantity computed by the
// SVD oracle.

#include <string>
#include <vector>

#include "blockgivens/matrix.hpp"

namespace blockgivens {

struct BoundReport {
  std::string formula;   // stable id, e.g. "weyl_truncation", "thm1"
  std::string quantity;  // what the interval must contain
  Index i = 0;
  Index k = 0;
  double lower = 0;
  double upper = 0;
  bool has_oracle = false;
  double oracle = 0;
  /// min(oracle - lower, upper - oracle); negative means a violation.
  double slack = 0;

  bool contains(double tol = 0.0) const {
    return !has_oracle || (oracle >= lower - tol && oracle <= upper + tol);
  }
};

BoundReport make_report(std::string formula, std::string quantity, Index i, Index k,
                        double lower, double upper, double oracle);

/// sigma_j(M) with sigma_j = 0 past min(rows, cols); j is 1-based.
double sigma_at(const Vector& sigma, Index j);

/// Truncation gap and rank-i replacement error (i in [1, n]):
///   "weyl_truncation": sigma_{i+1}(R) - sigma_{i+1}(R0) in [-|D|, |D|]
///   "weyl_replacement": |R - R_i| in [|R - R0_i| - 2|D|, |R - R0_i| + 2|D|]
std::vector<BoundReport> weyl_gap_bounds(const BlockPartition& p, Index i);

/// Rank-2k consequences:
///   "rank_tail" (only when i >= 2k): sigma_{i+1}(R) in [0, |D|]
///   "rank_k_R0": sigma_{k+1}(R0) in [0, min(|B|, |C|)]
///   "rank_k_R":  sigma_{k+1}(R) in [0, min(|B|, |C|) + |D|]
std::vector<BoundReport> small_rank_bounds(const BlockPartition& p, Index i);

struct MuQuantities {
  Index i = 0, k = 0;
  double mu_R = 0;
  double mu_R0 = 0;
  double mu_bar = 0;
  bool column_slice_R = false;   // true when |D Q'[k+1:n, i:n]| attained the min
  bool column_slice_R0 = false;
  /// The same quantity with slices starting at i+1, reported for comparison only.
  double mu_bar_next = 0;
};

/// mu for sigma_i from the SVD factors (Q R Q' = Sigma):
///   mu(X) = min{ |D Q'(X)[k+1:n, i:n]|, |Q(X)[i:m, k+1:m] D| },  X in {R, R0},
/// and mu_bar = max(mu(R), mu(R0)).
MuQuantities mu_quantities(const BlockPartition& p, Index i);

/// Reports for index i in [1, n]:
///   "thm1": |sigma_i(R) - sigma_i(R0)| in [0, mu_bar]
///   "thm1_c2" (i > k): same quantity, bound from the c2 / c2' sub-blocks
///   "thm1_abs" (i > 2k): sigma_i(R) in [0, c2 bound]
std::vector<BoundReport> mu_bounds(const BlockPartition& p, Index i, MuQuantities* mu = nullptr);

struct Theorem2Inputs {
  double nu1 = 1, nu2 = 1;
  double rho1 = 0, rho2 = 0;
  double kernel_norm_B = 0;   // |D restricted to ker B|
  double kernel_norm_Ct = 0;  // |D^T restricted to ker C^T|
  Index rank_B = 0, rank_C = 0;
  double norm_T = 0;  // |A^{-1} B|
  double norm_S = 0;  // |C A^{-1}|
  double rank_threshold = 0;
};

Theorem2Inputs theorem2_inputs(const BlockPartition& p);

/// Requires invertible A:
///   "thm2_R0":        sigma_{k+1}(R0) in [0, min-form]
///   "thm2_R0_closed": sigma_{k+1}(R0) in [0, |B||C| / sqrt(sigma_k(A)^2 + max(|B|,|C|)^2)]
///   "thm2_R":         sigma_{k+1}(R) in [0, min{ . + rho2, . + rho1 }]
std::vector<BoundReport> theorem2_bounds(const BlockPartition& p, Theorem2Inputs* in = nullptr);

/// Square case m = n = 2k with A, B, C invertible: "cor5" for sigma_{k+1}(R).
BoundReport corollary5_bound(const BlockPartition& p);

/// sigma_2 of [[c, -s], [s, 0]] in closed form.
double plane_rotation_corner_sigma2(double c, double s);

}  // namespace blockgivens
