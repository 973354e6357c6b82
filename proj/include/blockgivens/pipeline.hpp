#pragma once

// Partition planning and low-rank approximation for tall sparse non-negative
// matrices.
//
// plan_partition sorts columns by decreasing norm and rows by decreasing
// size, then predicts how many top singular values block diagonalization can
// certify at split k from column norms and sizes alone:
//   i* = max{ i < k : |u_i| >= f(alpha) sqrt(size(u_{k+1}) * max row size of R[:, k+1:n]) },
//   f(alpha) = sqrt(1 + sqrt(1 + 1/alpha)).
//
// algorithm2 drops the bottom-right block D, block-diagonalizes the rest and
// reports the top singular values with the error certificate 2 |D|.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blockgivens/blockdiag.hpp"
#include "blockgivens/mmio.hpp"
#include "blockgivens/randmat.hpp"

namespace blockgivens {

struct PlanCandidate {
  Index k = 0;
  Index i_star = 0;
  double threshold = 0;
};

struct PartitionPlan {
  // Planned matrix column j is original column col_perm[j]; same for rows.
  std::vector<Index> col_perm;
  std::vector<Index> row_perm;
  Index k = 0;
  Index i_star = 0;
  double threshold = 0;
  double alpha = 1;
  double factor = 0;  // f(alpha)
  double next_size = 0;      // size of column k+1
  double max_row_right = 0;  // max row size of the right band
  bool k_chosen = false;     // k was picked by the planner
  std::vector<PlanCandidate> candidates;
  Vector column_norms;  // planned order
  Vector column_sizes;
  // size / norm^2 ratios of the first k columns: moment ratio against its limit.
  double rho_ratio = 0;
  double rho_ratio_bound = 0;
  bool ratio_flag = false;

  bool identity() const;
};

/// f(alpha) = sqrt(1 + sqrt(1 + 1/alpha)).
double plan_threshold_factor(double alpha);

/// Rejects negative entries. Without k, candidates k = 1, 2, 4, ... and n-1
/// are scanned and the smallest k with the largest i* wins.
PartitionPlan plan_partition(const SparseMatrix& R, std::optional<Index> k, double alpha = 1.0);

SparseMatrix apply_plan(const SparseMatrix& R, const PartitionPlan& plan);
Matrix apply_plan(const Matrix& R, const PartitionPlan& plan);

struct Algorithm2Options {
  double tol = 1e-12;
  int max_iter = 200;
  bool oracle = false;           // compare against the SVD of R
  double invertibility = 1e-10;  // require sigma_k(A) >= this * |R|
  Index dense_limit = 2000;      // largest n handled
};

struct ApproxReport {
  Index m = 0, n = 0;
  Index k_requested = 0, k = 0, rank = 0;
  Vector values;  // top `rank` singular values of R0
  double norm_R = 0, norm_D = 0;
  double bound = 0;  // 2 |D|
  double sigma_k_A = 0;
  bool converged = false;
  bool certified = false;  // converged and the gap condition holds
  double gap_lhs = 0, gap_rhs = 0;
  int iterations = 0;
  double offdiag = 0;
  std::vector<std::string> warnings;

  bool has_oracle = false;
  Vector oracle;  // sigma_j(R), j <= rank
  Vector errors;  // |oracle - values|
  double max_error = 0;
  bool certificate_holds = false;  // max_error <= bound + 1e-9 |R|
};

/// Structured failure: infeasible partition or non-convergence.
class pipeline_failure : public std::runtime_error {
public:
  pipeline_failure(const std::string& what, ApproxReport partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const ApproxReport& partial() const noexcept { return partial_; }

private:
  ApproxReport partial_;
};

/// R is expected in planned order. When sigma_k(A) is too small, k is
/// decreased (with a warning) down to `rank`.
ApproxReport algorithm2(const Matrix& R, Index k, Index rank, const Algorithm2Options& opts = {});

// ---- synthetic inputs ----

struct SyntheticSpec {
  Index m = 200, n = 80, k = 20;
  double d_ratio = 0.01;  // |D| = d_ratio * |R|
  double density = 0.1;   // of the right band
  std::uint64_t seed = 1;
};

/// Non-negative matrix with a dense, dominant left band and a sparse right
/// band whose bottom block is rescaled so |D| = d_ratio |R|.
Matrix synthetic_partitioned(const SyntheticSpec& spec);

struct GammaSparseSpec {
  Index m = 10000, n = 1000;
  GammaSpec sizes{1.0, 0.02, 1.0};
  Index min_nnz = 30, max_nnz = 50;  // spread nonzeros per column
  Index anchors = 100;               // heaviest columns with a private row
  double anchor_fraction = 0.5;
  std::uint64_t seed = 1;
};

/// Sparse non-negative matrix whose column sizes are truncated-gamma draws.
/// The r-th heaviest column (r < anchors) puts anchor_fraction of its size on
/// row r; the rest of every column is spread evenly over uniformly drawn rows.
SparseMatrix gamma_sparse(const GammaSparseSpec& spec);

}  // namespace blockgivens
