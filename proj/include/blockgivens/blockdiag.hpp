#pragma once

// Block diagonalization by alternating left/right block-Givens rotations.
//
// R_0 = R. Each step annihilates one off-diagonal block: a left rotation
// clears C, a right rotation clears B. The iteration stops once both
// off-diagonal blocks are below tol * |R|.

#include <iosfwd>
#include <string>
#include <vector>

#include "blockgivens/givens.hpp"

namespace blockgivens {

struct SweepRecord {
  int t = 0;
  bool has_step = false;  // false for t = 0
  Side step = Side::left;  // rotation that produced R_t
  bool degenerate = false;

  Vector sigma_A;  // all k singular values of A_t
  double norm_A = 0, norm_B = 0, norm_C = 0;
  // Only populated with TraceDetail::full (NaN otherwise).
  double norm_D = 0;
  Vector sigma_left_band;  // sigma(R_t[1:m, 1:k])
  double norm_right_band = 0;

  // The rotation R_{t-1} -> R_t: kernel weight nu = (1 + sigma_r(tangent)^2)^{-1/2}
  // and |D_{t-1}| restricted to ker B_{t-1} (right) or ker C_{t-1}^T (left).
  double nu = 1.0;
  double kernel_norm_prev = 0.0;
};

struct SweepTrace {
  Index m = 0, n = 0, k = 0;
  double norm_R = 0;
  bool full = true;
  std::vector<SweepRecord> records;
};

enum class TraceDetail {
  /// Every record carries |D_t| and band spectra (needed by check_lemma11).
  full,
  /// Only what the stopping rule needs. For large inputs.
  light,
};

struct BlockDiagOptions {
  double tol = 1e-12;
  int max_iter = 200;
  bool start_left = true;
  bool accumulate = true;  // keep the orthogonal factors
  TraceDetail detail = TraceDetail::full;
  double singular_threshold = 1e-13;  // abort when sigma_k(A_t) < this * |R|
  double reorth_drift = 1e-10;
};

struct BlockDiagResult {
  Matrix Ainf;  // k x k
  Matrix Dinf;  // (m-k) x (n-k)
  Matrix final;  // R_t at exit
  // R_t = left * R * right, so R = left^T * final * right^T. Empty unless accumulated.
  Matrix left, right;
  SweepTrace trace;
  bool converged = false;
  int iterations = 0;
  double offdiag = 0;  // max(|B_t|, |C_t|) / |R| at exit
};

/// Raised when sigma_k(A_t) drops below the singularity threshold. Carries
/// the trace up to the failing step.
class blockdiag_failure : public convergence_failure {
public:
  blockdiag_failure(const std::string& what, double residual, SweepTrace trace)
      : convergence_failure(what, residual), trace_(std::move(trace)) {}
  const SweepTrace& trace() const noexcept { return trace_; }

private:
  SweepTrace trace_;
};

BlockDiagResult block_diagonalize(const BlockPartition& R, const BlockDiagOptions& opts = {});

struct PropertyCheck {
  std::string name;
  bool advisory = false;  // reported, never counted as a violation
  int evaluated = 0;
  int failures = 0;
  double worst_margin = 0;  // min over steps of (bound - value) / |R|
  int worst_t = -1;
  bool pass() const { return failures == 0; }
};

struct Lemma11Report {
  double tol = 1e-9;
  std::vector<PropertyCheck> checks;
  bool pass() const;  // ignores advisory checks
  const PropertyCheck& get(const std::string& name) const;
};

/// Checks the per-step properties of a full-detail trace:
///   monotone     sigma_i(A_{t+1}) >= sigma_i(A_t)
///   first_step   C_1 = 0 and sigma(A_1) = sigma(R[1:m,1:k]) (left start only)
///   right_band   |R[1:m,k+1:n]| = |R_1[1:m,k+1:n]| (left start only)
///   contract_D   |D_{t+1}| <= (1 + |X_t|^2/|A_t|^2)^{-1/2} |D_t|, X the block being cleared
///   contract_BC  |B_{t+1}| or |C_{t+1}| <= |X_t| |D_t| / sqrt(sigma_k(A_t)^2 + |X_t|^2)
///   weighted_D   |D_{t+1}| <= nu |D_t| + (1 - nu) |D_t restricted to the kernel| (advisory)
///   gap          sigma_i(left band) >= |right band| persists for every i where it holds at t = 0
/// Margins are relative to |R|; a check fails when the margin is below -tol.
Lemma11Report check_lemma11(const SweepTrace& trace, double tol = 1e-9);

struct TopSingularValues {
  Vector values;  // top i singular values of A_inf
  bool certified = false;
  double gap_lhs = 0;  // sigma_i(R[1:m,1:k])
  double gap_rhs = 0;  // |R[1:m,k+1:n]|
  bool converged = false;
  int iterations = 0;
};

/// Top i <= k singular values via block diagonalization. Certified when the
/// gap condition sigma_i(left band) >= |right band| holds and the iteration
/// converged.
TopSingularValues top_singular_values(const BlockPartition& R, Index i,
                                      const BlockDiagOptions& opts = {});

struct KyFanReport {
  Index i = 0;
  double top_sigma_sq = 0, top_columns_sq = 0;        // sums over j <= i
  double bottom_sigma_sq = 0, bottom_columns_sq = 0;  // sums over j > i
  double margin_top = 0;     // top_sigma_sq - top_columns_sq
  double margin_bottom = 0;  // bottom_columns_sq - bottom_sigma_sq
  bool holds(double tol = 1e-10) const;
};

/// Partial sums of squared singular values against squared column norms
/// (columns taken in order of decreasing norm).
KyFanReport kyfan_column_bounds(const Matrix& Y, Index i);

}  // namespace blockgivens
