#include "blockgivens/blockdiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "blockgivens/spectral.hpp"
#include "blockgivens/svd.hpp"

namespace blockgivens {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

SweepRecord make_record(int t, const Matrix& X, Index k, bool full) {
  const Index m = X.rows();
  const Index n = X.cols();
  SweepRecord r;
  r.t = t;
  r.sigma_A = singular_values(X.topLeftCorner(k, k));
  r.norm_A = r.sigma_A(0);
  r.norm_B = operator_norm(X.topRightCorner(k, n - k));
  r.norm_C = operator_norm(X.bottomLeftCorner(m - k, k));
  if (full) {
    r.norm_D = operator_norm(X.bottomRightCorner(m - k, n - k));
    r.sigma_left_band = singular_values(X.leftCols(k));
    r.norm_right_band = operator_norm(X.rightCols(n - k));
  } else {
    r.norm_D = kNaN;
    r.norm_right_band = kNaN;
  }
  return r;
}

double kernel_weight(const BlockRotation& rot) {
  const Vector& s = rot.tangent_sigma();
  const Index r = numerical_rank(s, tolerances().rank);
  if (r == 0) return 1.0;
  return 1.0 / std::sqrt(1.0 + s(r - 1) * s(r - 1));
}

// Nearest orthogonal matrix (polar factor).
void reorthogonalize(Matrix& Q) {
  const ThinSVD f = thin_svd(Q);
  Q = f.U * f.V.transpose();
}

}  // namespace

BlockDiagResult block_diagonalize(const BlockPartition& R, const BlockDiagOptions& opts) {
  if (!(opts.tol > 0.0)) throw invalid_input("block_diagonalize: tol must be positive");
  if (opts.max_iter < 0) throw invalid_input("block_diagonalize: max_iter must be >= 0");
  const Index m = R.rows();
  const Index n = R.cols();
  const Index k = R.k();
  const bool full = opts.detail == TraceDetail::full;

  BlockDiagResult res;
  res.trace.m = m;
  res.trace.n = n;
  res.trace.k = k;
  res.trace.full = full;
  const double normR = operator_norm(R.base());
  res.trace.norm_R = normR;

  Matrix X = R.base();
  if (opts.accumulate) {
    res.left = Matrix::Identity(m, m);
    res.right = Matrix::Identity(n, n);
  }

  auto offdiag = [&](const SweepRecord& rec) { return std::max(rec.norm_B, rec.norm_C); };

  res.trace.records.push_back(make_record(0, X, k, full));
  int t = 0;
  while (offdiag(res.trace.records.back()) > opts.tol * normR && t < opts.max_iter) {
    const SweepRecord& cur = res.trace.records.back();
    const double sk = cur.sigma_A(k - 1);
    if (sk < opts.singular_threshold * normR) {
      throw blockdiag_failure("block_diagonalize: sigma_k(A_" + std::to_string(t) + ") = " +
                                  std::to_string(sk) + " below threshold",
                              offdiag(cur) / normR, res.trace);
    }
    const bool left_step = (t % 2 == 0) == opts.start_left;
    const Matrix A = X.topLeftCorner(k, k);
    double kernel_prev = kNaN;
    double nu = 1.0;
    bool degenerate = false;
    if (left_step) {
      const Matrix C = X.bottomLeftCorner(m - k, k);
      const Matrix S = A.transpose().colPivHouseholderQr().solve(C.transpose()).transpose();
      const BlockRotation rot = BlockRotation::left(S);
      if (full) {
        kernel_prev = kernel_restricted_norm(X.bottomRightCorner(m - k, n - k).transpose(),
                                             C.transpose());
      }
      nu = kernel_weight(rot);
      degenerate = rot.degenerate();
      X = rot.apply_left(X);
      if (opts.accumulate) res.left = rot.apply_left(res.left);
    } else {
      const Matrix B = X.topRightCorner(k, n - k);
      const Matrix T = A.colPivHouseholderQr().solve(B);
      const BlockRotation rot = BlockRotation::right(T);
      if (full) kernel_prev = kernel_restricted_norm(X.bottomRightCorner(m - k, n - k), B);
      nu = kernel_weight(rot);
      degenerate = rot.degenerate();
      X = rot.apply_right(X);
      if (opts.accumulate) res.right = rot.apply_right(res.right);
    }
    ++t;
    if (opts.accumulate && t % 8 == 0) {
      if (orthogonality_defect(res.left) > opts.reorth_drift) reorthogonalize(res.left);
      if (orthogonality_defect(res.right) > opts.reorth_drift) reorthogonalize(res.right);
    }
    SweepRecord rec = make_record(t, X, k, full);
    rec.has_step = true;
    rec.step = left_step ? Side::left : Side::right;
    rec.degenerate = degenerate;
    rec.nu = nu;
    rec.kernel_norm_prev = kernel_prev;
    res.trace.records.push_back(std::move(rec));
  }

  const SweepRecord& last = res.trace.records.back();
  res.iterations = t;
  res.offdiag = normR > 0.0 ? offdiag(last) / normR : 0.0;
  res.converged = offdiag(last) <= opts.tol * normR;
  res.Ainf = X.topLeftCorner(k, k);
  res.Dinf = X.bottomRightCorner(m - k, n - k);
  res.final = std::move(X);
  return res;
}

bool Lemma11Report::pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const PropertyCheck& c) { return c.advisory || c.pass(); });
}

const PropertyCheck& Lemma11Report::get(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw std::out_of_range("Lemma11Report: no check named " + name);
}

Lemma11Report check_lemma11(const SweepTrace& trace, double tol) {
  if (!trace.full) throw invalid_input("check_lemma11: trace was recorded without full detail");
  Lemma11Report rep;
  rep.tol = tol;
  PropertyCheck monotone{"monotone"}, first{"first_step"}, band{"right_band"},
      cD{"contract_D"}, cBC{"contract_BC"}, wD{"weighted_D", true}, gap{"gap"};

  const auto& rs = trace.records;
  const double scale = trace.norm_R > 0.0 ? trace.norm_R : 1.0;
  auto note = [&](PropertyCheck& c, double bound, double value, int t) {
    const double margin = (bound - value) / scale;
    if (c.evaluated == 0 || margin < c.worst_margin) {
      c.worst_margin = margin;
      c.worst_t = t;
    }
    ++c.evaluated;
    if (margin < -tol) ++c.failures;
  };

  for (std::size_t s = 1; s < rs.size(); ++s) {
    const SweepRecord& a = rs[s - 1];
    const SweepRecord& b = rs[s];
    for (Index i = 0; i < a.sigma_A.size(); ++i) note(monotone, b.sigma_A(i), a.sigma_A(i), a.t);

    // Contraction bounds need the block that the step does not touch to be zero.
    const bool left = b.step == Side::left;
    const double untouched = left ? a.norm_B : a.norm_C;
    const double cleared = left ? a.norm_C : a.norm_B;
    if (a.t >= 1 || untouched <= 1e-12 * scale) {
      const double fD = a.norm_A > 0.0 ? 1.0 / std::sqrt(1.0 + cleared * cleared /
                                                                   (a.norm_A * a.norm_A))
                                       : 1.0;
      note(cD, fD * a.norm_D, b.norm_D, a.t);
      const double sk = a.sigma_A(a.sigma_A.size() - 1);
      const double den = std::sqrt(sk * sk + cleared * cleared);
      const double boundBC = den > 0.0 ? cleared * a.norm_D / den : 0.0;
      note(cBC, boundBC, left ? b.norm_B : b.norm_C, a.t);
      note(wD, b.nu * a.norm_D + (1.0 - b.nu) * b.kernel_norm_prev, b.norm_D, a.t);
    }
  }

  if (rs.size() > 1 && rs[1].step == Side::left) {
    const SweepRecord& r0 = rs[0];
    const SweepRecord& r1 = rs[1];
    note(first, 0.0, r1.norm_C, 1);
    for (Index i = 0; i < r0.sigma_left_band.size(); ++i) {
      note(first, 0.0, std::abs(r1.sigma_A(i) - r0.sigma_left_band(i)), 1);
    }
    note(band, 0.0, std::abs(r1.norm_right_band - r0.norm_right_band), 1);
  }

  if (!rs.empty()) {
    const SweepRecord& r0 = rs[0];
    for (Index i = 0; i < r0.sigma_left_band.size(); ++i) {
      if (r0.sigma_left_band(i) < r0.norm_right_band) continue;
      for (std::size_t s = 1; s < rs.size(); ++s) {
        note(gap, rs[s].sigma_left_band(i), rs[s].norm_right_band, rs[s].t);
      }
    }
  }

  rep.checks = {monotone, first, band, cD, cBC, wD, gap};
  return rep;
}

TopSingularValues top_singular_values(const BlockPartition& R, Index i,
                                      const BlockDiagOptions& opts) {
  if (i < 1 || i > R.k()) {
    throw invalid_input("top_singular_values: i = " + std::to_string(i) + " outside [1, k]");
  }
  TopSingularValues out;
  out.gap_lhs = singular_values(R.left_band())(i - 1);
  out.gap_rhs = operator_norm(R.right_band());
  const BlockDiagResult res = block_diagonalize(R, opts);
  out.converged = res.converged;
  out.iterations = res.iterations;
  out.values = singular_values(res.Ainf).head(i);
  out.certified = res.converged && out.gap_lhs >= out.gap_rhs;
  return out;
}

bool KyFanReport::holds(double tol) const {
  return margin_top >= -tol && margin_bottom >= -tol;
}

KyFanReport kyfan_column_bounds(const Matrix& Y, Index i) {
  require_valid(Y, "kyfan_column_bounds");
  if (i < 1 || i > Y.cols()) {
    throw invalid_input("kyfan_column_bounds: i = " + std::to_string(i) + " outside [1, cols]");
  }
  Vector cols = Y.colwise().squaredNorm().transpose();
  std::sort(cols.data(), cols.data() + cols.size(), std::greater<>());
  Vector sig = Vector::Zero(Y.cols());
  const Vector s = singular_values(Y);
  sig.head(s.size()) = s.cwiseAbs2();

  KyFanReport r;
  r.i = i;
  r.top_sigma_sq = sig.head(i).sum();
  r.top_columns_sq = cols.head(i).sum();
  r.bottom_sigma_sq = sig.tail(sig.size() - i).sum();
  r.bottom_columns_sq = cols.tail(cols.size() - i).sum();
  r.margin_top = r.top_sigma_sq - r.top_columns_sq;
  r.margin_bottom = r.bottom_columns_sq - r.bottom_sigma_sq;
  return r;
}

}  // namespace blockgivens
