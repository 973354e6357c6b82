#include "blockgivens/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "blockgivens/spectral.hpp"
#include "blockgivens/svd.hpp"

namespace blockgivens {

namespace {

void require_index(const BlockPartition& p, Index i, const char* who) {
  if (i < 1 || i > p.cols()) {
    throw invalid_input(std::string(who) + ": index i = " + std::to_string(i) + " outside [1, " +
                        std::to_string(p.cols()) + "]");
  }
}

// min{ |D Q'[k+1:n, from:n]|, |Q[from:m, k+1:m] D| } with 1-based `from`.
double mu_from(const SVDFactors& f, const Matrix& D, Index k, Index from, bool* column_won) {
  const Index m = f.Q.rows();
  const Index n = f.Qp.rows();
  double col = 0.0;
  double row = 0.0;
  if (from <= n) col = operator_norm(D * submatrix(f.Qp, k + 1, n, from, n));
  if (from <= m) row = operator_norm(submatrix(f.Q, from, m, k + 1, m) * D);
  if (column_won) *column_won = col <= row;
  return std::min(col, row);
}

// The c2-block form for i > k: c2(X, i) = c2(X)[i-k : m-k, 1 : m-k] and
// c2'(X, i) = c2'(X)[1 : n-k, i-k : n-k].
double mu_c2(const SVDFactors& f, const Matrix& D, Index k, Index i) {
  const Index m = f.Q.rows();
  const Index n = f.Qp.rows();
  const Matrix c2 = submatrix(f.Q, k + 1, m, k + 1, m);
  const Matrix c2p = submatrix(f.Qp, k + 1, n, k + 1, n);
  const double row = operator_norm(submatrix(c2, i - k, m - k, 1, m - k) * D);
  const double col = i - k <= n - k ? operator_norm(D * submatrix(c2p, 1, n - k, i - k, n - k)) : 0.0;
  return std::min(row, col);
}

MuQuantities compute_mu(const SVDFactors& fR, const SVDFactors& f0, const Matrix& D, Index k,
                        Index i) {
  MuQuantities q;
  q.i = i;
  q.k = k;
  q.mu_R = mu_from(fR, D, k, i, &q.column_slice_R);
  q.mu_R0 = mu_from(f0, D, k, i, &q.column_slice_R0);
  q.mu_bar = std::max(q.mu_R, q.mu_R0);
  q.mu_bar_next = std::max(mu_from(fR, D, k, i + 1, nullptr), mu_from(f0, D, k, i + 1, nullptr));
  return q;
}

double shrink(double x) { return x / std::sqrt(1.0 + x * x); }

Matrix solve_right(const Matrix& A, const Matrix& B) { return A.colPivHouseholderQr().solve(B); }
Matrix solve_left(const Matrix& A, const Matrix& C) {
  return A.transpose().colPivHouseholderQr().solve(C.transpose()).transpose();
}

void require_invertible(const BlockPartition& p, const char* who) {
  const Vector sa = singular_values(p.A());
  const double nr = operator_norm(p.base());
  if (!(sa(sa.size() - 1) > 1e-13 * nr)) {
    throw invalid_input(std::string(who) + ": A is numerically singular, sigma_k(A) = " +
                        std::to_string(sa(sa.size() - 1)));
  }
}

}  // namespace

BoundReport make_report(std::string formula, std::string quantity, Index i, Index k,
                        double lower, double upper, double oracle) {
  BoundReport r;
  r.formula = std::move(formula);
  r.quantity = std::move(quantity);
  r.i = i;
  r.k = k;
  r.lower = lower;
  r.upper = upper;
  r.has_oracle = true;
  r.oracle = oracle;
  r.slack = std::min(oracle - lower, upper - oracle);
  return r;
}

double sigma_at(const Vector& sigma, Index j) {
  if (j < 1) throw invalid_input("sigma_at: index must be >= 1");
  return j <= sigma.size() ? sigma(j - 1) : 0.0;
}

std::vector<BoundReport> weyl_gap_bounds(const BlockPartition& p, Index i) {
  require_index(p, i, "weyl_gap_bounds");
  const Index k = p.k();
  const Matrix& R = p.base();
  const Matrix R0 = p.zeroed_corner();
  const double nD = operator_norm(p.D());
  const Vector sR = singular_values(R);
  const SVDFactors f0 = svd(R0);

  std::vector<BoundReport> out;
  const double gap = sigma_at(sR, i + 1) - sigma_at(f0.sigma, i + 1);
  out.push_back(make_report("weyl_truncation", "sigma_{i+1}(R) - sigma_{i+1}(R0)", i, k, -nD, nD,
                            gap));

  const Matrix R0i = f0.Q.topRows(i).transpose() * f0.sigma.head(i).asDiagonal() *
                     f0.Qp.leftCols(i).transpose();
  const double repl = operator_norm(R - R0i);
  out.push_back(make_report("weyl_replacement", "|R - R_i|", i, k, repl - 2 * nD, repl + 2 * nD,
                            sigma_at(sR, i + 1)));
  return out;
}

std::vector<BoundReport> small_rank_bounds(const BlockPartition& p, Index i) {
  require_index(p, i, "small_rank_bounds");
  const Index k = p.k();
  const double nD = operator_norm(p.D());
  const double nB = operator_norm(p.B());
  const double nC = operator_norm(p.C());
  const Vector sR = singular_values(p.base());
  const Vector s0 = singular_values(p.zeroed_corner());

  std::vector<BoundReport> out;
  if (i >= 2 * k) {
    out.push_back(make_report("rank_tail", "sigma_{i+1}(R)", i, k, 0.0, nD, sigma_at(sR, i + 1)));
  }
  const double mbc = std::min(nB, nC);
  out.push_back(make_report("rank_k_R0", "sigma_{k+1}(R0)", k, k, 0.0, mbc, sigma_at(s0, k + 1)));
  out.push_back(make_report("rank_k_R", "sigma_{k+1}(R)", k, k, 0.0, mbc + nD, sigma_at(sR, k + 1)));
  return out;
}

MuQuantities mu_quantities(const BlockPartition& p, Index i) {
  require_index(p, i, "mu_quantities");
  return compute_mu(svd(p.base()), svd(p.zeroed_corner()), p.D(), p.k(), i);
}

std::vector<BoundReport> mu_bounds(const BlockPartition& p, Index i, MuQuantities* mu) {
  require_index(p, i, "mu_bounds");
  const Index k = p.k();
  const Matrix D = p.D();
  const SVDFactors fR = svd(p.base());
  const SVDFactors f0 = svd(p.zeroed_corner());
  const MuQuantities q = compute_mu(fR, f0, D, k, i);
  if (mu) *mu = q;

  const double sR = sigma_at(fR.sigma, i);
  const double s0 = sigma_at(f0.sigma, i);
  std::vector<BoundReport> out;
  out.push_back(make_report("thm1", "|sigma_i(R) - sigma_i(R0)|", i, k, 0.0, q.mu_bar,
                            std::abs(sR - s0)));
  if (i > k) {
    const double c2 = std::max(mu_c2(fR, D, k, i), mu_c2(f0, D, k, i));
    out.push_back(make_report("thm1_c2", "|sigma_i(R) - sigma_i(R0)|", i, k, 0.0, c2,
                              std::abs(sR - s0)));
    if (i > 2 * k) out.push_back(make_report("thm1_abs", "sigma_i(R)", i, k, 0.0, c2, sR));
  }
  return out;
}

Theorem2Inputs theorem2_inputs(const BlockPartition& p) {
  require_invertible(p, "theorem2_inputs");
  const Matrix A = p.A();
  const Matrix B = p.B();
  const Matrix C = p.C();
  const Matrix D = p.D();
  const Matrix T = solve_right(A, B);
  const Matrix S = solve_left(A, C);
  const Vector sT = singular_values(T);
  const Vector sS = singular_values(S);

  Theorem2Inputs in;
  in.rank_threshold = tolerances().rank;
  in.rank_B = numerical_rank(sT, in.rank_threshold);
  in.rank_C = numerical_rank(sS, in.rank_threshold);
  in.norm_T = sT(0);
  in.norm_S = sS(0);
  const auto nu = [](const Vector& s, Index r) {
    return r == 0 ? 1.0 : 1.0 / std::sqrt(1.0 + s(r - 1) * s(r - 1));
  };
  in.nu1 = nu(sT, in.rank_B);
  in.nu2 = nu(sS, in.rank_C);
  const double nD = operator_norm(D);
  in.kernel_norm_B = kernel_restricted_norm(D, B);
  in.kernel_norm_Ct = kernel_restricted_norm(D.transpose(), C.transpose());
  in.rho1 = in.nu1 * nD + (1.0 - in.nu1) * in.kernel_norm_B;
  in.rho2 = in.nu2 * nD + (1.0 - in.nu2) * in.kernel_norm_Ct;
  return in;
}

std::vector<BoundReport> theorem2_bounds(const BlockPartition& p, Theorem2Inputs* inputs) {
  const Theorem2Inputs in = theorem2_inputs(p);
  if (inputs) *inputs = in;
  const Index k = p.k();
  const double nB = operator_norm(p.B());
  const double nC = operator_norm(p.C());
  const double sk = singular_values(p.A())(k - 1);
  const double viaS = shrink(in.norm_S) * nB;  // left rotation clears C
  const double viaT = shrink(in.norm_T) * nC;  // right rotation clears B
  const double mx = std::max(nB, nC);
  const double closed = nB * nC / std::sqrt(sk * sk + mx * mx);

  const double s0 = sigma_at(singular_values(p.zeroed_corner()), k + 1);
  const double sR = sigma_at(singular_values(p.base()), k + 1);
  return {
      make_report("thm2_R0", "sigma_{k+1}(R0)", k + 1, k, 0.0, std::min(viaS, viaT), s0),
      make_report("thm2_R0_closed", "sigma_{k+1}(R0)", k + 1, k, 0.0, closed, s0),
      make_report("thm2_R", "sigma_{k+1}(R)", k + 1, k, 0.0,
                  std::min(viaS + in.rho2, viaT + in.rho1), sR),
  };
}

BoundReport corollary5_bound(const BlockPartition& p) {
  const Index k = p.k();
  if (p.rows() != 2 * k || p.cols() != 2 * k) {
    throw invalid_input("corollary5_bound: needs m = n = 2k");
  }
  require_invertible(p, "corollary5_bound");
  const Vector sA = singular_values(p.A());
  const Vector sB = singular_values(p.B());
  const Vector sC = singular_values(p.C());
  const double nr = operator_norm(p.base());
  if (!(sB(k - 1) > 1e-13 * nr) || !(sC(k - 1) > 1e-13 * nr)) {
    throw invalid_input("corollary5_bound: B and C must be invertible");
  }
  const double nA = sA(0), sk = sA(k - 1);
  const double nB = sB(0), nC = sC(0);
  const double nD = operator_norm(p.D());
  const double first = nB * nC / std::sqrt(sk * sk + nB * nB) +
                       nA * nD / std::sqrt(nA * nA + sB(k - 1) * sB(k - 1));
  const double second = nB * nC / std::sqrt(sk * sk + nC * nC) +
                        nA * nD / std::sqrt(nA * nA + sC(k - 1) * sC(k - 1));
  const double sR = sigma_at(singular_values(p.base()), k + 1);
  return make_report("cor5", "sigma_{k+1}(R)", k + 1, k, 0.0, std::min(first, second), sR);
}

double plane_rotation_corner_sigma2(double c, double s) {
  if (std::abs(c * c + s * s - 1.0) > 1e-12) {
    throw invalid_input("plane_rotation_corner_sigma2: c^2 + s^2 must be 1");
  }
  const double h = (1.0 + s * s) / 2.0;
  const double disc = std::max(h * h - s * s * s * s, 0.0);
  // h - sqrt(h^2 - s^4) = s^4 / (h + sqrt(h^2 - s^4)) avoids cancellation.
  const double small = s * s * s * s / (h + std::sqrt(disc));
  return std::sqrt(small);
}

}  // namespace blockgivens
