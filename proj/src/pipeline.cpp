#include "blockgivens/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <unordered_set>

#include <Eigen/SVD>

#include "blockgivens/svd.hpp"

namespace blockgivens {

namespace {

// Sums are taken over sorted values so they do not depend on storage order;
// this keeps planning idempotent.
double sorted_sum(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  double s = 0;
  for (double x : v) s += x;
  return s;
}

void require_plannable(const SparseMatrix& R) {
  if (R.rows() < 2 || R.cols() < 2) throw invalid_input("plan_partition: need at least 2 rows and columns");
  for (Index j = 0; j < R.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(R, j); it; ++it) {
      if (!std::isfinite(it.value())) throw invalid_input("plan_partition: non-finite entry");
      if (it.value() < 0) throw invalid_input("plan_partition: negative entry");
    }
  }
}

std::vector<Index> descending_order(const std::vector<double>& key) {
  std::vector<Index> order(key.size());
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return key[a] > key[b]; });
  return order;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

}  // namespace

bool PartitionPlan::identity() const {
  for (std::size_t j = 0; j < col_perm.size(); ++j) {
    if (col_perm[j] != Index(j)) return false;
  }
  for (std::size_t i = 0; i < row_perm.size(); ++i) {
    if (row_perm[i] != Index(i)) return false;
  }
  return true;
}

double plan_threshold_factor(double alpha) {
  if (!(alpha > 0) || !std::isfinite(alpha)) throw invalid_input("alpha must be positive");
  return std::sqrt(1.0 + std::sqrt(1.0 + 1.0 / alpha));
}

PartitionPlan plan_partition(const SparseMatrix& Rin, std::optional<Index> k_opt, double alpha) {
  require_plannable(Rin);
  SparseMatrix R = Rin;
  R.makeCompressed();
  const Index m = R.rows();
  const Index n = R.cols();
  const Index k_max = std::min(n - 1, m - 1);
  if (k_opt && (*k_opt < 1 || *k_opt > k_max)) {
    throw invalid_input("plan_partition: k = " + std::to_string(*k_opt) + " outside [1, " +
                        std::to_string(k_max) + "]");
  }

  PartitionPlan plan;
  plan.alpha = alpha;
  plan.factor = plan_threshold_factor(alpha);

  std::vector<double> norm(n), size(n);
  std::vector<std::vector<double>> row_vals(m);
  for (Index j = 0; j < n; ++j) {
    std::vector<double> v, sq;
    for (SparseMatrix::InnerIterator it(R, j); it; ++it) {
      v.push_back(it.value());
      sq.push_back(it.value() * it.value());
      row_vals[it.row()].push_back(it.value());
    }
    size[j] = sorted_sum(v);
    norm[j] = std::sqrt(sorted_sum(sq));
  }
  std::vector<double> row_size(m);
  for (Index i = 0; i < m; ++i) row_size[i] = sorted_sum(row_vals[i]);

  plan.col_perm = descending_order(norm);
  plan.row_perm = descending_order(row_size);
  plan.column_norms.resize(n);
  plan.column_sizes.resize(n);
  for (Index j = 0; j < n; ++j) {
    plan.column_norms(j) = norm[plan.col_perm[j]];
    plan.column_sizes(j) = size[plan.col_perm[j]];
  }

  // Candidate splits, scanned from the right so the right-band row sizes
  // accumulate one planned column at a time.
  std::vector<Index> grid;
  if (k_opt) {
    grid.push_back(*k_opt);
  } else {
    for (Index k = 1; k <= k_max; k *= 2) grid.push_back(k);
    if (grid.back() != k_max) grid.push_back(k_max);
  }
  std::vector<double> right_rows(m, 0.0);
  double max_row = 0;
  Index added_from = n;  // planned columns [added_from, n) are accumulated
  std::vector<PlanCandidate> cands(grid.size());
  std::vector<double> max_rows(grid.size());
  for (std::size_t g = grid.size(); g-- > 0;) {
    const Index k = grid[g];
    while (added_from > k) {
      --added_from;
      for (SparseMatrix::InnerIterator it(R, plan.col_perm[added_from]); it; ++it) {
        right_rows[it.row()] += it.value();
        max_row = std::max(max_row, right_rows[it.row()]);
      }
    }
    PlanCandidate c;
    c.k = k;
    c.threshold = plan.factor * std::sqrt(plan.column_sizes(k) * max_row);
    while (c.i_star < k - 1 && plan.column_norms(c.i_star) >= c.threshold) ++c.i_star;
    cands[g] = c;
    max_rows[g] = max_row;
  }

  std::size_t best = 0;
  for (std::size_t g = 1; g < cands.size(); ++g) {
    if (cands[g].i_star > cands[best].i_star) best = g;
  }
  plan.candidates = cands;
  plan.k_chosen = !k_opt;
  plan.k = cands[best].k;
  plan.i_star = cands[best].i_star;
  plan.threshold = cands[best].threshold;
  plan.next_size = plan.column_sizes(plan.k);
  plan.max_row_right = max_rows[best];

  // Moment ratio of size / norm^2 over the left columns.
  double s1 = 0, s2 = 0, cmax = 0;
  Index cnt = 0;
  for (Index j = 0; j < plan.k; ++j) {
    if (plan.column_norms(j) == 0) continue;
    const double e = plan.column_sizes(j) / (plan.column_norms(j) * plan.column_norms(j));
    s1 += e;
    s2 += e * e;
    cmax = std::max(cmax, plan.column_sizes(j));
    ++cnt;
  }
  if (cnt > 0) {
    s1 /= double(cnt);
    s2 /= double(cnt);
    plan.rho_ratio = std::sqrt(s2) / s1;
    plan.rho_ratio_bound = 1.0 + double(m) / (cmax * double(plan.k));
    plan.ratio_flag = plan.rho_ratio > plan.rho_ratio_bound;
  }
  return plan;
}

SparseMatrix apply_plan(const SparseMatrix& R, const PartitionPlan& plan) {
  if (Index(plan.col_perm.size()) != R.cols() || Index(plan.row_perm.size()) != R.rows()) {
    throw invalid_input("apply_plan: plan does not match the matrix shape");
  }
  std::vector<Index> row_pos(R.rows());
  for (std::size_t i = 0; i < plan.row_perm.size(); ++i) row_pos[plan.row_perm[i]] = Index(i);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(std::size_t(R.nonZeros()));
  for (Index j = 0; j < R.cols(); ++j) {
    for (SparseMatrix::InnerIterator it(R, plan.col_perm[j]); it; ++it) {
      trips.emplace_back(row_pos[it.row()], j, it.value());
    }
  }
  SparseMatrix out(R.rows(), R.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  out.makeCompressed();
  return out;
}

Matrix apply_plan(const Matrix& R, const PartitionPlan& plan) {
  if (Index(plan.col_perm.size()) != R.cols() || Index(plan.row_perm.size()) != R.rows()) {
    throw invalid_input("apply_plan: plan does not match the matrix shape");
  }
  Matrix out(R.rows(), R.cols());
  for (Index j = 0; j < R.cols(); ++j) {
    for (Index i = 0; i < R.rows(); ++i) out(i, j) = R(plan.row_perm[i], plan.col_perm[j]);
  }
  return out;
}

ApproxReport algorithm2(const Matrix& R, Index k, Index rank, const Algorithm2Options& opts) {
  require_valid(R, "algorithm2");
  const Index m = R.rows();
  const Index n = R.cols();
  if (n > opts.dense_limit) {
    throw invalid_input("algorithm2: n = " + std::to_string(n) + " exceeds the dense limit " +
                        std::to_string(opts.dense_limit));
  }
  if (k < 1 || k >= n || k >= m) throw invalid_input("algorithm2: k must satisfy 1 <= k < min(m, n)");
  if (rank < 1 || rank > k) throw invalid_input("algorithm2: rank must satisfy 1 <= rank <= k");

  ApproxReport rep;
  rep.m = m;
  rep.n = n;
  rep.k_requested = k;
  rep.rank = rank;
  rep.norm_R = operator_norm(R);
  if (rep.norm_R == 0) throw invalid_input("algorithm2: zero matrix");

  // Shrink k until A is safely invertible; steps double after each miss.
  Index step = 1;
  for (;;) {
    rep.sigma_k_A = singular_values(R.topLeftCorner(k, k))(k - 1);
    if (rep.sigma_k_A >= opts.invertibility * rep.norm_R) break;
    if (k == rank) {
      rep.k = k;
      throw pipeline_failure("algorithm2: no k >= " + std::to_string(rank) +
                                 " with sigma_k(A) >= " + fmt(opts.invertibility) + " |R|",
                             rep);
    }
    const Index next = std::max(rank, k - step);
    rep.warnings.push_back("sigma_k(A) = " + fmt(rep.sigma_k_A) + " at k = " +
                           std::to_string(k) + "; retrying with k = " + std::to_string(next));
    k = next;
    step *= 2;
  }
  rep.k = k;

  const BlockPartition P(R, k);
  rep.norm_D = operator_norm(P.D());
  rep.bound = 2.0 * rep.norm_D;
  const BlockPartition P0(P.zeroed_corner(), k);
  rep.gap_lhs = singular_values(P0.left_band())(rank - 1);
  rep.gap_rhs = operator_norm(P0.B());

  BlockDiagOptions bo;
  bo.tol = opts.tol;
  bo.max_iter = opts.max_iter;
  bo.accumulate = false;
  bo.detail = TraceDetail::light;
  BlockDiagResult res;
  try {
    res = block_diagonalize(P0, bo);
  } catch (const blockdiag_failure& e) {
    throw pipeline_failure(std::string("algorithm2: ") + e.what(), rep);
  }
  rep.converged = res.converged;
  rep.iterations = res.iterations;
  rep.offdiag = res.offdiag;
  rep.values = singular_values(res.Ainf).head(rank);
  if (!res.converged) {
    throw pipeline_failure("algorithm2: no convergence after " + std::to_string(res.iterations) +
                               " iterations (off-diagonal " + fmt(res.offdiag) + " |R|)",
                           rep);
  }
  rep.certified = rep.gap_lhs >= rep.gap_rhs;

  if (opts.oracle) {
    Eigen::BDCSVD<Matrix> svd(R);
    rep.has_oracle = true;
    rep.oracle = svd.singularValues().head(rank);
    rep.errors = (rep.oracle - rep.values).cwiseAbs();
    rep.max_error = rep.errors.maxCoeff();
    rep.certificate_holds = rep.max_error <= rep.bound + 1e-9 * rep.norm_R;
  }
  return rep;
}

Matrix synthetic_partitioned(const SyntheticSpec& s) {
  if (s.k < 1 || s.k >= s.n || s.n > s.m) throw invalid_input("synthetic_partitioned: need 1 <= k < n <= m");
  if (!(s.d_ratio > 0) || !(s.d_ratio < 1)) throw invalid_input("synthetic_partitioned: d_ratio must be in (0, 1)");
  if (!(s.density > 0) || s.density > 1) throw invalid_input("synthetic_partitioned: density must be in (0, 1]");
  Rng rng = make_stream(s.seed, 0, 0);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Matrix R = Matrix::Zero(s.m, s.n);
  for (Index j = 0; j < s.k; ++j) {
    const double w = 1.0 / (1.0 + double(j) / 4.0);
    for (Index i = 0; i < s.m; ++i) {
      if (U(rng) < 0.6) R(i, j) = w * U(rng);
    }
    R(j, j) += 1.0;
  }
  for (Index j = s.k; j < s.n; ++j) {
    for (Index i = 0; i < s.m; ++i) {
      if (U(rng) < s.density) R(i, j) = (i < s.k ? 0.1 : 1.0) * U(rng);
    }
  }
  // |R| moves with D, so iterate the rescaling to a fixed point.
  for (int it = 0; it < 50; ++it) {
    const double nd = operator_norm(R.bottomRightCorner(s.m - s.k, s.n - s.k));
    if (nd == 0) throw invalid_input("synthetic_partitioned: empty D block");
    const double scale = s.d_ratio * operator_norm(R) / nd;
    R.bottomRightCorner(s.m - s.k, s.n - s.k) *= scale;
    if (std::abs(scale - 1.0) < 1e-14) break;
  }
  return R;
}

SparseMatrix gamma_sparse(const GammaSparseSpec& s) {
  validate(s.sizes);
  if (s.m < 1 || s.n < 1) throw invalid_input("gamma_sparse: empty shape");
  if (s.min_nnz < 1 || s.max_nnz < s.min_nnz || s.max_nnz > s.m) {
    throw invalid_input("gamma_sparse: need 1 <= min_nnz <= max_nnz <= m");
  }
  if (s.anchors < 0 || s.anchors > std::min(s.m, s.n)) throw invalid_input("gamma_sparse: too many anchors");
  if (!(s.anchor_fraction >= 0) || !(s.anchor_fraction < 1)) {
    throw invalid_input("gamma_sparse: anchor_fraction must be in [0, 1)");
  }
  Rng size_rng = make_stream(s.seed, 0, std::uint64_t(-1));
  const Vector sizes = sample_sizes_truncated_gamma(s.n, s.sizes, size_rng);
  std::vector<double> key(sizes.data(), sizes.data() + sizes.size());
  const std::vector<Index> by_size = descending_order(key);
  std::vector<Index> anchor(s.n, -1);
  for (Index r = 0; r < s.anchors; ++r) anchor[by_size[r]] = r;

  std::vector<Eigen::Triplet<double>> trips;
  for (Index j = 0; j < s.n; ++j) {
    Rng rng = make_stream(s.seed, 0, std::uint64_t(j));
    std::uniform_int_distribution<Index> nnz_dist(s.min_nnz, s.max_nnz), any(0, s.m - 1);
    const Index l = nnz_dist(rng);
    std::unordered_set<Index> rows;
    while (Index(rows.size()) < l) rows.insert(any(rng));
    std::vector<Index> sorted(rows.begin(), rows.end());
    std::sort(sorted.begin(), sorted.end());
    double spread = sizes(j);
    if (anchor[j] >= 0) {
      trips.emplace_back(anchor[j], j, s.anchor_fraction * sizes(j));
      spread -= s.anchor_fraction * sizes(j);
    }
    for (Index r : sorted) trips.emplace_back(r, j, spread / double(l));
  }
  SparseMatrix R(s.m, s.n);
  R.setFromTriplets(trips.begin(), trips.end());  // sums an anchor hit by the spread
  R.makeCompressed();
  return R;
}

}  // namespace blockgivens
