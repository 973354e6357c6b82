#include "blockgivens/verify.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <random>
#include <sstream>

#include <Eigen/SVD>

#include "blockgivens/spectral.hpp"
#include "blockgivens/svd.hpp"

namespace blockgivens {

void VerifyCheck::record(double margin) {
  ++evaluated;
  worst_margin = std::min(worst_margin, margin);
  if (!(margin >= 0.0)) ++failures;
}

bool VerifyReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.pass(); });
}

namespace {

class Suite {
public:
  Suite(std::string name, const VerifyOptions& opts, std::uint64_t salt)
      : name_(std::move(name)), opts_(opts), rng_(make_stream(opts.seed, salt, 0)) {}

  VerifyCheck& check(const std::string& name, bool advisory = false) {
    auto it = index_.find(name);
    if (it != index_.end()) return checks_[it->second];
    VerifyCheck c;
    c.suite = name_;
    c.name = name;
    c.advisory = advisory;
    index_[name] = checks_.size();
    checks_.push_back(c);
    return checks_.back();
  }

  int trials(int fallback) const { return opts_.trials > 0 ? opts_.trials : fallback; }
  Rng& rng() { return rng_; }
  std::uint64_t seed() const { return opts_.seed; }

  Index pick(Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(rng_); }
  Matrix uniform(Index m, Index n, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix M(m, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < m; ++i) M(i, j) = u(rng_);
    return M;
  }
  BlockPartition partition(Index max_m, Index max_n, Index max_k) {
    const Index n = pick(2, max_n);
    const Index m = pick(n, std::max(n, max_m));
    const Index k = pick(1, std::min(max_k, n - 1));
    return BlockPartition(uniform(m, n), k);
  }

  std::vector<VerifyCheck> take() { return {checks_.begin(), checks_.end()}; }

private:
  std::string name_;
  VerifyOptions opts_;
  Rng rng_;
  std::deque<VerifyCheck> checks_;  // stable references
  std::map<std::string, std::size_t> index_;
};

Vector oracle_sigma(const Matrix& M) { return Eigen::BDCSVD<Matrix>(M).singularValues(); }

double max_abs_diff(const Vector& a, const Vector& b) {
  return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

// ---- suites ----

void suite_matcore(Suite& s) {
  const int N = s.trials(200);
  for (int t = 0; t < N; ++t) {
    const Index m = s.pick(1, 50), n = s.pick(1, 30);
    const Matrix M = s.uniform(m, n);
    const double scale = double(std::max(m, n));
    const Vector ref = oracle_sigma(M);
    for (auto ord : {JacobiOrdering::parallel_round_robin, JacobiOrdering::serial_cyclic}) {
      const SVDFactors f = svd(M, {ord, 80});
      s.check("svd_residual").record(1e-10 * scale - operator_norm(f.Q * M * f.Qp - f.Sigma()));
      s.check("svd_orthogonality")
          .record(std::min(1e-12 * double(m) - orthogonality_defect(f.Q),
                           1e-12 * double(n) - orthogonality_defect(f.Qp)));
      bool sorted = true;
      for (Index i = 1; i < f.sigma.size(); ++i) sorted = sorted && f.sigma(i) <= f.sigma(i - 1);
      s.check("svd_sorted").require(sorted);
      s.check("svd_oracle").record(1e-12 * scale - max_abs_diff(f.sigma, ref));
    }
    const ThinSVD th = thin_svd(M);
    s.check("thin_svd_residual")
        .record(1e-10 * scale - operator_norm(th.U * th.sigma.asDiagonal() * th.V.transpose() - M));
    const double nm = ref(0);
    s.check("operator_norm_oracle").record(1e-12 * scale * std::max(1.0, nm) - std::abs(operator_norm(M) - nm));
  }
}

void suite_givens(Suite& s) {
  const int N = s.trials(1000);
  for (int t = 0; t < N; ++t) {
    const BlockPartition p = s.partition(40, 30, 8);
    const Matrix& R = p.base();
    const Index m = p.rows(), n = p.cols(), k = p.k();
    const double nr = operator_norm(R);
    try {
      const BlockGivens gr = build_right_rotation(p);
      const Matrix RG = R * gr.matrix;
      s.check("right_orthogonality").record(1e-11 * double(n) - orthogonality_defect(gr.matrix));
      s.check("right_annihilates_B").record(1e-10 * nr - operator_norm(RG.topRightCorner(k, n - k)));
      const BlockRotation rot = BlockRotation::right(gr.tangent);
      s.check("implicit_right_apply").record(1e-10 * nr - operator_norm(rot.apply_right(R) - RG));

      const BlockGivens gl = build_left_rotation(p);
      const Matrix GR = gl.matrix * R;
      s.check("left_orthogonality").record(1e-11 * double(m) - orthogonality_defect(gl.matrix));
      s.check("left_annihilates_C").record(1e-10 * nr - operator_norm(GR.bottomLeftCorner(m - k, k)));
      const Vector sR = singular_values(R);
      s.check("spectrum_preserved")
          .record(1e-10 * nr - max_abs_diff(singular_values(gl.matrix * R * gr.matrix), sR));
    } catch (const invalid_input&) {
      s.check("singular_A_skipped", true).record(0.0);
    }
  }
}

void suite_blockdiag(Suite& s) {
  const int N = s.trials(500);
  for (int t = 0; t < N; ++t) {
    const Index n = s.pick(3, 10);
    const Index m = s.pick(n, 30);
    const Index k = s.pick(1, std::min<Index>(4, n - 1));
    Matrix R = s.uniform(m, n);
    R.leftCols(k) *= 10.0;
    BlockDiagResult r;
    try {
      r = block_diagonalize(BlockPartition(R, k));
    } catch (const blockdiag_failure&) {
      s.check("converged").require(false);
      continue;
    }
    s.check("converged").require(r.converged);
    s.check("offdiag").record(1e-12 - r.offdiag);
    Matrix M = Matrix::Zero(m, n);
    M.topLeftCorner(k, k) = r.Ainf;
    M.bottomRightCorner(m - k, n - k) = r.Dinf;
    s.check("spectrum_oracle").record(1e-9 * r.trace.norm_R - max_abs_diff(singular_values(M), oracle_sigma(R)));
    const Lemma11Report rep = check_lemma11(r.trace, 1e-9);
    for (const PropertyCheck& c : rep.checks) {
      VerifyCheck& v = s.check(c.name, c.advisory);
      v.record(c.evaluated == 0 ? 0.0 : c.worst_margin + rep.tol);
    }
  }
  s.check("contract_D").note = "margins are relative to |R| and include the 1e-9 allowance";
}

void suite_bounds(Suite& s) {
  const int N = s.trials(1000);
  for (int t = 0; t < N; ++t) {
    const BlockPartition p = s.partition(30, 20, 6);
    const Index i = s.pick(1, p.cols());
    const double nD = operator_norm(p.D());
    MuQuantities mu;
    for (const auto& r : mu_bounds(p, i, &mu)) s.check("mu_contains").record(r.slack + 1e-10);
    s.check("mu_bar_le_norm_D").record(nD + 1e-12 - mu.mu_bar);
    for (const auto& r : weyl_gap_bounds(p, i)) s.check("weyl_contains").record(r.slack + 1e-10);
    for (const auto& r : small_rank_bounds(p, i)) s.check("small_rank_contains").record(r.slack + 1e-10);
    try {
      for (const auto& r : theorem2_bounds(p)) s.check("sigma_k1_contains").record(r.slack + 1e-10);
    } catch (const invalid_input&) {
      s.check("singular_A_skipped", true).record(0.0);
    }
    const Index k = s.pick(1, 6);
    try {
      s.check("square_case_contains").record(corollary5_bound(BlockPartition(s.uniform(2 * k, 2 * k), k)).slack + 1e-10);
    } catch (const invalid_input&) {
      s.check("singular_A_skipped", true).record(0.0);
    }
  }
  // Plane rotation with its corner removed.
  const double c = 0.6, sn = 0.8;
  Matrix r0(2, 2);
  r0 << c, -sn, sn, 0;
  s.check("plane_rotation_closed_form")
      .record(1e-12 - std::abs(plane_rotation_corner_sigma2(c, sn) - oracle_sigma(r0)(1)));
  // A = B = C = 1, D = 0.
  Matrix R(2, 2);
  R << 1, 1, 1, 0;
  for (const auto& b : theorem2_bounds(BlockPartition(R, 1))) {
    if (b.formula != "thm2_R0") continue;
    s.check("scalar_case_bound").record(1e-12 - std::abs(b.upper - 1 / std::sqrt(2.0)));
    s.check("scalar_case_slack").record(1e-3 - std::abs(b.slack - (1 / std::sqrt(2.0) - (std::sqrt(5.0) - 1) / 2)));
  }
}

void suite_theorem3(Suite& s) {
  const SandwichReport hand = theorem3_bounds(binary_profile(4, {2, 2}));
  s.check("hand_s1_pass").require(hand.s1_pass);
  s.check("hand_upper").record(1e-12 - std::abs(hand.rows[0].pure_upper - 4.0));
  s.check("hand_sigma").record(1e-12 - std::max(std::abs(hand.rows[0].oracle - 3.0), std::abs(hand.rows[1].oracle - 1.0)));
  s.check("hand_lower_tight").record(1e-12 - std::abs(hand.rows[1].pure_slack));
  s.check("hand_contains").require(hand.contains_pure());

  const int N = s.trials(100);
  int passing = 0;
  for (int attempt = 0; passing < N && attempt < 20 * N; ++attempt) {
    std::vector<Index> l(40);
    for (auto& x : l) x = s.pick(5, 50);
    const ColumnProfile p = binary_profile(2000, l);
    const SandwichReport r = theorem3_bounds(p);
    if (!r.s1_pass) continue;
    ++passing;
    for (const auto& row : r.rows) s.check("random_contains").record(row.slack + 1e-12);
    s.check("random_consequences").require(check_s1(p).consequences_hold());
  }
  s.check("random_profiles_found").require(passing == N);
}

void suite_corollaries(Suite& s) {
  const std::uint64_t seed = s.seed();
  const ColumnSpec pair{ColumnKind::binary, 4, 2.0, 0.0};
  const PairMomentReport lm = lemma13_stats(pair, pair, 100000, seed);
  s.check("pair_exact_law").record(1e-12 - std::max(std::abs(lm.expected_mean - 1.0), std::abs(lm.expected_var - 1.0 / 3.0)));
  s.check("pair_mean_3se").record(3.0 - std::abs(lm.mean_z()));
  s.check("pair_var_3se").record(3.0 - std::abs(lm.var_z()));

  const ColumnSpec x{ColumnKind::fixed_size_norm, 50, 10.0, 2.0};
  const ColumnSpec y{ColumnKind::fixed_size_norm, 50, 6.0, 1.2};
  const PairMomentReport ln = lemma13_stats(x, y, 100000, seed);
  s.check("pair_fixed_norm_4se").record(4.0 - std::max(std::abs(ln.mean_z()), std::abs(ln.var_z())));

  const ColumnSpec w{ColumnKind::fixed_size, 30, 6.0, 0.0};
  const PairMomentReport le = lemma13_stats(w, w, 20000, seed);
  VerifyCheck& adv = s.check("pair_expected_norm_var", true);
  adv.record(4.0 - std::abs(le.var_z()));
  adv.note = "variance with expected norms substituted; reported only";

  std::vector<Index> l10(10);
  for (auto& v : l10) v = s.pick(3, 40);
  const EmpiricalGram eg = empirical_gram(binary_model(200, l10, seed), 10000);
  s.check("empirical_gram_5se").record(5.0 - eg.max_z);

  const Vector exact = binary_exact_mean_sq_sigma(4, {2, 2});
  const FluctuationReport small = fluctuation_bounds(binary_model(4, {2, 2}, seed), 20000);
  for (Index i = 0; i < 2; ++i) {
    const auto& row = small.rows[std::size_t(i)];
    s.check("exact_band").record(row.band_frobenius - std::abs(exact(i) - row.sigma_G));
  }
  s.check("exact_band_width").record(1e-12 - std::abs(small.rows[0].band_frobenius - 2.0 / std::sqrt(3.0)));

  std::vector<Index> l20(20);
  for (auto& v : l20) v = s.pick(5, 50);
  const FluctuationReport big = fluctuation_bounds(binary_model(500, l20, seed), 10000);
  s.check("bands_hold").require(big.bands_hold());
  s.check("partial_sums_hold").require(big.partial_sums_hold());
  for (const auto& row : big.rows) s.check("mean_in_sandwich").require(row.in_sandwich);
}

void suite_gamma(Suite& s) {
  Rng rng = make_stream(s.seed(), 7, 0);
  const Vector a4 = sample_sizes_truncated_gamma(10000, {4.0, 0.05, 1.0}, rng);
  s.check("rho_alpha4").record(0.02 - std::abs(moment_ratio(a4) / std::sqrt(1.25) - 1.0));
  const Vector a1 = sample_sizes_truncated_gamma(10000, {1.0, 0.01, 1.0}, rng);
  VerifyCheck& c1 = s.check("rho_alpha1");
  c1.record(0.02 - std::abs(moment_ratio(a1) / std::sqrt(2.0) - 1.0));
  c1.note = "beta = 0.01";

  const Vector y = sample_sizes_truncated_gamma(100000, {1.0, 0.1, 1.0}, rng);
  const double se = std::sqrt((y.array() - y.mean()).square().sum() / double(y.size() - 1) / double(y.size()));
  s.check("truncated_mean_3se").record(3.0 * se - std::abs(y.mean() - truncated_gamma_moments({1.0, 0.1, 1.0}).mean));
  s.check("truncated_support").require(y.minCoeff() >= 1.0);

  const GammaResampling r = corollary10_resampling(2000, 50, {1.0, 0.1, 1.0}, s.trials(200), s.seed());
  s.check("resampled_containment_95").record(r.fraction() - 0.95);
  s.check("resampled_density_3se").record(3.0 * r.delta_se - std::abs(r.mean_delta - r.delta_truncated));
}

// Independent i* scan on a dense copy.
Index scan_i_star(const Matrix& R, Index k, double alpha) {
  const Index n = R.cols();
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) order[std::size_t(j)] = j;
  const Vector norms = R.colwise().norm().transpose();
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return norms(a) > norms(b); });
  Vector right = Vector::Zero(R.rows());
  for (Index j = k; j < n; ++j) right += R.col(order[std::size_t(j)]);
  const double thr = std::sqrt(1.0 + std::sqrt(1.0 + 1.0 / alpha)) *
                     std::sqrt(R.col(order[std::size_t(k)]).sum() * right.maxCoeff());
  Index best = 0;
  for (Index i = 1; i < k; ++i) {
    if (norms(order[std::size_t(i - 1)]) >= thr) best = i;
  }
  return best;
}

void suite_pipeline(Suite& s) {
  // Matrix Market round trip.
  {
    GammaSparseSpec g;
    g.m = 300;
    g.n = 40;
    g.min_nnz = 3;
    g.max_nnz = 9;
    g.anchors = 10;
    g.seed = s.seed();
    const SparseMatrix R = gamma_sparse(g);
    std::stringstream a, b;
    write_matrix_market(R, a);
    const SparseMatrix back = read_matrix_market(a);
    write_matrix_market(back, b);
    s.check("mm_round_trip").require(a.str() == b.str() && Matrix(back) == Matrix(R));
  }

  // Threshold factor at alpha = 1 with a 100:1 column-to-row size ratio.
  {
    SparseMatrix R(1000, 5);
    std::vector<Eigen::Triplet<double>> tr;
    for (Index i = 0; i < 200; ++i) tr.emplace_back(300 + i, 0, 1.0);
    for (Index i = 0; i < 150; ++i) tr.emplace_back(500 + i, 1, 1.0);
    for (Index i = 0; i < 100; ++i) tr.emplace_back(i, 2, 1.0);
    for (Index i = 0; i < 50; ++i) tr.emplace_back(100 + i, 3, 1.0);
    for (Index i = 0; i < 25; ++i) tr.emplace_back(200 + i, 4, 1.0);
    R.setFromTriplets(tr.begin(), tr.end());
    const PartitionPlan p = plan_partition(R, 2, 1.0);
    const double factor = p.threshold / p.next_size;
    s.check("threshold_factor").record(1e-12 - std::abs(factor - std::sqrt(1 + std::sqrt(2.0)) / 10));
  }

  const int N = s.trials(20);
  for (int t = 0; t < N; ++t) {
    GammaSparseSpec g;
    g.m = 400;
    g.n = 60;
    g.sizes = {1.0, 0.05, 1.0};
    g.min_nnz = 5;
    g.max_nnz = 15;
    g.anchors = 20;
    g.seed = s.seed() * 1000 + std::uint64_t(t);
    const SparseMatrix R = gamma_sparse(g);
    const PartitionPlan p = plan_partition(R, 20, 1.0);
    s.check("i_star_scan").require(p.i_star == scan_i_star(Matrix(R), 20, 1.0));
    s.check("i_star_le_k").require(p.i_star <= p.k);
    bool sorted = true;
    for (Index j = 1; j < p.column_norms.size(); ++j) sorted = sorted && p.column_norms(j) <= p.column_norms(j - 1);
    s.check("norms_non_increasing").require(sorted);
    s.check("plan_idempotent").require(plan_partition(apply_plan(R, p), 20, 1.0).identity());

    SyntheticSpec sp;
    sp.seed = s.seed() * 1000 + std::uint64_t(t);
    const Matrix S = synthetic_partitioned(sp);
    Algorithm2Options o;
    o.oracle = true;
    const ApproxReport a = algorithm2(S, 20, 5, o);
    s.check("bound_is_twice_norm_D").record(1e-12 * a.norm_R - std::abs(a.bound - 2 * operator_norm(S.bottomRightCorner(sp.m - sp.k, sp.n - sp.k))));
    s.check("certificate").record(a.bound + 1e-9 * a.norm_R - a.max_error);
    s.check("within_002_norm_R").record(0.02 * a.norm_R - a.max_error);
    s.check("certified").require(a.certified);
  }

  // D = 0: values are exact.
  {
    Matrix R = s.uniform(30, 12, 0.0, 1.0);
    R.leftCols(4) *= 10.0;
    R.bottomRightCorner(26, 8).setZero();
    Algorithm2Options o;
    o.oracle = true;
    const ApproxReport a = algorithm2(R, 4, 4, o);
    s.check("zero_D_exact").record(1e-9 * a.norm_R - a.max_error);
    s.check("zero_D_bound").require(a.bound == 0.0);
  }

  // Scaled-down sparse pipeline: plan at k = 100, certify i* values.
  {
    GammaSparseSpec g;
    g.seed = s.seed();
    const SparseMatrix R = gamma_sparse(g);
    const PartitionPlan p = plan_partition(R, 100, 1.0);
    s.check("scaled_i_star_positive").require(p.i_star >= 1);
    if (p.i_star >= 1) {
      Algorithm2Options o;
      o.oracle = true;
      try {
        const ApproxReport a = algorithm2(Matrix(apply_plan(R, p)), p.k, p.i_star, o);
        s.check("scaled_certified").require(a.certified);
        s.check("scaled_certificate").record(a.bound + 1e-9 * a.norm_R - a.max_error);
      } catch (const pipeline_failure& e) {
        VerifyCheck& c = s.check("scaled_certified");
        c.require(false);
        c.note = e.what();
      }
    }
  }
}

using SuiteFn = void (*)(Suite&);

const std::vector<std::pair<std::string, SuiteFn>>& registry() {
  static const std::vector<std::pair<std::string, SuiteFn>> r = {
      {"matcore", suite_matcore},         {"givens", suite_givens},   {"blockdiag", suite_blockdiag},
      {"bounds", suite_bounds},           {"theorem3", suite_theorem3}, {"corollaries", suite_corollaries},
      {"gamma", suite_gamma},             {"pipeline", suite_pipeline},
  };
  return r;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [n, f] : registry()) v.push_back(n);
    v.push_back("all");
    return v;
  }();
  return names;
}

bool known_suite(const std::string& name) {
  const auto& n = suite_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

VerifyReport run_verify(const std::string& suite, const VerifyOptions& opts) {
  if (!known_suite(suite)) throw invalid_input("unknown suite '" + suite + "'");
  if (opts.trials < 0) throw invalid_input("trials must be non-negative");
  VerifyReport rep;
  rep.seed = opts.seed;
  rep.trials = opts.trials;
  const auto& reg = registry();
  for (std::size_t i = 0; i < reg.size(); ++i) {
    if (suite != "all" && suite != reg[i].first) continue;
    Suite s(reg[i].first, opts, std::uint64_t(i) + 1);
    reg[i].second(s);
    rep.suites.push_back(reg[i].first);
    for (auto& c : s.take()) rep.checks.push_back(std::move(c));
  }
  return rep;
}

Json to_json(const VerifyCheck& c) {
  Json j;
  j["suite"] = c.suite;
  j["name"] = c.name;
  j["pass"] = c.pass();
  j["advisory"] = c.advisory;
  j["evaluated"] = c.evaluated;
  j["failures"] = c.failures;
  j["worst_margin"] = std::isfinite(c.worst_margin) ? Json(c.worst_margin) : Json(nullptr);
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

Json to_json(const VerifyReport& r) {
  Json j;
  j["suites"] = r.suites;
  j["seed"] = r.seed;
  j["trials"] = r.trials;
  j["pass"] = r.pass();
  Json a = Json::array();
  for (const auto& c : r.checks) a.push_back(to_json(c));
  j["checks"] = a;
  return j;
}

}  // namespace blockgivens
