#include <cmath>
#include <random>

#include "doctest.h"

#include "blockgivens/blockdiag.hpp"
#include "blockgivens/svd.hpp"
#include "test_util.hpp"

using namespace blockgivens;

namespace {
const double golden = (1.0 + std::sqrt(5.0)) / 2.0;

Matrix blockdiag_of(const BlockDiagResult& r) {
  const Index k = r.Ainf.rows();
  Matrix M = Matrix::Zero(k + r.Dinf.rows(), k + r.Dinf.cols());
  M.topLeftCorner(k, k) = r.Ainf;
  M.bottomRightCorner(r.Dinf.rows(), r.Dinf.cols()) = r.Dinf;
  return M;
}

// Uniform entries with the leading k columns scaled by 10.
Matrix scaled_instance(std::mt19937_64& rng, Index m, Index n, Index k) {
  Matrix R = testutil::uniform(rng, m, n);
  R.leftCols(k) *= 10.0;
  return R;
}
}  // namespace

TEST_CASE("already block diagonal") {
  Matrix R = Matrix::Zero(4, 3);
  R(0, 0) = 2;
  R(1, 1) = 1;
  R(2, 2) = 3;
  const BlockDiagResult r = block_diagonalize(BlockPartition(R, 1));
  CHECK(r.converged);
  CHECK(r.iterations == 0);
  CHECK(r.trace.records.size() == 1);
  CHECK(check_lemma11(r.trace).pass());
}

TEST_CASE("golden ratio matrix") {
  Matrix R(2, 2);
  R << 1, 1, 1, 0;
  const BlockDiagResult r = block_diagonalize(BlockPartition(R, 1));
  REQUIRE(r.converged);
  CHECK(std::abs(r.Ainf(0, 0)) == doctest::Approx(golden).epsilon(1e-12));
  CHECK(std::abs(r.Dinf(0, 0)) == doctest::Approx(golden - 1.0).epsilon(1e-12));
  CHECK(r.Ainf(0, 0) * r.Dinf(0, 0) == doctest::Approx(-1.0));  // det R = -1
  CHECK(r.offdiag <= 1e-12);
}

TEST_CASE("random 20x12, k = 4") {
  std::mt19937_64 rng(61);
  const Matrix R = scaled_instance(rng, 20, 12, 4);
  const BlockDiagResult r = block_diagonalize(BlockPartition(R, 4));
  REQUIRE(r.converged);
  const double nr = r.trace.norm_R;
  const Vector got = singular_values(blockdiag_of(r));
  const Vector ref = Eigen::BDCSVD<Matrix>(R).singularValues();
  CHECK((got - ref).cwiseAbs().maxCoeff() <= 1e-9 * nr);
  // Factors reconstruct R.
  CHECK(operator_norm(r.left.transpose() * r.final * r.right.transpose() - R) <= 1e-10 * nr);
  CHECK(orthogonality_defect(r.left) <= 1e-12 * 20);
  CHECK(orthogonality_defect(r.right) <= 1e-12 * 12);
}

TEST_CASE("trace alternates between cleared blocks") {
  std::mt19937_64 rng(67);
  for (bool start_left : {true, false}) {
    const Matrix R = scaled_instance(rng, 15, 9, 3);
    BlockDiagOptions o;
    o.start_left = start_left;
    const BlockDiagResult r = block_diagonalize(BlockPartition(R, 3), o);
    REQUIRE(r.converged);
    const double nr = r.trace.norm_R;
    for (const auto& rec : r.trace.records) {
      if (!rec.has_step) continue;
      const bool left = ((rec.t - 1) % 2 == 0) == start_left;
      CHECK((rec.step == Side::left) == left);
      if (left) CHECK(rec.norm_C <= 1e-12 * nr);
      else CHECK(rec.norm_B <= 1e-12 * nr);
    }
  }
}

TEST_CASE("stopping rules") {
  std::mt19937_64 rng(71);
  const Matrix R = scaled_instance(rng, 10, 8, 3);
  BlockDiagOptions o;
  o.max_iter = 1;
  const BlockDiagResult r = block_diagonalize(BlockPartition(R, 3), o);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 1);
  CHECK(r.trace.records.size() == 2);

  Matrix S(2, 2);
  S << 0, 1, 1, 0;
  CHECK_THROWS_AS(block_diagonalize(BlockPartition(S, 1)), blockdiag_failure);
  try {
    block_diagonalize(BlockPartition(S, 1));
  } catch (const blockdiag_failure& e) {
    CHECK(e.trace().records.size() == 1);
  }
}

TEST_CASE("sweep properties on a hand case with equality in the contraction") {
  // C = 0: the first useful step is the right rotation with tan = 2.
  Matrix R(2, 2);
  R << 1, 2, 0, 1;
  BlockDiagOptions o;
  o.start_left = false;
  const BlockDiagResult r = block_diagonalize(BlockPartition(R, 1), o);
  REQUIRE(r.trace.records.size() >= 2);
  CHECK(r.trace.records[1].norm_D == doctest::Approx(1 / std::sqrt(5.0)).epsilon(1e-14));
  const Lemma11Report rep = check_lemma11(r.trace);
  CHECK(rep.get("contract_D").pass());
  CHECK(std::abs(rep.get("contract_D").worst_margin) < 1e-14);
}

TEST_CASE("stated D contraction fails on a hand case") {
  // B = (1, 0) leaves the second column of D = I untouched, so |D_2| = 1
  // while the stated factor is 2^{-1/2}. The kernel-weighted form is tight.
  Matrix R = Matrix::Identity(3, 3);
  R(0, 1) = 1.0;
  const BlockDiagResult r = block_diagonalize(BlockPartition(R, 1));
  const Lemma11Report rep = check_lemma11(r.trace);
  const PropertyCheck& d = rep.get("contract_D");
  CHECK(d.failures > 0);
  CHECK(d.worst_margin * r.trace.norm_R == doctest::Approx(1 / std::sqrt(2.0) - 1.0).epsilon(1e-12));
  CHECK(rep.get("weighted_D").pass());
  CHECK(rep.get("contract_BC").pass());
  CHECK(rep.get("monotone").pass());
}

TEST_CASE("sweep properties over a random suite") {
  std::mt19937_64 rng(73);
  int runs = 0;
  int d_failures = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const Index n = testutil::pick(rng, 3, 10);
    const Index m = testutil::pick(rng, n, 30);
    const Index k = testutil::pick(rng, 1, std::min<Index>(4, n - 1));
    const Matrix R = scaled_instance(rng, m, n, k);
    const BlockDiagResult r = block_diagonalize(BlockPartition(R, k));
    REQUIRE(r.converged);
    ++runs;
    const Lemma11Report rep = check_lemma11(r.trace);
    for (const char* name : {"monotone", "first_step", "right_band", "contract_BC", "weighted_D", "gap"}) {
      INFO(name);
      CHECK(rep.get(name).pass());
    }
    d_failures += rep.get("contract_D").failures > 0;
    // Spectrum is conserved.
    const Vector ref = Eigen::BDCSVD<Matrix>(R).singularValues();
    CHECK((singular_values(r.final) - ref).cwiseAbs().maxCoeff() <= 1e-9 * r.trace.norm_R);
  }
  CHECK(runs == 500);
  MESSAGE("stated D contraction violated in " << d_failures << " of " << runs << " runs");
}

TEST_CASE("light trace") {
  std::mt19937_64 rng(79);
  const Matrix R = scaled_instance(rng, 12, 6, 2);
  BlockDiagOptions o;
  o.detail = TraceDetail::light;
  o.accumulate = false;
  const BlockDiagResult r = block_diagonalize(BlockPartition(R, 2), o);
  CHECK(r.converged);
  CHECK(r.left.size() == 0);
  CHECK(std::isnan(r.trace.records[0].norm_D));
  CHECK_THROWS_AS(check_lemma11(r.trace), invalid_input);
}

TEST_CASE("top singular values") {
  Matrix R = Matrix::Zero(2, 2);
  R(0, 0) = 5;
  R(1, 1) = 1;
  TopSingularValues t = top_singular_values(BlockPartition(R, 1), 1);
  CHECK(t.certified);
  CHECK(t.values(0) == doctest::Approx(5.0));

  R << 1, 1, 1, 0;
  t = top_singular_values(BlockPartition(R, 1), 1);
  CHECK(t.gap_lhs == doctest::Approx(std::sqrt(2.0)));
  CHECK(t.gap_rhs == doctest::Approx(1.0));
  CHECK(t.certified);
  CHECK(t.values(0) == doctest::Approx(golden).epsilon(1e-12));

  std::mt19937_64 rng(83);
  const Matrix T = scaled_instance(rng, 40, 12, 4);
  t = top_singular_values(BlockPartition(T, 4), 4);
  CHECK(t.certified);
  const Vector ref = Eigen::BDCSVD<Matrix>(T).singularValues();
  CHECK((t.values - ref.head(4)).cwiseAbs().maxCoeff() <= 1e-9 * ref(0));

  CHECK_THROWS_AS(top_singular_values(BlockPartition(T, 4), 5), invalid_input);
}

TEST_CASE("certified values are sound") {
  std::mt19937_64 rng(89);
  int certified = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = testutil::pick(rng, 3, 12);
    const Index m = testutil::pick(rng, n, 25);
    const Index k = testutil::pick(rng, 1, n - 1);
    Matrix R = testutil::uniform(rng, m, n);
    R.leftCols(k) *= testutil::uniform(rng, 1, 1, 1.0, 6.0)(0, 0);
    const Index i = testutil::pick(rng, 1, k);
    const TopSingularValues t = top_singular_values(BlockPartition(R, k), i);
    if (!t.certified) continue;
    ++certified;
    const Vector ref = Eigen::BDCSVD<Matrix>(R).singularValues();
    CHECK((t.values - ref.head(i)).cwiseAbs().maxCoeff() <= 1e-8 * ref(0));
  }
  CHECK(certified > 20);
}

TEST_CASE("column norm partial sums") {
  KyFanReport r = kyfan_column_bounds(Matrix::Identity(3, 3) * 2.0, 2);
  CHECK(std::abs(r.margin_top) < 1e-14);
  CHECK(std::abs(r.margin_bottom) < 1e-14);

  Matrix Y(2, 2);
  Y << 1, 1, 0, 1;
  r = kyfan_column_bounds(Y, 1);
  CHECK(r.top_sigma_sq == doctest::Approx(golden * golden).epsilon(1e-12));
  CHECK(r.top_columns_sq == doctest::Approx(2.0));
  CHECK(r.bottom_sigma_sq == doctest::Approx(1.0 / (golden * golden)).epsilon(1e-12));
  CHECK(r.bottom_columns_sq == doctest::Approx(1.0));
  CHECK(r.holds());

  std::mt19937_64 rng(97);
  for (int trial = 0; trial < 500; ++trial) {
    const Matrix M = testutil::uniform(rng, testutil::pick(rng, 1, 12), testutil::pick(rng, 1, 12));
    CHECK(kyfan_column_bounds(M, testutil::pick(rng, 1, M.cols())).holds());
  }
}
