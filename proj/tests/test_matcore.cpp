#include <cmath>
#include <random>

#include "doctest.h"

#include "blockgivens/matrix.hpp"
#include "blockgivens/spectral.hpp"
#include "blockgivens/svd.hpp"
#include "test_util.hpp"

using namespace blockgivens;

namespace {
const double golden = (1.0 + std::sqrt(5.0)) / 2.0;

Matrix m2(double a, double b, double c, double d) {
  Matrix M(2, 2);
  M << a, b, c, d;
  return M;
}
}  // namespace

TEST_CASE("svd small cases") {
  CHECK(svd(Matrix::Identity(3, 3)).sigma.isApprox(Vector::Ones(3)));
  Matrix D = Matrix::Zero(3, 3);
  D.diagonal() << 1, 3, 2;
  Vector expect(3);
  expect << 3, 2, 1;
  CHECK((svd(D).sigma - expect).norm() < 1e-14);

  const SVDFactors f = svd(m2(1, 1, 0, 1));
  CHECK(f.sigma(0) == doctest::Approx(golden).epsilon(1e-14));
  CHECK(f.sigma(1) == doctest::Approx(golden - 1.0).epsilon(1e-14));
  CHECK((f.Q * m2(1, 1, 0, 1) * f.Qp - f.Sigma()).norm() < 1e-14);
}

TEST_CASE("svd residual and orthogonality, both orderings") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Index m = testutil::pick(rng, 1, 50);
    const Index n = testutil::pick(rng, 1, 30);
    const Matrix M = testutil::uniform(rng, m, n);
    for (auto ord : {JacobiOrdering::parallel_round_robin, JacobiOrdering::serial_cyclic}) {
      const SVDFactors f = svd(M, {ord, 80});
      REQUIRE(f.Q.rows() == m);
      REQUIRE(f.Qp.rows() == n);
      const double scale = static_cast<double>(std::max(m, n));
      CHECK(operator_norm(f.Q * M * f.Qp - f.Sigma()) <= 1e-10 * scale);
      CHECK(orthogonality_defect(f.Q) <= 1e-12 * static_cast<double>(m));
      CHECK(orthogonality_defect(f.Qp) <= 1e-12 * static_cast<double>(n));
      for (Index i = 1; i < f.sigma.size(); ++i) CHECK(f.sigma(i) <= f.sigma(i - 1));
      // Independent oracle.
      const Vector ref = Eigen::BDCSVD<Matrix>(M).singularValues();
      CHECK((f.sigma - ref).cwiseAbs().maxCoeff() <= 1e-12 * scale);
    }
  }
}

TEST_CASE("thin svd reconstructs, tall and wide") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const Index m = testutil::pick(rng, 1, 120);
    const Index n = testutil::pick(rng, 1, 40);
    const Matrix M = testutil::uniform(rng, m, n);
    const ThinSVD t = thin_svd(M);
    const Index r = std::min(m, n);
    REQUIRE(t.U.rows() == m);
    REQUIRE(t.U.cols() == r);
    REQUIRE(t.V.rows() == n);
    REQUIRE(t.V.cols() == r);
    const double scale = static_cast<double>(std::max(m, n));
    CHECK(operator_norm(t.U * t.sigma.asDiagonal() * t.V.transpose() - M) <= 1e-12 * scale);
    CHECK(operator_norm(t.U.transpose() * t.U - Matrix::Identity(r, r)) <= 1e-12 * scale);
    CHECK(operator_norm(t.V.transpose() * t.V - Matrix::Identity(r, r)) <= 1e-12 * scale);
    CHECK((t.sigma - singular_values(M)).cwiseAbs().maxCoeff() <= 1e-12 * scale);
  }
}

TEST_CASE("thin svd leaves null directions zero") {
  Matrix M = Matrix::Zero(5, 3);
  M(0, 0) = 2.0;
  M(1, 1) = 1.0;
  const ThinSVD t = thin_svd(M);
  CHECK(t.sigma(2) == 0.0);
  CHECK(t.U.col(2).norm() == 0.0);
  CHECK(t.V.col(2).norm() == doctest::Approx(1.0));
  const ThinSVD w = thin_svd(Matrix(M.transpose()));
  CHECK(w.V.col(2).norm() == 0.0);
  CHECK(w.U.col(2).norm() == doctest::Approx(1.0));
  CHECK((t.U * t.sigma.asDiagonal() * t.V.transpose() - M).norm() < 1e-15);
}

TEST_CASE("svd rank deficient and zero") {
  Matrix Z = Matrix::Zero(4, 3);
  const SVDFactors f = svd(Z);
  CHECK(f.sigma.norm() == 0.0);
  CHECK(orthogonality_defect(f.Q) < 1e-14);
  Matrix R = Matrix::Ones(5, 3);
  const SVDFactors g = svd(R);
  CHECK(g.sigma(0) == doctest::Approx(std::sqrt(15.0)));
  CHECK(g.sigma(1) < 1e-13);
  CHECK(orthogonality_defect(g.Q) < 1e-13);
  CHECK(operator_norm(g.Q * R * g.Qp - g.Sigma()) < 1e-13);
}

TEST_CASE("svd rejects non-finite input") {
  Matrix M = Matrix::Ones(2, 2);
  M(0, 1) = std::nan("");
  CHECK_THROWS_AS(svd(M), invalid_input);
}

TEST_CASE("operator norm") {
  CHECK(operator_norm(Matrix::Zero(3, 2)) == 0.0);
  Matrix D = Matrix::Zero(3, 3);
  D.diagonal() << 3, 2, 1;
  CHECK(operator_norm(D) == doctest::Approx(3.0));
  CHECK(operator_norm(m2(1, 1, 0, 1)) == doctest::Approx(1.6180339887).epsilon(1e-10));
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    const Matrix M = testutil::uniform(rng, testutil::pick(rng, 1, 20), testutil::pick(rng, 1, 20));
    CHECK(operator_norm(M) == doctest::Approx(svd(M).sigma(0)).epsilon(1e-12));
  }
}

TEST_CASE("schur test bound") {
  CHECK(schur_test_bound(m2(0, 1, 1, 0)) == 1.0);
  CHECK(schur_test_bound(Matrix::Ones(2, 2)) == 2.0);
  CHECK(schur_test_bound(m2(1, 1, 0, 1)) == 2.0);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 1000; ++t) {
    const Matrix M = testutil::uniform(rng, testutil::pick(rng, 1, 12), testutil::pick(rng, 1, 12));
    CHECK(schur_test_bound(M) >= operator_norm(M) * (1 - 1e-14));
  }
  // Scaled permutations: equality.
  for (int t = 0; t < 20; ++t) {
    const Index n = testutil::pick(rng, 2, 9);
    Eigen::PermutationMatrix<Eigen::Dynamic> P(n);
    P.setIdentity();
    std::shuffle(P.indices().data(), P.indices().data() + n, rng);
    const Matrix M = 2.5 * Matrix(P);
    CHECK(schur_test_bound(M) == doctest::Approx(operator_norm(M)).epsilon(1e-14));
  }
}

TEST_CASE("psd_apply") {
  const Matrix S = m2(2, 1, 1, 2);
  CHECK((psd_apply([](double t) { return t; }, S) - S).norm() < 1e-14);

  Matrix D = Matrix::Zero(2, 2);
  D(1, 1) = 3.0;
  const Matrix F = psd_apply([](double t) { return 1.0 / std::sqrt(1.0 + t); }, D);
  CHECK((F - Vector(Eigen::Vector2d(1.0, 0.5)).asDiagonal().toDenseMatrix()).norm() < 1e-15);

  // sqrt of [[2,1],[1,2]]: eigenpairs (3, (1,1)/sqrt2), (1, (1,-1)/sqrt2).
  const Matrix R = psd_apply([](double t) { return std::sqrt(t); }, S);
  const double a = (std::sqrt(3.0) + 1.0) / 2.0;
  const double b = (std::sqrt(3.0) - 1.0) / 2.0;
  CHECK((R - m2(a, b, b, a)).norm() < 1e-14);
  CHECK((R * R - S).norm() < 1e-14);

  CHECK_THROWS_AS(psd_apply([](double t) { return t; }, m2(1, 2, 0, 1)), invalid_input);
  CHECK_THROWS_AS(psd_apply([](double t) { return t; }, m2(1, 0, 0, -1)), invalid_input);
}

TEST_CASE("psd_apply follows the monotone spectral rule") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 200; ++t) {
    const Index n = testutil::pick(rng, 1, 12);
    const Matrix X = testutil::uniform(rng, testutil::pick(rng, 1, 15), n);
    const Matrix S = X.transpose() * X;
    const Vector s = sym_eigenvalues(S);
    auto dec = [](double x) { return 1.0 / std::sqrt(1.0 + x); };
    const Vector got = singular_values(psd_apply(dec, S));
    for (Index i = 0; i < n; ++i) CHECK(std::abs(got(i) - dec(std::max(s(n - 1 - i), 0.0))) < 1e-10);
    auto inc = [](double x) { return std::sqrt(x); };
    const Vector got2 = singular_values(psd_apply(inc, S));
    for (Index i = 0; i < n; ++i) CHECK(std::abs(got2(i) - inc(std::max(s(i), 0.0))) < 1e-7);
  }
}

TEST_CASE("submatrix slicing") {
  Matrix L(4, 4);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j) L(i, j) = 10.0 * static_cast<double>(i + 1) + static_cast<double>(j + 1);
  CHECK(submatrix(L, 1, 4, 1, 4) == L);
  CHECK(submatrix(Matrix::Identity(3, 3), 2, 3, 2, 3) == Matrix::Identity(2, 2));

  // Lower band c2 = L[2:4, 2:4] (k = 1); its rows from index i - k = 1 for i = 2.
  const Matrix c2 = submatrix(L, 2, 4, 2, 4);
  const Matrix sl = submatrix(c2, 1, 3, 1, 3);
  CHECK(sl.rows() == 3);
  CHECK(sl(0, 0) == 22.0);
  CHECK(sl(2, 1) == 43.0);
  // Composition: slicing a slice equals one direct slice.
  CHECK(submatrix(c2, 2, 3, 1, 2) == submatrix(L, 3, 4, 2, 3));
  CHECK(submatrix(L, 3, 2, 1, 4).rows() == 0);

  CHECK_THROWS_AS(submatrix(L, 0, 2, 1, 1), invalid_input);
  CHECK_THROWS_AS(submatrix(L, 1, 5, 1, 1), invalid_input);
}

TEST_CASE("eigenvalue shift and Weyl perturbation") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 1000; ++t) {
    const Index n = testutil::pick(rng, 1, 8);
    const Matrix X = testutil::uniform(rng, n + 2, n);
    const Matrix Y = testutil::uniform(rng, n + 1, n);
    const Matrix S1 = X.transpose() * X;
    const Matrix S2 = Y.transpose() * Y;
    const Vector l12 = sym_eigenvalues(S1 + S2);
    const Vector l1 = sym_eigenvalues(S1);
    const double lmin = sym_eigenvalues(S2)(n - 1);
    for (Index i = 0; i < n; ++i) CHECK(l12(i) >= l1(i) + lmin - 1e-12);

    const Index m = testutil::pick(rng, 1, 9);
    const Matrix A = testutil::uniform(rng, m, n);
    const Matrix E = testutil::uniform(rng, m, n, -0.3, 0.3);
    const Vector sa = singular_values(A);
    const Vector sae = singular_values(A + E);
    const double e1 = operator_norm(E);
    for (Index i = 0; i < sa.size(); ++i) CHECK(std::abs(sae(i) - sa(i)) <= e1 + 1e-12);
  }
}

TEST_CASE("block partition") {
  Matrix R = Matrix::Ones(5, 3);
  BlockPartition p(R, 1);
  CHECK(p.A().rows() == 1);
  CHECK(p.B().cols() == 2);
  CHECK(p.C().rows() == 4);
  CHECK(p.D().rows() == 4);
  CHECK(p.D().cols() == 2);
  CHECK(p.zeroed_corner().bottomRightCorner(4, 2).norm() == 0.0);
  CHECK_THROWS_AS(BlockPartition(R, 3), invalid_input);
  CHECK_THROWS_AS(BlockPartition(R, 0), invalid_input);
  CHECK_THROWS_AS(BlockPartition(Matrix::Ones(2, 3), 1), invalid_input);
}
