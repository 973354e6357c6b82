#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "blockgivens/randmat.hpp"
#include "blockgivens/spectral.hpp"
#include "test_util.hpp"

using namespace blockgivens;

namespace {

ColumnProfile hand_profile() { return binary_profile(4, {2, 2}); }

std::vector<Index> random_counts(std::mt19937_64& rng, Index k, Index lo, Index hi) {
  std::vector<Index> l(k);
  for (auto& x : l) x = testutil::pick(rng, lo, hi);
  return l;
}

// Fixed-norm profile with n_i^2 >= s_i; sizes in [1, smax].
ColumnProfile random_fixed_norm_profile(std::mt19937_64& rng, Index m, Index k, double smax) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector s(k), n(k);
  for (Index i = 0; i < k; ++i) {
    s(i) = 1.0 + (smax - 1.0) * u(rng);
    const double lo = std::max(std::sqrt(s(i)), s(i) / std::sqrt(double(m)));
    n(i) = lo + (s(i) - lo) * u(rng);
  }
  return fixed_norm_profile(m, s, n);
}

}  // namespace

TEST_CASE("density of profiles and sub-matrices") {
  CHECK(density(binary_profile(5, {5, 5, 5})) == doctest::Approx(1.0));
  CHECK(density(hand_profile()) == doctest::Approx(0.5));
  CHECK(density(binary_profile(100, {1})) == doctest::Approx(0.01));

  Matrix X(3, 2);
  X << 1, 0, 2, 4, 0, 3;
  CHECK(density(X) == doctest::Approx(10.0 / 6.0));
  CHECK(density(X, {1, 2}, {1}) == doctest::Approx(3.5));
  CHECK_THROWS_AS(density(X, {}, {0}), invalid_input);
  CHECK_THROWS_AS(density(X, {3}, {0}), invalid_input);
}

TEST_CASE("moment ratio") {
  CHECK(moment_ratio(Vector::Constant(7, 3.5)) == doctest::Approx(1.0));
  Vector v(3);
  v << 1, 2, 3;
  CHECK(moment_ratio(v) == doctest::Approx(1.0801234497346435).epsilon(1e-14));
  const Index k = 10000;
  const Vector ramp = Vector::LinSpaced(k, 1.0, double(k));
  CHECK(std::abs(moment_ratio(ramp) - 2.0 / std::sqrt(3.0)) < 1.0 / double(k));
  // rho^2 = 1 + (coefficient of variation)^2 with population variance.
  const double cv2 = (v.array() - v.mean()).square().mean() / (v.mean() * v.mean());
  CHECK(moment_ratio(v) * moment_ratio(v) == doctest::Approx(1.0 + cv2));
  CHECK_THROWS_AS(moment_ratio(Vector()), invalid_input);
  v(1) = 0;
  CHECK_THROWS_AS(moment_ratio(v), invalid_input);
}

TEST_CASE("profile validation") {
  ColumnProfile p = hand_profile();
  p.expected_sq_norms = Vector::Constant(2, 2.0);
  CHECK_THROWS_AS(validate(p), invalid_input);
  Vector s(1), n(1);
  s << 4;
  n << 5;  // norm larger than size
  CHECK_THROWS_AS(fixed_norm_profile(10, s, n), invalid_input);
  n << 1;  // below s / sqrt(m) = 4 / sqrt(10)
  CHECK_THROWS_AS(fixed_norm_profile(10, s, n), invalid_input);
  n << 2;
  CHECK(fixed_norm_profile(10, s, n).L == 4);  // s^2 / n^2
}

TEST_CASE("structural conditions") {
  SUBCASE("zero-one profile") {
    const S1Report r = check_s1(binary_profile(50, {3, 7, 12, 1}));
    CHECK(r.pass());
    CHECK(r.consequences_hold());
    CHECK(r.get("size_vs_norm").margin == doctest::Approx(0.0));
    CHECK(moment_ratio(derived_stats(binary_profile(50, {3, 7, 12, 1})).xi) ==
          doctest::Approx(1.0));
  }
  SUBCASE("hand case") {
    const S1Report r = check_s1(hand_profile());
    CHECK(r.pass());
    CHECK(r.get("xi_moment_ratio").lhs == doctest::Approx(1.0));
    CHECK(r.get("xi_moment_ratio").rhs == doctest::Approx(2.0));
  }
  SUBCASE("norm below size") {
    Vector s(2), n(2);
    s << 10, 4;
    n << 2, 2;
    const S1Report r = check_s1(fixed_norm_profile(100, s, n));
    CHECK_FALSE(r.pass());
    CHECK_FALSE(r.get("size_vs_norm").pass);
    CHECK(r.get("size_vs_norm").margin == doctest::Approx(-6.0));
  }
  SUBCASE("size above m") {
    CHECK_FALSE(check_s1(binary_profile(5, {5})).get("max_size").margin < 0);
    Vector s(1), n(1);
    s << 12;
    n << 11;
    CHECK_FALSE(check_s1(fixed_norm_profile(10, s, n)).get("max_size").pass);
  }
}

// Sparse profiles (L <= m/4). As l_i approaches m, H_ii = 1 - l_i/m goes to 0
// and |Z^-1| outgrows any c L / m slack.
TEST_CASE("implied inequalities and Z factor norms over passing profiles") {
  std::mt19937_64 rng(1201);
  int passing = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const Index m = testutil::pick(rng, 120, 400);
    const Index k = testutil::pick(rng, 1, 25);
    const ColumnProfile p = trial % 2 == 0
                                ? binary_profile(m, random_counts(rng, k, 1, std::min<Index>(m / 4, 40)))
                                : random_fixed_norm_profile(rng, m, k, 30.0);
    const S1Report r = check_s1(p);
    if (!r.pass()) continue;
    ++passing;
    for (const auto& c : r.consequences) {
      INFO("trial " << trial << " " << c.name << " margin " << c.margin);
      CHECK(c.pass);
    }
    const ZNormCheck z = z_norm_check(p);
    INFO("trial " << trial << " |Z| " << z.norm_Z << " <= " << z.bound_Z << ", |Z^-1| "
                  << z.norm_Zinv << " <= " << z.bound_Zinv);
    CHECK(z.holds());
  }
  CHECK(passing > 200);
}

TEST_CASE("expected Gram matrix") {
  SUBCASE("single column") {
    Vector s(1), n(1);
    s << 9;
    n << 5;
    const ExpectedGram g = expected_gram(fixed_norm_profile(30, s, n));
    CHECK(g.G.rows() == 1);
    CHECK(g.G(0, 0) == doctest::Approx(25.0));
  }
  SUBCASE("hand case") {
    const ExpectedGram g = expected_gram(hand_profile());
    Matrix want(2, 2);
    want << 2, 1, 1, 2;
    CHECK((g.G - want).cwiseAbs().maxCoeff() < 1e-15);
    const Vector ev = sym_eigenvalues(g.G);
    CHECK(ev(0) == doctest::Approx(3.0));
    CHECK(ev(1) == doctest::Approx(1.0));
    CHECK(g.factor_residual <= 1e-12);
  }
  SUBCASE("factorization on random profiles") {
    std::mt19937_64 rng(44);
    for (int t = 0; t < 100; ++t) {
      const ColumnProfile p = random_fixed_norm_profile(rng, testutil::pick(rng, 10, 500),
                                                        testutil::pick(rng, 1, 30), 20.0);
      CHECK(expected_gram(p).factor_residual <= 1e-12);
    }
  }
  SUBCASE("sizes much smaller than m") {
    const ExpectedGram g = expected_gram(binary_profile(100000, {3, 5, 8}));
    Matrix off = g.G;
    off.diagonal().setZero();
    CHECK(off.cwiseAbs().maxCoeff() < 1e-3);
  }
}

TEST_CASE("Gram spectrum sandwich") {
  SUBCASE("hand case is tight below") {
    const SandwichReport r = theorem3_bounds(hand_profile());
    REQUIRE(r.rows.size() == 2);
    CHECK(r.s1_pass);
    CHECK(r.rows[0].oracle == doctest::Approx(3.0));
    CHECK(r.rows[0].pure_upper == doctest::Approx(4.0));
    CHECK(r.rows[1].oracle == doctest::Approx(1.0));
    CHECK(r.rows[1].pure_lower == doctest::Approx(1.0));
    CHECK(std::abs(r.rows[1].pure_slack) < 1e-12);
    CHECK(r.contains_pure());
    CHECK(r.contains());
    CHECK(r.rows[0].slack_term == doctest::Approx(4.0 * 2.0 / 4.0));
  }
  SUBCASE("single column") {
    Vector s(1), n(1);
    s << 9;
    n << 5;
    const SandwichReport r = theorem3_bounds(fixed_norm_profile(30, s, n));
    CHECK(r.rows[0].oracle == doctest::Approx(25.0));
    CHECK(r.rows[0].pure_lower == doctest::Approx(12.5));
    CHECK(r.rows[0].pure_upper >= 25.0);
    CHECK(r.contains_pure());
  }
  SUBCASE("m = 2000, k = 40 zero-one profiles") {
    std::mt19937_64 rng(2000);
    for (int t = 0; t < 10; ++t) {
      const ColumnProfile p = binary_profile(2000, random_counts(rng, 40, 5, 50));
      const SandwichReport r = theorem3_bounds(p);
      CHECK(r.s1_pass);
      for (const auto& row : r.rows) {
        INFO("profile " << t << " i " << row.i << " slack " << row.slack);
        CHECK(row.contains());
      }
    }
  }
  SUBCASE("random passing profiles") {
    std::mt19937_64 rng(77);
    int checked = 0;
    for (int t = 0; t < 300; ++t) {
      const ColumnProfile p = random_fixed_norm_profile(rng, testutil::pick(rng, 50, 1000),
                                                        testutil::pick(rng, 1, 30), 25.0);
      const SandwichReport r = theorem3_bounds(p);
      if (!r.s1_pass) continue;
      ++checked;
      INFO("profile " << t);
      CHECK(r.contains());
    }
    CHECK(checked > 100);
  }
  SUBCASE("failed precondition is named") {
    Vector s(2), n(2);
    s << 10, 4;
    n << 2, 2;
    const SandwichReport r = theorem3_bounds(fixed_norm_profile(100, s, n));
    CHECK_FALSE(r.s1_pass);
    REQUIRE(r.failed_preconditions.size() >= 1);
    CHECK(r.failed_preconditions[0] == "size_vs_norm");
  }
}

TEST_CASE("streams are reproducible and distinct") {
  Rng a = make_stream(7, 3, 1), b = make_stream(7, 3, 1), c = make_stream(7, 3, 2),
      d = make_stream(7, 4, 1);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
}

TEST_CASE("binary sampler") {
  Rng rng = make_stream(1, 0, 0);
  CHECK(sample_column_binary(6, 6, rng) == Vector::Ones(6));
  CHECK_THROWS_AS(sample_column_binary(4, 5, rng), invalid_input);

  SUBCASE("uniform over the six 2-subsets of 4") {
    std::map<std::pair<int, int>, int> counts;
    const int draws = 60000;
    for (int t = 0; t < draws; ++t) {
      const Vector x = sample_column_binary(4, 2, rng);
      REQUIRE(x.sum() == 2.0);
      int first = -1, second = -1;
      for (int i = 0; i < 4; ++i)
        if (x(i) == 1.0) (first < 0 ? first : second) = i;
      ++counts[{first, second}];
    }
    REQUIRE(counts.size() == 6);
    double chi2 = 0;
    for (const auto& [key, c] : counts) chi2 += (c - draws / 6.0) * (c - draws / 6.0) / (draws / 6.0);
    CHECK(chi2 < 15.086);  // chi-square, 5 dof, p = 0.01
  }
  SUBCASE("l = 1 is a uniform basis vector") {
    Vector hits = Vector::Zero(5);
    for (int t = 0; t < 50000; ++t) hits += sample_column_binary(5, 1, rng);
    for (Index i = 0; i < 5; ++i) CHECK(std::abs(hits(i) - 10000) < 4 * std::sqrt(8000.0));
  }
}

TEST_CASE("fixed-size sampler") {
  Rng rng = make_stream(2, 0, 0);
  CHECK(sample_column_fixed_size(1, 3.5, rng)(0) == doctest::Approx(3.5));

  SUBCASE("m = 2 first coordinate is uniform") {
    std::vector<double> u(20000);
    for (auto& x : u) {
      const Vector v = sample_column_fixed_size(2, 1.0, rng);
      CHECK(v.sum() == doctest::Approx(1.0).epsilon(1e-14));
      x = v(0);
    }
    std::sort(u.begin(), u.end());
    double D = 0;
    const double n = double(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      D = std::max({D, std::abs((i + 1) / n - u[i]), std::abs(u[i] - i / n)});
    }
    CHECK(D < 1.628 / std::sqrt(n));  // Kolmogorov-Smirnov, p = 0.01
  }
  SUBCASE("coordinate means equal s / m") {
    const int draws = 100000;
    Vector sum = Vector::Zero(5), sq = Vector::Zero(5);
    for (int t = 0; t < draws; ++t) {
      const Vector v = sample_column_fixed_size(5, 10.0, rng);
      REQUIRE(std::abs(v.sum() - 10.0) <= 1e-12 * 10.0);
      sum += v;
      sq += v.cwiseAbs2();
    }
    for (Index i = 0; i < 5; ++i) {
      const double mean = sum(i) / draws;
      const double se = std::sqrt((sq(i) / draws - mean * mean) / draws);
      CHECK(std::abs(mean - 2.0) < 3 * se);
    }
    // E|x|^2 = 2 s^2 / (m + 1).
    ColumnSpec spec{ColumnKind::fixed_size, 5, 10.0, 0.0};
    CHECK(sq.sum() / draws == doctest::Approx(spec.sq_norm_expectation()).epsilon(0.01));
  }
}

TEST_CASE("fixed-size-and-norm sampler") {
  Rng rng = make_stream(3, 0, 0);
  SUBCASE("center point") {
    const Vector x = sample_column_fixed_size_norm(8, 4.0, 4.0 / std::sqrt(8.0), rng);
    CHECK((x.array() - 0.5).abs().maxCoeff() < 1e-15);
  }
  SUBCASE("m = 2 two-point law") {
    const double b = 0.8;
    const double x0 = (1.0 + std::sqrt(2 * b * b - 1.0)) / 2.0;
    int high = 0;
    const int draws = 20000;
    for (int t = 0; t < draws; ++t) {
      const Vector x = sample_column_fixed_size_norm(2, 1.0, b, rng);
      const bool is_high = std::abs(x(0) - x0) < 1e-12;
      REQUIRE((is_high || std::abs(x(0) - (1.0 - x0)) < 1e-12));
      high += is_high;
    }
    CHECK(std::abs(high - draws / 2.0) < 3 * std::sqrt(draws / 4.0));
  }
  SUBCASE("exact size and norm") {
    std::mt19937_64 prng(5);
    for (int t = 0; t < 500; ++t) {
      const Index m = testutil::pick(prng, 2, 60);
      const double s = 1.0 + 20.0 * std::uniform_real_distribution<double>()(prng);
      // Target norms up to that of a typical uniform simplex point, where
      // radial rescaling keeps a useful acceptance rate.
      const double bmin = s / std::sqrt(double(m));
      const double btyp = s * std::sqrt(2.0 / double(m + 1));
      const double b = bmin + (btyp - bmin) * std::uniform_real_distribution<double>()(prng);
      const Vector x = sample_column_fixed_size_norm(m, s, b, rng);
      CHECK(x.minCoeff() >= 0.0);
      CHECK(std::abs(x.sum() - s) <= 1e-12 * s);
      CHECK(std::abs(x.norm() - b) <= 1e-12 * b);
    }
  }
  SUBCASE("infeasible and starved") {
    CHECK_THROWS_AS(sample_column_fixed_size_norm(4, 2.0, 2.5, rng), invalid_input);
    CHECK_THROWS_AS(sample_column_fixed_size_norm(4, 2.0, 0.9, rng), invalid_input);
    CHECK_THROWS_AS(sample_column_fixed_size_norm(60, 1.0, 0.97, rng, {1e-3, 1000000}),
                    sampler_starvation);
  }
  SUBCASE("pair mean for m = 4, s = 2, b = sqrt 2") {
    const ColumnSpec c{ColumnKind::fixed_size_norm, 4, 2.0, std::sqrt(2.0)};
    const PairMomentReport r = lemma13_stats(c, c, 100000, 11);
    CHECK(r.expected_mean == doctest::Approx(1.0));
    CHECK(std::abs(r.mean_z()) < 3.0);
  }
}

TEST_CASE("coordinate means are flat for every sampler") {
  const Index m = 6;
  const int draws = 40000;
  const std::vector<ColumnSpec> specs = {{ColumnKind::binary, m, 2.0, 0.0},
                                         {ColumnKind::fixed_size, m, 3.0, 0.0},
                                         {ColumnKind::fixed_size_norm, m, 3.0, 1.5}};
  for (const auto& spec : specs) {
    Rng rng = make_stream(9, std::uint64_t(spec.kind), 0);
    Vector sum = Vector::Zero(m), sq = Vector::Zero(m);
    std::vector<Index> perm = {3, 0, 5, 1, 4, 2};
    Vector psum = Vector::Zero(m);
    for (int t = 0; t < draws; ++t) {
      const Vector x = spec.sample(rng);
      sum += x;
      sq += x.cwiseAbs2();
      for (Index i = 0; i < m; ++i) psum(i) += x(perm[i]);
    }
    const double target = spec.size / double(m);
    for (Index i = 0; i < m; ++i) {
      const double mean = sum(i) / draws;
      const double se = std::sqrt((sq(i) / draws - mean * mean) / draws);
      INFO("kind " << int(spec.kind) << " coordinate " << i);
      CHECK(std::abs(mean - target) < 4 * se);
      CHECK(std::abs(psum(i) / draws - target) < 4 * se);
    }
  }
}

TEST_CASE("pair moments") {
  SUBCASE("m = 4 binary l = 2") {
    const ColumnSpec c{ColumnKind::binary, 4, 2.0, 0.0};
    const PairMomentReport r = lemma13_stats(c, c, 100000, 3);
    CHECK(r.expected_mean == doctest::Approx(1.0));
    CHECK(r.expected_var == doctest::Approx(1.0 / 3.0));
    CHECK(std::abs(r.mean_z()) < 3.0);
    CHECK(std::abs(r.var_z()) < 3.0);
  }
  SUBCASE("center columns have no variance") {
    const ColumnSpec c{ColumnKind::fixed_size_norm, 9, 3.0, 1.0};
    const PairMomentReport r = lemma13_stats(c, c, 100, 3);
    CHECK(r.var < 1e-28);
    CHECK(r.expected_var == doctest::Approx(0.0));
    CHECK(r.mean == doctest::Approx(1.0));
  }
  SUBCASE("m = 50 fixed size and norm") {
    const ColumnSpec x{ColumnKind::fixed_size_norm, 50, 10.0, 2.0};
    const ColumnSpec y{ColumnKind::fixed_size_norm, 50, 6.0, 1.2};
    const PairMomentReport r = lemma13_stats(x, y, 100000, 4);
    CHECK(std::abs(r.mean_z()) < 4.0);
    CHECK(std::abs(r.var_z()) < 4.0);
  }
  SUBCASE("expected-norm mode is reported, not asserted") {
    const ColumnSpec x{ColumnKind::fixed_size, 30, 6.0, 0.0};
    const PairMomentReport r = lemma13_stats(x, x, 20000, 4);
    CHECK(r.expected_mode);
    MESSAGE("fixed-size pair variance z-score " << r.var_z());
    CHECK(std::abs(r.mean_z()) < 4.0);
  }
  SUBCASE("parallel and serial agree; parallel is deterministic") {
    const ColumnSpec c{ColumnKind::binary, 20, 5.0, 0.0};
    const PairMomentReport p1 = lemma13_stats(c, c, 5000, 8, Execution::parallel);
    const PairMomentReport p2 = lemma13_stats(c, c, 5000, 8, Execution::parallel);
    const PairMomentReport s = lemma13_stats(c, c, 5000, 8, Execution::serial);
    CHECK(p1.mean == p2.mean);
    CHECK(p1.var == p2.var);
    CHECK(p1.mean == doctest::Approx(s.mean).epsilon(1e-12));
    CHECK(p1.var == doctest::Approx(s.var).epsilon(1e-12));
  }
}

TEST_CASE("empirical Gram matrix") {
  SUBCASE("single trial on center columns is exact") {
    RandomColumnModel model;
    model.kind = ColumnKind::fixed_size_norm;
    model.m = 9;
    model.sizes = Vector::Constant(3, 3.0);
    model.norms = Vector::Constant(3, 1.0);
    const EmpiricalGram e = empirical_gram(model, 1);
    CHECK(e.max_dev < 1e-14);
  }
  SUBCASE("m = 4, k = 2 binary") {
    const EmpiricalGram e = empirical_gram(binary_model(4, {2, 2}, 21), 100000);
    CHECK(std::abs(e.G_hat(0, 1) - 1.0) < 3 * e.se(0, 1));
    CHECK(e.G_hat(0, 0) == 2.0);
  }
  SUBCASE("m = 200, k = 10 binary") {
    std::mt19937_64 rng(8);
    const EmpiricalGram e = empirical_gram(binary_model(200, random_counts(rng, 10, 3, 40), 22), 10000);
    CHECK(e.max_z <= 5.0);
  }
  SUBCASE("serial reference matches") {
    const RandomColumnModel model = binary_model(30, {4, 9, 2}, 5);
    const EmpiricalGram p = empirical_gram(model, 3000, Execution::parallel);
    const EmpiricalGram s = empirical_gram(model, 3000, Execution::serial);
    CHECK((p.G_hat - s.G_hat).cwiseAbs().maxCoeff() <= 1e-12 * p.G_hat.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("singular value fluctuation bands") {
  SUBCASE("center columns") {
    RandomColumnModel model;
    model.kind = ColumnKind::fixed_size_norm;
    model.m = 16;
    model.sizes = Vector::LinSpaced(3, 2.0, 6.0);
    model.norms = model.sizes / 4.0;
    const FluctuationReport r = fluctuation_bounds(model, 10);
    CHECK(r.N == doctest::Approx(0.0));
    for (const auto& row : r.rows) CHECK(std::abs(row.mean_sq_sigma - row.sigma_G) < 1e-12);
  }
  SUBCASE("m = 4, k = 2 binary: exact enumeration") {
    const Vector exact = binary_exact_mean_sq_sigma(4, {2, 2});
    CHECK(exact(0) == doctest::Approx(3.0));
    CHECK(exact(1) == doctest::Approx(1.0));
    const FluctuationReport r = fluctuation_bounds(binary_model(4, {2, 2}, 1), 20000);
    CHECK(r.N == doctest::Approx(2.0));
    CHECK(r.rows[0].band_frobenius == doctest::Approx(2.0 / std::sqrt(3.0)));
    for (Index i = 0; i < 2; ++i) {
      CHECK(std::abs(exact(i) - r.rows[i].sigma_G) <= r.rows[i].band_frobenius);
    }
    CHECK(r.bands_hold());
    CHECK(r.partial_sums_hold());
  }
  SUBCASE("m = 500, k = 20") {
    std::mt19937_64 rng(500);
    const FluctuationReport r =
        fluctuation_bounds(binary_model(500, random_counts(rng, 20, 5, 50), 2), 10000);
    CHECK(r.bands_hold());
    CHECK(r.partial_sums_hold());
    for (const auto& row : r.rows) CHECK(row.in_sandwich);
  }
  SUBCASE("enumeration refuses large ensembles") {
    CHECK_THROWS_AS(binary_exact_mean_sq_sigma(40, {10, 10}), invalid_input);
  }
}

TEST_CASE("truncated gamma sizes") {
  SUBCASE("closed-form moments") {
    const TruncatedGammaMoments t = truncated_gamma_moments({1.0, 0.1, 1.0});
    CHECK(t.mean == doctest::Approx(11.0).epsilon(1e-13));
    CHECK(t.tail_mass == doctest::Approx(std::exp(-0.1)).epsilon(1e-14));
    // For alpha = 1, rho^2 = 1 + 1 / (1 + beta)^2.
    CHECK(t.rho == doctest::Approx(1.3514607952107731).epsilon(1e-13));
    CHECK(truncated_gamma_moments({1.0, 0.01, 1.0}).rho ==
          doctest::Approx(1.407229920591131).epsilon(1e-13));
    CHECK(truncated_gamma_moments({4.0, 0.05, 0.0}).rho == doctest::Approx(std::sqrt(1.25)));
  }
  SUBCASE("mean 11 for alpha = 1, beta = 0.1") {
    Rng rng = make_stream(17, 0, 0);
    const Vector y = sample_sizes_truncated_gamma(100000, {1.0, 0.1, 1.0}, rng);
    CHECK(y.minCoeff() >= 1.0);
    const double se = std::sqrt((y.array() - y.mean()).square().sum() / (y.size() - 1) / y.size());
    CHECK(std::abs(y.mean() - 11.0) < 3 * se);
  }
  SUBCASE("sample moment ratios") {
    Rng rng = make_stream(18, 0, 0);
    const Vector a4 = sample_sizes_truncated_gamma(10000, {4.0, 0.05, 1.0}, rng);
    CHECK(std::abs(moment_ratio(a4) / std::sqrt(1.25) - 1.0) < 0.02);
    const Vector a1 = sample_sizes_truncated_gamma(10000, {1.0, 0.01, 1.0}, rng);
    CHECK(std::abs(moment_ratio(a1) / std::sqrt(2.0) - 1.0) < 0.02);
  }
  SUBCASE("deviation from sqrt 2 is first order in beta") {
    const double d1 = std::sqrt(2.0) - truncated_gamma_moments({1.0, 0.01, 1.0}).rho;
    const double d2 = std::sqrt(2.0) - truncated_gamma_moments({1.0, 0.02, 1.0}).rho;
    CHECK(d2 / d1 == doctest::Approx(2.0).epsilon(0.02));
  }
  SUBCASE("invalid specs") {
    Rng rng = make_stream(1, 0, 0);
    CHECK_THROWS_AS(sample_sizes_truncated_gamma(3, {0.5, 0.1, 1.0}, rng), invalid_input);
    CHECK_THROWS_AS(sample_sizes_truncated_gamma(3, {1.0, 0.0, 1.0}, rng), invalid_input);
    CHECK_THROWS_AS(sample_sizes_truncated_gamma(3, {1.0, 100.0, 1.0}, rng), invalid_input);
  }
}

TEST_CASE("gamma-sized profiles") {
  SUBCASE("single column") {
    const Corollary10Report r = corollary10_bounds(binary_profile(100, {7}), {1.0, 0.1, 1.0});
    CHECK(r.sandwich.contains());
    CHECK(r.cond_gamma);
  }
  SUBCASE("precondition flags") {
    const Corollary10Report r = corollary10_bounds(binary_profile(1000, {2, 3, 2, 2}), {1.0, 0.9, 1.0});
    CHECK_FALSE(r.cond_density);
    CHECK_FALSE(r.cond_gamma);
    CHECK(r.sandwich.failed_preconditions.size() == 2);
  }
  SUBCASE("m = 2000, k = 50 resampled") {
    const GammaSpec g{1.0, 0.1, 1.0};
    const GammaResampling r = corollary10_resampling(2000, 50, g, 200, 31);
    CHECK(r.fraction() >= 0.95);
    CHECK(std::abs(r.mean_delta - r.delta_truncated) < 3 * r.delta_se);
    MESSAGE("density mean " << r.mean_delta << " nominal " << r.delta_nominal << " truncated "
                            << r.delta_truncated << " se " << r.delta_se);
  }
}
