#pragma once

// Sparse non-negative random matrices with prescribed column sizes and norms.
//
// A column u of an m x k matrix X has size |u| = sum of entries and norm
// |u|_2. Profiles fix the sizes and either the norms (fixed-norm mode) or
// the expected squared norms (expected-norm mode). The expected Gram matrix
// of a permutation-invariant ensemble with such columns is
//   G = diag(n_i^2) + offdiag(s_i s_j / m).

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "blockgivens/matrix.hpp"

namespace blockgivens {

struct ColumnProfile {
  Index m = 0;
  Vector sizes;                            // s_i > 0
  std::optional<Vector> norms;             // n_i (fixed-norm mode)
  std::optional<Vector> expected_sq_norms;  // w_i = E|u_i|^2 (expected-norm mode)
  Index L = 0;                             // max nonzeros per column

  Index k() const { return sizes.size(); }
  double Cmax() const { return sizes.maxCoeff(); }
  bool expected_mode() const { return expected_sq_norms.has_value(); }
  /// n_i^2 in fixed-norm mode, w_i otherwise.
  Vector sq_weights() const;
};

/// Throws invalid_input unless exactly one of norms / expected_sq_norms is
/// present, sizes are positive, L is in [1, m] and fixed norms satisfy n_i <= s_i.
void validate(const ColumnProfile& p);

/// Zero-one profile: sizes = norms^2 = l_i, L = max l_i.
ColumnProfile binary_profile(Index m, const std::vector<Index>& l);

/// Fixed sizes and norms. When L is 0 it defaults to max_i ceil(s_i^2 / n_i^2),
/// the fewest nonzeros a column with that size and norm can have.
ColumnProfile fixed_norm_profile(Index m, const Vector& sizes, const Vector& norms, Index L = 0);

/// Sum of entries over (m k).
double density(const ColumnProfile& p);
/// Density of X[rows, cols] (0-based index lists).
double density(const Matrix& X, const std::vector<Index>& rows, const std::vector<Index>& cols);
double density(const Matrix& X);

/// sqrt(mean(v^2)) / mean(v) for a positive sequence.
double moment_ratio(const Vector& v);

struct DerivedStats {
  double delta = 0;
  double rho = 0;  // moment ratio of the sizes
  Vector xi;       // E_k: s_i / n_i^2 (or s_i / w_i)
  double Xi1 = 0, Xi2 = 0;
  std::vector<Index> tau;  // column order by n_i^2 (or w_i), descending, ties by index
};

DerivedStats derived_stats(const ColumnProfile& p);

struct ConditionCheck {
  std::string name;
  double lhs = 0, rhs = 0;  // condition is lhs <= rhs
  double margin = 0;        // rhs - lhs
  bool pass = false;
};

struct S1Report {
  std::vector<ConditionCheck> conditions;    // size_vs_norm, max_size, xi_moment_ratio
  std::vector<ConditionCheck> consequences;  // xi_le_one, Ek_norm, size_ratio_L, weighted_size_sum
  bool pass() const;                         // conditions only
  bool consequences_hold() const;
  const ConditionCheck& get(const std::string& name) const;
};

/// The structural conditions on sizes and norms, plus the inequalities they imply.
S1Report check_s1(const ColumnProfile& p);

struct ExpectedGram {
  Matrix G;
  Matrix D;  // diag(n_i^2) or diag(w_i)
  Matrix H;  // diag(1 - s_i^2 / (m n_i^2))
  Vector E;  // xi
  Vector U;  // sizes
  Matrix Z;  // H + E U^T / m, so G = D Z
  double factor_residual = 0;  // |G - D Z|_max / |G|_max
};

ExpectedGram expected_gram(const ColumnProfile& p);

struct ZNormCheck {
  double norm_Z = 0, norm_Zinv = 0;
  double bound_Z = 0;     // 1 + k delta rho
  double bound_Zinv = 0;  // 1 + rho + c L / m
  bool holds() const { return norm_Z <= bound_Z * (1 + 1e-12) && norm_Zinv <= bound_Zinv * (1 + 1e-12); }
};

ZNormCheck z_norm_check(const ColumnProfile& p, double slack_c = 4.0);

/// One row of a multiplicative spectrum sandwich
///   pure_lower <= sigma_i(G) <= pure_upper
/// together with the widened interval that includes the additive c L / m term.
struct SandwichRow {
  Index i = 0;
  Index tau_i = 0;  // 0-based column with the i-th largest weight
  double weight = 0;
  double oracle = 0;  // sigma_i(G)
  double pure_lower = 0, pure_upper = 0;
  double lower = 0, upper = 0;
  double slack_term = 0;  // c L / m
  double slack = 0;       // min(oracle - lower, upper - oracle)
  double pure_slack = 0;
  bool contains(double tol = 1e-12) const;
  bool contains_pure(double tol = 1e-12) const;
};

struct SandwichReport {
  std::vector<SandwichRow> rows;
  bool s1_pass = false;
  std::vector<std::string> failed_preconditions;
  bool contains(double tol = 1e-12) const;
  bool contains_pure(double tol = 1e-12) const;
};

/// For each i: (1 + rho + cL/m)^{-1} n_{tau(i)}^2 <= sigma_i(G) <= (1 + k delta rho) n_{tau(i)}^2.
/// In expected-norm mode the weights are w_i and the upper factor also gets c L / m.
SandwichReport theorem3_bounds(const ColumnProfile& p, double slack_c = 4.0);

// ---- sampling ----

using Rng = std::mt19937_64;

/// Independent stream for (seed, trial, column); reproducible across runs
/// and independent of thread scheduling.
Rng make_stream(std::uint64_t seed, std::uint64_t trial, std::uint64_t column);

/// Raised when the fixed-size-and-norm rejection sampler falls below its
/// acceptance floor.
class sampler_starvation : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

Vector sample_column_binary(Index m, Index l, Rng& rng);
Vector sample_column_fixed_size(Index m, double s, Rng& rng);

struct FixedNormSampling {
  double acceptance_floor = 1e-4;
  std::int64_t budget = 1000000;  // attempts per draw
};

Vector sample_column_fixed_size_norm(Index m, double s, double b, Rng& rng,
                                     const FixedNormSampling& opts = {});

enum class ColumnKind { binary, fixed_size, fixed_size_norm };

struct ColumnSpec {
  ColumnKind kind = ColumnKind::binary;
  Index m = 0;
  double size = 0;  // l for binary
  double norm = 0;  // fixed_size_norm only

  Vector sample(Rng& rng) const;
  double sq_norm_expectation() const;  // exact |u|^2 or its expectation
};

struct RandomColumnModel {
  ColumnKind kind = ColumnKind::binary;
  Index m = 0;
  Vector sizes;
  Vector norms;  // fixed_size_norm only
  std::uint64_t seed = 0;

  Index k() const { return sizes.size(); }
  ColumnSpec column(Index j) const;
  Matrix sample(std::uint64_t trial) const;
  /// Profile that the model realizes. Continuous models report L = m.
  ColumnProfile profile() const;
};

RandomColumnModel binary_model(Index m, const std::vector<Index>& l, std::uint64_t seed);

// ---- Monte Carlo ----

enum class Execution { parallel, serial };

struct PairMomentReport {
  std::int64_t trials = 0;
  double mean = 0, mean_se = 0, expected_mean = 0;
  double var = 0, var_se = 0, expected_var = 0;
  bool expected_mode = false;  // norms replaced by expected squared norms
  double mean_z() const;
  double var_z() const;
};

/// Moments of <x, y> for independent draws against |x||y|/m and
/// (|x|^2 - |x|^2_1/m)(|y|^2 - |y|^2_1/m)/(m-1).
PairMomentReport lemma13_stats(const ColumnSpec& x, const ColumnSpec& y, std::int64_t trials,
                               std::uint64_t seed, Execution exec = Execution::parallel);

struct EmpiricalGram {
  std::int64_t trials = 0;
  Matrix G_hat;
  Matrix G;   // expected Gram matrix of the model's profile
  Matrix se;  // entrywise standard error of G_hat
  double max_dev = 0;  // |G_hat - G|_max
  double max_z = 0;    // max |G_hat - G| / se over entries with se > 0
};

EmpiricalGram empirical_gram(const RandomColumnModel& model, std::int64_t trials,
                             Execution exec = Execution::parallel);

struct FluctuationRow {
  Index i = 0;
  double sigma_G = 0;
  double mean_sq_sigma = 0, mean_sq_sigma_se = 0;  // E sigma_i(X)^2
  double mean_sigma = 0;                           // E sigma_i(X)
  double band_frobenius = 0;  // sqrt((k-1)/(m-1)) N
  double band_r0 = 0;         // (k-1)/sqrt(m-1) r0^2
  double band_const = 0;      // sqrt((k-1)/(m-1)) c r0^2
  bool in_band_frobenius = false, in_band_r0 = false, in_band_const = false;
  // Sandwich around E sigma_i(X)^2 from the Gram bounds widened by band_const.
  double sandwich_lower = 0, sandwich_upper = 0;
  bool in_sandwich = false;
  // Partial sums: sum_{j<=i} E sigma_j^2 - sum_{j<=i} sigma_j(G) (>= 0 expected),
  // and (1 + rho + cL/m) sum_{j>i} sigma_j(G) - sum_{j>i} (E sigma_j)^2 (>= 0 expected).
  double head_margin = 0, head_margin_se = 0;
  double tail_margin = 0;
  bool head_ok = false, tail_ok = false;  // margins within z standard errors and rounding
};

struct FluctuationReport {
  std::int64_t trials = 0;
  double N = 0;   // sum_p |r_p| |X'_p|_F
  double r0 = 0;  // max |r_p|
  double frak_c = 2, slack_c = 4;
  std::vector<FluctuationRow> rows;
  bool bands_hold() const;       // frobenius and r0 bands
  bool partial_sums_hold() const;
};

struct FluctuationOptions {
  double frak_c = 2.0;
  double slack_c = 4.0;
  double z = 4.0;  // empirical checks allow z standard errors
  Execution exec = Execution::parallel;
};

FluctuationReport fluctuation_bounds(const RandomColumnModel& model, std::int64_t trials,
                                     const FluctuationOptions& opts = {});

/// Exact E sigma_i(X)^2 for a binary model by enumerating every matrix.
/// Refuses ensembles with more than `limit` members.
Vector binary_exact_mean_sq_sigma(Index m, const std::vector<Index>& l,
                                  std::int64_t limit = 2000000);

// ---- gamma column sizes ----

struct GammaSpec {
  double alpha = 1;
  double beta = 0.1;
  double a = 1;  // left truncation point
};

void validate(const GammaSpec& g);

/// k i.i.d. draws from the gamma(alpha, rate beta) law conditioned on t >= a.
Vector sample_sizes_truncated_gamma(Index k, const GammaSpec& g, Rng& rng);

struct TruncatedGammaMoments {
  double tail_mass = 0;  // 1 - F(a)
  double mean = 0;
  double second = 0;
  double rho = 0;  // sqrt(second) / mean
};

TruncatedGammaMoments truncated_gamma_moments(const GammaSpec& g);

/// sqrt(1 + 1/alpha): the untruncated population moment ratio.
double gamma_rho_limit(double alpha);

struct Corollary10Report {
  SandwichReport sandwich;  // pure factors and widened factors
  bool cond_density = false;  // 1/k <= L/m
  bool cond_gamma = false;    // a = 1, alpha >= 1, beta <= 1/sqrt(k)
};

/// Upper (1 + (k/(m beta)) sqrt(alpha(alpha+1)) + cL/m) w_tau(i),
/// lower (1 + sqrt(1 + 1/alpha) + cL/m)^{-1} w_tau(i).
Corollary10Report corollary10_bounds(const ColumnProfile& p, const GammaSpec& g,
                                     double slack_c = 4.0);

/// Rounds gamma sizes to integer column counts in [1, m].
std::vector<Index> binarize_sizes(const Vector& sizes, Index m);

struct GammaResampling {
  int resamples = 0;
  int contained = 0;   // resamples where every index was inside the widened bounds
  int preconditions_met = 0;
  double fraction() const { return resamples ? double(contained) / resamples : 0.0; }
  double mean_delta = 0, delta_se = 0;
  double delta_nominal = 0;    // alpha / (m beta)
  double delta_truncated = 0;  // E(t | t >= a) / m
};

/// Draws `resamples` independent size vectors, binarizes them and evaluates
/// corollary10_bounds on each.
GammaResampling corollary10_resampling(Index m, Index k, const GammaSpec& g, int resamples,
                                       std::uint64_t seed, double slack_c = 4.0);

}  // namespace blockgivens
