#include "blockgivens/randmat.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "blockgivens/spectral.hpp"

namespace blockgivens {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Trials are split into this many fixed chunks; chunk sums are combined in
// chunk order so the parallel result does not depend on the thread count.
constexpr std::int64_t kChunks = 64;

bool all_finite_positive(const Vector& v) {
  return (v.array() > 0.0).all() && v.allFinite();
}

double rel_tol(double x) { return 1e-12 * std::max(1.0, std::abs(x)); }

ConditionCheck le(std::string name, double lhs, double rhs) {
  ConditionCheck c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.margin = rhs - lhs;
  c.pass = c.margin >= -rel_tol(rhs);
  return c;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

template <class Body>
Vector monte_carlo(std::int64_t trials, Execution exec, Index width, Body&& body) {
  if (trials < 1) throw invalid_input("monte carlo: trials must be >= 1");
  if (exec == Execution::serial) {
    Vector acc = Vector::Zero(width);
    for (std::int64_t t = 0; t < trials; ++t) body(t, acc);
    return acc;
  }
  const std::int64_t chunks = std::min(trials, kChunks);
  std::vector<Vector> part(chunks, Vector::Zero(width));
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t c = 0; c < chunks; ++c) {
    try {
      const std::int64_t lo = trials * c / chunks;
      const std::int64_t hi = trials * (c + 1) / chunks;
      for (std::int64_t t = lo; t < hi; ++t) body(t, part[c]);
    } catch (...) {
#pragma omp critical(blockgivens_mc_error)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  Vector acc = Vector::Zero(width);
  for (const Vector& p : part) acc += p;
  return acc;
}

// Sample variance and standard error of the mean from sums of x and x^2.
void mean_se(double s1, double s2, double n, double& mean, double& se) {
  mean = s1 / n;
  const double var = n > 1 ? std::max(s2 - s1 * mean, 0.0) / (n - 1) : 0.0;
  se = std::sqrt(var / n);
}

Vector gram_sigma_sq(const Matrix& X) {
  const Matrix XtX = X.transpose() * X;
  return sym_eigenvalues(XtX).cwiseMax(0.0);
}

std::vector<Index> order_desc(const Vector& w) {
  std::vector<Index> tau(w.size());
  std::iota(tau.begin(), tau.end(), Index{0});
  std::stable_sort(tau.begin(), tau.end(), [&](Index a, Index b) { return w(a) > w(b); });
  return tau;
}

void finish_row(SandwichRow& r) {
  r.slack = std::min(r.oracle - r.lower, r.upper - r.oracle);
  r.pure_slack = std::min(r.oracle - r.pure_lower, r.pure_upper - r.oracle);
}

}  // namespace

Vector ColumnProfile::sq_weights() const {
  if (norms) return norms->cwiseAbs2();
  if (expected_sq_norms) return *expected_sq_norms;
  throw invalid_input("ColumnProfile: neither norms nor expected_sq_norms present");
}

void validate(const ColumnProfile& p) {
  if (p.m < 1) throw invalid_input("ColumnProfile: m must be >= 1");
  if (p.k() < 1) throw invalid_input("ColumnProfile: need at least one column");
  if (!all_finite_positive(p.sizes)) throw invalid_input("ColumnProfile: sizes must be positive");
  if (p.norms.has_value() == p.expected_sq_norms.has_value()) {
    throw invalid_input("ColumnProfile: exactly one of norms / expected_sq_norms must be given");
  }
  const Vector& w = p.norms ? *p.norms : *p.expected_sq_norms;
  if (w.size() != p.k()) throw invalid_input("ColumnProfile: norm vector length differs from k");
  if (!all_finite_positive(w)) throw invalid_input("ColumnProfile: norms must be positive");
  if (p.L < 1 || p.L > p.m) throw invalid_input("ColumnProfile: L must lie in [1, m]");
  if (p.norms) {
    const double rm = std::sqrt(double(p.m));
    for (Index i = 0; i < p.k(); ++i) {
      const double s = p.sizes(i), n = (*p.norms)(i);
      if (n > s * (1 + 1e-12) || n < s / rm * (1 - 1e-12)) {
        throw invalid_input("ColumnProfile: column " + std::to_string(i + 1) + " norm " +
                            std::to_string(n) + " outside [size/sqrt(m), size]");
      }
    }
  }
}

ColumnProfile binary_profile(Index m, const std::vector<Index>& l) {
  ColumnProfile p;
  p.m = m;
  p.sizes.resize(Index(l.size()));
  for (std::size_t j = 0; j < l.size(); ++j) p.sizes(Index(j)) = double(l[j]);
  p.norms = p.sizes.cwiseSqrt();
  p.L = l.empty() ? 0 : *std::max_element(l.begin(), l.end());
  validate(p);
  return p;
}

ColumnProfile fixed_norm_profile(Index m, const Vector& sizes, const Vector& norms, Index L) {
  ColumnProfile p;
  p.m = m;
  p.sizes = sizes;
  p.norms = norms;
  if (L == 0 && sizes.size() == norms.size()) {
    for (Index i = 0; i < sizes.size(); ++i) {
      const double q = sizes(i) * sizes(i) / (norms(i) * norms(i));
      L = std::max(L, Index(std::ceil(q - 1e-9)));
    }
    L = std::clamp<Index>(L, 1, m);
  }
  p.L = L;
  validate(p);
  return p;
}

double density(const ColumnProfile& p) { return p.sizes.sum() / (double(p.m) * double(p.k())); }

double density(const Matrix& X, const std::vector<Index>& rows, const std::vector<Index>& cols) {
  if (rows.empty() || cols.empty()) throw invalid_input("density: empty index set");
  double s = 0;
  for (Index j : cols) {
    if (j < 0 || j >= X.cols()) throw invalid_input("density: column index out of range");
    for (Index i : rows) {
      if (i < 0 || i >= X.rows()) throw invalid_input("density: row index out of range");
      s += X(i, j);
    }
  }
  return s / (double(rows.size()) * double(cols.size()));
}

double density(const Matrix& X) {
  if (X.size() == 0) throw invalid_input("density: empty matrix");
  return X.sum() / double(X.size());
}

double moment_ratio(const Vector& v) {
  if (v.size() == 0) throw invalid_input("moment_ratio: empty sequence");
  if (!all_finite_positive(v)) throw invalid_input("moment_ratio: values must be positive");
  const double mean = v.mean();
  return std::sqrt(v.squaredNorm() / double(v.size())) / mean;
}

DerivedStats derived_stats(const ColumnProfile& p) {
  validate(p);
  DerivedStats d;
  d.delta = density(p);
  d.rho = moment_ratio(p.sizes);
  const Vector w = p.sq_weights();
  d.xi = p.sizes.cwiseQuotient(w);
  d.Xi1 = d.xi.mean();
  d.Xi2 = d.xi.norm() / std::sqrt(double(p.k()));
  d.tau = order_desc(w);
  return d;
}

bool S1Report::pass() const {
  return std::all_of(conditions.begin(), conditions.end(), [](const auto& c) { return c.pass; });
}

bool S1Report::consequences_hold() const {
  return std::all_of(consequences.begin(), consequences.end(),
                     [](const auto& c) { return c.pass; });
}

const ConditionCheck& S1Report::get(const std::string& name) const {
  for (const auto* list : {&conditions, &consequences})
    for (const auto& c : *list)
      if (c.name == name) return c;
  throw std::out_of_range("S1Report: no check named " + name);
}

S1Report check_s1(const ColumnProfile& p) {
  const DerivedStats d = derived_stats(p);
  const Vector w = p.sq_weights();
  const Index k = p.k();
  const double m = double(p.m);
  const double C = p.Cmax();

  S1Report r;
  Index worst = 0;
  (w - p.sizes).minCoeff(&worst);
  r.conditions.push_back(le("size_vs_norm", p.sizes(worst), w(worst)));
  r.conditions.push_back(le("max_size", C, m));
  r.conditions.push_back(le("xi_moment_ratio", moment_ratio(d.xi), 1.0 + m / (C * double(k))));

  r.consequences.push_back(le("xi_le_one", d.xi.maxCoeff(), 1.0));
  r.consequences.push_back(le("Ek_norm", d.xi.norm(), std::sqrt(double(k))));
  const Vector ratio = p.sizes.cwiseAbs2().cwiseQuotient(w) / m;
  r.consequences.push_back(le("size_ratio_L", ratio.maxCoeff(), double(p.L) / m));
  const double wsum = ((d.Xi2 - d.xi.array()) * p.sizes.array()).sum();
  r.consequences.push_back(le("weighted_size_sum", wsum, m));
  return r;
}

ExpectedGram expected_gram(const ColumnProfile& p) {
  validate(p);
  const Index k = p.k();
  const double m = double(p.m);
  const Vector w = p.sq_weights();
  const Vector& s = p.sizes;

  ExpectedGram g;
  g.G = s * s.transpose() / m;
  g.G.diagonal() = w;
  g.D = w.asDiagonal();
  g.U = s;
  g.E = s.cwiseQuotient(w);
  g.H = Matrix::Zero(k, k);
  g.H.diagonal() = (1.0 - s.cwiseAbs2().cwiseQuotient(w).array() / m).matrix();
  g.Z = g.H + g.E * g.U.transpose() / m;
  const double gmax = g.G.cwiseAbs().maxCoeff();
  g.factor_residual = (g.G - g.D * g.Z).cwiseAbs().maxCoeff() / gmax;
  return g;
}

ZNormCheck z_norm_check(const ColumnProfile& p, double slack_c) {
  const ExpectedGram g = expected_gram(p);
  const DerivedStats d = derived_stats(p);
  ZNormCheck z;
  z.norm_Z = operator_norm(g.Z);
  Eigen::FullPivLU<Matrix> lu(g.Z);
  z.norm_Zinv = lu.isInvertible() ? operator_norm(lu.inverse()) : kInf;
  z.bound_Z = 1.0 + double(p.k()) * d.delta * d.rho;
  z.bound_Zinv = 1.0 + d.rho + slack_c * double(p.L) / double(p.m);
  return z;
}

bool SandwichRow::contains(double tol) const {
  const double t = tol * std::max(1.0, std::abs(oracle));
  return oracle >= lower - t && oracle <= upper + t;
}

bool SandwichRow::contains_pure(double tol) const {
  const double t = tol * std::max(1.0, std::abs(oracle));
  return oracle >= pure_lower - t && oracle <= pure_upper + t;
}

bool SandwichReport::contains(double tol) const {
  return std::all_of(rows.begin(), rows.end(), [&](const auto& r) { return r.contains(tol); });
}

bool SandwichReport::contains_pure(double tol) const {
  return std::all_of(rows.begin(), rows.end(),
                     [&](const auto& r) { return r.contains_pure(tol); });
}

namespace {

SandwichReport sandwich(const ColumnProfile& p, double up_pure, double up_wide, double lo_pure,
                        double lo_wide, double slack_term) {
  const S1Report s1 = check_s1(p);
  const DerivedStats d = derived_stats(p);
  const Vector w = p.sq_weights();
  const Vector sg = sym_eigenvalues(expected_gram(p).G);

  SandwichReport rep;
  rep.s1_pass = s1.pass();
  for (const auto& c : s1.conditions)
    if (!c.pass) rep.failed_preconditions.push_back(c.name);
  for (Index i = 0; i < p.k(); ++i) {
    SandwichRow r;
    r.i = i + 1;
    r.tau_i = d.tau[i];
    r.weight = w(r.tau_i);
    r.oracle = sg(i);
    r.pure_upper = up_pure * r.weight;
    r.upper = up_wide * r.weight;
    r.pure_lower = r.weight / lo_pure;
    r.lower = r.weight / lo_wide;
    r.slack_term = slack_term;
    finish_row(r);
    rep.rows.push_back(r);
  }
  return rep;
}

}  // namespace

SandwichReport theorem3_bounds(const ColumnProfile& p, double slack_c) {
  const DerivedStats d = derived_stats(p);
  const double sl = slack_c * double(p.L) / double(p.m);
  const double up = 1.0 + double(p.k()) * d.delta * d.rho;
  const double lo = 1.0 + d.rho;
  return sandwich(p, up, p.expected_mode() ? up + sl : up, lo, lo + sl, sl);
}

Rng make_stream(std::uint64_t seed, std::uint64_t trial, std::uint64_t column) {
  std::uint64_t st = seed;
  std::uint64_t h = splitmix64(st);
  st = h ^ trial;
  h = splitmix64(st);
  st = h ^ column;
  std::seed_seq seq{splitmix64(st), splitmix64(st), splitmix64(st), splitmix64(st)};
  return Rng(seq);
}

Vector sample_column_binary(Index m, Index l, Rng& rng) {
  if (m < 1 || l < 1 || l > m) throw invalid_input("sample_column_binary: need 1 <= l <= m");
  std::vector<Index> idx(m);
  std::iota(idx.begin(), idx.end(), Index{0});
  Vector x = Vector::Zero(m);
  for (Index j = 0; j < l; ++j) {
    std::uniform_int_distribution<Index> pick(j, m - 1);
    std::swap(idx[j], idx[pick(rng)]);
    x(idx[j]) = 1.0;
  }
  return x;
}

Vector sample_column_fixed_size(Index m, double s, Rng& rng) {
  if (m < 1 || !(s > 0) || !std::isfinite(s)) {
    throw invalid_input("sample_column_fixed_size: need m >= 1 and s > 0");
  }
  std::exponential_distribution<double> ex(1.0);
  Vector x(m);
  for (Index i = 0; i < m; ++i) x(i) = ex(rng);
  return x * (s / x.sum());
}

Vector sample_column_fixed_size_norm(Index m, double s, double b, Rng& rng,
                                     const FixedNormSampling& opts) {
  if (m < 1 || !(s > 0) || !(b > 0)) {
    throw invalid_input("sample_column_fixed_size_norm: need m >= 1, s > 0, b > 0");
  }
  const double bmin = s / std::sqrt(double(m));
  if (b < bmin * (1 - 1e-12) || b > s * (1 + 1e-12)) {
    throw invalid_input("sample_column_fixed_size_norm: norm " + std::to_string(b) +
                        " outside [s/sqrt(m), s] = [" + std::to_string(bmin) + ", " +
                        std::to_string(s) + "]");
  }
  const double c = s / double(m);
  const double radius = std::sqrt(std::max(b * b - s * s / double(m), 0.0));
  if (m == 1 || radius <= 1e-15 * b) return Vector::Constant(m, c);

  // With acceptance at the floor, this many attempts yield no draw with
  // probability below e^-20.
  const auto limit = std::min<std::int64_t>(
      opts.budget, std::int64_t(std::ceil(20.0 / opts.acceptance_floor)));
  for (std::int64_t attempt = 0; attempt < limit; ++attempt) {
    Vector r = sample_column_fixed_size(m, s, rng).array() - c;
    const double nr = r.norm();
    if (nr == 0.0) continue;
    Vector y = (r * (radius / nr)).array() + c;
    if (y.minCoeff() >= 0.0) return y;
  }
  throw sampler_starvation("sample_column_fixed_size_norm: no acceptance in " +
                           std::to_string(limit) + " attempts (m = " + std::to_string(m) +
                           ", s = " + std::to_string(s) + ", b = " + std::to_string(b) + ")");
}

Vector ColumnSpec::sample(Rng& rng) const {
  switch (kind) {
    case ColumnKind::binary: {
      const Index l = Index(std::llround(size));
      if (double(l) != size) throw invalid_input("ColumnSpec: binary size must be an integer");
      return sample_column_binary(m, l, rng);
    }
    case ColumnKind::fixed_size:
      return sample_column_fixed_size(m, size, rng);
    case ColumnKind::fixed_size_norm:
      return sample_column_fixed_size_norm(m, size, norm, rng);
  }
  throw invalid_input("ColumnSpec: unknown kind");
}

double ColumnSpec::sq_norm_expectation() const {
  switch (kind) {
    case ColumnKind::binary:
      return size;
    case ColumnKind::fixed_size:
      // Uniform on the simplex of size s: E x_i^2 = 2 s^2 / (m (m+1)).
      return 2.0 * size * size / double(m + 1);
    case ColumnKind::fixed_size_norm:
      return norm * norm;
  }
  return 0.0;
}

ColumnSpec RandomColumnModel::column(Index j) const {
  if (j < 0 || j >= k()) throw invalid_input("RandomColumnModel: column index out of range");
  ColumnSpec c;
  c.kind = kind;
  c.m = m;
  c.size = sizes(j);
  if (kind == ColumnKind::fixed_size_norm) {
    if (norms.size() != sizes.size()) throw invalid_input("RandomColumnModel: norms missing");
    c.norm = norms(j);
  }
  return c;
}

Matrix RandomColumnModel::sample(std::uint64_t trial) const {
  Matrix X(m, k());
  for (Index j = 0; j < k(); ++j) {
    Rng rng = make_stream(seed, trial, std::uint64_t(j));
    X.col(j) = column(j).sample(rng);
  }
  return X;
}

ColumnProfile RandomColumnModel::profile() const {
  switch (kind) {
    case ColumnKind::binary: {
      std::vector<Index> l(sizes.size());
      for (Index j = 0; j < k(); ++j) l[j] = Index(std::llround(sizes(j)));
      return binary_profile(m, l);
    }
    case ColumnKind::fixed_size: {
      ColumnProfile p;
      p.m = m;
      p.sizes = sizes;
      Vector w(k());
      for (Index j = 0; j < k(); ++j) w(j) = column(j).sq_norm_expectation();
      p.expected_sq_norms = w;
      p.L = m;
      validate(p);
      return p;
    }
    case ColumnKind::fixed_size_norm:
      return fixed_norm_profile(m, sizes, norms, m);
  }
  throw invalid_input("RandomColumnModel: unknown kind");
}

RandomColumnModel binary_model(Index m, const std::vector<Index>& l, std::uint64_t seed) {
  RandomColumnModel model;
  model.kind = ColumnKind::binary;
  model.m = m;
  model.sizes.resize(Index(l.size()));
  for (std::size_t j = 0; j < l.size(); ++j) model.sizes(Index(j)) = double(l[j]);
  model.seed = seed;
  model.profile();  // validates
  return model;
}

namespace {

double z_of(double value, double expected, double se) {
  const double d = value - expected;
  if (se > 0) return d / se;
  return std::abs(d) <= 1e-12 * std::max(1.0, std::abs(expected)) ? 0.0 : kInf;
}

}  // namespace

double PairMomentReport::mean_z() const { return z_of(mean, expected_mean, mean_se); }
double PairMomentReport::var_z() const { return z_of(var, expected_var, var_se); }

PairMomentReport lemma13_stats(const ColumnSpec& x, const ColumnSpec& y, std::int64_t trials,
                               std::uint64_t seed, Execution exec) {
  if (x.m != y.m) throw invalid_input("lemma13_stats: columns must share m");
  const double m = double(x.m);
  PairMomentReport r;
  r.trials = trials;
  r.expected_mode = x.kind == ColumnKind::fixed_size || y.kind == ColumnKind::fixed_size;
  r.expected_mean = x.size * y.size / m;
  const double rx = x.sq_norm_expectation() - x.size * x.size / m;
  const double ry = y.sq_norm_expectation() - y.size * y.size / m;
  r.expected_var = x.m > 1 ? rx * ry / (m - 1) : 0.0;

  // Sums of powers of (<x,y> - expected_mean) keep the fourth moment well conditioned.
  const double shift = r.expected_mean;
  const Vector S = monte_carlo(trials, exec, 4, [&](std::int64_t t, Vector& acc) {
    Rng gx = make_stream(seed, std::uint64_t(t), 0);
    Rng gy = make_stream(seed, std::uint64_t(t), 1);
    const double d = x.sample(gx).dot(y.sample(gy)) - shift;
    const double d2 = d * d;
    acc(0) += d;
    acc(1) += d2;
    acc(2) += d2 * d;
    acc(3) += d2 * d2;
  });
  const double n = double(trials);
  const double a = S(0) / n;
  const double M2 = S(1) / n, M3 = S(2) / n, M4 = S(3) / n;
  const double cvar = std::max(M2 - a * a, 0.0);
  r.mean = shift + a;
  r.var = n > 1 ? cvar * n / (n - 1) : 0.0;
  r.mean_se = std::sqrt(r.var / n);
  const double mu4 = M4 - 4 * M3 * a + 6 * M2 * a * a - 3 * a * a * a * a;
  r.var_se = std::sqrt(std::max(mu4 - cvar * cvar, 0.0) / n);
  return r;
}

EmpiricalGram empirical_gram(const RandomColumnModel& model, std::int64_t trials, Execution exec) {
  const Index k = model.k();
  const Index kk = k * k;
  const Vector S = monte_carlo(trials, exec, 2 * kk, [&](std::int64_t t, Vector& acc) {
    const Matrix X = model.sample(std::uint64_t(t));
    const Matrix g = X.transpose() * X;
    const auto flat = g.reshaped();
    acc.head(kk) += flat;
    acc.tail(kk) += flat.cwiseAbs2();
  });
  EmpiricalGram e;
  e.trials = trials;
  e.G = expected_gram(model.profile()).G;
  e.G_hat.resize(k, k);
  e.se.resize(k, k);
  const double n = double(trials);
  e.max_z = 0;
  for (Index q = 0; q < kk; ++q) {
    double mean, se;
    mean_se(S(q), S(kk + q), n, mean, se);
    e.G_hat.reshaped()(q) = mean;
    e.se.reshaped()(q) = se;
  }
  const Matrix dev = (e.G_hat - e.G).cwiseAbs();
  e.max_dev = dev.maxCoeff();
  for (Index q = 0; q < kk; ++q) {
    e.max_z = std::max(e.max_z, std::abs(z_of(e.G_hat.reshaped()(q), e.G.reshaped()(q),
                                              e.se.reshaped()(q))));
  }
  return e;
}

bool FluctuationReport::bands_hold() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const auto& r) { return r.in_band_frobenius && r.in_band_r0; });
}

bool FluctuationReport::partial_sums_hold() const {
  return std::all_of(rows.begin(), rows.end(), [&](const auto& r) {
    return r.head_ok && r.tail_ok;
  });
}

FluctuationReport fluctuation_bounds(const RandomColumnModel& model, std::int64_t trials,
                                     const FluctuationOptions& opts) {
  const ColumnProfile p = model.profile();
  const DerivedStats d = derived_stats(p);
  const Index k = p.k();
  const double m = double(p.m);
  const Vector w = p.sq_weights();
  const Vector sg = sym_eigenvalues(expected_gram(p).G);

  // Blocks of k: sigma^2, sigma^4, sigma, head sum, head sum^2.
  const Vector S = monte_carlo(trials, opts.exec, 5 * k, [&](std::int64_t t, Vector& acc) {
    const Vector sq = gram_sigma_sq(model.sample(std::uint64_t(t)));
    double head = 0;
    for (Index i = 0; i < k; ++i) {
      head += sq(i);
      acc(i) += sq(i);
      acc(k + i) += sq(i) * sq(i);
      acc(2 * k + i) += std::sqrt(sq(i));
      acc(3 * k + i) += head;
      acc(4 * k + i) += head * head;
    }
  });

  FluctuationReport rep;
  rep.trials = trials;
  rep.frak_c = opts.frak_c;
  rep.slack_c = opts.slack_c;
  const Vector r2 = (w - p.sizes.cwiseAbs2() / m).cwiseMax(0.0);
  const double total = r2.sum();
  for (Index q = 0; q < k; ++q) rep.N += std::sqrt(r2(q)) * std::sqrt(std::max(total - r2(q), 0.0));
  rep.r0 = std::sqrt(r2.maxCoeff());

  const double n = double(trials);
  const double scale = k > 1 && m > 1 ? std::sqrt(double(k - 1) / (m - 1)) : 0.0;
  const double sl = opts.slack_c * double(p.L) / m;
  const double up = 1.0 + double(k) * d.delta * d.rho + sl;
  const double lo = 1.0 + d.rho + sl;

  Vector mean_sigma(k), sigma_se(k);
  for (Index i = 0; i < k; ++i) {
    mean_se(S(2 * k + i), S(i), n, mean_sigma(i), sigma_se(i));
  }
  double gram_head = 0;
  for (Index i = 0; i < k; ++i) {
    FluctuationRow r;
    r.i = i + 1;
    r.sigma_G = sg(i);
    mean_se(S(i), S(k + i), n, r.mean_sq_sigma, r.mean_sq_sigma_se);
    r.mean_sigma = mean_sigma(i);
    r.band_frobenius = scale * rep.N;
    r.band_r0 = m > 1 ? double(k - 1) / std::sqrt(m - 1) * rep.r0 * rep.r0 : 0.0;
    r.band_const = scale * opts.frak_c * rep.r0 * rep.r0;
    const double dev = std::abs(r.mean_sq_sigma - r.sigma_G);
    const double noise = opts.z * r.mean_sq_sigma_se + rel_tol(r.sigma_G);
    r.in_band_frobenius = dev <= r.band_frobenius + noise;
    r.in_band_r0 = dev <= r.band_r0 + noise;
    r.in_band_const = dev <= r.band_const + noise;
    const double wt = w(d.tau[i]);
    r.sandwich_lower = wt / lo - r.band_const;
    r.sandwich_upper = up * wt + r.band_const;
    r.in_sandwich = r.mean_sq_sigma >= r.sandwich_lower - noise &&
                    r.mean_sq_sigma <= r.sandwich_upper + noise;

    gram_head += sg(i);
    double head_mean, head_se;
    mean_se(S(3 * k + i), S(4 * k + i), n, head_mean, head_se);
    r.head_margin = head_mean - gram_head;
    r.head_margin_se = head_se;
    double tail_means = 0, tail_noise = 0;
    for (Index j = i + 1; j < k; ++j) {
      tail_means += mean_sigma(j) * mean_sigma(j);
      tail_noise += 2.0 * mean_sigma(j) * sigma_se(j);
    }
    r.tail_margin = lo * (sg.sum() - gram_head) - tail_means;
    // The i = k head sum is a trace identity, so only rounding separates it from zero.
    const double round = 1e-12 * std::max(1.0, sg.sum());
    r.head_ok = r.head_margin >= -(opts.z * r.head_margin_se + round);
    r.tail_ok = r.tail_margin >= -(opts.z * tail_noise + round);
    rep.rows.push_back(r);
  }
  return rep;
}

Vector binary_exact_mean_sq_sigma(Index m, const std::vector<Index>& l, std::int64_t limit) {
  const Index k = Index(l.size());
  if (k < 1) throw invalid_input("binary_exact_mean_sq_sigma: need at least one column");
  std::vector<std::vector<Vector>> subsets(k);
  double count = 1;
  for (Index j = 0; j < k; ++j) {
    if (l[j] < 1 || l[j] > m) throw invalid_input("binary_exact_mean_sq_sigma: need 1 <= l <= m");
    std::vector<char> mask(m, 0);
    std::fill(mask.begin(), mask.begin() + l[j], 1);
    count *= std::exp(std::lgamma(m + 1.0) - std::lgamma(l[j] + 1.0) - std::lgamma(m - l[j] + 1.0));
    if (count > double(limit) * (1 + 1e-9)) {
      throw invalid_input("binary_exact_mean_sq_sigma: ensemble larger than limit");
    }
    do {
      Vector v(m);
      for (Index i = 0; i < m; ++i) v(i) = mask[i];
      subsets[j].push_back(v);
    } while (std::prev_permutation(mask.begin(), mask.end()));
  }
  std::vector<std::size_t> pos(k, 0);
  Matrix X(m, k);
  Vector acc = Vector::Zero(k);
  std::int64_t members = 0;
  while (true) {
    for (Index j = 0; j < k; ++j) X.col(j) = subsets[j][pos[j]];
    acc += gram_sigma_sq(X);
    ++members;
    Index j = 0;
    while (j < k && ++pos[j] == subsets[j].size()) pos[j++] = 0;
    if (j == k) break;
  }
  return acc / double(members);
}

void validate(const GammaSpec& g) {
  if (!(g.alpha >= 1.0) || !std::isfinite(g.alpha)) throw invalid_input("GammaSpec: alpha must be >= 1");
  if (!(g.beta > 0.0) || !std::isfinite(g.beta)) throw invalid_input("GammaSpec: beta must be positive");
  if (!(g.a >= 0.0) || !std::isfinite(g.a)) throw invalid_input("GammaSpec: a must be >= 0");
}

TruncatedGammaMoments truncated_gamma_moments(const GammaSpec& g) {
  validate(g);
  using boost::math::gamma_q;
  const double x = g.beta * g.a;
  TruncatedGammaMoments t;
  t.tail_mass = gamma_q(g.alpha, x);
  if (!(t.tail_mass > 0)) throw invalid_input("truncated_gamma_moments: no mass above a");
  t.mean = g.alpha / g.beta * gamma_q(g.alpha + 1, x) / t.tail_mass;
  t.second = g.alpha * (g.alpha + 1) / (g.beta * g.beta) * gamma_q(g.alpha + 2, x) / t.tail_mass;
  t.rho = std::sqrt(t.second) / t.mean;
  return t;
}

double gamma_rho_limit(double alpha) { return std::sqrt(1.0 + 1.0 / alpha); }

Vector sample_sizes_truncated_gamma(Index k, const GammaSpec& g, Rng& rng) {
  validate(g);
  if (k < 1) throw invalid_input("sample_sizes_truncated_gamma: k must be >= 1");
  const double tail = boost::math::gamma_q(g.alpha, g.beta * g.a);
  if (tail < 1e-6) {
    throw invalid_input("sample_sizes_truncated_gamma: acceptance 1 - F(a) = " +
                        std::to_string(tail) + " too small for rejection sampling");
  }
  std::gamma_distribution<double> gd(g.alpha, 1.0 / g.beta);
  Vector out(k);
  for (Index i = 0; i < k; ++i) {
    double t = gd(rng);
    std::int64_t attempts = 1;
    while (t < g.a) {
      if (++attempts > 100000000) throw sampler_starvation("truncated gamma: no acceptance");
      t = gd(rng);
    }
    out(i) = t;
  }
  return out;
}

Corollary10Report corollary10_bounds(const ColumnProfile& p, const GammaSpec& g, double slack_c) {
  validate(g);
  const Index k = p.k();
  const double m = double(p.m);
  const double sl = slack_c * double(p.L) / m;
  const double up = 1.0 + double(k) / (m * g.beta) * std::sqrt(g.alpha * (g.alpha + 1));
  const double lo = 1.0 + gamma_rho_limit(g.alpha);

  Corollary10Report r;
  r.sandwich = sandwich(p, up, up + sl, lo, lo + sl, sl);
  r.cond_density = 1.0 / double(k) <= double(p.L) / m;
  r.cond_gamma = g.a == 1.0 && g.alpha >= 1.0 && g.beta <= 1.0 / std::sqrt(double(k));
  if (!r.cond_density) r.sandwich.failed_preconditions.push_back("density");
  if (!r.cond_gamma) r.sandwich.failed_preconditions.push_back("gamma_parameters");
  return r;
}

std::vector<Index> binarize_sizes(const Vector& sizes, Index m) {
  std::vector<Index> l(sizes.size());
  for (Index i = 0; i < sizes.size(); ++i) {
    l[i] = std::clamp<Index>(Index(std::llround(sizes(i))), 1, m);
  }
  return l;
}

GammaResampling corollary10_resampling(Index m, Index k, const GammaSpec& g, int resamples,
                                       std::uint64_t seed, double slack_c) {
  if (resamples < 1) throw invalid_input("corollary10_resampling: resamples must be >= 1");
  const Vector S = monte_carlo(resamples, Execution::parallel, 5, [&](std::int64_t t, Vector& acc) {
    Rng rng = make_stream(seed, std::uint64_t(t), 0);
    const Vector sizes = sample_sizes_truncated_gamma(k, g, rng);
    const double delta = sizes.mean() / double(m);
    const Corollary10Report rep = corollary10_bounds(binary_profile(m, binarize_sizes(sizes, m)), g, slack_c);
    acc(0) += rep.sandwich.contains() ? 1 : 0;
    acc(1) += rep.cond_density && rep.cond_gamma ? 1 : 0;
    acc(2) += delta;
    acc(3) += delta * delta;
  });
  GammaResampling out;
  out.resamples = resamples;
  out.contained = int(std::lround(S(0)));
  out.preconditions_met = int(std::lround(S(1)));
  mean_se(S(2), S(3), double(resamples), out.mean_delta, out.delta_se);
  out.delta_nominal = g.alpha / (double(m) * g.beta);
  out.delta_truncated = truncated_gamma_moments(g).mean / double(m);
  return out;
}

}  // namespace blockgivens
