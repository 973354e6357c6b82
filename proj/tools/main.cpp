// blockgivens: command-line front end.
//
// Exit codes: 0 success, 1 a bound or check was violated (or the pipeline
// failed), 2 usage or input errors.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "blockgivens/blockdiag.hpp"
#include "blockgivens/bounds.hpp"
#include "blockgivens/mmio.hpp"
#include "blockgivens/pipeline.hpp"
#include "blockgivens/randmat.hpp"
#include "blockgivens/report_json.hpp"
#include "blockgivens/verify.hpp"

using namespace blockgivens;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  double tol = 1e-12;
  int max_iter = 200;
  int trials = 0;
  bool oracle = false;
  std::string out;
};

void emit(const Json& j, const std::string& path) {
  const std::string text = dump(j);
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw invalid_input("cannot write " + path);
  f << text;
}

Matrix load_dense(const std::string& path, Index dense_limit = 2000) {
  const SparseMatrix S = read_matrix_market(path);
  if (S.cols() > dense_limit) {
    throw invalid_input(path + ": " + std::to_string(S.cols()) + " columns exceed the dense limit " +
                        std::to_string(dense_limit));
  }
  return Matrix(S);
}

void require_split(const Matrix& R, Index k) {
  if (R.rows() < R.cols()) throw invalid_input("matrix must have at least as many rows as columns");
  if (k < 1 || k >= R.cols()) throw invalid_input("k must satisfy 1 <= k < n");
}

int cmd_blockdiag(const Globals& g, const std::string& path, Index k, const std::string& trace_path,
                  bool check) {
  const Matrix R = load_dense(path);
  require_split(R, k);
  BlockDiagOptions o;
  o.tol = g.tol;
  o.max_iter = g.max_iter;
  o.accumulate = false;
  o.detail = check ? TraceDetail::full : TraceDetail::light;
  Json j;
  int code = 0;
  BlockDiagResult r;
  try {
    r = block_diagonalize(BlockPartition(R, k), o);
  } catch (const blockdiag_failure& e) {
    j["error"] = e.what();
    j["residual"] = e.residual();
    emit(j, g.out);
    return 1;
  }
  j["result"] = to_json(r);
  if (!r.converged) code = 1;
  if (check) {
    const Lemma11Report rep = check_lemma11(r.trace);
    j["properties"] = to_json(rep);
    if (!rep.pass()) code = 1;
  }
  if (!trace_path.empty()) {
    std::ofstream f(trace_path);
    if (!f) throw invalid_input("cannot write " + trace_path);
    for (const auto& rec : r.trace.records) f << to_json(rec).dump() << '\n';
  }
  emit(j, g.out);
  return code;
}

int cmd_bounds(const Globals& g, const std::string& path, Index k, Index i) {
  const Matrix R = load_dense(path);
  require_split(R, k);
  if (i < 1 || i > R.cols()) throw invalid_input("i must satisfy 1 <= i <= n");
  const BlockPartition p(R, k);
  std::vector<BoundReport> all = weyl_gap_bounds(p, i);
  for (auto& r : small_rank_bounds(p, i)) all.push_back(r);
  for (auto& r : mu_bounds(p, i)) all.push_back(r);
  Json j;
  try {
    for (auto& r : theorem2_bounds(p)) all.push_back(r);
  } catch (const invalid_input& e) {
    j["skipped"].push_back(std::string("sigma_k1: ") + e.what());
  }
  if (R.rows() == 2 * k && R.cols() == 2 * k) {
    try {
      all.push_back(corollary5_bound(p));
    } catch (const invalid_input& e) {
      j["skipped"].push_back(std::string("square_case: ") + e.what());
    }
  }
  int code = 0;
  Json a = Json::array();
  for (const auto& r : all) {
    a.push_back(to_json(r));
    if (!r.contains(1e-10 * std::max(1.0, operator_norm(R)))) code = 1;
  }
  j["bounds"] = a;
  emit(j, g.out);
  return code;
}

int cmd_plan(const Globals& g, const std::string& path, std::optional<Index> k, double alpha,
             const std::string& permuted) {
  const SparseMatrix R = read_matrix_market(path);
  const PartitionPlan p = plan_partition(R, k, alpha);
  if (!permuted.empty()) write_matrix_market(apply_plan(R, p), permuted);
  Json j;
  j["m"] = R.rows();
  j["n"] = R.cols();
  j["plan"] = to_json(p);
  emit(j, g.out);
  return 0;
}

int cmd_approx(const Globals& g, const std::string& path, std::optional<Index> k,
               std::optional<Index> rank, double alpha) {
  const SparseMatrix S = read_matrix_market(path);
  const PartitionPlan p = plan_partition(S, k, alpha);
  Json j;
  j["m"] = S.rows();
  j["n"] = S.cols();
  j["plan"] = to_json(p, false);
  const Index r = rank ? *rank : p.i_star;
  if (r < 1) {
    j["error"] = "the plan predicts no certifiable rank (i* = 0); pass --rank to force one";
    emit(j, g.out);
    return 1;
  }
  if (S.cols() > 2000) throw invalid_input("n = " + std::to_string(S.cols()) + " exceeds the dense limit 2000");
  Algorithm2Options o;
  o.tol = g.tol;
  o.max_iter = g.max_iter;
  o.oracle = g.oracle;
  try {
    const ApproxReport a = algorithm2(Matrix(apply_plan(S, p)), p.k, r, o);
    j["approx"] = to_json(a);
    emit(j, g.out);
    return a.has_oracle && !a.certificate_holds ? 1 : 0;
  } catch (const pipeline_failure& e) {
    j["error"] = e.what();
    j["partial"] = to_json(e.partial());
    emit(j, g.out);
    return 1;
  }
}

int cmd_theorem3(const Globals& g, const std::string& path, double slack_c) {
  std::ifstream f(path);
  if (!f) throw invalid_input("cannot open " + path);
  Json in;
  try {
    in = Json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw invalid_input(path + ": " + e.what());
  }
  const ColumnProfile p = profile_from_json(in);
  const SandwichReport r = theorem3_bounds(p, slack_c);
  Json j;
  j["profile"] = to_json(p);
  j["s1"] = to_json(check_s1(p));
  j["sandwich"] = to_json(r);
  emit(j, g.out);
  return r.contains() ? 0 : 1;
}

struct SampleArgs {
  std::string model = "binary";
  Index m = 0, n = 0, k = 20;
  std::vector<Index> counts;
  double alpha = 1.0, beta = 0.02, d_ratio = 0.01;
  std::string matrix_out;
};

int cmd_sample(const Globals& g, const SampleArgs& a) {
  if (a.matrix_out.empty()) throw invalid_input("sample: --matrix is required");
  Json j;
  j["model"] = a.model;
  j["seed"] = g.seed;
  if (a.model == "binary") {
    if (a.counts.empty()) throw invalid_input("sample binary: --counts is required");
    const RandomColumnModel model = binary_model(a.m, a.counts, g.seed);
    const Matrix X = model.sample(0);
    write_matrix_market(X, a.matrix_out);
    j["profile"] = to_json(model.profile());
  } else if (a.model == "gamma") {
    GammaSparseSpec s;
    s.m = a.m;
    s.n = a.n;
    s.sizes = {a.alpha, a.beta, 1.0};
    s.anchors = std::min({a.k, a.m, a.n});
    s.max_nnz = std::min(s.max_nnz, a.m);
    s.min_nnz = std::min(s.min_nnz, s.max_nnz);
    s.seed = g.seed;
    const SparseMatrix R = gamma_sparse(s);
    write_matrix_market(R, a.matrix_out);
    j["m"] = R.rows();
    j["n"] = R.cols();
    j["nonzeros"] = R.nonZeros();
  } else if (a.model == "synthetic") {
    SyntheticSpec s;
    s.m = a.m;
    s.n = a.n;
    s.k = a.k;
    s.d_ratio = a.d_ratio;
    s.seed = g.seed;
    write_matrix_market(synthetic_partitioned(s), a.matrix_out);
    j["m"] = s.m;
    j["n"] = s.n;
    j["k"] = s.k;
  } else {
    throw invalid_input("sample: unknown model '" + a.model + "'");
  }
  j["matrix"] = a.matrix_out;
  emit(j, g.out);
  return 0;
}

int cmd_verify(const Globals& g, const std::string& suite) {
  VerifyOptions o;
  o.seed = g.seed;
  o.trials = g.trials;
  const VerifyReport r = run_verify(suite, o);
  emit(to_json(r), g.out);
  for (const auto& c : r.checks) {
    if (!c.pass()) {
      std::cerr << "FAIL " << c.suite << "/" << c.name << ": " << c.failures << " of " << c.evaluated
                << " (worst margin " << c.worst_margin << ")\n";
    }
  }
  return r.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block-Givens singular value tools"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--tol", g.tol, "Block diagonalization tolerance (relative to |R|)")->check(CLI::PositiveNumber);
  app.add_option("--max-iter", g.max_iter, "Iteration cap")->check(CLI::NonNegativeNumber);
  app.add_option("--trials", g.trials, "Random instances per verify check")->check(CLI::NonNegativeNumber);
  app.add_flag("--oracle", g.oracle, "Compare against a library SVD");
  app.add_option("-o,--output", g.out, "Write JSON here instead of stdout");

  std::string path, trace_path, profile_path, suite, permuted;
  Index k = 0, i = 0, rank = 0;
  double alpha = 1.0, slack_c = 4.0;
  bool check = false;

  auto* bd = app.add_subcommand("blockdiag", "Block-diagonalize a Matrix Market file");
  bd->add_option("matrix", path)->required()->check(CLI::ExistingFile);
  bd->add_option("-k", k, "Split")->required();
  bd->add_option("--trace", trace_path, "Write the iteration trace as JSON lines");
  bd->add_flag("--check", check, "Check the per-step properties");

  auto* bo = app.add_subcommand("bounds", "Perturbation bounds for zeroing the corner block");
  bo->add_option("matrix", path)->required()->check(CLI::ExistingFile);
  bo->add_option("-k", k, "Split")->required();
  bo->add_option("-i", i, "Singular value index (1-based)")->required();

  auto* pl = app.add_subcommand("plan", "Sort a sparse matrix and predict the certifiable rank");
  pl->add_option("matrix", path)->required()->check(CLI::ExistingFile);
  auto* pl_k = pl->add_option("-k", k, "Split (chosen by the planner when absent)");
  pl->add_option("--alpha", alpha, "Shape parameter")->check(CLI::PositiveNumber);
  pl->add_option("--permuted", permuted, "Write the planned matrix here");

  auto* ap = app.add_subcommand("approx", "Plan, drop the corner block and certify the top values");
  ap->add_option("matrix", path)->required()->check(CLI::ExistingFile);
  auto* ap_k = ap->add_option("-k", k, "Split (chosen by the planner when absent)");
  auto* ap_rank = ap->add_option("--rank", rank, "Number of values (default: predicted i*)");
  ap->add_option("--alpha", alpha, "Shape parameter")->check(CLI::PositiveNumber);

  auto* th = app.add_subcommand("theorem3", "Expected Gram spectrum bounds for a column profile");
  th->alias("gram");
  th->add_option("profile", profile_path, "Profile JSON")->required()->check(CLI::ExistingFile);
  th->add_option("--slack-c", slack_c, "Constant of the L/m slack")->check(CLI::NonNegativeNumber);

  SampleArgs sa;
  auto* sm = app.add_subcommand("sample", "Write a random matrix as Matrix Market");
  sm->add_option("--model", sa.model, "binary, gamma or synthetic")
      ->check(CLI::IsMember({"binary", "gamma", "synthetic"}));
  sm->add_option("--m", sa.m, "Rows")->required();
  sm->add_option("--n", sa.n, "Columns (gamma, synthetic)");
  sm->add_option("-k", sa.k, "Split (synthetic) or anchored columns (gamma)");
  sm->add_option("--counts", sa.counts, "Nonzeros per column (binary)")->delimiter(',');
  sm->add_option("--alpha", sa.alpha, "Gamma shape");
  sm->add_option("--beta", sa.beta, "Gamma rate");
  sm->add_option("--d-ratio", sa.d_ratio, "|D| / |R| (synthetic)");
  sm->add_option("--matrix", sa.matrix_out, "Matrix Market output path")->required();

  auto* ve = app.add_subcommand("verify", "Run an invariant suite");
  std::string names;
  for (const auto& n : suite_names()) names += (names.empty() ? "" : ", ") + n;
  ve->add_option("suite", suite, "One of: " + names)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*ve) {
      if (!known_suite(suite)) {
        std::cerr << "unknown suite '" << suite << "'\n" << ve->help();
        return 2;
      }
      return cmd_verify(g, suite);
    }
    if (*bd) return cmd_blockdiag(g, path, k, trace_path, check);
    if (*bo) return cmd_bounds(g, path, k, i);
    if (*pl) return cmd_plan(g, path, *pl_k ? std::optional<Index>(k) : std::nullopt, alpha, permuted);
    if (*ap) {
      return cmd_approx(g, path, *ap_k ? std::optional<Index>(k) : std::nullopt,
                        *ap_rank ? std::optional<Index>(rank) : std::nullopt, alpha);
    }
    if (*th) return cmd_theorem3(g, profile_path, slack_c);
    if (*sm) return cmd_sample(g, sa);
  } catch (const invalid_input& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
