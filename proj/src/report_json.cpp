#include "blockgivens/report_json.hpp"

#include <cmath>

namespace blockgivens {

namespace {

Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Vector vector_from(const Json& j, const char* field) {
  if (!j.is_array()) throw invalid_input(std::string("profile: '") + field + "' must be an array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw invalid_input(std::string("profile: '") + field + "' holds a non-number");
    v(Index(i)) = j[i].get<double>();
  }
  return v;
}

Json checks_json(const std::vector<ConditionCheck>& cs) {
  Json a = Json::array();
  for (const auto& c : cs) {
    a.push_back({{"name", c.name}, {"lhs", num(c.lhs)}, {"rhs", num(c.rhs)},
                 {"margin", num(c.margin)}, {"pass", c.pass}});
  }
  return a;
}

}  // namespace

Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

Json to_json(const BoundReport& r) {
  Json j;
  j["formula"] = r.formula;
  j["quantity"] = r.quantity;
  j["i"] = r.i;
  j["k"] = r.k;
  j["lower"] = num(r.lower);
  j["upper"] = num(r.upper);
  j["oracle"] = r.has_oracle ? num(r.oracle) : Json(nullptr);
  j["slack"] = r.has_oracle ? num(r.slack) : Json(nullptr);
  return j;
}

Json to_json(const SweepRecord& r) {
  Json j;
  j["t"] = r.t;
  j["step"] = r.has_step ? Json(r.step == Side::left ? "left" : "right") : Json(nullptr);
  j["degenerate"] = r.degenerate;
  j["sigma_A"] = to_json(r.sigma_A);
  j["norm_A"] = num(r.norm_A);
  j["norm_B"] = num(r.norm_B);
  j["norm_C"] = num(r.norm_C);
  j["norm_D"] = num(r.norm_D);
  j["nu"] = num(r.nu);
  return j;
}

Json to_json(const PropertyCheck& c) {
  return {{"name", c.name},         {"advisory", c.advisory},       {"evaluated", c.evaluated},
          {"failures", c.failures}, {"worst_margin", num(c.worst_margin)}, {"worst_t", c.worst_t},
          {"pass", c.pass()}};
}

Json to_json(const Lemma11Report& r) {
  Json j;
  j["tol"] = r.tol;
  j["pass"] = r.pass();
  Json a = Json::array();
  for (const auto& c : r.checks) a.push_back(to_json(c));
  j["checks"] = a;
  return j;
}

Json to_json(const BlockDiagResult& r) {
  Json j;
  j["m"] = r.trace.m;
  j["n"] = r.trace.n;
  j["k"] = r.trace.k;
  j["norm_R"] = num(r.trace.norm_R);
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["offdiag"] = num(r.offdiag);
  j["sigma_A"] = to_json(r.trace.records.empty() ? Vector() : r.trace.records.back().sigma_A);
  return j;
}

Json to_json(const PartitionPlan& p, bool permutations) {
  Json j;
  j["k"] = p.k;
  j["k_chosen"] = p.k_chosen;
  j["i_star"] = p.i_star;
  j["threshold"] = num(p.threshold);
  j["alpha"] = num(p.alpha);
  j["factor"] = num(p.factor);
  j["next_size"] = num(p.next_size);
  j["max_row_right"] = num(p.max_row_right);
  j["rho_ratio"] = num(p.rho_ratio);
  j["rho_ratio_bound"] = num(p.rho_ratio_bound);
  j["ratio_flag"] = p.ratio_flag;
  Json c = Json::array();
  for (const auto& x : p.candidates) {
    c.push_back({{"k", x.k}, {"i_star", x.i_star}, {"threshold", num(x.threshold)}});
  }
  j["candidates"] = c;
  if (permutations) {
    j["col_perm"] = p.col_perm;
    j["row_perm"] = p.row_perm;
  }
  return j;
}

Json to_json(const ApproxReport& r) {
  Json j;
  j["m"] = r.m;
  j["n"] = r.n;
  j["k_requested"] = r.k_requested;
  j["k"] = r.k;
  j["rank"] = r.rank;
  j["values"] = to_json(r.values);
  j["norm_R"] = num(r.norm_R);
  j["norm_D"] = num(r.norm_D);
  j["bound"] = num(r.bound);
  j["sigma_k_A"] = num(r.sigma_k_A);
  j["converged"] = r.converged;
  j["certified"] = r.certified;
  j["gap_lhs"] = num(r.gap_lhs);
  j["gap_rhs"] = num(r.gap_rhs);
  j["iterations"] = r.iterations;
  j["offdiag"] = num(r.offdiag);
  j["warnings"] = r.warnings;
  if (r.has_oracle) {
    j["oracle"] = to_json(r.oracle);
    j["errors"] = to_json(r.errors);
    j["max_error"] = num(r.max_error);
    j["certificate_holds"] = r.certificate_holds;
  }
  return j;
}

Json to_json(const ColumnProfile& p) {
  Json j;
  j["m"] = p.m;
  j["k"] = p.k();
  j["sizes"] = to_json(p.sizes);
  if (p.norms) j["norms"] = to_json(*p.norms);
  if (p.expected_sq_norms) j["expected_sq_norms"] = to_json(*p.expected_sq_norms);
  j["L"] = p.L;
  return j;
}

Json to_json(const S1Report& r) {
  Json j;
  j["pass"] = r.pass();
  j["conditions"] = checks_json(r.conditions);
  j["consequences_hold"] = r.consequences_hold();
  j["consequences"] = checks_json(r.consequences);
  return j;
}

Json to_json(const SandwichReport& r) {
  Json j;
  j["s1_pass"] = r.s1_pass;
  j["failed_preconditions"] = r.failed_preconditions;
  j["contains"] = r.contains();
  j["contains_pure"] = r.contains_pure();
  Json rows = Json::array();
  for (const auto& x : r.rows) {
    Json o;
    o["i"] = x.i;
    o["column"] = x.tau_i + 1;
    o["weight"] = num(x.weight);
    o["oracle"] = num(x.oracle);
    o["pure_lower"] = num(x.pure_lower);
    o["pure_upper"] = num(x.pure_upper);
    o["lower"] = num(x.lower);
    o["upper"] = num(x.upper);
    o["slack_term"] = num(x.slack_term);
    o["pure_slack"] = num(x.pure_slack);
    o["slack"] = num(x.slack);
    rows.push_back(o);
  }
  j["rows"] = rows;
  return j;
}

ColumnProfile profile_from_json(const Json& j) {
  if (!j.is_object()) throw invalid_input("profile: expected a JSON object");
  if (!j.contains("m") || !j["m"].is_number_integer()) throw invalid_input("profile: integer 'm' required");
  if (!j.contains("sizes")) throw invalid_input("profile: 'sizes' required");
  const Index m = j["m"].get<Index>();
  const Vector sizes = vector_from(j["sizes"], "sizes");
  if (j.contains("k") && j["k"].get<Index>() != sizes.size()) {
    throw invalid_input("profile: 'k' does not match the number of sizes");
  }
  const bool has_norms = j.contains("norms");
  const bool has_w = j.contains("expected_sq_norms");
  if (has_norms == has_w) throw invalid_input("profile: give exactly one of 'norms' and 'expected_sq_norms'");
  Index L = 0;
  if (j.contains("L")) {
    if (!j["L"].is_number_integer()) throw invalid_input("profile: 'L' must be an integer");
    L = j["L"].get<Index>();
  }
  ColumnProfile p;
  if (has_norms) {
    p = fixed_norm_profile(m, sizes, vector_from(j["norms"], "norms"), L);
  } else {
    p.m = m;
    p.sizes = sizes;
    p.expected_sq_norms = vector_from(j["expected_sq_norms"], "expected_sq_norms");
    p.L = L > 0 ? L : m;
  }
  validate(p);
  return p;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace blockgivens
