#pragma once

// Invariant suites behind `blockgivens verify`.
//
// Each check accumulates a worst margin (allowed minus observed, so negative
// means violated) over the instances it saw. Advisory checks are reported but
// never fail a suite.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "blockgivens/report_json.hpp"

namespace blockgivens {

struct VerifyCheck {
  std::string suite;
  std::string name;
  bool advisory = false;
  Index evaluated = 0;
  Index failures = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::string note;

  void record(double margin);
  void require(bool ok) { record(ok ? 0.0 : -1.0); }
  bool pass() const { return advisory || failures == 0; }
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  int trials = 0;  // random instances per check; 0 keeps each suite's default
};

struct VerifyReport {
  std::vector<std::string> suites;
  std::uint64_t seed = 0;
  int trials = 0;
  std::vector<VerifyCheck> checks;
  bool pass() const;
};

/// matcore, givens, blockdiag, bounds, theorem3, corollaries, gamma, pipeline, all.
const std::vector<std::string>& suite_names();
bool known_suite(const std::string& name);

/// Throws invalid_input for an unknown suite.
VerifyReport run_verify(const std::string& suite, const VerifyOptions& opts = {});

Json to_json(const VerifyCheck& c);
Json to_json(const VerifyReport& r);

}  // namespace blockgivens
