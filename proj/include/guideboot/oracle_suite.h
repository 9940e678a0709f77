#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace guideboot::oracles {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SuiteOptions {
  std::uint64_t trials = 1000000;
  std::uint64_t seed = 20240501;
  unsigned workers = 1;
};

// Closed-form versus Monte-Carlo agreement (alpha = 1, n = 50, n_s in
// {1, 0, 25}), Monte-Carlo versus exact enumeration of the same construction,
// the mean identity, the asymptotic variance ratio and the degenerate
// zero-success case.
std::vector<CheckResult> run_oracle_checks(const SuiteOptions& options = {});

}  // namespace guideboot::oracles
