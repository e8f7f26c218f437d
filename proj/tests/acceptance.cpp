// Acceptance gate: runs the thirteen headline checks and prints one verdict
// line each. Exits nonzero when any check fails.

#include <cstdio>
#include <string>
#include <vector>

#include "pdlab/verify.hpp"

int main() {
  using pdlab::CheckResult;
  using pdlab::VerifyOptions;

  struct Criterion {
    int number;
    const char* suite;
    const char* label;
  };
  const std::vector<Criterion> criteria = {
      {1, "thm32", "dual-shift equivalence of the two update rules"},
      {2, "thm35", "spectral radius identity at omega = c"},
      {3, "fixed_points", "fixed points coincide with stationary points"},
      {4, "charpoly", "closed-form characteristic polynomials"},
      {5, "projection_fp", "projected dual fixed points characterize complementarity"},
      {6, "nonconvex", "penalization rescues the concave saddle"},
      {7, "threshold", "convexification threshold values"},
      {8, "rates", "empirical linear rates track the spectra"},
      {9, "damping", "optimism damps constraint oscillation"},
      {10, "conditioning", "conditioning degrades with large optimism"},
      {11, "negative_optimism", "negative optimism destabilizes"},
      {12, "compounding", "penalty and optimism compound additively"},
      {13, "derivatives", "derivative oracles agree"},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    VerifyOptions opt;
    opt.suite_filter = c.suite;
    const std::vector<CheckResult> results = pdlab::run_criteria(opt);
    bool ok = !results.empty();
    std::string detail;
    for (const CheckResult& r : results) {
      ok = ok && r.passed;
      if (!r.passed) detail = r.detail;
    }
    std::printf("criterion %2d  %s  %s%s%s\n", c.number, ok ? "PASS" : "FAIL", c.label,
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok) ++failures;
  }
  if (failures > 0) {
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
