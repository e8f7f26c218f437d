#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pdlab {

struct CheckResult {
  std::string suite;   // e.g. "thm32"
  std::string detail;  // human-readable summary with measured values
  bool passed = false;
};

struct VerifyOptions {
  std::string suite_filter;  // empty = run everything
  std::uint64_t seed = 20240817;
  // test hook: corrupt one operator-Jacobian entry so the spectral-identity
  // suite must fail; used to prove the checks can fail at all
  bool sabotage = false;
};

/// Run the acceptance and property suites. Suites:
///   expr_props, problem_props, functionals_props, solver_props,
///   stability_props, harness_props,
///   thm32, thm35, fixed_points, charpoly, projection_fp, nonconvex, threshold,
///   rates, damping, conditioning, negative_optimism, compounding,
///   derivatives
std::vector<CheckResult> run_criteria(const VerifyOptions& opt);

bool all_passed(const std::vector<CheckResult>& results);

std::vector<std::string> known_suites();

}  // namespace pdlab
