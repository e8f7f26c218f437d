#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pdlab/problem.hpp"

namespace pdlab {

struct HyperParams {
  double eta_x = 0.1;
  double eta_dual = 0.1;
  double c = 1.0;      // penalty (augmented rules)
  double omega = 0.0;  // optimism weight (optimistic rules)

  // Handling of the first optimistic dual step, when no previous constraint
  // values exist yet: "plain" drops the difference term, "zero_diff" treats
  // the previous value as equal to the current one. Both give the same
  // iterates; the switch exists so the convention is explicit.
  enum class FirstStep { plain, zero_diff };
  FirstStep first_step = FirstStep::plain;
};

struct PrimalDualState {
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;
  Eigen::VectorXd mu;
  std::optional<Eigen::VectorXd> prev_g;  // g at the previous primal query
  std::optional<Eigen::VectorXd> prev_h;  // h at the previous primal query
  long t = 0;
};

enum class Rule { lag_gda, al_gda, lag_gd_oa, al_gd_oa };

std::string rule_name(Rule r);
Rule rule_from_name(const std::string& name);

/// Make a state with zero multipliers (and empty history) at x0.
PrimalDualState initial_state(const ProblemSpec& p, const Eigen::VectorXd& x0);

/// One iteration of each update rule. Each advances the state in place and
/// increments t. Dual-first rules: multipliers move on the current point,
/// then the primal descends on the plain Lagrangian with the new
/// multipliers. Primal-first rules: the primal descends on the augmented
/// objective with the current multipliers, then the duals move on the new
/// point.
void step_lag_gda(const ProblemSpec& p, PrimalDualState& s, const HyperParams& hp);
void step_al_gda(const ProblemSpec& p, PrimalDualState& s, const HyperParams& hp);
void step_dual_optimistic(const ProblemSpec& p, PrimalDualState& s, const HyperParams& hp);
/// Augmented + optimistic dual. Equality-constrained problems only; throws
/// std::invalid_argument when the problem has inequality constraints.
void step_al_optimistic(const ProblemSpec& p, PrimalDualState& s, const HyperParams& hp);

void step(const ProblemSpec& p, Rule rule, PrimalDualState& s, const HyperParams& hp);

enum class RunStatus { converged, max_steps, diverged };

struct StepRecord {
  long t = 0;
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;
  Eigen::VectorXd mu;
  Eigen::VectorXd g;  // g(x)
  Eigen::VectorXd h;  // h(x)
  double f = 0.0;
  double norm_h_inf = 0.0;
  double max_g_plus = 0.0;
  double lagrangian = 0.0;
  double step_norm = 0.0;  // ||x_t - x_{t-1}||, 0 at t = 0
  double kkt_residual = 0.0;
};

struct Trajectory {
  Rule rule = Rule::lag_gda;
  RunStatus status = RunStatus::max_steps;
  std::vector<StepRecord> steps;  // includes the initial state at t = 0
  long diverged_at = -1;          // t of the first non-finite / huge iterate
};

/// Iterate a rule until the KKT residual drops below stop_tol, max_steps is
/// reached, or an iterate leaves [-1e12, 1e12] (or turns non-finite).
Trajectory run(const ProblemSpec& p, Rule rule, const PrimalDualState& init,
               const HyperParams& hp, long max_steps, double stop_tol);

struct MultiplierMethodOptions {
  std::vector<double> c_schedule = {1.0};  // last entry repeats
  double inner_tol = 1e-10;
  long inner_max = 100000;
  long outer_max = 50;
  double eta_inner = 0.1;  // gradient step for the inner minimization
};

struct MultiplierMethodResult {
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;
  Eigen::VectorXd mu;
  RunStatus status = RunStatus::max_steps;
  long outer_iters = 0;
  std::vector<double> kkt_residuals;  // after each outer iteration
};

/// Reference method of multipliers: minimize the augmented objective in x to
/// inner_tol by gradient descent, then take one exact multiplier update.
MultiplierMethodResult method_of_multipliers(const ProblemSpec& p, const PrimalDualState& init,
                                             const MultiplierMethodOptions& opt,
                                             double stop_tol = 1e-9);

}  // namespace pdlab
