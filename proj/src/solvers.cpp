#include "pdlab/solvers.hpp"

#include <cmath>
#include <stdexcept>

#include "pdlab/functionals.hpp"
#include "pdlab/stability.hpp"

namespace pdlab {

namespace {

constexpr double kDivergenceBound = 1e12;

bool within_bounds(const Eigen::VectorXd& v) {
  return v.allFinite() && v.cwiseAbs().maxCoeff() <= kDivergenceBound;
}

bool state_ok(const PrimalDualState& s) {
  if (!within_bounds(s.x)) return false;
  if (s.lambda.size() > 0 && !within_bounds(s.lambda)) return false;
  if (s.mu.size() > 0 && !within_bounds(s.mu)) return false;
  return true;
}

/// Gradient of the plain Lagrangian in x.
Eigen::VectorXd lagrangian_grad_x(const ProblemSpec& p, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& lambda, const Eigen::VectorXd& mu) {
  Eigen::VectorXd grad = p.f(x).grad;
  for (int i = 0; i < p.m(); ++i) grad += lambda(i) * p.g[i](x).grad;
  for (int j = 0; j < p.n(); ++j) grad += mu(j) * p.h[j](x).grad;
  return grad;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> constraint_values(const ProblemSpec& p,
                                                              const Eigen::VectorXd& x) {
  auto [f, g, h] = evaluate_all(p, x);
  (void)f;
  return {g, h};
}

}  // namespace

std::string rule_name(Rule r) {
  switch (r) {
    case Rule::lag_gda: return "lag_gda";
    case Rule::al_gda: return "al_gda";
    case Rule::lag_gd_oa: return "lag_gd_oa";
    case Rule::al_gd_oa: return "al_gd_oa";
  }
  throw std::logic_error("unreachable");
}

Rule rule_from_name(const std::string& name) {
  if (name == "lag_gda") return Rule::lag_gda;
  if (name == "al_gda") return Rule::al_gda;
  if (name == "lag_gd_oa") return Rule::lag_gd_oa;
  if (name == "al_gd_oa") return Rule::al_gd_oa;
  throw std::invalid_argument("unknown rule: " + name);
}

PrimalDualState initial_state(const ProblemSpec& p, const Eigen::VectorXd& x0) {
  if (x0.size() != p.d) throw std::invalid_argument("initial point dimension mismatch");
  PrimalDualState s;
  s.x = x0;
  s.lambda = Eigen::VectorXd::Zero(p.m());
  s.mu = Eigen::VectorXd::Zero(p.n());
  return s;
}

void step_lag_gda(const ProblemSpec& p, PrimalDualState& s, const HyperParams& hp) {
  auto [g, h] = constraint_values(p, s.x);
  s.mu += hp.eta_dual * h;
  s.lambda = project_nonneg(s.lambda + hp.eta_dual * g);
  s.x -= hp.eta_x * lagrangian_grad_x(p, s.x, s.lambda, s.mu);
  s.prev_g = g;
  s.prev_h = h;
  ++s.t;
}

void step_al_gda(const ProblemSpec& p, PrimalDualState& s, const HyperParams& hp) {
  if (!(hp.eta_dual > 0.0 && hp.eta_dual <= hp.c))
    throw std::invalid_argument("al_gda requires 0 < eta_dual <= c");
  const ALGradient grad = aug_lagrangian_grad(p, s.x, s.lambda, s.mu, hp.c);
  s.x -= hp.eta_x * grad.x;
  auto [g, h] = constraint_values(p, s.x);
  s.mu += hp.eta_dual * h;
  const double r = hp.eta_dual / hp.c;
  s.lambda = (1.0 - r) * s.lambda + r * project_nonneg(s.lambda + hp.c * g);
  s.prev_g = g;
  s.prev_h = h;
  ++s.t;
}

void step_dual_optimistic(const ProblemSpec& p, PrimalDualState& s, const HyperParams& hp) {
  auto [g, h] = constraint_values(p, s.x);
  const bool have_prev = s.prev_g.has_value() && s.prev_h.has_value();
  if (have_prev) {
    s.mu += hp.eta_dual * h + hp.omega * (h - *s.prev_h);
    s.lambda = project_nonneg(s.lambda + hp.eta_dual * g + hp.omega * (g - *s.prev_g));
  } else {
    // First step: no history. Both conventions reduce to a plain ascent step.
    s.mu += hp.eta_dual * h;
    s.lambda = project_nonneg(s.lambda + hp.eta_dual * g);
  }
  s.x -= hp.eta_x * lagrangian_grad_x(p, s.x, s.lambda, s.mu);
  s.prev_g = g;
  s.prev_h = h;
  ++s.t;
}

void step_al_optimistic(const ProblemSpec& p, PrimalDualState& s, const HyperParams& hp) {
  if (p.m() > 0)
    throw std::invalid_argument(
        "al_gd_oa supports equality constraints only (projection breaks the "
        "difference term for inequalities)");
  Eigen::VectorXd h_old(p.n());
  for (int j = 0; j < p.n(); ++j) h_old(j) = p.h[j](s.x).value;
  const ALGradient grad = aug_lagrangian_grad(p, s.x, s.lambda, s.mu, hp.c);
  s.x -= hp.eta_x * grad.x;
  Eigen::VectorXd h_new(p.n());
  for (int j = 0; j < p.n(); ++j) h_new(j) = p.h[j](s.x).value;
  s.mu += hp.eta_dual * h_new + hp.omega * (h_new - h_old);
  s.prev_h = h_new;
  ++s.t;
}

void step(const ProblemSpec& p, Rule rule, PrimalDualState& s, const HyperParams& hp) {
  switch (rule) {
    case Rule::lag_gda: step_lag_gda(p, s, hp); return;
    case Rule::al_gda: step_al_gda(p, s, hp); return;
    case Rule::lag_gd_oa: step_dual_optimistic(p, s, hp); return;
    case Rule::al_gd_oa: step_al_optimistic(p, s, hp); return;
  }
}

namespace {

StepRecord record_state(const ProblemSpec& p, const PrimalDualState& s,
                        const Eigen::VectorXd* x_prev) {
  StepRecord r;
  r.t = s.t;
  r.x = s.x;
  r.lambda = s.lambda;
  r.mu = s.mu;
  auto [f, g, h] = evaluate_all(p, s.x);
  r.g = g;
  r.h = h;
  r.f = f;
  r.norm_h_inf = h.size() > 0 ? h.cwiseAbs().maxCoeff() : 0.0;
  r.max_g_plus = g.size() > 0 ? project_nonneg(g).maxCoeff() : 0.0;
  r.lagrangian = f + r.lambda.dot(g) + r.mu.dot(h);
  r.step_norm = x_prev ? (s.x - *x_prev).norm() : 0.0;
  r.kkt_residual = kkt_residual(p, s.x, s.lambda, s.mu);
  return r;
}

}  // namespace

Trajectory run(const ProblemSpec& p, Rule rule, const PrimalDualState& init,
               const HyperParams& hp, long max_steps, double stop_tol) {
  Trajectory traj;
  traj.rule = rule;
  PrimalDualState s = init;
  traj.steps.push_back(record_state(p, s, nullptr));
  if (traj.steps.back().kkt_residual <= stop_tol) {
    traj.status = RunStatus::converged;
    return traj;
  }
  for (long k = 0; k < max_steps; ++k) {
    const Eigen::VectorXd x_prev = s.x;
    step(p, rule, s, hp);
    if (!state_ok(s)) {
      traj.status = RunStatus::diverged;
      traj.diverged_at = s.t;
      return traj;
    }
    traj.steps.push_back(record_state(p, s, &x_prev));
    if (traj.steps.back().kkt_residual <= stop_tol) {
      traj.status = RunStatus::converged;
      return traj;
    }
  }
  traj.status = RunStatus::max_steps;
  return traj;
}

MultiplierMethodResult method_of_multipliers(const ProblemSpec& p, const PrimalDualState& init,
                                             const MultiplierMethodOptions& opt,
                                             double stop_tol) {
  if (opt.c_schedule.empty()) throw std::invalid_argument("empty penalty schedule");
  MultiplierMethodResult res;
  res.x = init.x;
  res.lambda = init.lambda;
  res.mu = init.mu;
  for (long outer = 0; outer < opt.outer_max; ++outer) {
    const double c =
        opt.c_schedule[std::min<size_t>(outer, opt.c_schedule.size() - 1)];
    bool inner_ok = false;
    for (long inner = 0; inner < opt.inner_max; ++inner) {
      const ALGradient grad = aug_lagrangian_grad(p, res.x, res.lambda, res.mu, c);
      if (grad.x.cwiseAbs().maxCoeff() <= opt.inner_tol) {
        inner_ok = true;
        break;
      }
      res.x -= opt.eta_inner * grad.x;
      if (!within_bounds(res.x)) {
        res.status = RunStatus::diverged;
        res.outer_iters = outer;
        return res;
      }
    }
    auto [f, g, h] = evaluate_all(p, res.x);
    (void)f;
    res.mu += c * h;
    res.lambda = project_nonneg(res.lambda + c * g);
    res.outer_iters = outer + 1;
    res.kkt_residuals.push_back(kkt_residual(p, res.x, res.lambda, res.mu));
    if (inner_ok && res.kkt_residuals.back() <= stop_tol) {
      res.status = RunStatus::converged;
      return res;
    }
  }
  res.status = RunStatus::max_steps;
  return res;
}

}  // namespace pdlab
