#include "pdlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pdlab {

namespace {

constexpr double kFeasTol = 1e-8;

Eigen::VectorXd eval_h(const ProblemSpec& p, const Eigen::VectorXd& x) {
  Eigen::VectorXd h(p.n());
  for (int j = 0; j < p.n(); ++j) h(j) = p.h[j](x).value;
  return h;
}

void require_equality_only(const ProblemSpec& p) {
  if (p.m() > 0)
    throw std::invalid_argument("equivalence checks support equality constraints only");
}

double rel_gap(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / (1.0 + b.norm());
}

}  // namespace

EquivalenceResult run_equivalence_equality(const ProblemSpec& p, const Eigen::VectorXd& x0,
                                           const Eigen::VectorXd& mu0, const HyperParams& hp,
                                           long steps) {
  require_equality_only(p);
  if (hp.omega != hp.c)
    throw std::invalid_argument("equivalence requires omega == c");

  PrimalDualState al = initial_state(p, x0);
  al.mu = mu0;
  PrimalDualState og = initial_state(p, x0);
  og.mu = mu0 + (hp.c - hp.eta_dual) * eval_h(p, x0);

  EquivalenceResult res;
  res.steps = steps;
  res.primal_gaps.push_back(rel_gap(og.x, al.x));
  for (long t = 0; t < steps; ++t) {
    const Eigen::VectorXd mu_al_prev = al.mu;
    const Eigen::VectorXd h_al_prev = eval_h(p, al.x);
    step_al_gda(p, al, hp);
    step_dual_optimistic(p, og, hp);
    res.primal_gaps.push_back(rel_gap(og.x, al.x));
    // change of variable: the optimistic multiplier runs one step ahead
    const Eigen::VectorXd ref = mu_al_prev + hp.c * h_al_prev;
    res.dual_gaps.push_back((og.mu - ref).norm() / (1.0 + ref.norm()));
  }
  res.max_primal_gap = *std::max_element(res.primal_gaps.begin(), res.primal_gaps.end());
  res.max_dual_gap =
      res.dual_gaps.empty()
          ? 0.0
          : *std::max_element(res.dual_gaps.begin(), res.dual_gaps.end());
  return res;
}

EquivalenceResult run_compounding_check(const ProblemSpec& p, const Eigen::VectorXd& x0,
                                        const Eigen::VectorXd& mu0, double c, double omega,
                                        double eta_x, double eta_dual, long steps) {
  require_equality_only(p);
  const Eigen::VectorXd h0 = eval_h(p, x0);

  HyperParams hp_base;
  hp_base.eta_x = eta_x;
  hp_base.eta_dual = eta_dual;
  hp_base.c = c;
  hp_base.omega = omega;

  HyperParams hp_sum = hp_base;  // penalty c + omega, no optimism
  hp_sum.c = c + omega;
  hp_sum.omega = 0.0;

  HyperParams hp_og = hp_base;  // pure optimism at weight c + omega
  hp_og.omega = c + omega;

  PrimalDualState base = initial_state(p, x0);
  base.mu = mu0;
  PrimalDualState sum = initial_state(p, x0);
  sum.mu = mu0 - omega * h0;  // multiplier shift matching the larger penalty
  PrimalDualState og = initial_state(p, x0);
  og.mu = mu0 + (c - eta_dual) * h0;

  EquivalenceResult res;
  res.steps = steps;
  for (long t = 0; t < steps; ++t) {
    const Eigen::VectorXd mu_sum_prev = sum.mu;
    const Eigen::VectorXd h_sum_prev = eval_h(p, sum.x);
    step_al_optimistic(p, base, hp_base);
    step_al_gda(p, sum, hp_sum);
    step_dual_optimistic(p, og, hp_og);
    res.primal_gaps.push_back(
        std::max(rel_gap(sum.x, base.x), rel_gap(og.x, base.x)));
    const Eigen::VectorXd mu_base_shifted = base.mu - omega * eval_h(p, base.x);
    const Eigen::VectorXd og_ref = mu_sum_prev + (c + omega) * h_sum_prev;
    res.dual_gaps.push_back(
        std::max((sum.mu - mu_base_shifted).norm() / (1.0 + mu_base_shifted.norm()),
                 (og.mu - og_ref).norm() / (1.0 + og_ref.norm())));
  }
  res.max_primal_gap =
      res.primal_gaps.empty()
          ? 0.0
          : *std::max_element(res.primal_gaps.begin(), res.primal_gaps.end());
  res.max_dual_gap =
      res.dual_gaps.empty()
          ? 0.0
          : *std::max_element(res.dual_gaps.begin(), res.dual_gaps.end());
  return res;
}

int OscillationMetrics::total_sign_changes() const {
  return std::accumulate(sign_changes.begin(), sign_changes.end(), 0);
}

OscillationMetrics oscillation_metrics(const Trajectory& traj) {
  if (traj.steps.empty()) throw std::invalid_argument("empty trajectory");
  OscillationMetrics m;
  const int n = static_cast<int>(traj.steps.front().h.size());
  const int mg = static_cast<int>(traj.steps.front().g.size());
  m.sign_changes.assign(n + mg, 0);
  for (size_t t = 0; t + 1 < traj.steps.size(); ++t) {
    for (int j = 0; j < n; ++j)
      if (traj.steps[t].h(j) * traj.steps[t + 1].h(j) < 0.0) ++m.sign_changes[j];
    for (int i = 0; i < mg; ++i)
      if (traj.steps[t].g(i) * traj.steps[t + 1].g(i) < 0.0) ++m.sign_changes[n + i];
  }

  auto feasible = [](const StepRecord& s) {
    return s.norm_h_inf <= kFeasTol && s.max_g_plus <= kFeasTol;
  };
  // an overshoot = leaving the feasible set and coming back later
  for (size_t t = 0; t + 1 < traj.steps.size(); ++t) {
    if (feasible(traj.steps[t]) && !feasible(traj.steps[t + 1])) {
      for (size_t s = t + 2; s < traj.steps.size(); ++s) {
        if (feasible(traj.steps[s])) {
          ++m.overshoots;
          break;
        }
      }
    }
  }

  const size_t tail_start = traj.steps.size() - traj.steps.size() / 4 - 1;
  for (size_t t = tail_start; t < traj.steps.size(); ++t)
    m.tail_amplitude =
        std::max({m.tail_amplitude, traj.steps[t].norm_h_inf, traj.steps[t].max_g_plus});
  return m;
}

std::vector<SweepRow> omega_sweep(const ProblemSpec& p, const KKTCertificate& cert,
                                  const HyperParams& hp_base, const std::vector<double>& omegas,
                                  long traj_steps) {
  for (size_t i = 0; i + 1 < omegas.size(); ++i)
    if (!(omegas[i] < omegas[i + 1]))
      throw std::invalid_argument("omega grid must be strictly increasing");
  if (!check_assumptions(cert).all())
    throw std::invalid_argument("sweep requires a regular certified point");
  const ActivePartition part = active_partition(p, cert);

  std::vector<SweepRow> rows;
  for (double w : omegas) {
    HyperParams hp = hp_base;
    hp.omega = w;
    hp.c = std::max(w, hp.eta_dual);  // keep the augmented comparator valid at omega = 0
    const StabilityReport rep = analyze_J_OG(part, hp);
    SweepRow row;
    row.omega = w;
    row.spectral_radius = rep.spectral_radius;
    for (const auto& ev : rep.eigenvalues)
      row.max_abs_imag = std::max(row.max_abs_imag, std::abs(ev.imag()));
    row.condition_number = rep.condition_number;
    row.is_lssp = rep.is_lssp;
    if (traj_steps > 0) {
      PrimalDualState init = initial_state(p, cert.x - Eigen::VectorXd::Ones(p.d));
      const Trajectory traj = run(p, Rule::lag_gd_oa, init, hp, traj_steps, 0.0);
      row.sign_changes = oscillation_metrics(traj).total_sign_changes();
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<InclusionVerdict> monotonic_inclusion_check(const ProblemSpec& p,
                                                        const KKTCertificate& cert,
                                                        const std::vector<double>& omegas,
                                                        const std::vector<double>& eta_grid) {
  if (eta_grid.empty()) throw std::invalid_argument("empty step-size grid");
  for (size_t i = 0; i + 1 < omegas.size(); ++i)
    if (!(omegas[i] < omegas[i + 1]))
      throw std::invalid_argument("omega grid must be strictly increasing");
  const ActivePartition part = active_partition(p, cert);

  std::vector<InclusionVerdict> verdicts;
  for (double w : omegas) {
    InclusionVerdict v;
    v.omega = w;
    for (double eta : eta_grid) {
      HyperParams hp;
      hp.eta_x = eta;
      hp.eta_dual = eta;
      hp.omega = w;
      hp.c = std::max(w, eta);
      if (analyze_J_OG(part, hp).is_lssp) {
        v.stabilizable = true;
        v.eta_found = eta;
        break;
      }
    }
    verdicts.push_back(v);
  }
  return verdicts;
}

StabilityReport negative_optimism_check(const ProblemSpec& p, const KKTCertificate& cert,
                                        const HyperParams& hp_base, double omega_neg) {
  if (omega_neg >= 0.0) throw std::invalid_argument("optimism weight must be negative here");
  const ActivePartition part = active_partition(p, cert);
  HyperParams hp = hp_base;
  hp.omega = omega_neg;
  return analyze_J_OG(part, hp);
}

double estimate_linear_rate(const Trajectory& traj, const Eigen::VectorXd& target_x,
                            const Eigen::VectorXd& target_lambda,
                            const Eigen::VectorXd& target_mu, double tail_fraction) {
  if (tail_fraction <= 0.0 || tail_fraction > 1.0)
    throw std::invalid_argument("tail_fraction must lie in (0, 1]");
  std::vector<std::pair<long, double>> window;  // (t, error)
  for (const StepRecord& s : traj.steps) {
    const double err = std::sqrt((s.x - target_x).squaredNorm() +
                                 (s.lambda - target_lambda).squaredNorm() +
                                 (s.mu - target_mu).squaredNorm());
    if (err >= 1e-10 && err <= 1e-3) window.emplace_back(s.t, err);
  }
  if (window.size() < 2) throw NoConvergentTail();
  const size_t take = std::max<size_t>(2, static_cast<size_t>(
                                              std::ceil(tail_fraction * window.size())));
  const size_t first = window.size() - take;
  const auto& [t0, e0] = window[first];
  const auto& [t1, e1] = window.back();
  if (t1 == t0 || e0 <= 0.0 || e1 <= 0.0) throw NoConvergentTail();
  return std::pow(e1 / e0, 1.0 / static_cast<double>(t1 - t0));
}

}  // namespace pdlab
