#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "pdlab/solvers.hpp"
#include "pdlab/stability.hpp"

namespace pdlab {

struct EquivalenceResult {
  double max_primal_gap = 0.0;
  double max_dual_gap = 0.0;
  long steps = 0;
  std::vector<double> primal_gaps;  // per step
  std::vector<double> dual_gaps;
};

/// Match the primal-first augmented rule from (x0, mu0) against the
/// dual-optimistic rule from (x0, mu0 + (c - eta_dual) h(x0)), omega = c.
/// The dual gap compares mu^{OG}_{t+1} with mu^{AL}_t + c h(x^{AL}_t).
/// Equality-constrained problems only; iterates are not divergence-guarded
/// so genuinely unstable configurations still match step for step.
EquivalenceResult run_equivalence_equality(const ProblemSpec& p, const Eigen::VectorXd& x0,
                                           const Eigen::VectorXd& mu0, const HyperParams& hp,
                                           long steps);

/// Three-way check that the augmented-optimistic rule with (c, omega) tracks
/// both the augmented rule at penalty c + omega and the dual-optimistic rule
/// at optimism c + omega, under the matching initial multipliers.
EquivalenceResult run_compounding_check(const ProblemSpec& p, const Eigen::VectorXd& x0,
                                        const Eigen::VectorXd& mu0, double c, double omega,
                                        double eta_x, double eta_dual, long steps);

struct OscillationMetrics {
  std::vector<int> sign_changes;  // per equality then inequality constraint
  int overshoots = 0;             // feasibility exits followed by re-entries
  double tail_amplitude = 0.0;    // max |h| and [g]_+ over the last quarter
  int total_sign_changes() const;
};

OscillationMetrics oscillation_metrics(const Trajectory& traj);

struct SweepRow {
  double omega = 0.0;
  double spectral_radius = 0.0;
  double max_abs_imag = 0.0;
  double condition_number = 0.0;
  bool is_lssp = false;
  int sign_changes = -1;  // -1 when no trajectory was requested
};

/// Assemble the optimistic operator per omega (with c = omega on the
/// augmented side) and record its spectrum. When traj_steps > 0, also run
/// the dual-optimistic rule near the point and count constraint
/// sign changes.
std::vector<SweepRow> omega_sweep(const ProblemSpec& p, const KKTCertificate& cert,
                                  const HyperParams& hp_base, const std::vector<double>& omegas,
                                  long traj_steps = 0);

/// For each omega, search step sizes (halving eta from 0.1 down to 1e-4) for
/// one making the point a strict local attractor; the set of stabilizable
/// omegas must be upward closed along the grid.
struct InclusionVerdict {
  double omega = 0.0;
  bool stabilizable = false;
  double eta_found = 0.0;  // 0 when none
};
std::vector<InclusionVerdict> monotonic_inclusion_check(const ProblemSpec& p,
                                                        const KKTCertificate& cert,
                                                        const std::vector<double>& omegas,
                                                        const std::vector<double>& eta_grid);

/// Spectrum of the optimistic operator at a negative optimism weight.
StabilityReport negative_optimism_check(const ProblemSpec& p, const KKTCertificate& cert,
                                        const HyperParams& hp_base, double omega_neg);

class NoConvergentTail : public std::runtime_error {
 public:
  NoConvergentTail() : std::runtime_error("no trajectory tail within the error window") {}
};

/// Geometric-mean per-step contraction of the distance to the target over
/// the trailing tail_fraction of steps whose error lies in [1e-10, 1e-3].
double estimate_linear_rate(const Trajectory& traj, const Eigen::VectorXd& target_x,
                            const Eigen::VectorXd& target_lambda,
                            const Eigen::VectorXd& target_mu, double tail_fraction = 0.25);

}  // namespace pdlab
