#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "pdlab/problem.hpp"
#include "pdlab/solvers.hpp"

namespace pdlab {

struct KKTCertificate {
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;
  Eigen::VectorXd mu;
  double stationarity = 0.0;       // ||grad_x L||_inf
  double feas_h = 0.0;             // ||h||_inf
  double feas_g = 0.0;             // ||[g]_+||_inf
  double complementarity = 0.0;    // max_i |lambda_i g_i|
  std::vector<int> active;         // indices with |g_i| <= tol_act
  double strict_margin = 0.0;      // min_i max(lambda_i, -g_i); +inf when m = 0
  double licq_min_singular = 0.0;  // sigma_min of stacked active Jacobian; +inf if no rows
  double sosc_min_eig = 0.0;       // min eig of Hess_x L on null(B); +inf if null space trivial
};

/// Residuals and constraint qualification data at a candidate point.
KKTCertificate kkt_certificate(const ProblemSpec& p, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& lambda, const Eigen::VectorXd& mu,
                               double tol_act = 1e-8);

/// max of stationarity, feasibility and complementarity residuals.
double kkt_residual(const ProblemSpec& p, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& lambda, const Eigen::VectorXd& mu);

struct AssumptionCheck {
  bool strict_cs = false;
  bool licq = false;
  bool sosc = false;
  bool all() const { return strict_cs && licq && sosc; }
};

AssumptionCheck check_assumptions(const KKTCertificate& cert, double tol = 1e-8);

class StrictComplementarityViolated : public std::runtime_error {
 public:
  StrictComplementarityViolated() : std::runtime_error("strict complementarity violated") {}
};

/// Data for the linearized update operators: curvature block A and the
/// stacked Jacobian B of active inequalities followed by equalities.
struct ActivePartition {
  std::vector<int> active;
  std::vector<int> inactive;
  Eigen::MatrixXd A_mat;  // d x d Hessian of the Lagrangian
  Eigen::MatrixXd B_mat;  // (|active| + n) x d
  int d = 0;
  int n_eq = 0;
  int m_total = 0;

  int inactive_count() const { return static_cast<int>(inactive.size()); }
  int active_count() const { return static_cast<int>(active.size()); }
};

/// Throws StrictComplementarityViolated when some constraint has both
/// lambda_i and g_i within tolerance of zero.
ActivePartition active_partition(const ProblemSpec& p, const KKTCertificate& cert,
                                 double tol = 1e-8);

/// Jacobian of the primal-first augmented update at the fixed point, acting
/// on (x, [lambda_active; mu], lambda_inactive). Size d + m + n.
Eigen::MatrixXd assemble_J_AL(const ActivePartition& part, const HyperParams& hp);

/// Jacobian of the dual-optimistic update at the fixed point, acting on
/// (x_t, x_{t-1}, [lambda_active; mu], lambda_inactive). Size 2d + m + n.
Eigen::MatrixXd assemble_J_OG(const ActivePartition& part, const HyperParams& hp);

struct StabilityReport {
  Eigen::MatrixXd jacobian;
  std::vector<std::complex<double>> eigenvalues;  // sorted by (Re, Im)
  double spectral_radius = 0.0;
  double condition_number = 0.0;  // sigma_max / sigma_min over nonzero singular values
  bool is_lssp = false;           // rho < 1 - 1e-9
  bool marginal = false;          // rho within 1e-9 of 1
  int trivial_expected = 0;       // known structural eigenvalues (see analyze_*)
  int trivial_found = 0;
};

StabilityReport eigen_analysis(const Eigen::MatrixXd& matrix);

/// eigen_analysis plus structural-eigenvalue bookkeeping: J_AL carries
/// m-|A| eigenvalues equal to 1 - eta_dual/c; J_OG carries m-|A|+d zeros.
StabilityReport analyze_J_AL(const ActivePartition& part, const HyperParams& hp);
StabilityReport analyze_J_OG(const ActivePartition& part, const HyperParams& hp);

/// Closed-form characteristic polynomials of the two operators (up to a
/// known nonvanishing-at-eigenvalue spurious factor when B has fewer rows
/// than d; both vanish at every true eigenvalue).
std::complex<double> char_poly_AL(std::complex<double> sigma, const ActivePartition& part,
                                  const HyperParams& hp);
std::complex<double> char_poly_OG(std::complex<double> sigma, const ActivePartition& part,
                                  const HyperParams& hp);

struct SpectralRelation {
  double lhs = 0.0;  // rho(J_AL)
  double rhs = 0.0;  // max{rho(J_OG), 1 - eta_dual/c}, trivial factor only if present
  double gap = 0.0;
};

/// Requires omega == c in hp. The 1 - eta_dual/c term participates only
/// when inactive constraints exist, matching the operator's actual spectrum.
SpectralRelation verify_spectral_relation(const StabilityReport& report_al,
                                          const StabilityReport& report_og,
                                          const HyperParams& hp, int inactive_count);

/// Smallest c in (0, c_max] with A + c B^T B positive definite, to 1e-8 by
/// bisection; 0 when A alone is positive definite; +inf when c_max fails.
double convexification_threshold(const ActivePartition& part, double c_max);

}  // namespace pdlab
