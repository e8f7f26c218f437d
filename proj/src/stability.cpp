#include "pdlab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pdlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd lagrangian_grad_x(const ProblemSpec& p, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& lambda, const Eigen::VectorXd& mu) {
  Eigen::VectorXd grad = p.f(x).grad;
  for (int i = 0; i < p.m(); ++i) grad += lambda(i) * p.g[i](x).grad;
  for (int j = 0; j < p.n(); ++j) grad += mu(j) * p.h[j](x).grad;
  return grad;
}

Eigen::MatrixXd lagrangian_hess_x(const ProblemSpec& p, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& lambda, const Eigen::VectorXd& mu) {
  Eigen::MatrixXd hess = p.f(x).hess;
  for (int i = 0; i < p.m(); ++i) hess += lambda(i) * p.g[i](x).hess;
  for (int j = 0; j < p.n(); ++j) hess += mu(j) * p.h[j](x).hess;
  return hess;
}

/// Orthonormal basis of null(B) via SVD; d x (d - rank) matrix.
Eigen::MatrixXd null_space(const Eigen::MatrixXd& B, int d) {
  if (B.rows() == 0) return Eigen::MatrixXd::Identity(d, d);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeFullV);
  const double tol = 1e-12 * std::max(1.0, svd.singularValues().size() > 0
                                               ? svd.singularValues()(0)
                                               : 0.0);
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > tol) ++rank;
  return svd.matrixV().rightCols(d - rank);
}

}  // namespace

KKTCertificate kkt_certificate(const ProblemSpec& p, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& lambda, const Eigen::VectorXd& mu,
                               double tol_act) {
  if (x.size() != p.d || lambda.size() != p.m() || mu.size() != p.n())
    throw std::invalid_argument("kkt_certificate: dimension mismatch");
  if (lambda.size() > 0 && lambda.minCoeff() < 0.0)
    throw std::invalid_argument("kkt_certificate: lambda must be nonnegative");

  KKTCertificate cert;
  cert.x = x;
  cert.lambda = lambda;
  cert.mu = mu;

  auto [f, g, h] = evaluate_all(p, x);
  (void)f;
  const Eigen::VectorXd grad = lagrangian_grad_x(p, x, lambda, mu);
  cert.stationarity = grad.size() > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
  cert.feas_h = h.size() > 0 ? h.cwiseAbs().maxCoeff() : 0.0;
  cert.feas_g = g.size() > 0 ? g.cwiseMax(0.0).maxCoeff() : 0.0;
  cert.complementarity =
      g.size() > 0 ? lambda.cwiseProduct(g).cwiseAbs().maxCoeff() : 0.0;

  cert.strict_margin = kInf;
  for (int i = 0; i < p.m(); ++i) {
    if (std::abs(g(i)) <= tol_act) cert.active.push_back(i);
    cert.strict_margin = std::min(cert.strict_margin, std::max(lambda(i), -g(i)));
  }

  Eigen::MatrixXd B(static_cast<int>(cert.active.size()) + p.n(), p.d);
  int row = 0;
  for (int i : cert.active) B.row(row++) = p.g[i](x).grad.transpose();
  for (int j = 0; j < p.n(); ++j) B.row(row++) = p.h[j](x).grad.transpose();

  if (B.rows() == 0) {
    cert.licq_min_singular = kInf;
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(B);
    cert.licq_min_singular = svd.singularValues().minCoeff();
  }

  const Eigen::MatrixXd N = null_space(B, p.d);
  if (N.cols() == 0) {
    cert.sosc_min_eig = kInf;
  } else {
    const Eigen::MatrixXd H = lagrangian_hess_x(p, x, lambda, mu);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(N.transpose() * H * N);
    cert.sosc_min_eig = es.eigenvalues().minCoeff();
  }
  return cert;
}

double kkt_residual(const ProblemSpec& p, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& lambda, const Eigen::VectorXd& mu) {
  auto [f, g, h] = evaluate_all(p, x);
  (void)f;
  const Eigen::VectorXd grad = lagrangian_grad_x(p, x, lambda, mu);
  double r = grad.size() > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
  if (h.size() > 0) r = std::max(r, h.cwiseAbs().maxCoeff());
  if (g.size() > 0) {
    r = std::max(r, g.cwiseMax(0.0).maxCoeff());
    r = std::max(r, lambda.cwiseProduct(g).cwiseAbs().maxCoeff());
  }
  return r;
}

AssumptionCheck check_assumptions(const KKTCertificate& cert, double tol) {
  AssumptionCheck a;
  a.strict_cs = cert.strict_margin > tol;
  a.licq = cert.licq_min_singular > tol;
  a.sosc = cert.sosc_min_eig > tol;
  return a;
}

ActivePartition active_partition(const ProblemSpec& p, const KKTCertificate& cert, double tol) {
  if (cert.strict_margin <= tol) throw StrictComplementarityViolated();

  ActivePartition part;
  part.d = p.d;
  part.n_eq = p.n();
  part.m_total = p.m();
  part.active = cert.active;
  for (int i = 0; i < p.m(); ++i)
    if (std::find(cert.active.begin(), cert.active.end(), i) == cert.active.end())
      part.inactive.push_back(i);

  part.A_mat = lagrangian_hess_x(p, cert.x, cert.lambda, cert.mu);
  part.B_mat.resize(part.active_count() + p.n(), p.d);
  int row = 0;
  for (int i : part.active) part.B_mat.row(row++) = p.g[i](cert.x).grad.transpose();
  for (int j = 0; j < p.n(); ++j) part.B_mat.row(row++) = p.h[j](cert.x).grad.transpose();
  return part;
}

Eigen::MatrixXd assemble_J_AL(const ActivePartition& part, const HyperParams& hp) {
  if (hp.c <= 0.0 || !(hp.eta_dual > 0.0 && hp.eta_dual <= hp.c))
    throw std::invalid_argument("assemble_J_AL requires c > 0 and 0 < eta_dual <= c");
  const int d = part.d;
  const int k = static_cast<int>(part.B_mat.rows());
  const int mi = part.inactive_count();
  const Eigen::MatrixXd& A = part.A_mat;
  const Eigen::MatrixXd& B = part.B_mat;
  const Eigen::MatrixXd BtB = B.transpose() * B;

  const Eigen::MatrixXd M =
      Eigen::MatrixXd::Identity(d, d) - hp.eta_x * (A + hp.c * BtB);

  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(d + k + mi, d + k + mi);
  J.topLeftCorner(d, d) = M;
  J.block(0, d, d, k) = -hp.eta_x * B.transpose();
  J.block(d, 0, k, d) = hp.eta_dual * B * M;
  J.block(d, d, k, k) =
      Eigen::MatrixXd::Identity(k, k) - hp.eta_x * hp.eta_dual * B * B.transpose();
  J.bottomRightCorner(mi, mi) =
      (1.0 - hp.eta_dual / hp.c) * Eigen::MatrixXd::Identity(mi, mi);
  return J;
}

Eigen::MatrixXd assemble_J_OG(const ActivePartition& part, const HyperParams& hp) {
  if (hp.eta_x <= 0.0 || hp.eta_dual <= 0.0)
    throw std::invalid_argument("assemble_J_OG requires positive step sizes");
  const int d = part.d;
  const int k = static_cast<int>(part.B_mat.rows());
  const int mi = part.inactive_count();
  const Eigen::MatrixXd& A = part.A_mat;
  const Eigen::MatrixXd& B = part.B_mat;
  const Eigen::MatrixXd BtB = B.transpose() * B;

  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * d + k + mi, 2 * d + k + mi);
  J.topLeftCorner(d, d) = Eigen::MatrixXd::Identity(d, d) - hp.eta_x * A -
                          hp.eta_x * (hp.eta_dual + hp.omega) * BtB;
  J.block(0, d, d, d) = hp.eta_x * hp.omega * BtB;
  J.block(0, 2 * d, d, k) = -hp.eta_x * B.transpose();
  J.block(d, 0, d, d) = Eigen::MatrixXd::Identity(d, d);
  J.block(2 * d, 0, k, d) = (hp.eta_dual + hp.omega) * B;
  J.block(2 * d, d, k, d) = -hp.omega * B;
  J.block(2 * d, 2 * d, k, k) = Eigen::MatrixXd::Identity(k, k);
  // inactive block stays zero
  return J;
}

StabilityReport eigen_analysis(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols())
    throw std::invalid_argument("eigen_analysis: matrix must be square");
  StabilityReport rep;
  rep.jacobian = matrix;

  Eigen::EigenSolver<Eigen::MatrixXd> es(matrix);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigen_analysis: eigenvalue iteration failed");
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    rep.eigenvalues.push_back(es.eigenvalues()(i));
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(),
            [](const std::complex<double>& a, const std::complex<double>& b) {
              if (a.real() != b.real()) return a.real() < b.real();
              return a.imag() < b.imag();
            });
  rep.spectral_radius = 0.0;
  for (const auto& ev : rep.eigenvalues)
    rep.spectral_radius = std::max(rep.spectral_radius, std::abs(ev));

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  double smin_nonzero = smax;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-12 * std::max(1.0, smax)) smin_nonzero = sv(i);
  rep.condition_number = smax > 0.0 ? smax / smin_nonzero : 1.0;

  rep.marginal = std::abs(rep.spectral_radius - 1.0) <= 1e-9;
  rep.is_lssp = rep.spectral_radius < 1.0 - 1e-9;
  return rep;
}

StabilityReport analyze_J_AL(const ActivePartition& part, const HyperParams& hp) {
  StabilityReport rep = eigen_analysis(assemble_J_AL(part, hp));
  rep.trivial_expected = part.inactive_count();
  const double trivial = 1.0 - hp.eta_dual / hp.c;
  for (const auto& ev : rep.eigenvalues)
    if (std::abs(ev - std::complex<double>(trivial, 0.0)) <= 1e-9) ++rep.trivial_found;
  return rep;
}

StabilityReport analyze_J_OG(const ActivePartition& part, const HyperParams& hp) {
  StabilityReport rep = eigen_analysis(assemble_J_OG(part, hp));
  rep.trivial_expected = part.inactive_count() + part.d;
  for (const auto& ev : rep.eigenvalues)
    if (std::abs(ev) <= 1e-9) ++rep.trivial_found;
  return rep;
}

namespace {

std::complex<double> nontrivial_det(std::complex<double> sigma, const ActivePartition& part,
                                    const HyperParams& hp, double penalty_like) {
  const int d = part.d;
  const std::complex<double> one(1.0, 0.0);
  const std::complex<double> u = one - sigma;
  const Eigen::MatrixXd BtB = part.B_mat.transpose() * part.B_mat;
  Eigen::MatrixXcd M = u * u * Eigen::MatrixXcd::Identity(d, d);
  M -= hp.eta_x * u * part.A_mat.cast<std::complex<double>>();
  M -= hp.eta_x * (penalty_like * u - hp.eta_dual * sigma) *
       BtB.cast<std::complex<double>>();
  return M.determinant();
}

}  // namespace

std::complex<double> char_poly_AL(std::complex<double> sigma, const ActivePartition& part,
                                  const HyperParams& hp) {
  std::complex<double> factor(1.0, 0.0);
  const std::complex<double> root(1.0 - hp.eta_dual / hp.c, 0.0);
  for (int i = 0; i < part.inactive_count(); ++i) factor *= root - sigma;
  return factor * nontrivial_det(sigma, part, hp, hp.c);
}

std::complex<double> char_poly_OG(std::complex<double> sigma, const ActivePartition& part,
                                  const HyperParams& hp) {
  std::complex<double> factor(1.0, 0.0);
  for (int i = 0; i < part.inactive_count() + part.d; ++i) factor *= -sigma;
  return factor * nontrivial_det(sigma, part, hp, hp.omega);
}

SpectralRelation verify_spectral_relation(const StabilityReport& report_al,
                                          const StabilityReport& report_og,
                                          const HyperParams& hp, int inactive_count) {
  if (hp.omega != hp.c)
    throw std::invalid_argument("spectral relation holds at omega == c only");
  SpectralRelation rel;
  rel.lhs = report_al.spectral_radius;
  rel.rhs = report_og.spectral_radius;
  // The 1 - eta_dual/c eigenvalue exists only when inactive constraints do.
  if (inactive_count > 0) rel.rhs = std::max(rel.rhs, 1.0 - hp.eta_dual / hp.c);
  rel.gap = std::abs(rel.lhs - rel.rhs);
  return rel;
}

double convexification_threshold(const ActivePartition& part, double c_max) {
  if (c_max <= 0.0) throw std::invalid_argument("c_max must be positive");
  const Eigen::MatrixXd BtB = part.B_mat.transpose() * part.B_mat;
  auto min_eig = [&](double c) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(part.A_mat + c * BtB);
    return es.eigenvalues().minCoeff();
  };
  if (min_eig(0.0) > 0.0) return 0.0;
  if (min_eig(c_max) <= 0.0) return kInf;
  double lo = 0.0, hi = c_max;  // min_eig monotone nondecreasing in c
  while (hi - lo > 1e-8) {
    const double mid = 0.5 * (lo + hi);
    (min_eig(mid) > 0.0 ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace pdlab
