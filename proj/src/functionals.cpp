#include "pdlab/functionals.hpp"

#include <cmath>

namespace pdlab {

namespace {

void check_dims(const ProblemSpec& p, const Eigen::VectorXd& x, const Eigen::VectorXd& lambda,
                const Eigen::VectorXd& mu) {
  if (x.size() != p.d || lambda.size() != p.m() || mu.size() != p.n())
    throw std::invalid_argument("state dimensions do not match problem");
}

}  // namespace

NondifferentiablePoint::NondifferentiablePoint(int index)
    : std::runtime_error("augmented Lagrangian not differentiable: lambda_" +
                         std::to_string(index + 1) + " + c g_" + std::to_string(index + 1) +
                         "(x) is within margin of zero"),
      index_(index) {}

Eigen::VectorXd project_nonneg(const Eigen::VectorXd& v) {
  return v.cwiseMax(0.0);
}

double lagrangian(const ProblemSpec& p, const Eigen::VectorXd& x, const Eigen::VectorXd& lambda,
                  const Eigen::VectorXd& mu) {
  check_dims(p, x, lambda, mu);
  auto [f, g, h] = evaluate_all(p, x);
  return f + lambda.dot(g) + mu.dot(h);
}

double aug_lagrangian_value(const ProblemSpec& p, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& lambda, const Eigen::VectorXd& mu, double c) {
  if (c <= 0.0) throw std::invalid_argument("penalty c must be positive");
  check_dims(p, x, lambda, mu);
  auto [f, g, h] = evaluate_all(p, x);
  const double eq_term = (mu + c * h).squaredNorm() - mu.squaredNorm();
  const double ineq_term = project_nonneg(lambda + c * g).squaredNorm() - lambda.squaredNorm();
  return f + (eq_term + ineq_term) / (2.0 * c);
}

ALGradient aug_lagrangian_grad(const ProblemSpec& p, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& lambda, const Eigen::VectorXd& mu,
                               double c) {
  if (c <= 0.0) throw std::invalid_argument("penalty c must be positive");
  check_dims(p, x, lambda, mu);

  ALGradient out;
  const expr::SecondOrderValue fv = p.f(x);
  out.x = fv.grad;

  Eigen::VectorXd gvals(p.m());
  for (int i = 0; i < p.m(); ++i) {
    const expr::SecondOrderValue gi = p.g[i](x);
    gvals(i) = gi.value;
    const double shifted = lambda(i) + c * gi.value;
    if (shifted > 0.0) out.x += shifted * gi.grad;
  }
  out.lambda = (project_nonneg(lambda + c * gvals) - lambda) / c;

  out.mu.resize(p.n());
  for (int j = 0; j < p.n(); ++j) {
    const expr::SecondOrderValue hj = p.h[j](x);
    out.mu(j) = hj.value;
    out.x += (mu(j) + c * hj.value) * hj.grad;
  }
  return out;
}

ALHessian aug_lagrangian_hessian(const ProblemSpec& p, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& lambda, const Eigen::VectorXd& mu,
                                 double c, double margin) {
  if (c <= 0.0) throw std::invalid_argument("penalty c must be positive");
  check_dims(p, x, lambda, mu);

  const int d = p.d, m = p.m(), n = p.n();
  ALHessian out;
  out.xx = p.f(x).hess;
  out.x_lambda = Eigen::MatrixXd::Zero(d, m);
  out.x_mu = Eigen::MatrixXd::Zero(d, n);
  out.lambda_lambda = Eigen::MatrixXd::Zero(m, m);
  out.active_indicator = Eigen::VectorXd::Zero(m);

  for (int i = 0; i < m; ++i) {
    const expr::SecondOrderValue gi = p.g[i](x);
    const double shifted = lambda(i) + c * gi.value;
    if (std::abs(shifted) <= margin) throw NondifferentiablePoint(i);
    if (shifted > 0.0) {
      out.active_indicator(i) = 1.0;
      out.xx += shifted * gi.hess + c * (gi.grad * gi.grad.transpose());
      out.x_lambda.col(i) = gi.grad;
    } else {
      out.lambda_lambda(i, i) = -1.0 / c;
    }
  }
  for (int j = 0; j < n; ++j) {
    const expr::SecondOrderValue hj = p.h[j](x);
    out.xx += (mu(j) + c * hj.value) * hj.hess + c * (hj.grad * hj.grad.transpose());
    out.x_mu.col(j) = hj.grad;
  }
  return out;
}

Eigen::MatrixXd ALHessian::assemble() const {
  const Eigen::Index d = xx.rows(), m = x_lambda.cols(), n = x_mu.cols();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d + m + n, d + m + n);
  H.topLeftCorner(d, d) = xx;
  H.block(0, d, d, m) = x_lambda;
  H.block(d, 0, m, d) = x_lambda.transpose();
  H.block(0, d + m, d, n) = x_mu;
  H.block(d + m, 0, n, d) = x_mu.transpose();
  H.block(d, d, m, m) = lambda_lambda;
  return H;
}

}  // namespace pdlab
