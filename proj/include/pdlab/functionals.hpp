#pragma once

#include <stdexcept>

#include <Eigen/Dense>

#include "pdlab/problem.hpp"

namespace pdlab {

/// Gradient of the Augmented Lagrangian with respect to each variable block.
struct ALGradient {
  Eigen::VectorXd x;       // d
  Eigen::VectorXd lambda;  // m
  Eigen::VectorXd mu;      // n, equals h(x)
};

/// Block Hessian of the Augmented Lagrangian. The lambda-mu, mu-lambda and
/// mu-mu blocks are identically zero and are not stored.
struct ALHessian {
  Eigen::MatrixXd xx;             // d x d
  Eigen::MatrixXd x_lambda;       // d x m
  Eigen::MatrixXd x_mu;           // d x n
  Eigen::MatrixXd lambda_lambda;  // m x m, diagonal -(1/c)(I - I_A)
  Eigen::VectorXd active_indicator;  // m, diagonal of I_A (0/1)

  /// Full symmetric (d+m+n) x (d+m+n) matrix in (x, lambda, mu) order.
  Eigen::MatrixXd assemble() const;
};

/// Raised when the Augmented Lagrangian is not twice differentiable at the
/// requested point: some |lambda_i + c g_i(x)| falls below the margin.
class NondifferentiablePoint : public std::runtime_error {
 public:
  explicit NondifferentiablePoint(int index);
  int index() const { return index_; }

 private:
  int index_;
};

/// f(x) + lambda^T g(x) + mu^T h(x).
double lagrangian(const ProblemSpec& p, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& lambda, const Eigen::VectorXd& mu);

/// Augmented Lagrangian with penalty c and a one-sided inequality penalty.
double aug_lagrangian_value(const ProblemSpec& p, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& lambda, const Eigen::VectorXd& mu, double c);

ALGradient aug_lagrangian_grad(const ProblemSpec& p, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& lambda, const Eigen::VectorXd& mu,
                               double c);

ALHessian aug_lagrangian_hessian(const ProblemSpec& p, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& lambda, const Eigen::VectorXd& mu,
                                 double c, double margin = 1e-10);

/// Componentwise max(0, v). Exact; a value of exactly 0 maps to 0.
Eigen::VectorXd project_nonneg(const Eigen::VectorXd& v);

}  // namespace pdlab
