#pragma once

#include <functional>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "pdlab/expr.hpp"

namespace pdlab {

/// Twice-differentiable scalar map R^d -> R with exact derivatives.
using ScalarMap = std::function<expr::SecondOrderValue(const Eigen::VectorXd&)>;

/// A known stationary candidate (x*, lambda*, mu*) with provenance.
struct KKTGuess {
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;  // >= 0 elementwise
  Eigen::VectorXd mu;
  std::string provenance;
};

/// Constrained minimization problem: min f(x) s.t. g(x) <= 0, h(x) = 0.
struct ProblemSpec {
  std::string name;
  int d = 0;
  ScalarMap f;
  std::vector<ScalarMap> g;
  std::vector<ScalarMap> h;
  std::vector<KKTGuess> known_kkt;

  int m() const { return static_cast<int>(g.size()); }
  int n() const { return static_cast<int>(h.size()); }
};

/// Catalog identifiers accepted by builtin().
std::vector<std::string> catalog_ids();

/// Built-in analytic problems with hand-coded derivatives. These serve as
/// an oracle independent of the expression evaluator.
ProblemSpec builtin(const std::string& id);

/// Build a problem from expression strings; derivatives come from the
/// expression evaluator.
ProblemSpec problem_from_expressions(const std::string& name, int d, const std::string& f,
                                     const std::vector<std::string>& g,
                                     const std::vector<std::string>& h);

/// f(x), g(x), h(x) without derivatives.
std::tuple<double, Eigen::VectorXd, Eigen::VectorXd> evaluate_all(const ProblemSpec& p,
                                                                  const Eigen::VectorXd& x);

struct DerivativeCheckEntry {
  std::string function;  // "f", "g1", ..., "h1", ...
  double grad_rel_error = 0.0;
  double hess_rel_error = 0.0;
};

struct DerivativeReport {
  std::vector<DerivativeCheckEntry> entries;
  double max_rel_error() const;
};

/// Compare analytic first/second derivatives against central differences.
DerivativeReport check_derivatives(const ProblemSpec& p, const Eigen::VectorXd& x,
                                   double fd_step);

/// Central-difference gradient and Hessian of an arbitrary scalar function,
/// used as the independent oracle in tests and in check_derivatives.
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& fn,
                            const Eigen::VectorXd& x, double step);
Eigen::MatrixXd fd_hessian(const std::function<double(const Eigen::VectorXd&)>& fn,
                           const Eigen::VectorXd& x, double step);

}  // namespace pdlab
