#include "pdlab/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace pdlab {

namespace {

using expr::SecondOrderValue;

SecondOrderValue quadratic1(double x, double a, double b, double c) {
  // a*x^2/2 + b*x + c in one variable
  SecondOrderValue v;
  v.value = 0.5 * a * x * x + b * x + c;
  v.grad = Eigen::VectorXd::Constant(1, a * x + b);
  v.hess = Eigen::MatrixXd::Constant(1, 1, a);
  return v;
}

ScalarMap affine(int d, Eigen::VectorXd w, double b) {
  return [d, w = std::move(w), b](const Eigen::VectorXd& x) {
    SecondOrderValue v;
    v.value = w.dot(x) + b;
    v.grad = w;
    v.hess = Eigen::MatrixXd::Zero(d, d);
    return v;
  };
}

KKTGuess guess(std::initializer_list<double> x, std::initializer_list<double> lambda,
               std::initializer_list<double> mu, std::string note) {
  KKTGuess g;
  g.x = Eigen::VectorXd::Map(std::data(x), static_cast<Eigen::Index>(x.size()));
  g.lambda = Eigen::VectorXd::Map(std::data(lambda), static_cast<Eigen::Index>(lambda.size()));
  g.mu = Eigen::VectorXd::Map(std::data(mu), static_cast<Eigen::Index>(mu.size()));
  g.provenance = std::move(note);
  return g;
}

}  // namespace

std::vector<std::string> catalog_ids() {
  return {"QP-EQ", "OSC-EQ", "NC-EQ", "INEQ-ACT", "INEQ-INACT", "MIXED-2"};
}

ProblemSpec builtin(const std::string& id) {
  ProblemSpec p;
  p.name = id;
  if (id == "QP-EQ") {
    // f = (x1^2 + 2 x2^2)/2, h = x1 + x2 - 1
    p.d = 2;
    p.f = [](const Eigen::VectorXd& x) {
      SecondOrderValue v;
      v.value = 0.5 * (x(0) * x(0) + 2.0 * x(1) * x(1));
      v.grad = Eigen::VectorXd(2);
      v.grad << x(0), 2.0 * x(1);
      v.hess = Eigen::MatrixXd(2, 2);
      v.hess << 1.0, 0.0, 0.0, 2.0;
      return v;
    };
    p.h.push_back(affine(2, (Eigen::VectorXd(2) << 1.0, 1.0).finished(), -1.0));
    p.known_kkt.push_back(guess({2.0 / 3.0, 1.0 / 3.0}, {}, {-2.0 / 3.0},
                                "solve x1 = -mu, 2 x2 = -mu, x1 + x2 = 1"));
  } else if (id == "OSC-EQ") {
    // f = x1^2/2, h = x1 - 1
    p.d = 1;
    p.f = [](const Eigen::VectorXd& x) { return quadratic1(x(0), 1.0, 0.0, 0.0); };
    p.h.push_back(affine(1, Eigen::VectorXd::Constant(1, 1.0), -1.0));
    p.known_kkt.push_back(guess({1.0}, {}, {-1.0}, "x* + mu* = 0 at x* = 1"));
  } else if (id == "NC-EQ") {
    // f = -x1^2 (concave), h = x1 - 1
    p.d = 1;
    p.f = [](const Eigen::VectorXd& x) { return quadratic1(x(0), -2.0, 0.0, 0.0); };
    p.h.push_back(affine(1, Eigen::VectorXd::Constant(1, 1.0), -1.0));
    p.known_kkt.push_back(guess({1.0}, {}, {2.0}, "-2 x* + mu* = 0 at x* = 1"));
  } else if (id == "INEQ-ACT") {
    // f = (x1-2)^2/2, g = x1 - 1 (active at the solution)
    p.d = 1;
    p.f = [](const Eigen::VectorXd& x) { return quadratic1(x(0), 1.0, -2.0, 2.0); };
    p.g.push_back(affine(1, Eigen::VectorXd::Constant(1, 1.0), -1.0));
    p.known_kkt.push_back(guess({1.0}, {1.0}, {}, "(x* - 2) + lambda* = 0 at x* = 1"));
  } else if (id == "INEQ-INACT") {
    // f = x1^2/2, g = x1 - 1 (strictly inactive at the solution)
    p.d = 1;
    p.f = [](const Eigen::VectorXd& x) { return quadratic1(x(0), 1.0, 0.0, 0.0); };
    p.g.push_back(affine(1, Eigen::VectorXd::Constant(1, 1.0), -1.0));
    p.known_kkt.push_back(guess({0.0}, {0.0}, {}, "unconstrained minimum is feasible"));
  } else if (id == "MIXED-2") {
    // f = ((x1-2)^2 + x2^2)/2, g1 = x1 - 1 (active), g2 = x2 - 5 (inactive)
    p.d = 2;
    p.f = [](const Eigen::VectorXd& x) {
      SecondOrderValue v;
      v.value = 0.5 * ((x(0) - 2.0) * (x(0) - 2.0) + x(1) * x(1));
      v.grad = Eigen::VectorXd(2);
      v.grad << x(0) - 2.0, x(1);
      v.hess = Eigen::MatrixXd::Identity(2, 2);
      return v;
    };
    p.g.push_back(affine(2, (Eigen::VectorXd(2) << 1.0, 0.0).finished(), -1.0));
    p.g.push_back(affine(2, (Eigen::VectorXd(2) << 0.0, 1.0).finished(), -5.0));
    p.known_kkt.push_back(
        guess({1.0, 0.0}, {1.0, 0.0}, {}, "g1 active with lambda1 = 1, g2 slack"));
  } else {
    throw std::invalid_argument("unknown catalog id: " + id);
  }
  return p;
}

ProblemSpec problem_from_expressions(const std::string& name, int d, const std::string& f,
                                     const std::vector<std::string>& g,
                                     const std::vector<std::string>& h) {
  ProblemSpec p;
  p.name = name;
  p.d = d;
  auto wrap = [d](const std::string& text) -> ScalarMap {
    auto tree = std::make_shared<expr::ExprTree>(expr::ExprTree::parse(text, d));
    return [tree](const Eigen::VectorXd& x) { return tree->eval_order2(x); };
  };
  p.f = wrap(f);
  for (const auto& gi : g) p.g.push_back(wrap(gi));
  for (const auto& hj : h) p.h.push_back(wrap(hj));
  return p;
}

std::tuple<double, Eigen::VectorXd, Eigen::VectorXd> evaluate_all(const ProblemSpec& p,
                                                                  const Eigen::VectorXd& x) {
  if (x.size() != p.d) throw std::invalid_argument("evaluate_all: point dimension mismatch");
  Eigen::VectorXd gv(p.m()), hv(p.n());
  for (int i = 0; i < p.m(); ++i) gv(i) = p.g[i](x).value;
  for (int j = 0; j < p.n(); ++j) hv(j) = p.h[j](x).value;
  return {p.f(x).value, gv, hv};
}

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& fn,
                            const Eigen::VectorXd& x, double step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp(i) = x(i) + step;
    const double fp = fn(xp);
    xp(i) = x(i) - step;
    const double fm = fn(xp);
    xp(i) = x(i);
    g(i) = (fp - fm) / (2.0 * step);
  }
  return g;
}

Eigen::MatrixXd fd_hessian(const std::function<double(const Eigen::VectorXd&)>& fn,
                           const Eigen::VectorXd& x, double step) {
  const Eigen::Index d = x.size();
  Eigen::MatrixXd H(d, d);
  Eigen::VectorXd xp = x;
  const double f0 = fn(x);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      double v;
      if (i == j) {
        xp(i) = x(i) + step;
        const double fp = fn(xp);
        xp(i) = x(i) - step;
        const double fm = fn(xp);
        xp(i) = x(i);
        v = (fp - 2.0 * f0 + fm) / (step * step);
      } else {
        xp(i) = x(i) + step;
        xp(j) = x(j) + step;
        const double fpp = fn(xp);
        xp(j) = x(j) - step;
        const double fpm = fn(xp);
        xp(i) = x(i) - step;
        const double fmm = fn(xp);
        xp(j) = x(j) + step;
        const double fmp = fn(xp);
        xp(i) = x(i);
        xp(j) = x(j);
        v = (fpp - fpm - fmp + fmm) / (4.0 * step * step);
      }
      H(i, j) = v;
      H(j, i) = v;
    }
  }
  return H;
}

double DerivativeReport::max_rel_error() const {
  double worst = 0.0;
  for (const auto& e : entries) worst = std::max({worst, e.grad_rel_error, e.hess_rel_error});
  return worst;
}

DerivativeReport check_derivatives(const ProblemSpec& p, const Eigen::VectorXd& x,
                                   double fd_step) {
  if (fd_step <= 0.0) throw std::invalid_argument("fd_step must be positive");
  DerivativeReport report;
  auto check_one = [&](const std::string& label, const ScalarMap& fn) {
    const expr::SecondOrderValue v = fn(x);
    auto value_of = [&fn](const Eigen::VectorXd& y) { return fn(y).value; };
    const Eigen::VectorXd gfd = fd_gradient(value_of, x, fd_step);
    const Eigen::MatrixXd hfd = fd_hessian(value_of, x, fd_step);
    DerivativeCheckEntry e;
    e.function = label;
    const double gscale = 1.0 + gfd.cwiseAbs().maxCoeff();
    const double hscale = 1.0 + hfd.cwiseAbs().maxCoeff();
    e.grad_rel_error = (v.grad - gfd).cwiseAbs().maxCoeff() / gscale;
    e.hess_rel_error = (v.hess - hfd).cwiseAbs().maxCoeff() / hscale;
    report.entries.push_back(e);
  };
  check_one("f", p.f);
  for (int i = 0; i < p.m(); ++i) check_one("g" + std::to_string(i + 1), p.g[i]);
  for (int j = 0; j < p.n(); ++j) check_one("h" + std::to_string(j + 1), p.h[j]);
  return report;
}

}  // namespace pdlab
