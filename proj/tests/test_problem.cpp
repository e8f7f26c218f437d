#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pdlab/problem.hpp"
#include "pdlab/stability.hpp"

using namespace pdlab;

TEST_CASE("catalog enumeration") {
  CHECK(catalog_ids().size() == 6);
  CHECK_THROWS_AS(builtin("NO-SUCH"), std::invalid_argument);
}

TEST_CASE("evaluate_all on documented points") {
  {
    auto [f, g, h] = evaluate_all(builtin("NC-EQ"), Eigen::VectorXd::Zero(1));
    CHECK(f == doctest::Approx(0.0));
    CHECK(g.size() == 0);
    CHECK(h(0) == doctest::Approx(-1.0));
  }
  {
    auto [f, g, h] = evaluate_all(builtin("INEQ-ACT"), Eigen::VectorXd::Constant(1, 1.0));
    CHECK(f == doctest::Approx(0.5));
    CHECK(g(0) == doctest::Approx(0.0));
    CHECK(h.size() == 0);
  }
  {
    Eigen::VectorXd x(2);
    x << 1.0, 0.0;
    auto [f, g, h] = evaluate_all(builtin("MIXED-2"), x);
    CHECK(f == doctest::Approx(0.5));
    CHECK(g(0) == doctest::Approx(0.0));
    CHECK(g(1) == doctest::Approx(-5.0));
  }
}

TEST_CASE("stationary candidates solve the optimality system") {
  for (const std::string& id : catalog_ids()) {
    const ProblemSpec p = builtin(id);
    REQUIRE(!p.known_kkt.empty());
    for (const KKTGuess& k : p.known_kkt) {
      CHECK(kkt_residual(p, k.x, k.lambda, k.mu) <= 1e-10);
      CHECK(!k.provenance.empty());
      if (k.lambda.size() > 0) CHECK(k.lambda.minCoeff() >= 0.0);
    }
  }
  const ProblemSpec qp = builtin("QP-EQ");
  CHECK(kkt_residual(qp, qp.known_kkt[0].x, qp.known_kkt[0].lambda, qp.known_kkt[0].mu) <=
        1e-12);
}

TEST_CASE("derivative checks against central differences") {
  {
    Eigen::VectorXd x(2);
    x << 0.1, 0.2;
    CHECK(check_derivatives(builtin("QP-EQ"), x, 1e-4).max_rel_error() <= 1e-6);
  }
  {
    const ProblemSpec p = builtin("NC-EQ");
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 3.0);
    CHECK(p.f(x).grad(0) == doctest::Approx(-6.0));
    auto value_of = [&](const Eigen::VectorXd& y) { return p.f(y).value; };
    CHECK(std::abs(fd_gradient(value_of, x, 1e-5)(0) + 6.0) <= 1e-8);
  }
  {
    const ProblemSpec p = problem_from_expressions("const", 1, "3", {}, {"x1 - 1"});
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.7);
    const DerivativeReport rep = check_derivatives(p, x, 1e-5);
    CHECK(rep.entries[0].grad_rel_error == doctest::Approx(0.0));
  }
  CHECK_THROWS_AS(check_derivatives(builtin("NC-EQ"), Eigen::VectorXd::Zero(1), 0.0),
                  std::invalid_argument);
}

TEST_CASE("expression-backed problems behave like the analytic ones") {
  const ProblemSpec a = builtin("NC-EQ");
  const ProblemSpec b = problem_from_expressions("nc-twin", 1, "-x1^2", {}, {"x1 - 1"});
  for (double xv : {-1.5, 0.0, 0.3, 2.0}) {
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, xv);
    CHECK(a.f(x).value == doctest::Approx(b.f(x).value));
    CHECK(a.f(x).grad(0) == doctest::Approx(b.f(x).grad(0)));
    CHECK(a.f(x).hess(0, 0) == doctest::Approx(b.f(x).hess(0, 0)));
    CHECK(a.h[0](x).value == doctest::Approx(b.h[0](x).value));
  }
  CHECK_THROWS(problem_from_expressions("bad", 1, "x2", {}, {}));
}

TEST_CASE("evaluation dimension guard") {
  CHECK_THROWS_AS(evaluate_all(builtin("QP-EQ"), Eigen::VectorXd::Zero(1)),
                  std::invalid_argument);
}
