#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pdlab/expr.hpp"

using namespace pdlab::expr;

namespace {

Eigen::VectorXd pt(std::initializer_list<double> v) {
  return Eigen::VectorXd::Map(std::data(v), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

TEST_CASE("parse shapes the expected trees") {
  const ExprTree t = ExprTree::parse("x1^2 + 2*x2", 2);
  REQUIRE(t.root()->kind == NodeKind::binary);
  CHECK(t.root()->bop == BinaryOp::add);
  CHECK(t.root()->lhs->bop == BinaryOp::pow);
  CHECK(t.root()->rhs->bop == BinaryOp::mul);

  const ExprTree neg = ExprTree::parse("-x1^2", 1);
  REQUIRE(neg.root()->kind == NodeKind::unary);
  CHECK(neg.root()->uop == UnaryOp::neg);
  CHECK(neg.root()->lhs->bop == BinaryOp::pow);
  CHECK(neg.eval(pt({3.0})) == doctest::Approx(-9.0));
}

TEST_CASE("parse errors carry byte offsets") {
  CHECK_THROWS_AS(ExprTree::parse("x1 +", 1), ParseError);
  try {
    ExprTree::parse("x1 +", 1);
  } catch (const ParseError& e) {
    CHECK(e.offset() == 4);
  }
  CHECK_THROWS_AS(ExprTree::parse("foo(x1)", 1), ParseError);
  CHECK_THROWS_AS(ExprTree::parse("x2", 1), ParseError);  // index beyond dimension
  CHECK_THROWS_AS(ExprTree::parse("", 1), ParseError);
  CHECK_THROWS_AS(ExprTree::parse("(x1", 1), ParseError);
}

TEST_CASE("precedence and associativity") {
  CHECK(ExprTree::parse("1 + 2*3", 1).eval(pt({0.0})) == doctest::Approx(7.0));
  CHECK(ExprTree::parse("2*3^2", 1).eval(pt({0.0})) == doctest::Approx(18.0));
  CHECK(ExprTree::parse("2^3^2", 1).eval(pt({0.0})) == doctest::Approx(512.0));
  CHECK(ExprTree::parse("6/3/2", 1).eval(pt({0.0})) == doctest::Approx(1.0));
  CHECK(ExprTree::parse("1 - 2 - 3", 1).eval(pt({0.0})) == doctest::Approx(-4.0));
  CHECK(ExprTree::parse("x1^3", 1).eval(pt({-2.0})) == doctest::Approx(-8.0));
}

TEST_CASE("second-order evaluation on the documented examples") {
  {
    const SecondOrderValue v = ExprTree::parse("x1*x2", 2).eval_order2(pt({2.0, 3.0}));
    CHECK(v.value == doctest::Approx(6.0));
    CHECK(v.grad(0) == doctest::Approx(3.0));
    CHECK(v.grad(1) == doctest::Approx(2.0));
    CHECK(v.hess(0, 1) == doctest::Approx(1.0));
    CHECK(v.hess(1, 0) == doctest::Approx(1.0));
    CHECK(v.hess(0, 0) == doctest::Approx(0.0));
  }
  {
    const SecondOrderValue v = ExprTree::parse("x1^2", 1).eval_order2(pt({3.0}));
    CHECK(v.value == doctest::Approx(9.0));
    CHECK(v.grad(0) == doctest::Approx(6.0));
    CHECK(v.hess(0, 0) == doctest::Approx(2.0));
  }
  {
    const SecondOrderValue v =
        ExprTree::parse("exp(x1) + log(x2)", 2).eval_order2(pt({0.0, 1.0}));
    CHECK(v.value == doctest::Approx(1.0));
    CHECK(v.grad(0) == doctest::Approx(1.0));
    CHECK(v.grad(1) == doctest::Approx(1.0));
    CHECK(v.hess(0, 0) == doctest::Approx(1.0));
    CHECK(v.hess(1, 1) == doctest::Approx(-1.0));
    CHECK(v.hess(0, 1) == doctest::Approx(0.0));
  }
}

TEST_CASE("domain violations are reported with the offending node") {
  const ExprTree bad_log = ExprTree::parse("log(x1)", 1);
  CHECK_THROWS_AS(bad_log.eval(pt({-1.0})), EvalError);
  try {
    bad_log.eval(pt({-1.0}));
  } catch (const EvalError& e) {
    CHECK(e.node().find("log") != std::string::npos);
  }
  CHECK_THROWS_AS(ExprTree::parse("1/x1", 1).eval(pt({0.0})), EvalError);
  CHECK_THROWS_AS(ExprTree::parse("x1^0.5", 1).eval(pt({-4.0})), EvalError);
  CHECK(ExprTree::parse("x1^0.5", 1).eval(pt({4.0})) == doctest::Approx(2.0));
}

TEST_CASE("printing and reparsing is stable") {
  for (const char* text : {"x1^2 + 2*x2", "-x1^2", "0.5*(x1 - 2)^2", "sin(x1)*cos(x2)",
                           "1 - 2 - x1", "2^3^2", "x1/x2/2", "-(x1 + x2)", "sqrt(x1 + 4)"}) {
    const ExprTree t = ExprTree::parse(text, 2);
    const std::string printed = t.str();
    const ExprTree again = ExprTree::parse(printed, 2);
    CHECK(t.structurally_equal(again));
    CHECK(again.str() == printed);
  }
}

TEST_CASE("trig and sqrt derivatives") {
  const SecondOrderValue v = ExprTree::parse("sin(x1)", 1).eval_order2(pt({0.5}));
  CHECK(v.value == doctest::Approx(std::sin(0.5)));
  CHECK(v.grad(0) == doctest::Approx(std::cos(0.5)));
  CHECK(v.hess(0, 0) == doctest::Approx(-std::sin(0.5)));

  const SecondOrderValue s = ExprTree::parse("sqrt(x1)", 1).eval_order2(pt({4.0}));
  CHECK(s.value == doctest::Approx(2.0));
  CHECK(s.grad(0) == doctest::Approx(0.25));
  CHECK(s.hess(0, 0) == doctest::Approx(-1.0 / 32.0));
}
