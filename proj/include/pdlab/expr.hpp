#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pdlab::expr {

/// Value, gradient and Hessian of a scalar map R^d -> R at a point.
/// Produced by one pass of order-2 truncated-Taylor arithmetic.
struct SecondOrderValue {
  double value = 0.0;
  Eigen::VectorXd grad;   // length d
  Eigen::MatrixXd hess;   // d x d, symmetric

  static SecondOrderValue constant(double v, int d);
  static SecondOrderValue variable(int index, double v, int d);
};

SecondOrderValue operator+(const SecondOrderValue& a, const SecondOrderValue& b);
SecondOrderValue operator-(const SecondOrderValue& a, const SecondOrderValue& b);
SecondOrderValue operator*(const SecondOrderValue& a, const SecondOrderValue& b);
SecondOrderValue operator/(const SecondOrderValue& a, const SecondOrderValue& b);
SecondOrderValue operator-(const SecondOrderValue& a);
SecondOrderValue sin(const SecondOrderValue& a);
SecondOrderValue cos(const SecondOrderValue& a);
SecondOrderValue exp(const SecondOrderValue& a);
SecondOrderValue log(const SecondOrderValue& a);
SecondOrderValue sqrt(const SecondOrderValue& a);
SecondOrderValue pow(const SecondOrderValue& base, const SecondOrderValue& exponent,
                     bool exponent_is_const_int, long int_exponent);

/// Syntax error with the byte offset of the offending token.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Domain violation during evaluation (log of a non-positive value,
/// division by zero, fractional power of a non-positive base, ...).
/// Carries a printed form of the offending subexpression.
class EvalError : public std::runtime_error {
 public:
  EvalError(const std::string& what, std::string node);
  const std::string& node() const { return node_; }

 private:
  std::string node_;
};

enum class NodeKind { constant, variable, unary, binary };
enum class UnaryOp { neg, sin, cos, exp, log, sqrt };
enum class BinaryOp { add, sub, mul, div, pow };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  NodeKind kind;
  double value = 0.0;    // constant
  int var_index = 0;     // variable, 1-based
  UnaryOp uop = UnaryOp::neg;
  BinaryOp bop = BinaryOp::add;
  NodePtr lhs, rhs;      // unary uses lhs only
};

/// Immutable expression over variables x1..xd. Evaluation is pure and
/// safe to call concurrently.
class ExprTree {
 public:
  ExprTree() = default;

  /// Grammar: + - * / ^ with conventional precedence, `^` right-associative
  /// and binding tighter than unary minus (so -x1^2 == -(x1^2)).
  static ExprTree parse(const std::string& text, int d);

  double eval(const Eigen::VectorXd& point) const;
  SecondOrderValue eval_order2(const Eigen::VectorXd& point) const;

  /// Canonical text form; parse(str()) is structurally identical to *this.
  std::string str() const;

  int dim() const { return dim_; }
  const NodePtr& root() const { return root_; }

  bool structurally_equal(const ExprTree& other) const;

 private:
  ExprTree(NodePtr root, int d) : root_(std::move(root)), dim_(d) {}
  NodePtr root_;
  int dim_ = 0;
};

}  // namespace pdlab::expr
