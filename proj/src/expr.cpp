#include "pdlab/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace pdlab::expr {

// ---------------------------------------------------------------------------
// Second-order truncated-Taylor arithmetic
// ---------------------------------------------------------------------------

SecondOrderValue SecondOrderValue::constant(double v, int d) {
  SecondOrderValue out;
  out.value = v;
  out.grad = Eigen::VectorXd::Zero(d);
  out.hess = Eigen::MatrixXd::Zero(d, d);
  return out;
}

SecondOrderValue SecondOrderValue::variable(int index, double v, int d) {
  SecondOrderValue out = constant(v, d);
  out.grad(index - 1) = 1.0;
  return out;
}

SecondOrderValue operator+(const SecondOrderValue& a, const SecondOrderValue& b) {
  SecondOrderValue out;
  out.value = a.value + b.value;
  out.grad = a.grad + b.grad;
  out.hess = a.hess + b.hess;
  return out;
}

SecondOrderValue operator-(const SecondOrderValue& a, const SecondOrderValue& b) {
  SecondOrderValue out;
  out.value = a.value - b.value;
  out.grad = a.grad - b.grad;
  out.hess = a.hess - b.hess;
  return out;
}

SecondOrderValue operator-(const SecondOrderValue& a) {
  SecondOrderValue out;
  out.value = -a.value;
  out.grad = -a.grad;
  out.hess = -a.hess;
  return out;
}

SecondOrderValue operator*(const SecondOrderValue& a, const SecondOrderValue& b) {
  SecondOrderValue out;
  out.value = a.value * b.value;
  out.grad = a.value * b.grad + b.value * a.grad;
  out.hess = a.value * b.hess + b.value * a.hess + a.grad * b.grad.transpose() +
             b.grad * a.grad.transpose();
  return out;
}

SecondOrderValue operator/(const SecondOrderValue& a, const SecondOrderValue& b) {
  SecondOrderValue out;
  const double q = a.value / b.value;
  out.value = q;
  out.grad = (a.grad - q * b.grad) / b.value;
  out.hess = (a.hess - q * b.hess - out.grad * b.grad.transpose() -
              b.grad * out.grad.transpose()) /
             b.value;
  return out;
}

namespace {

// Composition with a scalar function: value f(v), grad f'(v) g,
// hess f'(v) H + f''(v) g g^T.
SecondOrderValue chain(const SecondOrderValue& a, double f, double fp, double fpp) {
  SecondOrderValue out;
  out.value = f;
  out.grad = fp * a.grad;
  out.hess = fp * a.hess + fpp * (a.grad * a.grad.transpose());
  return out;
}

double int_pow(double base, long n) {
  double r = 1.0;
  const bool neg = n < 0;
  unsigned long k = neg ? static_cast<unsigned long>(-n) : static_cast<unsigned long>(n);
  double b = base;
  while (k) {
    if (k & 1) r *= b;
    b *= b;
    k >>= 1;
  }
  return neg ? 1.0 / r : r;
}

}  // namespace

SecondOrderValue sin(const SecondOrderValue& a) {
  return chain(a, std::sin(a.value), std::cos(a.value), -std::sin(a.value));
}

SecondOrderValue cos(const SecondOrderValue& a) {
  return chain(a, std::cos(a.value), -std::sin(a.value), -std::cos(a.value));
}

SecondOrderValue exp(const SecondOrderValue& a) {
  const double e = std::exp(a.value);
  return chain(a, e, e, e);
}

SecondOrderValue log(const SecondOrderValue& a) {
  const double v = a.value;
  return chain(a, std::log(v), 1.0 / v, -1.0 / (v * v));
}

SecondOrderValue sqrt(const SecondOrderValue& a) {
  const double s = std::sqrt(a.value);
  return chain(a, s, 0.5 / s, -0.25 / (s * a.value));
}

SecondOrderValue pow(const SecondOrderValue& base, const SecondOrderValue& exponent,
                     bool exponent_is_const_int, long int_exponent) {
  if (exponent_is_const_int) {
    const long n = int_exponent;
    const double v = base.value;
    if (n == 0) return SecondOrderValue::constant(1.0, static_cast<int>(base.grad.size()));
    const double f = int_pow(v, n);
    const double fp = static_cast<double>(n) * int_pow(v, n - 1);
    const double fpp = static_cast<double>(n) * static_cast<double>(n - 1) * int_pow(v, n - 2);
    return chain(base, f, fp, fpp);
  }
  // General exponent: a^b = exp(b log a), base must be positive.
  return exp(exponent * log(base));
}

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

ParseError::ParseError(const std::string& what, std::size_t offset)
    : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

EvalError::EvalError(const std::string& what, std::string node)
    : std::runtime_error(what + " in `" + node + "`"), node_(std::move(node)) {}

// ---------------------------------------------------------------------------
// Parser: recursive descent.
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | power
//   power  := atom ('^' factor)?            (right-assoc, exponent may be signed)
//   atom   := number | ident '(' expr ')' | x<k> | '(' expr ')'
// ---------------------------------------------------------------------------

namespace {

class Parser {
 public:
  Parser(const std::string& text, int d) : text_(text), d_(d) {}

  NodePtr run() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("empty expression", pos_);
    NodePtr e = parse_expr();
    skip_ws();
    if (pos_ < text_.size()) throw ParseError("unexpected trailing input", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = binary(BinaryOp::add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = binary(BinaryOp::sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_factor();
    for (;;) {
      if (accept('*')) {
        lhs = binary(BinaryOp::mul, lhs, parse_factor());
      } else if (accept('/')) {
        lhs = binary(BinaryOp::div, lhs, parse_factor());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_factor() {
    if (accept('-')) return unary(UnaryOp::neg, parse_factor());
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (accept('^')) return binary(BinaryOp::pow, base, parse_factor());
    return base;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = parse_expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  NodePtr parse_number() {
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw ParseError("invalid number", pos_);
    pos_ += static_cast<std::size_t>(end - begin);
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::constant;
    n->value = v;
    return n;
  }

  NodePtr parse_ident() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string name = text_.substr(start, pos_ - start);

    if (name.size() >= 2 && name[0] == 'x' &&
        std::all_of(name.begin() + 1, name.end(),
                    [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      const int idx = std::atoi(name.c_str() + 1);
      if (idx < 1 || idx > d_)
        throw ParseError("variable index " + std::to_string(idx) + " exceeds dimension " +
                             std::to_string(d_),
                         start);
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::variable;
      n->var_index = idx;
      return n;
    }

    UnaryOp op;
    if (name == "sin") op = UnaryOp::sin;
    else if (name == "cos") op = UnaryOp::cos;
    else if (name == "exp") op = UnaryOp::exp;
    else if (name == "log") op = UnaryOp::log;
    else if (name == "sqrt") op = UnaryOp::sqrt;
    else throw ParseError("unknown identifier '" + name + "'", start);

    if (!accept('(')) throw ParseError("expected '(' after '" + name + "'", pos_);
    NodePtr arg = parse_expr();
    if (!accept(')')) throw ParseError("expected ')'", pos_);
    return unary(op, arg);
  }

  static NodePtr unary(UnaryOp op, NodePtr arg) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::unary;
    n->uop = op;
    n->lhs = std::move(arg);
    return n;
  }

  static NodePtr binary(BinaryOp op, NodePtr lhs, NodePtr rhs) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::binary;
    n->bop = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
  }

  const std::string& text_;
  int d_;
  std::size_t pos_ = 0;
};

// Printing with minimal parentheses. Precedence levels: add/sub 1,
// mul/div 2, unary neg 3, pow 4, atom 5.
int precedence(const Node& n) {
  switch (n.kind) {
    case NodeKind::constant:
      return n.value < 0 ? 3 : 5;
    case NodeKind::variable:
      return 5;
    case NodeKind::unary:
      return n.uop == UnaryOp::neg ? 3 : 5;
    case NodeKind::binary:
      switch (n.bop) {
        case BinaryOp::add:
        case BinaryOp::sub:
          return 1;
        case BinaryOp::mul:
        case BinaryOp::div:
          return 2;
        case BinaryOp::pow:
          return 4;
      }
  }
  return 5;
}

void print_node(const Node& n, std::ostream& os, int parent_prec) {
  const int prec = precedence(n);
  const bool paren = prec < parent_prec;
  if (paren) os << '(';
  switch (n.kind) {
    case NodeKind::constant: {
      std::ostringstream tmp;
      tmp.precision(17);
      tmp << n.value;
      os << tmp.str();
      break;
    }
    case NodeKind::variable:
      os << 'x' << n.var_index;
      break;
    case NodeKind::unary:
      switch (n.uop) {
        case UnaryOp::neg:
          os << '-';
          print_node(*n.lhs, os, 4);  // operand of neg must bind at least as pow
          break;
        case UnaryOp::sin: os << "sin("; print_node(*n.lhs, os, 0); os << ')'; break;
        case UnaryOp::cos: os << "cos("; print_node(*n.lhs, os, 0); os << ')'; break;
        case UnaryOp::exp: os << "exp("; print_node(*n.lhs, os, 0); os << ')'; break;
        case UnaryOp::log: os << "log("; print_node(*n.lhs, os, 0); os << ')'; break;
        case UnaryOp::sqrt: os << "sqrt("; print_node(*n.lhs, os, 0); os << ')'; break;
      }
      break;
    case NodeKind::binary: {
      const char* op = "";
      int lp = prec, rp = prec + 1;  // left-assoc default
      switch (n.bop) {
        case BinaryOp::add: op = " + "; break;
        case BinaryOp::sub: op = " - "; break;
        case BinaryOp::mul: op = "*"; break;
        case BinaryOp::div: op = "/"; break;
        case BinaryOp::pow:
          op = "^";
          lp = prec + 1;  // right-assoc
          rp = prec;
          break;
      }
      print_node(*n.lhs, os, lp);
      os << op;
      print_node(*n.rhs, os, rp);
      break;
    }
  }
  if (paren) os << ')';
}

std::string node_str(const Node& n) {
  std::ostringstream os;
  print_node(n, os, 0);
  return os.str();
}

bool is_const_int(const Node& n, long& out) {
  if (n.kind == NodeKind::constant && std::floor(n.value) == n.value &&
      std::abs(n.value) < 1e15) {
    out = static_cast<long>(n.value);
    return true;
  }
  if (n.kind == NodeKind::unary && n.uop == UnaryOp::neg && is_const_int(*n.lhs, out)) {
    out = -out;
    return true;
  }
  return false;
}

double eval_node(const Node& n, const Eigen::VectorXd& x) {
  switch (n.kind) {
    case NodeKind::constant:
      return n.value;
    case NodeKind::variable:
      return x(n.var_index - 1);
    case NodeKind::unary: {
      const double a = eval_node(*n.lhs, x);
      switch (n.uop) {
        case UnaryOp::neg: return -a;
        case UnaryOp::sin: return std::sin(a);
        case UnaryOp::cos: return std::cos(a);
        case UnaryOp::exp: return std::exp(a);
        case UnaryOp::log:
          if (a <= 0.0) throw EvalError("log of non-positive value", node_str(n));
          return std::log(a);
        case UnaryOp::sqrt:
          if (a < 0.0) throw EvalError("sqrt of negative value", node_str(n));
          return std::sqrt(a);
      }
      break;
    }
    case NodeKind::binary: {
      const double a = eval_node(*n.lhs, x);
      const double b = eval_node(*n.rhs, x);
      switch (n.bop) {
        case BinaryOp::add: return a + b;
        case BinaryOp::sub: return a - b;
        case BinaryOp::mul: return a * b;
        case BinaryOp::div:
          if (b == 0.0) throw EvalError("division by zero", node_str(n));
          return a / b;
        case BinaryOp::pow: {
          long ni = 0;
          if (is_const_int(*n.rhs, ni)) {
            if (a == 0.0 && ni < 0) throw EvalError("zero base with negative exponent", node_str(n));
            return int_pow(a, ni);
          }
          if (a <= 0.0)
            throw EvalError("fractional power of non-positive base", node_str(n));
          return std::pow(a, b);
        }
      }
      break;
    }
  }
  return 0.0;  // unreachable
}

SecondOrderValue eval2_node(const Node& n, const Eigen::VectorXd& x) {
  const int d = static_cast<int>(x.size());
  switch (n.kind) {
    case NodeKind::constant:
      return SecondOrderValue::constant(n.value, d);
    case NodeKind::variable:
      return SecondOrderValue::variable(n.var_index, x(n.var_index - 1), d);
    case NodeKind::unary: {
      SecondOrderValue a = eval2_node(*n.lhs, x);
      switch (n.uop) {
        case UnaryOp::neg: return -a;
        case UnaryOp::sin: return sin(a);
        case UnaryOp::cos: return cos(a);
        case UnaryOp::exp: return exp(a);
        case UnaryOp::log:
          if (a.value <= 0.0) throw EvalError("log of non-positive value", node_str(n));
          return log(a);
        case UnaryOp::sqrt:
          if (a.value < 0.0) throw EvalError("sqrt of negative value", node_str(n));
          if (a.value == 0.0) throw EvalError("sqrt derivative at zero", node_str(n));
          return sqrt(a);
      }
      break;
    }
    case NodeKind::binary: {
      SecondOrderValue a = eval2_node(*n.lhs, x);
      switch (n.bop) {
        case BinaryOp::add: return a + eval2_node(*n.rhs, x);
        case BinaryOp::sub: return a - eval2_node(*n.rhs, x);
        case BinaryOp::mul: return a * eval2_node(*n.rhs, x);
        case BinaryOp::div: {
          SecondOrderValue b = eval2_node(*n.rhs, x);
          if (b.value == 0.0) throw EvalError("division by zero", node_str(n));
          return a / b;
        }
        case BinaryOp::pow: {
          long ni = 0;
          if (is_const_int(*n.rhs, ni)) {
            if (a.value == 0.0 && ni < 0)
              throw EvalError("zero base with negative exponent", node_str(n));
            return pow(a, SecondOrderValue::constant(static_cast<double>(ni), d), true, ni);
          }
          SecondOrderValue b = eval2_node(*n.rhs, x);
          if (a.value <= 0.0)
            throw EvalError("fractional power of non-positive base", node_str(n));
          return pow(a, b, false, 0);
        }
      }
      break;
    }
  }
  return SecondOrderValue::constant(0.0, d);  // unreachable
}

bool nodes_equal(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::constant:
      return a.value == b.value;
    case NodeKind::variable:
      return a.var_index == b.var_index;
    case NodeKind::unary:
      return a.uop == b.uop && nodes_equal(*a.lhs, *b.lhs);
    case NodeKind::binary:
      return a.bop == b.bop && nodes_equal(*a.lhs, *b.lhs) && nodes_equal(*a.rhs, *b.rhs);
  }
  return false;
}

}  // namespace

ExprTree ExprTree::parse(const std::string& text, int d) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  return ExprTree(Parser(text, d).run(), d);
}

double ExprTree::eval(const Eigen::VectorXd& point) const {
  if (point.size() != dim_) throw std::invalid_argument("point dimension mismatch");
  return eval_node(*root_, point);
}

SecondOrderValue ExprTree::eval_order2(const Eigen::VectorXd& point) const {
  if (point.size() != dim_) throw std::invalid_argument("point dimension mismatch");
  return eval2_node(*root_, point);
}

std::string ExprTree::str() const { return node_str(*root_); }

bool ExprTree::structurally_equal(const ExprTree& other) const {
  return dim_ == other.dim_ && nodes_equal(*root_, *other.root_);
}

}  // namespace pdlab::expr
