#include "fracvolt/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <sstream>

namespace fracvolt {

ParseError::ParseError(std::size_t offset, std::vector<std::string> expected,
                       const std::string& message)
    : std::runtime_error(message), offset_(offset), expected_(std::move(expected)) {}

namespace {

std::string describe(std::size_t offset, const std::vector<std::string>& expected,
                     const std::string& what) {
  std::ostringstream os;
  os << "parse error at offset " << offset << ": " << what;
  if (!expected.empty()) {
    os << "; expected one of:";
    for (const auto& e : expected) os << ' ' << e;
  }
  return os.str();
}

}  // namespace

UnknownIdentifierError::UnknownIdentifierError(std::size_t offset,
                                               const std::string& name)
    : ParseError(offset, {"x", "t", "sin", "cos", "exp", "pow"},
                 describe(offset, {"x", "t", "sin", "cos", "exp", "pow"},
                          "unknown identifier '" + name + "'")),
      name_(name) {}

namespace detail {

enum class Op { Const, X, T, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Log };

struct ExprNode {
  Op op;
  Scalar value = 0.0;
  std::shared_ptr<const ExprNode> a;
  std::shared_ptr<const ExprNode> b;
  bool has_t = false;
  bool has_x = false;
};

}  // namespace detail

namespace {

using detail::ExprNode;
using detail::Op;
using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr leaf(Op op, Scalar value = 0.0) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->value = value;
  n->has_t = (op == Op::T);
  n->has_x = (op == Op::X);
  return n;
}

bool is_const(const NodePtr& n, Scalar v) {
  return n->op == Op::Const && n->value == v;
}

Scalar apply(Op op, Scalar a, Scalar b) {
  switch (op) {
    case Op::Neg: return -a;
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div: return a / b;
    case Op::Pow: return std::pow(a, b);
    case Op::Sin: return std::sin(a);
    case Op::Cos: return std::cos(a);
    case Op::Exp: return std::exp(a);
    case Op::Log: return std::log(a);
    default: return 0.0;
  }
}

// Node constructor with light algebraic simplification.
NodePtr make(Op op, NodePtr a, NodePtr b = nullptr) {
  const bool unary = (b == nullptr);
  if (a->op == Op::Const && (unary || b->op == Op::Const)) {
    return leaf(Op::Const, apply(op, a->value, unary ? 0.0 : b->value));
  }
  switch (op) {
    case Op::Neg:
      if (a->op == Op::Neg) return a->a;
      break;
    case Op::Add:
      if (is_const(a, 0.0)) return b;
      if (is_const(b, 0.0)) return a;
      break;
    case Op::Sub:
      if (is_const(b, 0.0)) return a;
      if (is_const(a, 0.0)) return make(Op::Neg, b);
      break;
    case Op::Mul:
      if (is_const(a, 0.0) || is_const(b, 0.0)) return leaf(Op::Const, 0.0);
      if (is_const(a, 1.0)) return b;
      if (is_const(b, 1.0)) return a;
      if (is_const(a, -1.0)) return make(Op::Neg, b);
      if (is_const(b, -1.0)) return make(Op::Neg, a);
      break;
    case Op::Div:
      if (is_const(a, 0.0)) return leaf(Op::Const, 0.0);
      if (is_const(b, 1.0)) return a;
      break;
    case Op::Pow:
      if (is_const(b, 0.0)) return leaf(Op::Const, 1.0);
      if (is_const(b, 1.0)) return a;
      break;
    default:
      break;
  }
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  n->has_t = n->a->has_t || (n->b && n->b->has_t);
  n->has_x = n->a->has_x || (n->b && n->b->has_x);
  return n;
}

Scalar eval_scalar(const ExprNode& n, Scalar x, Scalar t) {
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::X: return x;
    case Op::T: return t;
    default: break;
  }
  const Scalar a = eval_scalar(*n.a, x, t);
  const Scalar b = n.b ? eval_scalar(*n.b, x, t) : 0.0;
  return apply(n.op, a, b);
}

Eigen::ArrayXd eval_array(const ExprNode& n, const Eigen::ArrayXd& xs, Scalar t) {
  switch (n.op) {
    case Op::Const: return Eigen::ArrayXd::Constant(xs.size(), n.value);
    case Op::X: return xs;
    case Op::T: return Eigen::ArrayXd::Constant(xs.size(), t);
    default: break;
  }
  if (!n.has_x) {
    return Eigen::ArrayXd::Constant(xs.size(), eval_scalar(n, 0.0, t));
  }
  Eigen::ArrayXd a = eval_array(*n.a, xs, t);
  switch (n.op) {
    case Op::Neg: return -a;
    case Op::Sin: return a.sin();
    case Op::Cos: return a.cos();
    case Op::Exp: return a.exp();
    case Op::Log: return a.log();
    default: break;
  }
  const Eigen::ArrayXd b = eval_array(*n.b, xs, t);
  switch (n.op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div: return a / b;
    case Op::Pow: return a.pow(b);
    default: return a;
  }
}

NodePtr derivative_t(const NodePtr& n) {
  if (!n->has_t) return leaf(Op::Const, 0.0);
  switch (n->op) {
    case Op::T: return leaf(Op::Const, 1.0);
    case Op::Neg: return make(Op::Neg, derivative_t(n->a));
    case Op::Add: return make(Op::Add, derivative_t(n->a), derivative_t(n->b));
    case Op::Sub: return make(Op::Sub, derivative_t(n->a), derivative_t(n->b));
    case Op::Mul:
      return make(Op::Add, make(Op::Mul, derivative_t(n->a), n->b),
                  make(Op::Mul, n->a, derivative_t(n->b)));
    case Op::Div:
      return make(Op::Div,
                  make(Op::Sub, make(Op::Mul, derivative_t(n->a), n->b),
                       make(Op::Mul, n->a, derivative_t(n->b))),
                  make(Op::Mul, n->b, n->b));
    case Op::Pow:
      if (!n->b->has_t) {
        return make(Op::Mul,
                    make(Op::Mul, n->b,
                         make(Op::Pow, n->a,
                              make(Op::Sub, n->b, leaf(Op::Const, 1.0)))),
                    derivative_t(n->a));
      }
      return make(Op::Mul, n,
                  make(Op::Add, make(Op::Mul, derivative_t(n->b), make(Op::Log, n->a)),
                       make(Op::Div, make(Op::Mul, n->b, derivative_t(n->a)), n->a)));
    case Op::Sin: return make(Op::Mul, make(Op::Cos, n->a), derivative_t(n->a));
    case Op::Cos:
      return make(Op::Neg, make(Op::Mul, make(Op::Sin, n->a), derivative_t(n->a)));
    case Op::Exp: return make(Op::Mul, n, derivative_t(n->a));
    case Op::Log: return make(Op::Div, derivative_t(n->a), n->a);
    default: return leaf(Op::Const, 0.0);
  }
}

bool polynomial_in_t(const ExprNode& n) {
  if (!n.has_t) return true;
  switch (n.op) {
    case Op::T: return true;
    case Op::Neg: return polynomial_in_t(*n.a);
    case Op::Add:
    case Op::Sub:
    case Op::Mul: return polynomial_in_t(*n.a) && polynomial_in_t(*n.b);
    case Op::Div: return !n.b->has_t && polynomial_in_t(*n.a);
    case Op::Pow:
      return n.b->op == Op::Const && n.b->value >= 0.0 &&
             std::floor(n.b->value) == n.b->value && polynomial_in_t(*n.a);
    default: return false;
  }
}

NodePtr substitute_t(const NodePtr& n, const NodePtr& replacement) {
  if (!n->has_t) return n;
  if (n->op == Op::T) return replacement;
  return make(n->op, substitute_t(n->a, replacement),
              n->b ? substitute_t(n->b, replacement) : nullptr);
}

std::string format_number(Scalar v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string render(const ExprNode& n) {
  switch (n.op) {
    case Op::Const:
      return n.value < 0.0 ? "(" + format_number(n.value) + ")" : format_number(n.value);
    case Op::X: return "x";
    case Op::T: return "t";
    case Op::Neg: return "(-" + render(*n.a) + ")";
    case Op::Add: return "(" + render(*n.a) + " + " + render(*n.b) + ")";
    case Op::Sub: return "(" + render(*n.a) + " - " + render(*n.b) + ")";
    case Op::Mul: return "(" + render(*n.a) + " * " + render(*n.b) + ")";
    case Op::Div: return "(" + render(*n.a) + " / " + render(*n.b) + ")";
    case Op::Pow: return "pow(" + render(*n.a) + ", " + render(*n.b) + ")";
    case Op::Sin: return "sin(" + render(*n.a) + ")";
    case Op::Cos: return "cos(" + render(*n.a) + ")";
    case Op::Exp: return "exp(" + render(*n.a) + ")";
    case Op::Log: return "log(" + render(*n.a) + ")";
  }
  return "";
}

class Parser {
 public:
  explicit Parser(const std::string& src) : src_(src) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != src_.size()) {
      fail({"+", "-", "*", "/", "end of input"}, "unexpected trailing input");
    }
    return e;
  }

 private:
  const std::string& src_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(std::vector<std::string> expected, const std::string& what) {
    auto msg = describe(pos_, expected, what);
    throw ParseError(pos_, std::move(expected), msg);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c, std::vector<std::string> expected) {
    if (!accept(c)) {
      fail(std::move(expected), pos_ < src_.size()
                                    ? std::string("unexpected '") + src_[pos_] + "'"
                                    : "unexpected end of input");
    }
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make(Op::Add, lhs, term());
      } else if (accept('-')) {
        lhs = make(Op::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Op::Mul, lhs, unary());
      } else if (accept('/')) {
        lhs = make(Op::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) {
      return make(Op::Neg, unary());
    }
    return primary();
  }

  NodePtr primary() {
    skip_ws();
    static const std::vector<std::string> kPrimary = {
        "number", "x", "t", "sin", "cos", "exp", "pow", "(", "-"};
    if (pos_ >= src_.size()) {
      fail(kPrimary, "unexpected end of input");
    }
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = src_.c_str() + pos_;
      char* end = nullptr;
      const Scalar v = std::strtod(begin, &end);
      if (end == begin) {
        fail({"number"}, "malformed number");
      }
      pos_ += static_cast<std::size_t>(end - begin);
      return leaf(Op::Const, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        ++pos_;
      }
      const std::string name = src_.substr(start, pos_ - start);
      if (name == "x") return leaf(Op::X);
      if (name == "t") return leaf(Op::T);
      if (name == "sin" || name == "cos" || name == "exp") {
        expect('(', {"("});
        NodePtr arg = expr();
        expect(')', {")", "+", "-", "*", "/"});
        const Op op = name == "sin" ? Op::Sin : (name == "cos" ? Op::Cos : Op::Exp);
        return make(op, arg);
      }
      if (name == "pow") {
        expect('(', {"("});
        NodePtr base = expr();
        expect(',', {",", "+", "-", "*", "/"});
        NodePtr exponent = expr();
        expect(')', {")", "+", "-", "*", "/"});
        return make(Op::Pow, base, exponent);
      }
      throw UnknownIdentifierError(start, name);
    }
    if (accept('(')) {
      NodePtr inner = expr();
      expect(')', {")", "+", "-", "*", "/"});
      return inner;
    }
    fail(kPrimary, std::string("unexpected '") + c + "'");
  }
};

}  // namespace

Expression::Expression() : root_(leaf(Op::Const, 0.0)) {}
Expression::Expression(std::shared_ptr<const detail::ExprNode> root) : root_(std::move(root)) {}

Expression Expression::constant(Scalar value) { return Expression(leaf(Op::Const, value)); }
Expression Expression::variable_x() { return Expression(leaf(Op::X)); }
Expression Expression::variable_t() { return Expression(leaf(Op::T)); }

Scalar Expression::operator()(Scalar x, Scalar t) const { return eval_scalar(*root_, x, t); }

Eigen::ArrayXd Expression::evaluate(const Eigen::ArrayXd& xs, Scalar t) const {
  return eval_array(*root_, xs, t);
}

Expression Expression::d_dt() const { return Expression(derivative_t(root_)); }
bool Expression::depends_on_t() const { return root_->has_t; }
bool Expression::depends_on_x() const { return root_->has_x; }
bool Expression::is_zero() const { return is_const(root_, 0.0); }
bool Expression::is_constant() const { return root_->op == Op::Const; }
bool Expression::is_polynomial_in_t() const { return polynomial_in_t(*root_); }

Expression Expression::rescaled(Scalar scale, Scalar time_factor) const {
  NodePtr scaled_t = make(Op::Mul, leaf(Op::T), leaf(Op::Const, time_factor));
  return Expression(make(Op::Mul, leaf(Op::Const, scale), substitute_t(root_, scaled_t)));
}

std::string Expression::to_string() const { return render(*root_); }

Expression operator+(const Expression& a, const Expression& b) {
  return Expression(make(Op::Add, a.root_, b.root_));
}
Expression operator-(const Expression& a, const Expression& b) {
  return Expression(make(Op::Sub, a.root_, b.root_));
}
Expression operator*(const Expression& a, const Expression& b) {
  return Expression(make(Op::Mul, a.root_, b.root_));
}
Expression operator/(const Expression& a, const Expression& b) {
  return Expression(make(Op::Div, a.root_, b.root_));
}
Expression operator-(const Expression& a) { return Expression(make(Op::Neg, a.root_)); }
Expression pow(const Expression& a, const Expression& b) {
  return Expression(make(Op::Pow, a.root_, b.root_));
}
Expression sin(const Expression& a) { return Expression(make(Op::Sin, a.root_)); }
Expression cos(const Expression& a) { return Expression(make(Op::Cos, a.root_)); }
Expression exp(const Expression& a) { return Expression(make(Op::Exp, a.root_)); }

Expression parse_coeff_expr(const std::string& src) {
  Parser p(src);
  return Expression(p.parse());
}

}  // namespace fracvolt
