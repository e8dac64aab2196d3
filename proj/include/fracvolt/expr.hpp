#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracvolt/types.hpp"

namespace fracvolt {

/// Syntax error in a coefficient expression. offset is the byte offset of
/// the offending token; expected lists the tokens that would have been
/// accepted there.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, std::vector<std::string> expected,
             const std::string& message);
  std::size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

/// Identifier other than x, t or a known function name.
class UnknownIdentifierError : public ParseError {
 public:
  UnknownIdentifierError(std::size_t offset, const std::string& name);
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

namespace detail {
struct ExprNode;
}

/// Immutable space-time function f(x, t) built from the coefficient grammar:
///
///   expr    = term { ("+" | "-") term }
///   term    = unary { ("*" | "/") unary }
///   unary   = "-" unary | primary
///   primary = number | "x" | "t" | call | "(" expr ")"
///   call    = ("sin" | "cos" | "exp") "(" expr ")" | "pow" "(" expr "," expr ")"
class Expression {
 public:
  /// The constant zero.
  Expression();

  static Expression constant(Scalar value);
  static Expression variable_x();
  static Expression variable_t();

  Scalar operator()(Scalar x, Scalar t) const;

  /// Evaluate at every x in xs for a fixed t.
  Eigen::ArrayXd evaluate(const Eigen::ArrayXd& xs, Scalar t) const;

  /// Exact derivative with respect to t, simplified.
  Expression d_dt() const;

  bool depends_on_t() const;
  bool depends_on_x() const;
  /// True when the simplified tree is the literal zero.
  bool is_zero() const;
  /// True when the tree is a literal constant.
  bool is_constant() const;
  /// Polynomial in t with t-free coefficients.
  bool is_polynomial_in_t() const;

  /// f(x, t) -> scale * f(x, t * time_factor).
  Expression rescaled(Scalar scale, Scalar time_factor) const;

  /// Canonical text (re-parses to an equivalent expression).
  std::string to_string() const;

  friend Expression operator+(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a, const Expression& b);
  friend Expression operator*(const Expression& a, const Expression& b);
  friend Expression operator/(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a);

 private:
  explicit Expression(std::shared_ptr<const detail::ExprNode> root);
  std::shared_ptr<const detail::ExprNode> root_;

  friend Expression parse_coeff_expr(const std::string& src);
  friend Expression pow(const Expression& a, const Expression& b);
  friend Expression sin(const Expression& a);
  friend Expression cos(const Expression& a);
  friend Expression exp(const Expression& a);
};

Expression pow(const Expression& a, const Expression& b);
Expression sin(const Expression& a);
Expression cos(const Expression& a);
Expression exp(const Expression& a);

/// Parse a coefficient expression. Throws ParseError/UnknownIdentifierError.
Expression parse_coeff_expr(const std::string& src);

}  // namespace fracvolt
