// Arithmetic expressions for coefficient functions alpha_l(X) and the homotopy
// weight phi(rho).
//
// Grammar (highest precedence first):
//   primary  := number | variable | function '(' args ')' | '(' expr ')'
//   power    := primary ['^' unary]             right-associative
//   unary    := '-' unary | power
//   term     := unary { ('*' | '/') unary }     left-associative
//   expr     := term { ('+' | '-') term }       left-associative
//
// Variables: rho, x1, x2, x3, u (= x3 / rho).
// Functions: exp log sqrt sin cos abs (one argument), min max (two arguments).
#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace starshape {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class EvalError : public std::runtime_error {
 public:
  EvalError(const std::string& message, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

enum class Variable { Rho, X1, X2, X3, U };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class Function { Exp, Log, Sqrt, Sin, Cos, Abs, Min, Max };

/// Evaluation point X in R^3, with rho = |X| > 0.
class EvalEnv {
 public:
  /// Throws std::domain_error unless rho > 0 and |x| = rho to 1e-12 relative.
  EvalEnv(double rho, const Eigen::Vector3d& x);

  static EvalEnv from_point(const Eigen::Vector3d& x);
  static EvalEnv from_direction(double rho, const Eigen::Vector3d& unit_direction);

  double rho() const { return rho_; }
  const Eigen::Vector3d& x() const { return x_; }
  double u() const { return x_.z() / rho_; }
  double value(Variable v) const;

  /// Same direction, radius replaced.
  EvalEnv with_radius(double rho) const;

 private:
  double rho_;
  Eigen::Vector3d x_;
};

namespace ast {

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Constant {
  double value;
};
struct Var {
  Variable name;
};
struct Negate {
  NodePtr operand;
};
struct Binary {
  BinaryOp op;
  NodePtr lhs, rhs;
};
struct Call {
  Function fn;
  std::vector<NodePtr> args;
};

struct Node {
  std::variant<Constant, Var, Negate, Binary, Call> kind;
  std::size_t offset = 0;  // byte offset in the source text
};

}  // namespace ast

/// Immutable parsed expression. Copies share the tree.
class Expr {
 public:
  static Expr parse(std::string_view text);
  static Expr constant(double value);

  double evaluate(const EvalEnv& env) const;

  /// Fully parenthesized canonical text; parses back to the same tree.
  std::string to_string() const;

  /// Structural equality (source offsets ignored).
  bool structurally_equal(const Expr& other) const;

  const ast::Node& root() const { return *root_; }
  const std::string& source() const { return source_; }

 private:
  Expr(ast::NodePtr root, std::string source);
  ast::NodePtr root_;
  std::string source_;
};

/// Central difference (f(rho+h) - f(rho-h)) / (2h) along the ray through env.
double radial_derivative(const Expr& expr, const EvalEnv& env, double h);

}  // namespace starshape
