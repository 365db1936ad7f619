#include "starshape/exprlang.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <utility>

namespace starshape {

ParseError::ParseError(const std::string& message, std::size_t offset)
    : std::runtime_error("parse error at byte " + std::to_string(offset) + ": " + message),
      offset_(offset) {}

EvalError::EvalError(const std::string& message, std::size_t offset)
    : std::runtime_error("evaluation error at byte " + std::to_string(offset) + ": " + message),
      offset_(offset) {}

EvalEnv::EvalEnv(double rho, const Eigen::Vector3d& x) : rho_(rho), x_(x) {
  if (!(rho > 0) || !std::isfinite(rho)) throw std::domain_error("EvalEnv: rho must be positive");
  if (!x.allFinite() || std::abs(x.norm() - rho) > 1e-12 * rho) {
    throw std::domain_error("EvalEnv: coordinates inconsistent with rho");
  }
}

EvalEnv EvalEnv::from_point(const Eigen::Vector3d& x) { return EvalEnv(x.norm(), x); }

EvalEnv EvalEnv::from_direction(double rho, const Eigen::Vector3d& unit_direction) {
  return EvalEnv(rho, rho * unit_direction.normalized());
}

double EvalEnv::value(Variable v) const {
  switch (v) {
    case Variable::Rho: return rho_;
    case Variable::X1: return x_.x();
    case Variable::X2: return x_.y();
    case Variable::X3: return x_.z();
    case Variable::U: return u();
  }
  return 0.0;
}

EvalEnv EvalEnv::with_radius(double rho) const { return from_direction(rho, x_ / rho_); }

namespace {

using ast::Node;
using ast::NodePtr;

struct NamedVariable {
  std::string_view name;
  Variable var;
};
constexpr std::array<NamedVariable, 5> kVariables{{{"rho", Variable::Rho},
                                                   {"x1", Variable::X1},
                                                   {"x2", Variable::X2},
                                                   {"x3", Variable::X3},
                                                   {"u", Variable::U}}};

struct NamedFunction {
  std::string_view name;
  Function fn;
  int arity;
};
constexpr std::array<NamedFunction, 8> kFunctions{{{"exp", Function::Exp, 1},
                                                   {"log", Function::Log, 1},
                                                   {"sqrt", Function::Sqrt, 1},
                                                   {"sin", Function::Sin, 1},
                                                   {"cos", Function::Cos, 1},
                                                   {"abs", Function::Abs, 1},
                                                   {"min", Function::Min, 2},
                                                   {"max", Function::Max, 2}}};

std::string_view variable_name(Variable v) {
  for (const auto& e : kVariables)
    if (e.var == v) return e.name;
  return "?";
}

const NamedFunction& function_info(Function f) {
  for (const auto& e : kFunctions)
    if (e.fn == f) return e;
  return kFunctions[0];
}

NodePtr make(std::size_t offset, auto&& kind) {
  auto node = std::make_shared<Node>();
  node->kind = std::forward<decltype(kind)>(kind);
  node->offset = offset;
  return node;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    skip_space();
    if (at_end()) throw ParseError("empty expression", pos_);
    NodePtr node = expr();
    skip_space();
    if (!at_end()) throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    return node;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (!at_end() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      skip_space();
      const std::size_t at = pos_;
      if (accept('+')) {
        lhs = make(at, ast::Binary{BinaryOp::Add, lhs, term()});
      } else if (accept('-')) {
        lhs = make(at, ast::Binary{BinaryOp::Sub, lhs, term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      skip_space();
      const std::size_t at = pos_;
      if (accept('*')) {
        lhs = make(at, ast::Binary{BinaryOp::Mul, lhs, unary()});
      } else if (accept('/')) {
        lhs = make(at, ast::Binary{BinaryOp::Div, lhs, unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    skip_space();
    const std::size_t at = pos_;
    if (accept('-')) return make(at, ast::Negate{unary()});
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    skip_space();
    const std::size_t at = pos_;
    if (accept('^')) return make(at, ast::Binary{BinaryOp::Pow, base, unary()});
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (at_end()) throw ParseError("unexpected end of input", pos_);
    const std::size_t at = pos_;
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_'))
        ++end;
      const std::string_view name = text_.substr(pos_, end - pos_);
      pos_ = end;
      for (const auto& v : kVariables)
        if (v.name == name) return make(at, ast::Var{v.var});
      for (const auto& f : kFunctions)
        if (f.name == name) return call(at, f);
      throw ParseError("unknown identifier '" + std::string(name) + "'", at);
    }
    throw ParseError(std::string("unexpected '") + c + "'", at);
  }

  NodePtr number() {
    const std::size_t at = pos_;
    // strtod needs a terminated buffer; copy the maximal numeric span.
    std::size_t end = pos_;
    while (end < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.' ||
            text_[end] == 'e' || text_[end] == 'E' ||
            ((text_[end] == '+' || text_[end] == '-') && end > pos_ &&
             (text_[end - 1] == 'e' || text_[end - 1] == 'E'))))
      ++end;
    const std::string span(text_.substr(pos_, end - pos_));
    char* stop = nullptr;
    const double value = std::strtod(span.c_str(), &stop);
    const auto used = static_cast<std::size_t>(stop - span.c_str());
    if (used == 0) throw ParseError("malformed number", at);
    pos_ += used;
    return make(at, ast::Constant{value});
  }

  NodePtr call(std::size_t at, const NamedFunction& f) {
    if (!accept('(')) throw ParseError("expected '(' after " + std::string(f.name), pos_);
    std::vector<NodePtr> args;
    args.push_back(expr());
    while (accept(',')) args.push_back(expr());
    if (!accept(')')) throw ParseError("expected ')'", pos_);
    if (static_cast<int>(args.size()) != f.arity) {
      throw ParseError(std::string(f.name) + " takes " + std::to_string(f.arity) + " argument(s)",
                       at);
    }
    return make(at, ast::Call{f.fn, std::move(args)});
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

double checked(double value, const Node& node, const char* what) {
  if (!std::isfinite(value)) throw EvalError(std::string(what) + " is not finite", node.offset);
  return value;
}

double eval(const Node& node, const EvalEnv& env) {
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ast::Constant>) {
          return k.value;
        } else if constexpr (std::is_same_v<K, ast::Var>) {
          return env.value(k.name);
        } else if constexpr (std::is_same_v<K, ast::Negate>) {
          return -eval(*k.operand, env);
        } else if constexpr (std::is_same_v<K, ast::Binary>) {
          const double a = eval(*k.lhs, env);
          const double b = eval(*k.rhs, env);
          switch (k.op) {
            case BinaryOp::Add: return checked(a + b, node, "sum");
            case BinaryOp::Sub: return checked(a - b, node, "difference");
            case BinaryOp::Mul: return checked(a * b, node, "product");
            case BinaryOp::Div:
              if (b == 0.0) throw EvalError("division by zero", node.offset);
              return checked(a / b, node, "quotient");
            case BinaryOp::Pow: return checked(std::pow(a, b), node, "power");
          }
          return 0.0;
        } else {
          const double a = eval(*k.args[0], env);
          switch (k.fn) {
            case Function::Exp: return checked(std::exp(a), node, "exp");
            case Function::Log:
              if (!(a > 0.0)) throw EvalError("log of non-positive value", node.offset);
              return std::log(a);
            case Function::Sqrt:
              if (a < 0.0) throw EvalError("sqrt of negative value", node.offset);
              return std::sqrt(a);
            case Function::Sin: return std::sin(a);
            case Function::Cos: return std::cos(a);
            case Function::Abs: return std::abs(a);
            case Function::Min: return std::min(a, eval(*k.args[1], env));
            case Function::Max: return std::max(a, eval(*k.args[1], env));
          }
          return 0.0;
        }
      },
      node.kind);
}

std::string format_constant(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print(const Node& node, std::string& out) {
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ast::Constant>) {
          out += format_constant(k.value);
        } else if constexpr (std::is_same_v<K, ast::Var>) {
          out += variable_name(k.name);
        } else if constexpr (std::is_same_v<K, ast::Negate>) {
          out += "(-";
          print(*k.operand, out);
          out += ')';
        } else if constexpr (std::is_same_v<K, ast::Binary>) {
          static constexpr char kSymbol[] = {'+', '-', '*', '/', '^'};
          out += '(';
          print(*k.lhs, out);
          out += ' ';
          out += kSymbol[static_cast<int>(k.op)];
          out += ' ';
          print(*k.rhs, out);
          out += ')';
        } else {
          out += function_info(k.fn).name;
          out += '(';
          for (std::size_t i = 0; i < k.args.size(); ++i) {
            if (i) out += ", ";
            print(*k.args[i], out);
          }
          out += ')';
        }
      },
      node.kind);
}

bool equal(const Node& a, const Node& b) {
  if (a.kind.index() != b.kind.index()) return false;
  return std::visit(
      [&](const auto& ka) -> bool {
        using K = std::decay_t<decltype(ka)>;
        const auto& kb = std::get<K>(b.kind);
        if constexpr (std::is_same_v<K, ast::Constant>) {
          return ka.value == kb.value;
        } else if constexpr (std::is_same_v<K, ast::Var>) {
          return ka.name == kb.name;
        } else if constexpr (std::is_same_v<K, ast::Negate>) {
          return equal(*ka.operand, *kb.operand);
        } else if constexpr (std::is_same_v<K, ast::Binary>) {
          return ka.op == kb.op && equal(*ka.lhs, *kb.lhs) && equal(*ka.rhs, *kb.rhs);
        } else {
          if (ka.fn != kb.fn || ka.args.size() != kb.args.size()) return false;
          for (std::size_t i = 0; i < ka.args.size(); ++i)
            if (!equal(*ka.args[i], *kb.args[i])) return false;
          return true;
        }
      },
      a.kind);
}

}  // namespace

Expr::Expr(ast::NodePtr root, std::string source)
    : root_(std::move(root)), source_(std::move(source)) {}

Expr Expr::parse(std::string_view text) {
  return Expr(Parser(text).parse(), std::string(text));
}

Expr Expr::constant(double value) {
  return Expr(make(0, ast::Constant{value}), format_constant(value));
}

double Expr::evaluate(const EvalEnv& env) const {
  return checked(eval(*root_, env), *root_, "result");
}

std::string Expr::to_string() const {
  std::string out;
  print(*root_, out);
  return out;
}

bool Expr::structurally_equal(const Expr& other) const { return equal(*root_, *other.root_); }

double radial_derivative(const Expr& expr, const EvalEnv& env, double h) {
  if (!(h > 0)) throw std::domain_error("radial_derivative: step must be positive");
  if (!(env.rho() - h > 0)) throw std::domain_error("radial_derivative: step crosses the origin");
  const double fp = expr.evaluate(env.with_radius(env.rho() + h));
  const double fm = expr.evaluate(env.with_radius(env.rho() - h));
  return (fp - fm) / (2.0 * h);
}

}  // namespace starshape
