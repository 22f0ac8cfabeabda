#pragma once

/**
 * @file parser.hpp
 * @brief Recursive-descent parser for the expression DSL.
 *
 * Grammar (whitespace is insignificant):
 *
 *     expr     := term (("+" | "-") term)*
 *     term     := unary (("*" | "/") unary)*
 *     unary    := "-" unary | power
 *     power    := primary ("^" unary)?
 *     primary  := number
 *               | "(" expr ")"
 *               | name "'"* "(" expr ("," expr)* ")"
 *               | name
 *
 * Names resolve, in order, to a bound variable, the constant `pi`, a
 * builtin (exp, log, sin, cos, tanh, sqrt, atan2) or a registered parameter
 * function. Primes after a parameter function name select a derivative:
 * `alpha''(t)` is the second derivative of alpha at t.
 *
 * A constant exponent gives an integer or real power node; any other
 * exponent `a^b` is rewritten to `exp(b*log(a))`.
 */

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numbers>
#include <string>
#include <string_view>

#include "errors.hpp"
#include "expr.hpp"

namespace seaconv {

/// Names that may not be used for parameter functions or variables.
[[nodiscard]] inline bool is_reserved_name(std::string_view name) {
  static constexpr std::string_view kReserved[] = {"exp",  "log",   "sin", "cos", "tanh",
                                                   "sqrt", "atan2", "pi"};
  for (auto r : kReserved) {
    if (r == name) return true;
  }
  return false;
}

/// Maps source-level identifiers to variables, e.g. {"t" -> Var::s} when
/// parsing the body of `alpha(t) = ...`.
using VarBindings = std::map<std::string, Var, std::less<>>;

[[nodiscard]] inline VarBindings space_time_bindings() {
  return {{"t", Var::t}, {"x", Var::x}, {"y", Var::y}, {"z", Var::z}};
}

[[nodiscard]] inline VarBindings bindings_for(VarSet allowed) {
  VarBindings b;
  for (int i = 0; i <= 4; ++i) {
    const auto v = static_cast<Var>(i);
    if (allowed.contains(v)) b.emplace(var_name(v), v);
  }
  return b;
}

namespace detail {

class Parser {
 public:
  Parser(std::string_view src, const Context& ctx, const VarBindings& vars)
      : src_(src), ctx_(ctx), vars_(vars) {}

  Expr parse() {
    skip_ws();
    if (at_end()) throw ParseError(pos_, "empty expression");
    Expr e;
    try {
      e = parse_expr();
    } catch (const EndOfInput&) {
      throw ParseError(src_.size(), "unexpected end of input");
    }
    skip_ws();
    if (!at_end()) {
      if (peek() == ')') throw ParseError(pos_, "unbalanced parenthesis");
      throw ParseError(pos_, std::string("unexpected character '") + peek() + "'");
    }
    return e;
  }

 private:
  // Thrown internally when input runs out, so an enclosing "(" can report
  // its own position.
  struct EndOfInput {};

  [[nodiscard]] bool at_end() const { return pos_ >= src_.size(); }
  [[nodiscard]] char peek() const { return at_end() ? '\0' : src_[pos_]; }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      skip_ws();
      const char c = peek();
      if (c != '+' && c != '-') return lhs;
      ++pos_;
      Expr rhs = parse_term();
      lhs = c == '+' ? lhs + rhs : lhs - rhs;
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    for (;;) {
      skip_ws();
      const char c = peek();
      if (c != '*' && c != '/') return lhs;
      ++pos_;
      Expr rhs = parse_unary();
      lhs = c == '*' ? lhs * rhs : lhs / rhs;
    }
  }

  Expr parse_unary() {
    skip_ws();
    if (peek() == '-') {
      ++pos_;
      return -parse_unary();
    }
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    skip_ws();
    if (peek() != '^') return base;
    ++pos_;
    Expr exponent = parse_unary();
    double value = 0.0;
    if (literal_value(exponent, value)) {
      if (value == std::floor(value) && std::abs(value) <= 1000.0) {
        return pow(base, static_cast<int>(value));
      }
      return real_pow(base, value);
    }
    return exp(exponent * log(base));
  }

  // A numeric literal, optionally negated.
  static bool literal_value(const Expr& e, double& out) {
    const Node& n = e.node();
    if (n.op == Op::Const) {
      out = n.number;
      return true;
    }
    if (n.op == Op::Neg && n.args[0].node().op == Op::Const) {
      out = -n.args[0].node().number;
      return true;
    }
    return false;
  }

  Expr parse_primary() {
    skip_ws();
    if (at_end()) throw EndOfInput{};
    const char c = peek();
    if (c == '(') {
      const std::size_t open = pos_;
      ++pos_;
      try {
        Expr inner = parse_expr();
        skip_ws();
        if (peek() != ')') throw ParseError(open, "unbalanced parenthesis");
        ++pos_;
        return inner;
      } catch (const EndOfInput&) {
        throw ParseError(open, "unbalanced parenthesis");
      }
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
    throw ParseError(pos_, std::string("unexpected character '") + c + "'");
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    while (!at_end() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.')) ++pos_;
    if (!at_end() && (peek() == 'e' || peek() == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (!at_end() && (peek() == '+' || peek() == '-')) ++pos_;
      if (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || !std::isfinite(v)) {
      throw ParseError(start, "malformed number '" + text + "'");
    }
    return constant(v);
  }

  Expr parse_name() {
    const std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) ++pos_;
    const std::string name(src_.substr(start, pos_ - start));
    int primes = 0;
    while (!at_end() && peek() == '\'') {
      ++primes;
      ++pos_;
    }
    skip_ws();
    const bool call = peek() == '(';

    if (!call) {
      if (primes > 0) throw ParseError(pos_, "expected '(' after derivative of '" + name + "'");
      if (auto it = vars_.find(name); it != vars_.end()) return variable(it->second);
      if (name == "pi") return constant(std::numbers::pi);
      if (is_space_time_name(name) || name == "s") {
        throw ParseError(start, "variable '" + name + "' is not allowed here");
      }
      if (builtin_arity(name) > 0 || ctx_.find(name)) {
        throw ParseError(pos_, "function '" + name + "' must be called");
      }
      throw ParseError(start, "unknown identifier '" + name + "'");
    }

    const int builtin = builtin_arity(name);
    ParamFnPtr fn = builtin > 0 ? nullptr : ctx_.find(name);
    if (builtin == 0 && !fn) throw ParseError(start, "unknown function '" + name + "'");
    if (primes > 0 && !fn) {
      throw ParseError(start, "derivative notation applies only to parameter functions, not '" + name + "'");
    }

    const std::size_t open = pos_;
    ++pos_;
    std::vector<Expr> args;
    try {
      skip_ws();
      if (peek() == ')') throw ParseError(pos_, "function '" + name + "' needs arguments");
      for (;;) {
        args.push_back(parse_expr());
        skip_ws();
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        if (peek() == ')') {
          ++pos_;
          break;
        }
        if (at_end()) throw EndOfInput{};
        throw ParseError(pos_, "expected ',' or ')'");
      }
    } catch (const EndOfInput&) {
      throw ParseError(open, "unbalanced parenthesis");
    }

    const std::size_t expected = fn ? 1u : static_cast<std::size_t>(builtin);
    if (args.size() != expected) {
      throw ParseError(start, "function '" + name + "' takes " + std::to_string(expected) +
                                  " argument(s), got " + std::to_string(args.size()));
    }
    if (fn) return apply(fn, args[0], primes);
    if (name == "exp") return exp(args[0]);
    if (name == "log") return log(args[0]);
    if (name == "sin") return sin(args[0]);
    if (name == "cos") return cos(args[0]);
    if (name == "tanh") return tanh(args[0]);
    if (name == "sqrt") return sqrt(args[0]);
    return atan2(args[0], args[1]);
  }

  static int builtin_arity(std::string_view name) {
    if (name == "atan2") return 2;
    if (name == "exp" || name == "log" || name == "sin" || name == "cos" || name == "tanh" ||
        name == "sqrt") {
      return 1;
    }
    return 0;
  }

  static bool is_space_time_name(std::string_view n) {
    return n == "t" || n == "x" || n == "y" || n == "z";
  }

  std::string_view src_;
  const Context& ctx_;
  const VarBindings& vars_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parse DSL text into an expression.
///
/// Throws ParseError (with the byte offset) on syntax errors, unknown
/// identifiers, wrong arity and uses of variables not present in `vars`.
[[nodiscard]] inline Expr parse_expr(std::string_view src, const Context& ctx,
                                     const VarBindings& vars = space_time_bindings()) {
  detail::Parser p(src, ctx, vars);
  return p.parse();
}

/// Parse a parameter function body written in terms of `bound_name`
/// (e.g. "t" for `alpha(t) = sin(t)`).
[[nodiscard]] inline ParamFnPtr parse_param_fn(const std::string& name, const std::string& bound_name,
                                               std::string_view body, const Context& ctx) {
  if (is_reserved_name(name)) throw Error("'" + name + "' is a reserved name");
  VarBindings vars{{bound_name, Var::s}};
  Expr e = parse_expr(body, ctx, vars);
  return std::make_shared<const ParamFn>(name, std::move(e), std::string(body));
}

}  // namespace seaconv
