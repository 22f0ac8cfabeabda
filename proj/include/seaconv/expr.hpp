#pragma once

/**
 * @file expr.hpp
 * @brief Immutable symbolic expression trees over (t, x, y, z).
 *
 * An Expr is a shared handle to an immutable node. Nodes reference their
 * children and any ParamFn they apply by shared pointer, so trees can be
 * shared freely between threads once built.
 *
 * Three node kinds carry a *closed body*: a sub-expression in its own bound
 * coordinates that is composed with argument expressions.
 *
 *  - Partial:      (d^m body)(args)
 *  - AxisIntegral: (integral of body along one coordinate from a base)(args)
 *  - Integral:     integral of a one-variable integrand in s between two
 *                  limit expressions (the limits are the children).
 *
 * Substitution only rewrites children, never closed bodies, which keeps it
 * capture-free.
 */

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace seaconv {

/// Coordinates. `s` is the bound variable of one-variable functions.
enum class Var : std::uint8_t { t = 0, x = 1, y = 2, z = 3, s = 4 };

inline constexpr std::array<Var, 4> kSpaceTime = {Var::t, Var::x, Var::y, Var::z};

[[nodiscard]] inline const char* var_name(Var v) {
  switch (v) {
    case Var::t: return "t";
    case Var::x: return "x";
    case Var::y: return "y";
    case Var::z: return "z";
    case Var::s: return "s";
  }
  return "?";
}

/// Bit set of variables.
class VarSet {
 public:
  constexpr VarSet() = default;
  constexpr VarSet(std::initializer_list<Var> vars) {
    for (Var v : vars) bits_ |= bit(v);
  }

  static constexpr VarSet space_time() { return {Var::t, Var::x, Var::y, Var::z}; }
  static constexpr VarSet one_variable() { return {Var::s}; }

  [[nodiscard]] constexpr bool contains(Var v) const { return (bits_ & bit(v)) != 0; }
  [[nodiscard]] constexpr bool empty() const { return bits_ == 0; }
  [[nodiscard]] constexpr bool subset_of(VarSet o) const { return (bits_ & ~o.bits_) == 0; }
  constexpr VarSet& operator|=(VarSet o) {
    bits_ |= o.bits_;
    return *this;
  }
  constexpr void insert(Var v) { bits_ |= bit(v); }
  constexpr bool operator==(const VarSet&) const = default;

  [[nodiscard]] std::string to_string() const {
    std::string out;
    for (int i = 0; i <= 4; ++i) {
      if (bits_ & (1u << i)) {
        if (!out.empty()) out += ",";
        out += var_name(static_cast<Var>(i));
      }
    }
    return out;
  }

 private:
  static constexpr std::uint8_t bit(Var v) { return static_cast<std::uint8_t>(1u << static_cast<int>(v)); }
  std::uint8_t bits_ = 0;
};

enum class Op : std::uint8_t {
  Const,
  Variable,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  IntPow,
  RealPow,
  Exp,
  Log,
  Sin,
  Cos,
  Tanh,
  Sqrt,
  Atan2,         // atan2(y, x): angle of the point (x, y)
  Apply,         // k-th derivative of a ParamFn at child 0
  Partial,       // closed body, multi-index, 4 argument children
  AxisIntegral,  // closed body, axis, base, 4 argument children
  Integral,      // one-variable integrand; children are lower, upper limits
};

class Node;
class ParamFn;
struct Antiderivative;
struct AxisAntiderivative;

/// Shared handle to an immutable expression node.
class Expr {
 public:
  Expr() = default;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  [[nodiscard]] const Node& node() const { return *node_; }
  [[nodiscard]] const Node* get() const noexcept { return node_.get(); }
  [[nodiscard]] explicit operator bool() const noexcept { return static_cast<bool>(node_); }

 private:
  std::shared_ptr<const Node> node_;
};

using ParamFnPtr = std::shared_ptr<const ParamFn>;

/// Settings for the adaptive Simpson rule.
struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_depth = 40;
  /// Panels are not accepted above this depth.
  int min_depth = 2;
};

/// Payload of an Integral node: integral of a one-variable integrand in s.
struct Antiderivative {
  Expr integrand;  // uses only Var::s
  QuadratureOptions quad;
  std::string label;
};

/// Payload of an AxisIntegral node: integral of a space-time integrand along
/// one coordinate, starting from a fixed base value.
struct AxisAntiderivative {
  Expr integrand;  // uses only t, x, y, z
  Var axis = Var::x;
  double base = 0.0;
  QuadratureOptions quad;
  VarSet integrand_vars;
  std::string label;
};

class Node {
 public:
  Op op = Op::Const;
  double number = 0.0;  // Const value, RealPow exponent
  int integer = 0;      // IntPow exponent, Apply derivative order
  Var var = Var::t;     // Variable
  std::array<int, 4> multi{};  // Partial multi-index over (t, x, y, z)
  Expr body;                   // Partial body
  ParamFnPtr fn;               // Apply
  std::shared_ptr<const Antiderivative> integral;
  std::shared_ptr<const AxisAntiderivative> axis_integral;
  std::vector<Expr> args;
};

/// A named smooth one-variable function defined by an Expr in s.
class ParamFn {
 public:
  ParamFn(std::string name, Expr body, std::string source = {})
      : name_(std::move(name)), body_(std::move(body)), source_(std::move(source)) {}

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] const Expr& body() const noexcept { return body_; }
  /// DSL text the body was parsed from (empty for programmatic functions).
  [[nodiscard]] const std::string& source() const noexcept { return source_; }

 private:
  std::string name_;
  Expr body_;
  std::string source_;
};

/// Registry of parameter functions visible to the parser. Functions must be
/// registered before they are referenced, so reference cycles cannot form.
class Context {
 public:
  void add(ParamFnPtr fn) {
    if (!fn) throw std::invalid_argument("null ParamFn");
    const auto name = fn->name();
    if (functions_.count(name) != 0) throw Error("function '" + name + "' is already defined");
    order_.push_back(name);
    functions_.emplace(name, std::move(fn));
  }

  [[nodiscard]] ParamFnPtr find(std::string_view name) const {
    auto it = functions_.find(std::string(name));
    return it == functions_.end() ? nullptr : it->second;
  }

  [[nodiscard]] const std::vector<std::string>& names() const noexcept { return order_; }

 private:
  std::unordered_map<std::string, ParamFnPtr> functions_;
  std::vector<std::string> order_;
};

// ---------------------------------------------------------------------------
// Construction

namespace detail {

inline Expr make(Node n) { return Expr(std::make_shared<const Node>(std::move(n))); }

inline Expr make_op(Op op, std::vector<Expr> args) {
  Node n;
  n.op = op;
  n.args = std::move(args);
  return make(std::move(n));
}

}  // namespace detail

inline Expr constant(double v) {
  Node n;
  n.op = Op::Const;
  n.number = v;
  return detail::make(std::move(n));
}

inline Expr variable(Var v) {
  Node n;
  n.op = Op::Variable;
  n.var = v;
  return detail::make(std::move(n));
}

inline Expr var_t() { return variable(Var::t); }
inline Expr var_x() { return variable(Var::x); }
inline Expr var_y() { return variable(Var::y); }
inline Expr var_z() { return variable(Var::z); }
inline Expr var_s() { return variable(Var::s); }

inline Expr operator+(const Expr& a, const Expr& b) { return detail::make_op(Op::Add, {a, b}); }
inline Expr operator-(const Expr& a, const Expr& b) { return detail::make_op(Op::Sub, {a, b}); }
inline Expr operator*(const Expr& a, const Expr& b) { return detail::make_op(Op::Mul, {a, b}); }
inline Expr operator/(const Expr& a, const Expr& b) { return detail::make_op(Op::Div, {a, b}); }
inline Expr operator-(const Expr& a) { return detail::make_op(Op::Neg, {a}); }

inline Expr operator+(const Expr& a, double b) { return a + constant(b); }
inline Expr operator+(double a, const Expr& b) { return constant(a) + b; }
inline Expr operator-(const Expr& a, double b) { return a - constant(b); }
inline Expr operator-(double a, const Expr& b) { return constant(a) - b; }
inline Expr operator*(const Expr& a, double b) { return a * constant(b); }
inline Expr operator*(double a, const Expr& b) { return constant(a) * b; }
inline Expr operator/(const Expr& a, double b) { return a / constant(b); }
inline Expr operator/(double a, const Expr& b) { return constant(a) / b; }

inline Expr pow(const Expr& base, int n) {
  Node node;
  node.op = Op::IntPow;
  node.integer = n;
  node.args = {base};
  return detail::make(std::move(node));
}

inline Expr real_pow(const Expr& base, double r) {
  Node node;
  node.op = Op::RealPow;
  node.number = r;
  node.args = {base};
  return detail::make(std::move(node));
}

inline Expr exp(const Expr& a) { return detail::make_op(Op::Exp, {a}); }
inline Expr log(const Expr& a) { return detail::make_op(Op::Log, {a}); }
inline Expr sin(const Expr& a) { return detail::make_op(Op::Sin, {a}); }
inline Expr cos(const Expr& a) { return detail::make_op(Op::Cos, {a}); }
inline Expr tanh(const Expr& a) { return detail::make_op(Op::Tanh, {a}); }
inline Expr sqrt(const Expr& a) { return detail::make_op(Op::Sqrt, {a}); }
inline Expr atan2(const Expr& y, const Expr& x) { return detail::make_op(Op::Atan2, {y, x}); }

/// k-th derivative of `fn` applied to `arg`.
inline Expr apply(const ParamFnPtr& fn, const Expr& arg, int derivative = 0) {
  if (!fn) throw std::invalid_argument("apply: null ParamFn");
  if (derivative < 0) throw std::invalid_argument("apply: negative derivative order");
  Node n;
  n.op = Op::Apply;
  n.fn = fn;
  n.integer = derivative;
  n.args = {arg};
  return detail::make(std::move(n));
}

inline std::vector<Expr> identity_args() { return {var_t(), var_x(), var_y(), var_z()}; }

/// d^m body / dt^m0 dx^m1 dy^m2 dz^m3, evaluated at the identity arguments.
inline Expr partial(const Expr& body, std::array<int, 4> m) {
  for (int v : m) {
    if (v < 0) throw std::invalid_argument("partial: negative derivative order");
  }
  Node n;
  n.op = Op::Partial;
  n.multi = m;
  n.body = body;
  n.args = identity_args();
  return detail::make(std::move(n));
}

inline Expr diff(const Expr& body, Var v, int times = 1) {
  if (v == Var::s) throw std::invalid_argument("diff: s is not a space-time variable");
  std::array<int, 4> m{};
  m[static_cast<int>(v)] = times;
  return partial(body, m);
}

/// Integral of `integrand(s)` from `lower` to `upper`.
inline Expr integral(std::shared_ptr<const Antiderivative> a, const Expr& lower, const Expr& upper) {
  if (!a) throw std::invalid_argument("integral: null antiderivative");
  Node n;
  n.op = Op::Integral;
  n.integral = std::move(a);
  n.args = {lower, upper};
  return detail::make(std::move(n));
}

// ---------------------------------------------------------------------------
// Inspection

[[nodiscard]] inline bool is_constant(const Expr& e, double* value = nullptr) {
  if (e.node().op != Op::Const) return false;
  if (value) *value = e.node().number;
  return true;
}

namespace detail {

inline VarSet free_variables_memo(const Expr& e, std::unordered_map<const Node*, VarSet>& memo) {
  const Node& n = e.node();
  if (auto it = memo.find(&n); it != memo.end()) return it->second;
  VarSet out;
  switch (n.op) {
    case Op::Variable: out.insert(n.var); break;
    case Op::Partial:
    case Op::AxisIntegral: {
      // Only the arguments feeding coordinates the body depends on count.
      const Expr& body = n.op == Op::Partial ? n.body : n.axis_integral->integrand;
      VarSet inner = free_variables_memo(body, memo);
      if (n.op == Op::AxisIntegral) inner.insert(n.axis_integral->axis);
      for (int i = 0; i < 4; ++i) {
        if (inner.contains(static_cast<Var>(i))) out |= free_variables_memo(n.args[i], memo);
      }
      break;
    }
    default:
      for (const auto& a : n.args) out |= free_variables_memo(a, memo);
      break;
  }
  memo.emplace(&n, out);
  return out;
}

}  // namespace detail

/// Variables an expression depends on. Closed bodies contribute through the
/// arguments feeding the coordinates they use.
[[nodiscard]] inline VarSet free_variables(const Expr& e) {
  std::unordered_map<const Node*, VarSet> memo;
  return detail::free_variables_memo(e, memo);
}

inline AxisAntiderivative make_axis_antiderivative(Expr integrand, Var axis, double base,
                                                   QuadratureOptions quad = {},
                                                   std::string label = {}) {
  AxisAntiderivative a;
  a.integrand_vars = free_variables(integrand);
  if (!a.integrand_vars.subset_of(VarSet::space_time())) {
    throw std::invalid_argument("axis integrand must use only t, x, y, z");
  }
  if (axis == Var::s) throw std::invalid_argument("axis must be one of t, x, y, z");
  a.integrand = std::move(integrand);
  a.axis = axis;
  a.base = base;
  a.quad = quad;
  a.label = std::move(label);
  return a;
}

/// Integral of `integrand(t, x, y, z)` along `axis` from `base` to the
/// current coordinate.
inline Expr axis_integral(std::shared_ptr<const AxisAntiderivative> a) {
  if (!a) throw std::invalid_argument("axis_integral: null antiderivative");
  Node n;
  n.op = Op::AxisIntegral;
  n.axis_integral = std::move(a);
  n.args = identity_args();
  return detail::make(std::move(n));
}

/// True when the four children are the identity coordinates t, x, y, z.
[[nodiscard]] inline bool has_identity_args(const Node& n) {
  if (n.args.size() != 4) return false;
  for (int i = 0; i < 4; ++i) {
    const Node& a = n.args[i].node();
    if (a.op != Op::Variable || a.var != static_cast<Var>(i)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Printing

namespace detail {

inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Binding strength used to decide on parentheses.
inline int precedence(const Node& n) {
  switch (n.op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::IntPow:
    case Op::RealPow: return 4;
    case Op::Const: return n.number < 0 ? 3 : 6;
    default: return 6;
  }
}

inline void print_to(const Expr& e, std::string& out);

inline void print_wrapped(const Expr& e, bool wrap, std::string& out) {
  if (wrap) out += '(';
  print_to(e, out);
  if (wrap) out += ')';
}

inline void print_call(const char* name, const Node& n, std::string& out) {
  out += name;
  out += '(';
  for (std::size_t i = 0; i < n.args.size(); ++i) {
    if (i) out += ", ";
    print_to(n.args[i], out);
  }
  out += ')';
}

inline void print_to(const Expr& e, std::string& out) {
  const Node& n = e.node();
  const int prec = precedence(n);
  switch (n.op) {
    case Op::Const:
      out += format_number(n.number);
      return;
    case Op::Variable:
      out += var_name(n.var);
      return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const char sym = n.op == Op::Add ? '+' : n.op == Op::Sub ? '-' : n.op == Op::Mul ? '*' : '/';
      // Left-associative: the right operand needs parentheses at equal precedence.
      print_wrapped(n.args[0], precedence(n.args[0].node()) < prec, out);
      out += prec == 1 ? std::string(" ") + sym + " " : std::string(1, sym);
      print_wrapped(n.args[1], precedence(n.args[1].node()) <= prec, out);
      return;
    }
    case Op::Neg:
      out += '-';
      print_wrapped(n.args[0], precedence(n.args[0].node()) < 4, out);
      return;
    case Op::IntPow:
    case Op::RealPow: {
      print_wrapped(n.args[0], precedence(n.args[0].node()) <= prec, out);
      out += '^';
      const double ex = n.op == Op::IntPow ? static_cast<double>(n.integer) : n.number;
      if (ex < 0) {
        out += "(-" + format_number(-ex) + ")";
      } else {
        out += format_number(ex);
      }
      return;
    }
    case Op::Exp: print_call("exp", n, out); return;
    case Op::Log: print_call("log", n, out); return;
    case Op::Sin: print_call("sin", n, out); return;
    case Op::Cos: print_call("cos", n, out); return;
    case Op::Tanh: print_call("tanh", n, out); return;
    case Op::Sqrt: print_call("sqrt", n, out); return;
    case Op::Atan2: print_call("atan2", n, out); return;
    case Op::Apply: {
      std::string name = n.fn->name() + std::string(static_cast<std::size_t>(n.integer), '\'');
      print_call(name.c_str(), n, out);
      return;
    }
    case Op::Partial: {
      // Display form only; not part of the DSL grammar.
      out += "D[";
      bool first = true;
      for (int v = 0; v < 4; ++v) {
        for (int k = 0; k < n.multi[v]; ++k) {
          if (!first) out += ',';
          out += var_name(static_cast<Var>(v));
          first = false;
        }
      }
      out += "](";
      print_to(n.body, out);
      out += ')';
      if (!has_identity_args(n)) print_call("", n, out);
      return;
    }
    case Op::AxisIntegral: {
      const auto& a = *n.axis_integral;
      out += "int[";
      out += var_name(a.axis);
      out += " from " + format_number(a.base) + "](";
      print_to(a.integrand, out);
      out += ')';
      if (!has_identity_args(n)) print_call("", n, out);
      return;
    }
    case Op::Integral: {
      out += "int[s from ";
      print_to(n.args[0], out);
      out += " to ";
      print_to(n.args[1], out);
      out += "](";
      print_to(n.integral->integrand, out);
      out += ')';
      return;
    }
  }
}

}  // namespace detail

/// Printed normal form. For trees produced by the parser the result parses
/// back to a structurally identical tree.
[[nodiscard]] inline std::string to_string(const Expr& e) {
  std::string out;
  detail::print_to(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Structural equality

[[nodiscard]] inline bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.get() == b.get()) return true;
  const Node& x = a.node();
  const Node& y = b.node();
  if (x.op != y.op || x.args.size() != y.args.size()) return false;
  switch (x.op) {
    case Op::Const:
      if (std::bit_cast<std::uint64_t>(x.number) != std::bit_cast<std::uint64_t>(y.number)) return false;
      break;
    case Op::Variable:
      if (x.var != y.var) return false;
      break;
    case Op::IntPow:
      if (x.integer != y.integer) return false;
      break;
    case Op::RealPow:
      if (std::bit_cast<std::uint64_t>(x.number) != std::bit_cast<std::uint64_t>(y.number)) return false;
      break;
    case Op::Apply:
      if (x.integer != y.integer || x.fn->name() != y.fn->name()) return false;
      if (x.fn != y.fn && !structurally_equal(x.fn->body(), y.fn->body())) return false;
      break;
    case Op::Partial:
      if (x.multi != y.multi || !structurally_equal(x.body, y.body)) return false;
      break;
    case Op::AxisIntegral: {
      const auto& p = *x.axis_integral;
      const auto& q = *y.axis_integral;
      if (p.axis != q.axis || p.base != q.base || !structurally_equal(p.integrand, q.integrand)) return false;
      break;
    }
    case Op::Integral:
      if (!structurally_equal(x.integral->integrand, y.integral->integrand)) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < x.args.size(); ++i) {
    if (!structurally_equal(x.args[i], y.args[i])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Substitution

/// Simultaneous replacement of variables by expressions.
using Substitution = std::map<Var, Expr>;

namespace detail {

inline Expr substitute_impl(const Expr& e, const Substitution& map) {
  const Node& n = e.node();
  if (n.op == Op::Variable) {
    auto it = map.find(n.var);
    return it == map.end() ? e : it->second;
  }
  if (n.args.empty()) return e;
  Node copy = n;
  bool changed = false;
  for (auto& a : copy.args) {
    Expr r = substitute_impl(a, map);
    changed = changed || r.get() != a.get();
    a = std::move(r);
  }
  return changed ? make(std::move(copy)) : e;
}

}  // namespace detail

/// Capture-free simultaneous substitution. Replacement expressions must use
/// only variables in `allowed`.
[[nodiscard]] inline Expr substitute(const Expr& e, const Substitution& map,
                                     VarSet allowed = VarSet::space_time()) {
  for (const auto& [v, r] : map) {
    const VarSet used = free_variables(r);
    if (!used.subset_of(allowed)) {
      throw Error(std::string("substitution for ") + var_name(v) + " uses variables {" +
                  used.to_string() + "} outside the allowed set {" + allowed.to_string() + "}");
    }
  }
  return detail::substitute_impl(e, map);
}

}  // namespace seaconv
