#pragma once

/**
 * @file eval.hpp
 * @brief Taylor-jet evaluation of expressions.
 *
 * eval_jet expands an expression around a point of (t, x, y, z) and returns
 * every mixed partial up to the requested order. One-variable primitives
 * and parameter functions are applied through their univariate Taylor series
 * composed with the argument jet, so all derivatives are exact up to
 * rounding.
 *
 * Integral nodes take their value from adaptive quadrature. Their higher
 * coefficients come from the integrand through the fundamental theorem of
 * calculus, so derivatives never carry quadrature error. Axis integrals also
 * need quadrature for the coefficients transverse to the axis; those are
 * integrated coefficient by coefficient, so every coefficient is independent
 * of the jet order it was requested at.
 */

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "expr.hpp"
#include "jet.hpp"
#include "quadrature.hpp"

namespace seaconv {

/// A point (t, x, y, z).
using Point4 = std::array<double, 4>;

/// Highest jet order available for space-time expressions.
inline constexpr int kMaxJetOrder = Jet4::kMaxOrder;

/// Thread-safe memo of quadrature results, shared by all evaluations of a
/// grid scan. Entries keep their integrand alive so keys stay unique.
class EvalCache {
 public:
  struct Key {
    const void* id = nullptr;
    int kind = 0;
    int order = 0;
    std::array<double, 4> at{};
    double extra = 0.0;

    bool operator==(const Key& o) const {
      if (id != o.id || kind != o.kind || order != o.order) return false;
      for (int i = 0; i < 4; ++i) {
        if (std::bit_cast<std::uint64_t>(at[i]) != std::bit_cast<std::uint64_t>(o.at[i])) return false;
      }
      return std::bit_cast<std::uint64_t>(extra) == std::bit_cast<std::uint64_t>(o.extra);
    }
  };

  explicit EvalCache(std::size_t max_entries = 1u << 20) : max_entries_(max_entries) {}

  [[nodiscard]] std::optional<std::vector<double>> find(const Key& k) const {
    std::shared_lock lock(mutex_);
    auto it = map_.find(k);
    if (it == map_.end()) return std::nullopt;
    return it->second.data;
  }

  void insert(const Key& k, Expr keep, std::vector<double> data) {
    std::unique_lock lock(mutex_);
    if (map_.size() >= max_entries_) return;
    map_.try_emplace(k, Entry{std::move(keep), std::move(data)});
  }

  [[nodiscard]] std::size_t size() const {
    std::shared_lock lock(mutex_);
    return map_.size();
  }

  void clear() {
    std::unique_lock lock(mutex_);
    map_.clear();
  }

 private:
  struct Entry {
    Expr keep;
    std::vector<double> data;
  };
  struct Hash {
    std::size_t operator()(const Key& k) const noexcept {
      std::uint64_t h = std::hash<const void*>{}(k.id);
      auto mix = [&h](std::uint64_t v) { h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2); };
      mix(static_cast<std::uint64_t>(k.kind));
      mix(static_cast<std::uint64_t>(k.order));
      for (double d : k.at) mix(std::bit_cast<std::uint64_t>(d));
      mix(std::bit_cast<std::uint64_t>(k.extra));
      return static_cast<std::size_t>(h);
    }
  };

  std::size_t max_entries_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<Key, Entry, Hash> map_;
};

struct EvalOptions {
  EvalCache* cache = nullptr;
};

namespace detail {

inline std::string describe(const Expr& e) {
  std::string s = to_string(e);
  if (s.size() > 160) s = s.substr(0, 157) + "...";
  return s;
}

// Memo of closed-body expansions shared by the nested evaluators of one
// top-level call.
struct EvalScratch {
  struct Key {
    const Node* node;
    int order;
    Point4 at;
    bool operator<(const Key& o) const {
      if (node != o.node) return node < o.node;
      if (order != o.order) return order < o.order;
      for (int i = 0; i < 4; ++i) {
        const auto a = std::bit_cast<std::uint64_t>(at[i]);
        const auto b = std::bit_cast<std::uint64_t>(o.at[i]);
        if (a != b) return a < b;
      }
      return false;
    }
  };
  std::map<Key, Jet4> space_time;
  std::map<Key, Jet1> one_variable;
};

inline double falling_ratio(int top, int k) {
  // top! / (top - k)!
  double r = 1.0;
  for (int q = top - k + 1; q <= top; ++q) r *= q;
  return r;
}

template <int NV>
class Evaluator {
 public:
  using J = Jet<NV>;

  Evaluator(std::array<double, NV> point, int order, EvalCache* cache, EvalScratch& scratch)
      : point_(point), order_(order), cache_(cache), scratch_(scratch) {}

  J eval(const Expr& e) {
    if (auto it = memo_.find(e.get()); it != memo_.end()) return it->second;
    J j = compute(e);
    if (!j.all_finite()) throw DomainError("non-finite value", describe(e));
    memo_.emplace(e.get(), j);
    return j;
  }

 private:
  J compute(const Expr& e) {
    const Node& n = e.node();
    const int N = order_;
    switch (n.op) {
      case Op::Const: return J::constant(N, n.number);
      case Op::Variable: return variable(n, e);
      case Op::Add: return eval(n.args[0]) + eval(n.args[1]);
      case Op::Sub: return eval(n.args[0]) - eval(n.args[1]);
      case Op::Mul: return eval(n.args[0]) * eval(n.args[1]);
      case Op::Neg: return -eval(n.args[0]);
      case Op::Div: {
        const J a = eval(n.args[0]);
        const J b = eval(n.args[1]);
        if (b.value() == 0.0) throw DomainError("division by zero", describe(e));
        return a * b.compose(series::reciprocal(b.value(), N));
      }
      case Op::IntPow: {
        const int p = n.integer;
        if (p == 0) return J::constant(N, 1.0);
        const J b = eval(n.args[0]);
        if (p == 1) return b;
        if (p < 0 && b.value() == 0.0) throw DomainError("negative power of zero", describe(e));
        return b.compose(series::int_power(b.value(), p, N));
      }
      case Op::RealPow: {
        const J b = eval(n.args[0]);
        const double b0 = b.value();
        if (b0 < 0.0) throw DomainError("real power of a negative number", describe(e));
        if (b0 == 0.0) {
          if (N == 0 && n.number > 0.0) return J::constant(N, 0.0);
          throw DomainError("real power is not differentiable at zero", describe(e));
        }
        return b.compose(series::real_power(b0, n.number, N));
      }
      case Op::Exp: {
        const J a = eval(n.args[0]);
        return a.compose(series::exp(a.value(), N));
      }
      case Op::Log: {
        const J a = eval(n.args[0]);
        if (!(a.value() > 0.0)) throw DomainError("log of a non-positive number", describe(e));
        return a.compose(series::log(a.value(), N));
      }
      case Op::Sin: {
        const J a = eval(n.args[0]);
        return a.compose(series::sin(a.value(), N));
      }
      case Op::Cos: {
        const J a = eval(n.args[0]);
        return a.compose(series::cos(a.value(), N));
      }
      case Op::Tanh: {
        const J a = eval(n.args[0]);
        return a.compose(series::tanh(a.value(), N));
      }
      case Op::Sqrt: {
        const J a = eval(n.args[0]);
        const double a0 = a.value();
        if (a0 < 0.0) throw DomainError("sqrt of a negative number", describe(e));
        if (a0 == 0.0) {
          if (N == 0) return J::constant(N, 0.0);
          throw DomainError("sqrt is not differentiable at zero", describe(e));
        }
        return a.compose(series::real_power(a0, 0.5, N));
      }
      case Op::Atan2: return angle(e);
      case Op::Apply: return apply_fn(n, e);
      case Op::Partial: return partial_node(n, e);
      case Op::AxisIntegral: return axis_integral_node(n);
      case Op::Integral: return integral_node(n);
    }
    throw Error("unknown expression node");
  }

  J variable(const Node& n, const Expr& e) {
    if constexpr (NV == 1) {
      if (n.var != Var::s) throw Error(std::string("variable '") + var_name(n.var) +
                                       "' in a one-variable expression: " + describe(e));
      return J::variable(order_, 0, point_[0]);
    } else {
      if (n.var == Var::s) throw Error("bound variable 's' in a space-time expression: " + describe(e));
      const int i = static_cast<int>(n.var);
      return J::variable(order_, i, point_[i]);
    }
  }

  // atan2(Y, X) = theta0 + atan((X0 Y - Y0 X) / (X0 X + Y0 Y))
  J angle(const Expr& e) {
    const Node& n = e.node();
    const J Y = eval(n.args[0]);
    const J X = eval(n.args[1]);
    const double y0 = Y.value(), x0 = X.value();
    if (x0 == 0.0 && y0 == 0.0) throw DomainError("atan2 at the origin", describe(e));
    const J cross = Y * x0 - X * y0;
    const J dot = X * x0 + Y * y0;
    J q = cross * dot.compose(series::reciprocal(dot.value(), order_));
    q.coefficients()[0] = 0.0;
    J r = q.compose(series::atan_at_zero(order_));
    r.coefficients()[0] = std::atan2(y0, x0);
    return r;
  }

  Jet1 one_variable_jet(const Expr& body, double s0, int order) {
    if (order > Jet1::kMaxOrder) {
      throw Error("derivative order " + std::to_string(order) + " exceeds the supported maximum");
    }
    const EvalScratch::Key key{body.get(), order, {s0, 0.0, 0.0, 0.0}};
    if (auto it = scratch_.one_variable.find(key); it != scratch_.one_variable.end()) return it->second;
    Evaluator<1> inner({s0}, order, cache_, scratch_);
    Jet1 j = inner.eval(body);
    scratch_.one_variable.emplace(key, j);
    return j;
  }

  Jet4 space_time_jet(const Expr& body, const Point4& at, int order) {
    if (order > Jet4::kMaxOrder) {
      throw Error("jet order " + std::to_string(order) + " exceeds the supported maximum " +
                  std::to_string(Jet4::kMaxOrder));
    }
    const EvalScratch::Key key{body.get(), order, at};
    if (auto it = scratch_.space_time.find(key); it != scratch_.space_time.end()) return it->second;
    Evaluator<4> inner(at, order, cache_, scratch_);
    Jet4 j = inner.eval(body);
    scratch_.space_time.emplace(key, j);
    return j;
  }

  J apply_fn(const Node& n, const Expr& e) {
    const J g = eval(n.args[0]);
    const int k = n.integer;
    Jet1 f;
    try {
      f = one_variable_jet(n.fn->body(), g.value(), order_ + k);
    } catch (const DomainError& err) {
      throw DomainError(std::string(err.what()) + " (while evaluating " + n.fn->name() + ")", describe(e));
    }
    const auto c = f.coefficients();
    std::vector<double> a(static_cast<std::size_t>(order_) + 1);
    for (int j = 0; j <= order_; ++j) a[j] = c[j + k] * falling_ratio(j + k, k);
    return g.compose(a);
  }

  std::array<J, 4> argument_jets(const Node& n) {
    return {eval(n.args[0]), eval(n.args[1]), eval(n.args[2]), eval(n.args[3])};
  }

  J partial_node(const Node& n, const Expr& e) {
    if constexpr (NV == 1) {
      throw Error("partial derivative inside a one-variable expression: " + describe(e));
    } else {
      const auto args = argument_jets(n);
      const Point4 at{args[0].value(), args[1].value(), args[2].value(), args[3].value()};
      int dm = 0;
      for (int v : n.multi) dm += v;
      const Jet4 body = space_time_jet(n.body, at, order_ + dm);
      Jet4 d = body.shifted(n.multi);
      if (has_identity_args(n)) return d;
      return compose<4>(d, std::span<const Jet4>(args));
    }
  }

  J axis_integral_node(const Node& n) {
    if constexpr (NV == 1) {
      throw Error("axis integral inside a one-variable expression");
    } else {
      const auto& A = *n.axis_integral;
      const auto args = argument_jets(n);
      const Point4 at{args[0].value(), args[1].value(), args[2].value(), args[3].value()};
      const int ax = static_cast<int>(A.axis);
      const int N = order_;
      const auto& table = Jet4::table();

      Jet4 G(N);
      auto gc = G.coefficients();
      if (N >= 1) {
        const Jet4 F = space_time_jet(A.integrand, at, N - 1);
        for (int idx = 0; idx < table.count_upto[N]; ++idx) {
          auto m = table.exponents[idx];
          if (m[ax] == 0) continue;
          const int b = m[ax];
          m[ax] -= 1;
          gc[idx] = F.coeff(m) / b;
        }
      }
      const std::vector<double> transverse = axis_quadrature(A, at, N);
      int q = 0;
      for (int idx = 0; idx < table.count_upto[N]; ++idx) {
        if (table.exponents[idx][ax] == 0) gc[idx] = transverse[q++];
      }
      if (has_identity_args(n)) return G;
      return compose<4>(G, std::span<const Jet4>(args));
    }
  }

  // Integrals from the base to at[axis] of every Taylor coefficient whose
  // exponent along the axis is zero, in table order.
  std::vector<double> axis_quadrature(const AxisAntiderivative& A, const Point4& at, int N) {
    const int ax = static_cast<int>(A.axis);
    const auto& table = Jet4::table();

    EvalCache::Key key{A.integrand.get(), 100 + ax, N, at, A.base};
    for (int i = 0; i < 4; ++i) {
      if (i != ax && !A.integrand_vars.contains(static_cast<Var>(i))) key.at[i] = 0.0;
    }
    if (cache_) {
      if (auto hit = cache_->find(key)) return *hit;
    }

    std::vector<int> wanted;
    for (int idx = 0; idx < table.count_upto[N]; ++idx) {
      if (table.exponents[idx][ax] == 0) wanted.push_back(idx);
    }
    std::vector<double> out(wanted.size(), 0.0);

    std::map<double, Jet4> samples;
    auto sample = [&](double s) -> const Jet4& {
      auto it = samples.find(s);
      if (it != samples.end()) return it->second;
      Point4 p = at;
      p[ax] = s;
      Evaluator<4> inner(p, N, cache_, scratch_);
      return samples.emplace(s, inner.eval(A.integrand)).first->second;
    };
    for (std::size_t w = 0; w < wanted.size(); ++w) {
      const auto& m = table.exponents[wanted[w]];
      bool used = true;
      for (int i = 0; i < 4; ++i) {
        if (m[i] > 0 && !A.integrand_vars.contains(static_cast<Var>(i))) used = false;
      }
      if (!used) continue;
      const int idx = wanted[w];
      out[w] = adaptive_simpson([&](double s) { return sample(s).coefficients()[idx]; }, A.base, at[ax], A.quad);
    }
    if (cache_) cache_->insert(key, A.integrand, out);
    return out;
  }

  J integral_node(const Node& n) {
    const auto& A = *n.integral;
    const J lo = eval(n.args[0]);
    const J hi = eval(n.args[1]);
    const double value = integral_value(A, lo.value(), hi.value());
    J r = J::constant(order_, 0.0);
    if (order_ >= 1) {
      r += hi.compose(antiderivative_series(A, hi.value()));
      bool lo_varies = false;
      const auto lc = lo.coefficients();
      for (std::size_t i = 1; i < lc.size(); ++i) lo_varies = lo_varies || lc[i] != 0.0;
      if (lo_varies) r -= lo.compose(antiderivative_series(A, lo.value()));
    }
    r.coefficients()[0] = value;
    return r;
  }

  // Series of F(s0 + h) - F(s0) where F' is the integrand.
  std::vector<double> antiderivative_series(const Antiderivative& A, double s0) {
    const Jet1 f = one_variable_jet(A.integrand, s0, order_ - 1);
    const auto c = f.coefficients();
    std::vector<double> a(static_cast<std::size_t>(order_) + 1, 0.0);
    for (int k = 1; k <= order_; ++k) a[k] = c[k - 1] / k;
    return a;
  }

  double integral_value(const Antiderivative& A, double lo, double hi) {
    if (lo == hi) return 0.0;
    const EvalCache::Key key{A.integrand.get(), 200, 0, {lo, hi, 0.0, 0.0}, 0.0};
    if (cache_) {
      if (auto hit = cache_->find(key)) return (*hit)[0];
    }
    auto f = [&](double s) {
      Evaluator<1> inner({s}, 0, cache_, scratch_);
      return inner.eval(A.integrand).value();
    };
    const double v = adaptive_simpson(f, lo, hi, A.quad);
    if (cache_) cache_->insert(key, A.integrand, {v});
    return v;
  }

  std::array<double, NV> point_;
  int order_;
  EvalCache* cache_;
  EvalScratch& scratch_;
  std::unordered_map<const Node*, J> memo_;
};

}  // namespace detail

/// Jet of `e` at `p` up to `order` (0 <= order <= kMaxJetOrder).
[[nodiscard]] inline Jet4 eval_jet(const Expr& e, const Point4& p, int order, const EvalOptions& opt = {}) {
  if (order < 0 || order > kMaxJetOrder) {
    throw Error("jet order " + std::to_string(order) + " outside the supported range [0, " +
                std::to_string(kMaxJetOrder) + "]");
  }
  detail::EvalScratch scratch;
  detail::Evaluator<4> ev(p, order, opt.cache, scratch);
  return ev.eval(e);
}

/// Jets of several expressions at one point, sharing common subexpressions.
[[nodiscard]] inline std::vector<Jet4> eval_jets(std::span<const Expr> es, const Point4& p, int order,
                                                 const EvalOptions& opt = {}) {
  if (order < 0 || order > kMaxJetOrder) {
    throw Error("jet order " + std::to_string(order) + " outside the supported range [0, " +
                std::to_string(kMaxJetOrder) + "]");
  }
  detail::EvalScratch scratch;
  detail::Evaluator<4> ev(p, order, opt.cache, scratch);
  std::vector<Jet4> out;
  out.reserve(es.size());
  for (const auto& e : es) out.push_back(ev.eval(e));
  return out;
}

[[nodiscard]] inline double eval_value(const Expr& e, const Point4& p, const EvalOptions& opt = {}) {
  return eval_jet(e, p, 0, opt).value();
}

/// Jet of a one-variable expression in s at s0.
[[nodiscard]] inline Jet1 eval_jet_1d(const Expr& e, double s0, int order, const EvalOptions& opt = {}) {
  if (order < 0 || order > Jet1::kMaxOrder) {
    throw Error("jet order " + std::to_string(order) + " outside the supported range [0, " +
                std::to_string(Jet1::kMaxOrder) + "]");
  }
  detail::EvalScratch scratch;
  detail::Evaluator<1> ev({s0}, order, opt.cache, scratch);
  return ev.eval(e);
}

/// k-th derivative of f at s0, for 0 <= k <= 6.
[[nodiscard]] inline double deriv_1d(const ParamFn& f, double s0, int k) {
  if (k < 0 || k > 6) throw Error("derivative order " + std::to_string(k) + " outside [0, 6]");
  return eval_jet_1d(f.body(), s0, k).coefficients()[k] * detail::falling_ratio(k, k);
}

/// Antiderivative payload for a one-variable integrand in s.
[[nodiscard]] inline std::shared_ptr<const Antiderivative> make_antiderivative(Expr integrand,
                                                                               QuadratureOptions quad = {},
                                                                               std::string label = {}) {
  if (!free_variables(integrand).subset_of(VarSet::one_variable())) {
    throw Error("antiderivative integrand must use only s");
  }
  return std::make_shared<const Antiderivative>(Antiderivative{std::move(integrand), quad, std::move(label)});
}

/// Integral of the integrand from `base` to `s` by adaptive quadrature.
[[nodiscard]] inline double antiderivative_value(const Antiderivative& a, double base, double s) {
  auto f = [&](double v) { return eval_jet_1d(a.integrand, v, 0).value(); };
  return adaptive_simpson(f, base, s, a.quad);
}

/// Jet of (integral from base to inner) where `inner` is the jet of the upper
/// limit. Only the value uses quadrature.
template <int NV>
[[nodiscard]] Jet<NV> antideriv_jet_rule(const Antiderivative& a, double base, const Jet<NV>& inner) {
  const int N = inner.order();
  const double s0 = inner.value();
  std::vector<double> series(static_cast<std::size_t>(N) + 1, 0.0);
  if (N >= 1) {
    const Jet1 f = eval_jet_1d(a.integrand, s0, N - 1);
    for (int k = 1; k <= N; ++k) series[k] = f.coefficients()[k - 1] / k;
  }
  Jet<NV> r = inner.compose(series);
  r.coefficients()[0] = antiderivative_value(a, base, s0);
  return r;
}

}  // namespace seaconv
