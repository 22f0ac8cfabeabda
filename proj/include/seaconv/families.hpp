#pragma once

/**
 * @file families.hpp
 * @brief Builders for the explicit solution families of the sea-convection
 * system
 *
 *     u_x + v_y + w_z = 0,  rho = p_z,
 *     rho_t + u rho_x + v rho_y + w rho_z = 0,
 *     u_t + u u_x + v u_y + w u_z + v + p_x / rho = 0,
 *     v_t + u v_x + v v_y + w v_z - u + p_y / rho = 0.
 *
 * Each builder returns a Solution whose density is the symbolic z-derivative
 * of the pressure.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "eval.hpp"
#include "expr.hpp"

namespace seaconv {

enum class GuardKind { AtLeast, AbsAtLeast };

/// Pointwise domain predicate: expr >= threshold, or |expr| >= threshold.
struct Guard {
  std::string name;
  Expr expr;
  GuardKind kind = GuardKind::AtLeast;
  double threshold = 0.0;
};

inline constexpr double kEpsAxis = 1e-6;
inline constexpr double kEpsRadicand = 1e-8;
inline constexpr double kEpsDenominator = 1e-8;

struct Solution {
  std::string family;
  Expr u, v, w, p, rho;
  std::vector<Guard> guards;
  /// Parameter snapshot, e.g. {"alpha(t)", "sin(t)"}.
  std::map<std::string, std::string> params;
  /// Every parameter function referenced by the fields.
  std::vector<ParamFnPtr> functions;
  /// Additional named expressions kept for comparison (not part of the
  /// solution itself).
  std::map<std::string, Expr> extras;
  /// Symmetries applied so far, e.g. "T1(t)".
  std::vector<std::string> history;

  [[nodiscard]] std::array<Expr, 5> fields() const { return {u, v, w, p, rho}; }
};

inline constexpr std::array<const char*, 5> kFieldNames = {"u", "v", "w", "p", "rho"};

/// Solution with rho set to the z-derivative of p.
[[nodiscard]] inline Solution make_solution(std::string family, Expr u, Expr v, Expr w, Expr p) {
  Solution s;
  s.family = std::move(family);
  s.u = std::move(u);
  s.v = std::move(v);
  s.w = std::move(w);
  s.rho = diff(p, Var::z);
  s.p = std::move(p);
  return s;
}

/// Name of the first violated guard at `pt`, or nullopt when in domain. A
/// guard that cannot be evaluated counts as violated.
[[nodiscard]] inline std::optional<std::string> guard_violation(const Solution& s, const Point4& pt,
                                                               const EvalOptions& opt = {}) {
  for (const auto& g : s.guards) {
    double v = 0.0;
    try {
      v = eval_value(g.expr, pt, opt);
    } catch (const DomainError&) {
      return g.name;
    }
    const bool ok = g.kind == GuardKind::AtLeast ? v >= g.threshold : std::abs(v) >= g.threshold;
    if (!ok) return g.name;
  }
  return std::nullopt;
}

[[nodiscard]] inline bool in_domain(const Solution& s, const Point4& pt, const EvalOptions& opt = {}) {
  return !guard_violation(s, pt, opt).has_value();
}

/// Field values at a point; throws GuardError outside the guards.
[[nodiscard]] inline std::array<double, 5> evaluate_fields(const Solution& s, const Point4& pt,
                                                           const EvalOptions& opt = {}) {
  if (auto g = guard_violation(s, pt, opt)) {
    std::ostringstream os;
    os << "point (" << pt[0] << ", " << pt[1] << ", " << pt[2] << ", " << pt[3] << ") violates guard " << *g;
    throw GuardError(os.str());
  }
  std::array<double, 5> out{};
  const auto f = s.fields();
  for (int i = 0; i < 5; ++i) out[i] = eval_value(f[i], pt, opt);
  return out;
}

/// Selects between the corrected formulas (default) and the literal printed
/// ones where the two differ.
enum class FormulaVariant { corrected, as_printed };

/// t-range and count used to probe hypotheses on parameter functions.
struct ProbeOptions {
  double t_min = 0.0;
  double t_max = 1.0;
  int samples = 64;
  /// x and y range for spatial probes.
  double space_min = -2.0;
  double space_max = 2.0;
};

// ---------------------------------------------------------------------------
// Helpers

[[nodiscard]] inline Expr call(const ParamFnPtr& f, const Expr& arg, int k = 0) { return apply(f, arg, k); }

/// f^(k)(t).
[[nodiscard]] inline Expr of_t(const ParamFnPtr& f, int k = 0) { return apply(f, var_t(), k); }

/// ParamFn with a programmatic body in s.
[[nodiscard]] inline ParamFnPtr param_fn(std::string name, Expr body, std::string source = {}) {
  if (!free_variables(body).subset_of(VarSet::one_variable())) {
    throw Error("parameter function '" + name + "' must use only its own variable");
  }
  return std::make_shared<const ParamFn>(std::move(name), std::move(body), std::move(source));
}

[[nodiscard]] inline ParamFnPtr constant_fn(std::string name, double c) {
  return param_fn(std::move(name), constant(c), detail::format_number(c));
}

namespace detail {

inline std::vector<double> probe_times(const ProbeOptions& o) {
  std::vector<double> ts;
  const int n = std::max(1, o.samples);
  for (int i = 0; i < n; ++i) {
    ts.push_back(n == 1 ? o.t_min : o.t_min + (o.t_max - o.t_min) * i / (n - 1));
  }
  return ts;
}

inline void require(const ParamFnPtr& f, const char* role) {
  if (!f) throw HypothesisError(std::string("missing parameter function ") + role);
}

inline void require(const Expr& e, const char* role) {
  if (!e) throw HypothesisError(std::string("missing parameter ") + role);
}

// Derivatives 0..order of f must exist on the probe times.
inline void probe_smooth(const ParamFnPtr& f, const char* role, int order, const ProbeOptions& o) {
  for (double t : probe_times(o)) {
    try {
      (void)eval_jet_1d(f->body(), t, order);
    } catch (const Error& e) {
      std::ostringstream os;
      os << role << " is not " << order << " times differentiable at t = " << t << ": " << e.what();
      throw HypothesisError(os.str());
    }
  }
}

inline void probe_nonvanishing(const ParamFnPtr& f, const char* role, const ProbeOptions& o) {
  for (double t : probe_times(o)) {
    double v = 0.0;
    try {
      v = eval_jet_1d(f->body(), t, 0).value();
    } catch (const Error& e) {
      throw HypothesisError(std::string(role) + " cannot be evaluated: " + e.what());
    }
    if (std::abs(v) < kEpsDenominator) {
      std::ostringstream os;
      os << role << " vanishes at t = " << t;
      throw HypothesisError(os.str());
    }
  }
}

inline std::string fn_source(const ParamFnPtr& f) {
  return f->source().empty() ? to_string(f->body()) : f->source();
}

inline void record(Solution& s, const char* key, const ParamFnPtr& f) {
  s.params[key] = fn_source(f);
  for (const auto& g : s.functions) {
    if (g == f) return;
  }
  s.functions.push_back(f);
}

inline void require_vars(const Expr& e, VarSet allowed, const char* role) {
  const VarSet used = free_variables(e);
  if (!used.subset_of(allowed)) {
    throw HypothesisError(std::string(role) + " may use only {" + allowed.to_string() + "}, but uses {" +
                          used.to_string() + "}");
  }
}

}  // namespace detail

/// The solid-body rotation u = -y, v = x, w = 0, p = z.
[[nodiscard]] inline Solution rigid_rotation() {
  return make_solution("rigid_rotation", -var_y(), var_x(), constant(0.0), var_z());
}

// ---------------------------------------------------------------------------
// Moving-line family

struct Theorem21Params {
  ParamFnPtr alpha, beta;
  double b1 = 0.0, b2 = 0.0;
  ParamFnPtr Im, iota, sigma;
  FormulaVariant variant = FormulaVariant::corrected;
  ProbeOptions probe;
};

/// Fields depend on x, y, z through the moving line alpha' x + beta' y + z.
[[nodiscard]] inline Solution build_theorem_2_1(const Theorem21Params& P) {
  detail::require(P.alpha, "alpha");
  detail::require(P.beta, "beta");
  detail::require(P.Im, "Im");
  detail::require(P.iota, "iota");
  detail::require(P.sigma, "sigma");
  detail::probe_smooth(P.alpha, "alpha", 4, P.probe);
  detail::probe_smooth(P.beta, "beta", 4, P.probe);

  const Expr x = var_x(), y = var_y(), z = var_z();
  const Expr a = of_t(P.alpha), a1 = of_t(P.alpha, 1), a2 = of_t(P.alpha, 2);
  const Expr b = of_t(P.beta), c1 = of_t(P.beta, 1), c2 = of_t(P.beta, 2);
  const double b1 = P.b1, b2 = P.b2;
  const double sign = P.variant == FormulaVariant::corrected ? 1.0 : -1.0;

  const Expr varpi = a1 * x + c1 * y + z;
  const Expr im = call(P.Im, varpi);
  const Expr io = call(P.iota, varpi);

  Expr u = b1 * a1 * x + (b1 * c1 - 1.0) * y + b1 * z - a + im;
  Expr v = (b2 * a1 + 1.0) * x + b2 * c1 * y + b2 * z - sign * b + io;
  Expr w = -(a2 + b1 * pow(a1, 2) + (b2 * a1 + 1.0) * c1) * x -
           (c2 + a1 * (b1 * c1 - 1.0) + b2 * pow(c1, 2)) * y - (b1 * a1 + b2 * c1) * z + a * a1 +
           sign * b * c1 - a1 * im - c1 * io;
  Expr p = call(P.sigma, varpi);

  Solution s = make_solution("theorem_2_1", std::move(u), std::move(v), std::move(w), std::move(p));
  detail::record(s, "alpha(t)", P.alpha);
  detail::record(s, "beta(t)", P.beta);
  detail::record(s, "Im(s)", P.Im);
  detail::record(s, "iota(s)", P.iota);
  detail::record(s, "sigma(s)", P.sigma);
  s.params["b1"] = detail::format_number(b1);
  s.params["b2"] = detail::format_number(b2);
  s.extras["rho_as_printed"] = call(P.sigma, varpi, 1);
  return s;
}

// ---------------------------------------------------------------------------
// Cylindrical family

struct Theorem31Params {
  ParamFnPtr alpha, Im;
  ProbeOptions probe;
};

[[nodiscard]] inline Solution build_theorem_3_1(const Theorem31Params& P) {
  detail::require(P.alpha, "alpha");
  detail::require(P.Im, "Im");
  detail::probe_smooth(P.alpha, "alpha", 4, P.probe);

  const Expr x = var_x(), y = var_y(), z = var_z();
  const Expr a = of_t(P.alpha), a1 = of_t(P.alpha, 1), a2 = of_t(P.alpha, 2), a3 = of_t(P.alpha, 3);
  const Expr r2 = pow(x, 2) + pow(y, 2);
  const Expr radicand = a2 + pow(a1, 2) + 0.25 - 2.0 * z / r2;
  const Expr S = sqrt(radicand);

  Expr u = a1 * x - y / 2.0 + y * S;
  Expr v = a1 * y + x / 2.0 - x * S;
  Expr w = (2.0 * pow(a1, 3) + 3.0 * a1 * a2 + (a3 + a1) / 2.0) * r2 - 2.0 * a1 * z;
  Expr p = exp(-2.0 * a) * call(P.Im, exp(2.0 * a) * S);

  Solution s = make_solution("theorem_3_1", std::move(u), std::move(v), std::move(w), std::move(p));
  s.guards.push_back({"x^2+y^2 >= eps_axis", r2, GuardKind::AtLeast, kEpsAxis});
  s.guards.push_back({"radicand >= eps_rad", radicand, GuardKind::AtLeast, kEpsRadicand});
  detail::record(s, "alpha(t)", P.alpha);
  detail::record(s, "Im(s)", P.Im);
  s.extras["radicand"] = radicand;
  s.extras["rho_as_printed"] = -call(P.Im, exp(2.0 * a) * S, 1) /
                               (r2 * sqrt(a1 + pow(a, 2) + 0.25 - 2.0 * z / r2));
  return s;
}

// ---------------------------------------------------------------------------
// Harmonic potentials

enum class HarmonicPart { Re, Im };

struct HarmonicTerm {
  int degree = 0;
  HarmonicPart part = HarmonicPart::Re;
  ParamFnPtr coefficient;  // of t; null means 1
};

/// Sum of c_k(t) Re/Im((x + iy)^n) expanded as real polynomials.
[[nodiscard]] inline Expr harmonic_poly(const std::vector<HarmonicTerm>& terms) {
  Expr total;
  auto add = [&total](const Expr& e, bool negative) {
    if (!total) {
      total = negative ? -e : e;
    } else {
      total = negative ? total - e : total + e;
    }
  };
  for (const auto& term : terms) {
    if (term.degree < 0) throw Error("harmonic_poly: negative degree");
    const int n = term.degree;
    Expr poly;
    bool poly_empty = true;
    double binom = 1.0;
    for (int k = 0; k <= n; ++k) {
      if (k > 0) binom = binom * (n - k + 1) / k;
      const bool even = k % 2 == 0;
      if (even != (term.part == HarmonicPart::Re)) continue;
      // i^k contributes (-1)^(k/2) to the real part, (-1)^((k-1)/2) to the imaginary part
      const bool negative = ((even ? k / 2 : (k - 1) / 2) % 2) == 1;
      Expr mono;
      if (n - k > 0) mono = n - k == 1 ? var_x() : pow(var_x(), n - k);
      if (k > 0) {
        Expr yk = k == 1 ? var_y() : pow(var_y(), k);
        mono = mono ? mono * yk : yk;
      }
      if (binom != 1.0) mono = mono ? binom * mono : constant(binom);
      if (!mono) mono = constant(1.0);
      if (poly_empty) {
        poly = negative ? -mono : mono;
        poly_empty = false;
      } else {
        poly = negative ? poly - mono : poly + mono;
      }
    }
    if (poly_empty) continue;
    if (term.coefficient) poly = of_t(term.coefficient) * poly;
    add(poly, false);
  }
  return total ? total : constant(0.0);
}

/// Largest |theta_xx + theta_yy| over probe points and where it occurs.
struct HarmonicProbe {
  double max_abs = 0.0;
  Point4 worst{};
};

[[nodiscard]] inline HarmonicProbe probe_harmonic(const Expr& theta, const ProbeOptions& o) {
  HarmonicProbe r;
  const int nt = 4, ns = 4;
  for (int i = 0; i < nt; ++i) {
    const double t = o.t_min + (o.t_max - o.t_min) * i / (nt - 1);
    for (int j = 0; j < ns; ++j) {
      const double x = o.space_min + (o.space_max - o.space_min) * (j + 0.5) / ns;
      for (int k = 0; k < ns; ++k) {
        const double y = o.space_min + (o.space_max - o.space_min) * (k + 0.37) / ns;
        const Point4 pt{t, x, y, 0.0};
        const Jet4 j2 = eval_jet(theta, pt, 2);
        const double lap = j2.d(1, 1) + j2.d(2, 2);
        const double scale = std::max(1.0, std::abs(j2.d(1, 1)) + std::abs(j2.d(2, 2)));
        if (std::abs(lap) / scale > r.max_abs) {
          r.max_abs = std::abs(lap) / scale;
          r.worst = pt;
        }
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Dimensional reduction families

struct Prop41Params {
  Expr theta;
  Expr zeta;  // optional, defaults to 0
  double harmonic_tol = 1e-10;
  ProbeOptions probe;
};

/// Irrotational family built from a time-dependent harmonic potential.
[[nodiscard]] inline Solution build_prop_4_1(const Prop41Params& P) {
  detail::require(P.theta, "theta");
  const VarSet txy{Var::t, Var::x, Var::y};
  detail::require_vars(P.theta, txy, "theta");
  const Expr zeta = P.zeta ? P.zeta : constant(0.0);
  detail::require_vars(zeta, txy, "zeta");

  const HarmonicProbe h = probe_harmonic(P.theta, P.probe);
  if (h.max_abs > P.harmonic_tol) {
    std::ostringstream os;
    os << "theta is not harmonic: |theta_xx + theta_yy| = " << h.max_abs << " at (t, x, y) = (" << h.worst[0]
       << ", " << h.worst[1] << ", " << h.worst[2] << ")";
    throw HypothesisError(os.str());
  }

  const Expr& th = P.theta;
  Expr u = diff(th, Var::x, 2);
  Expr v = partial(th, {0, 1, 1, 0});
  Expr p = var_z() - partial(th, {1, 1, 0, 0}) - diff(th, Var::y) - 0.5 * (pow(u, 2) + pow(v, 2));
  Solution s = make_solution("prop_4_1", std::move(u), std::move(v), zeta, std::move(p));
  s.params["theta(t,x,y)"] = to_string(th);
  s.params["zeta(t,x,y)"] = to_string(zeta);
  return s;
}

struct Theorem42Params {
  ParamFnPtr alpha, gamma, Im;
  Expr zeta;
  double varpi0 = 1.0;
  QuadratureOptions quad;
  FormulaVariant variant = FormulaVariant::corrected;
  ProbeOptions probe;
};

/// Swirling family in the variable x^2 + y^2. The radial integral in the
/// pressure is rescaled to s = alpha (x^2 + y^2), so that its integrand does
/// not depend on t.
[[nodiscard]] inline Solution build_theorem_4_2(const Theorem42Params& P) {
  detail::require(P.alpha, "alpha");
  detail::require(P.gamma, "gamma");
  detail::require(P.Im, "Im");
  const Expr zeta = P.zeta ? P.zeta : constant(0.0);
  detail::require_vars(zeta, {Var::t, Var::x, Var::y}, "zeta");
  detail::probe_smooth(P.alpha, "alpha", 3, P.probe);
  detail::probe_smooth(P.gamma, "gamma", 2, P.probe);
  detail::probe_nonvanishing(P.alpha, "alpha", P.probe);
  if (!(P.varpi0 > 0.0)) throw HypothesisError("varpi0 must be positive");

  const Expr x = var_x(), y = var_y(), z = var_z(), s = var_s();
  const Expr a = of_t(P.alpha), a1 = of_t(P.alpha, 1), a2 = of_t(P.alpha, 2);
  const Expr g = of_t(P.gamma), g1 = of_t(P.gamma, 1);
  const Expr r2 = pow(x, 2) + pow(y, 2);
  const Expr phi = g + call(P.Im, a * r2);

  Expr u = -(a1 * x) / (2.0 * a) - y / 2.0 + phi * y / r2;
  Expr v = x / 2.0 - (a1 * y) / (2.0 * a) - phi * x / r2;
  Expr w = a1 / a * z + zeta;

  auto lin = make_antiderivative(call(P.Im, s) / pow(s, 2), P.quad, "Im(s)/s^2");
  auto quad = make_antiderivative(pow(call(P.Im, s), 2) / pow(s, 2), P.quad, "Im(s)^2/s^2");
  const Expr lo = a * P.varpi0;
  const Expr hi = a * r2;
  const Expr J = pow(g, 2) * (1.0 / P.varpi0 - 1.0 / r2) + 2.0 * a * g * integral(lin, lo, hi) +
                 a * integral(quad, lo, hi);
  const double k = P.variant == FormulaVariant::corrected ? 3.0 : 1.0;
  const Expr K = (k * pow(a1, 2) - 2.0 * a * a2) / (4.0 * pow(a, 2)) + 0.25;
  Expr p = z + J / 2.0 - 0.5 * K * r2 + g1 * atan2(y, x);

  Solution sol = make_solution("theorem_4_2", std::move(u), std::move(v), std::move(w), std::move(p));
  sol.guards.push_back({"x^2+y^2 >= eps_axis", r2, GuardKind::AtLeast, kEpsAxis});
  sol.guards.push_back({"|alpha| >= eps_den", a, GuardKind::AbsAtLeast, kEpsDenominator});
  detail::record(sol, "alpha(t)", P.alpha);
  detail::record(sol, "gamma(t)", P.gamma);
  detail::record(sol, "Im(s)", P.Im);
  sol.params["zeta(t,x,y)"] = to_string(zeta);
  sol.params["varpi0"] = detail::format_number(P.varpi0);
  sol.extras["radial_integral"] = J;
  return sol;
}

struct Theorem43Params {
  ParamFnPtr alpha, beta, Im;
  Expr theta;  // in t, x
  Expr zeta;
  double x0 = 0.0;
  QuadratureOptions quad;
  ProbeOptions probe;
};

/// Family with u depending on (t, x) and v affine in y.
[[nodiscard]] inline Solution build_theorem_4_3(const Theorem43Params& P) {
  detail::require(P.alpha, "alpha");
  detail::require(P.beta, "beta");
  detail::require(P.Im, "Im");
  detail::require(P.theta, "theta");
  detail::require_vars(P.theta, {Var::t, Var::x}, "theta");
  const Expr zeta = P.zeta ? P.zeta : constant(0.0);
  detail::require_vars(zeta, {Var::t, Var::x, Var::y}, "zeta");
  detail::probe_smooth(P.alpha, "alpha", 3, P.probe);
  detail::probe_smooth(P.beta, "beta", 2, P.probe);

  const Expr x = var_x(), y = var_y(), z = var_z();
  const Expr a = of_t(P.alpha), a1 = of_t(P.alpha, 1), a2 = of_t(P.alpha, 2);
  const Expr b = of_t(P.beta), b1 = of_t(P.beta, 1);
  const Expr& th = P.theta;
  const Expr th_x = diff(th, Var::x), th_t = diff(th, Var::t);
  const Expr th_xx = diff(th, Var::x, 2), th_tt = diff(th, Var::t, 2);
  const Expr th_xt = partial(th, {1, 1, 0, 0});
  const Expr im0 = call(P.Im, th), im1 = call(P.Im, th, 1), im2 = call(P.Im, th, 2);

  const Expr B = b * exp(-a);
  const Expr dB = (b1 - b * a1) * exp(-a);
  const Expr Q = th_x * im1;

  Expr u = B / Q - th_t / th_x;
  Expr v = exp(a) * im0 + x - a1 * y;
  Expr w = (a1 + B * (th_xx * im1 + pow(th_x, 2) * im2) / pow(Q, 2) +
            (th_xt * th_x - th_t * th_xx) / pow(th_x, 2)) *
               z +
           zeta;
  const Expr integrand = B * (th_xt * im1 + th_t * th_x * im2) / pow(Q, 2) +
                         (th_tt * th_x - th_t * th_xt) / pow(th_x, 2) - dB / Q - exp(a) * im0;
  auto anti = std::make_shared<const AxisAntiderivative>(
      make_axis_antiderivative(integrand, Var::x, P.x0, P.quad, "x-integral"));
  Expr p = z + axis_integral(anti) + a1 * x * y - b * y + ((a2 - pow(a1, 2)) * pow(y, 2) - pow(x, 2)) / 2.0 -
           0.5 * pow(u, 2);

  Solution s = make_solution("theorem_4_3", std::move(u), std::move(v), std::move(w), std::move(p));
  s.guards.push_back({"|theta_x| >= eps_den", th_x, GuardKind::AbsAtLeast, kEpsDenominator});
  s.guards.push_back({"|Im'(theta)| >= eps_den", im1, GuardKind::AbsAtLeast, kEpsDenominator});
  detail::record(s, "alpha(t)", P.alpha);
  detail::record(s, "beta(t)", P.beta);
  detail::record(s, "Im(s)", P.Im);
  s.params["theta(t,x)"] = to_string(th);
  s.params["zeta(t,x,y)"] = to_string(zeta);
  s.params["x0"] = detail::format_number(P.x0);
  return s;
}

struct Theorem44Params {
  ParamFnPtr alpha, beta, phi, Im;
  Expr zeta;
  double t0 = 0.0;
  QuadratureOptions quad;
  FormulaVariant variant = FormulaVariant::corrected;
  ProbeOptions probe;
};

/// Family with a travelling profile in alpha x + beta y and an exponential
/// amplitude exp(integral of alpha/beta (phi - 1) + beta/alpha phi dt).
[[nodiscard]] inline Solution build_theorem_4_4(const Theorem44Params& P) {
  detail::require(P.alpha, "alpha");
  detail::require(P.beta, "beta");
  detail::require(P.phi, "phi");
  detail::require(P.Im, "Im");
  const Expr zeta = P.zeta ? P.zeta : constant(0.0);
  detail::require_vars(zeta, {Var::t, Var::x, Var::y}, "zeta");
  detail::probe_nonvanishing(P.alpha, "alpha", P.probe);
  detail::probe_nonvanishing(P.beta, "beta", P.probe);
  detail::probe_smooth(P.alpha, "alpha", 2, P.probe);
  detail::probe_smooth(P.beta, "beta", 2, P.probe);
  detail::probe_smooth(P.phi, "phi", 1, P.probe);

  const Expr x = var_x(), y = var_y(), z = var_z(), s = var_s();
  const Expr a = of_t(P.alpha), a1 = of_t(P.alpha, 1), a2 = of_t(P.alpha, 2);
  const Expr b = of_t(P.beta), b1 = of_t(P.beta, 1), b2 = of_t(P.beta, 2);
  const Expr f = of_t(P.phi), f1 = of_t(P.phi, 1);

  auto rate = make_antiderivative(call(P.alpha, s) / call(P.beta, s) * (call(P.phi, s) - 1.0) +
                                      call(P.beta, s) / call(P.alpha, s) * call(P.phi, s),
                                  P.quad, "amplitude rate");
  const Expr E = exp(integral(rate, constant(P.t0), var_t()));
  const Expr A2 = pow(a, 2) + pow(b, 2);
  const Expr varpi = a * x + b * y;
  const Expr wronskian = a * b1 - a1 * b;

  Expr kappa;
  Expr p_factor;
  if (P.variant == FormulaVariant::corrected) {
    const double at0 = eval_jet_1d(P.alpha->body(), P.t0, 0).value();
    const double bt0 = eval_jet_1d(P.beta->body(), P.t0, 0).value();
    const double lambda = (at0 + bt0) / (at0 * bt0);
    kappa = lambda * a * b / A2 * E;
    p_factor = 1.0 - 2.0 * wronskian / A2;
  } else {
    kappa = (a + b) / A2 * E;
    p_factor = 1.0 - wronskian / A2;
  }

  Expr u = (f - 1.0) * y - (a1 + f * b) * x / a + b * kappa * call(P.Im, varpi, 1);
  Expr v = f * x - (b1 + (f - 1.0) * a) * y / b - a * kappa * call(P.Im, varpi, 1);
  Expr w = ((a1 + f * b) / a + (b1 + (f - 1.0) * a) / b) * z + zeta;

  const Expr cy = (b * (f1 * a + (f - 1.0) * a1) + b * b2 - 2.0 * pow(b1, 2) - pow((f - 1.0) * a, 2) -
                   3.0 * a * b1 * (f - 1.0)) /
                  pow(b, 2);
  const Expr cx = (2.0 * pow(a1, 2) + pow(f * b, 2) + 3.0 * a1 * b * f - a * (f1 * b + f * b1) - a * a2) /
                  pow(a, 2);
  const Expr cxy = (f - 1.0) * (a1 + f * b) / a - f1 + f * (b1 + a * (f - 1.0)) / b;
  Expr p = z + pow(y, 2) / 2.0 * (cy - pow(f - 1.0, 2)) - pow(x, 2) / 2.0 * (cx + pow(f, 2)) + cxy * x * y +
           kappa * p_factor * call(P.Im, varpi);

  Solution sol = make_solution("theorem_4_4", std::move(u), std::move(v), std::move(w), std::move(p));
  sol.guards.push_back({"|alpha| >= eps_den", a, GuardKind::AbsAtLeast, kEpsDenominator});
  sol.guards.push_back({"|beta| >= eps_den", b, GuardKind::AbsAtLeast, kEpsDenominator});
  detail::record(sol, "alpha(t)", P.alpha);
  detail::record(sol, "beta(t)", P.beta);
  detail::record(sol, "phi(t)", P.phi);
  detail::record(sol, "Im(s)", P.Im);
  sol.params["zeta(t,x,y)"] = to_string(zeta);
  sol.params["t0"] = detail::format_number(P.t0);
  sol.extras["amplitude"] = E;
  return sol;
}

}  // namespace seaconv
