#pragma once

/**
 * @file quadrature.hpp
 * @brief Adaptive Simpson quadrature for scalar and vector integrands.
 *
 * The recursion accepts a panel when the two half-panel estimates differ
 * from the whole-panel estimate by at most 15 * max(abs_tol_panel,
 * rel_tol * |estimate|) and it lies at least min_depth levels down. The
 * absolute budget halves at each level. Accepted panels get the Richardson
 * correction (S2 - S1) / 15.
 *
 * Vector integrands (used for Taylor-coefficient vectors) use the max-norm
 * for the error test, so every component meets the same tolerance.
 */

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>
#include <vector>

#include "errors.hpp"
#include "expr.hpp"

namespace seaconv {

namespace detail {

inline double norm_inf(double v) { return std::abs(v); }
inline double norm_inf(const std::vector<double>& v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

inline bool finite(double v) { return std::isfinite(v); }
inline bool finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double e) { return std::isfinite(e); });
}

// out = (h / 6) * (fa + 4 fm + fb)
inline double simpson(double h, double fa, double fm, double fb) { return h / 6.0 * (fa + 4.0 * fm + fb); }
inline std::vector<double> simpson(double h, const std::vector<double>& fa, const std::vector<double>& fm,
                                   const std::vector<double>& fb) {
  std::vector<double> out(fa.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = h / 6.0 * (fa[i] + 4.0 * fm[i] + fb[i]);
  return out;
}

inline double diff(double a, double b) { return a - b; }
inline std::vector<double> diff(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

// a + (a - b) / 15 with a = left + right
inline double richardson(double l, double r, double whole) {
  const double two = l + r;
  return two + (two - whole) / 15.0;
}
inline std::vector<double> richardson(const std::vector<double>& l, const std::vector<double>& r,
                                      const std::vector<double>& whole) {
  std::vector<double> out(l.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double two = l[i] + r[i];
    out[i] = two + (two - whole[i]) / 15.0;
  }
  return out;
}

inline double sum(double a, double b) { return a + b; }
inline std::vector<double> sum(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

template <typename V, typename F>
V simpson_recurse(F& f, double a, double b, const V& fa, const V& fm, const V& fb, const V& whole,
                  double abs_tol, const QuadratureOptions& opt, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const V flm = f(lm);
  const V frm = f(rm);
  const V left = simpson(m - a, fa, flm, fm);
  const V right = simpson(b - m, fm, frm, fb);
  const V two = sum(left, right);
  if (!finite(two)) throw QuadratureError("non-finite integrand on [" + std::to_string(a) + ", " +
                                          std::to_string(b) + "]");
  const double err = norm_inf(diff(two, whole));
  const double tol = std::max(abs_tol, opt.rel_tol * norm_inf(two));
  if ((err <= 15.0 * tol && depth >= opt.min_depth) || (m <= a || m >= b)) return richardson(left, right, whole);
  if (depth >= opt.max_depth) {
    throw QuadratureError("adaptive Simpson did not converge within depth " + std::to_string(opt.max_depth) +
                          " near [" + std::to_string(a) + ", " + std::to_string(b) + "]");
  }
  const V lv = simpson_recurse<V>(f, a, m, fa, flm, fm, left, 0.5 * abs_tol, opt, depth + 1);
  const V rv = simpson_recurse<V>(f, m, b, fm, frm, fb, right, 0.5 * abs_tol, opt, depth + 1);
  return sum(lv, rv);
}

}  // namespace detail

/// Integral of f over [a, b] (a > b allowed; the result changes sign).
/// f returns double or std::vector<double>; all vectors must have equal size.
template <typename F>
auto adaptive_simpson(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
  using V = std::decay_t<decltype(f(a))>;
  if (a == b) {
    V zero = f(a);
    if constexpr (std::is_same_v<V, double>) {
      zero = 0.0;
    } else {
      std::fill(zero.begin(), zero.end(), 0.0);
    }
    return zero;
  }
  if (b < a) {
    V r = adaptive_simpson(f, b, a, opt);
    if constexpr (std::is_same_v<V, double>) {
      return -r;
    } else {
      for (double& e : r) e = -e;
      return r;
    }
  }
  const double m = 0.5 * (a + b);
  const V fa = f(a);
  const V fm = f(m);
  const V fb = f(b);
  const V whole = detail::simpson(b - a, fa, fm, fb);
  return detail::simpson_recurse<V>(f, a, b, fa, fm, fb, whole, opt.abs_tol, opt, 0);
}

}  // namespace seaconv
