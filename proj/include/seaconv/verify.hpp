#pragma once

/**
 * @file verify.hpp
 * @brief Residual engine and independent cross-checks.
 *
 * Residuals of a Solution at a point:
 *
 *     r1 = u_x + v_y + w_z
 *     r2 = p_z - rho
 *     r3 = rho_t + u rho_x + v rho_y + w rho_z
 *     r4 = u_t + u u_x + v u_y + w u_z + v + p_x / rho
 *     r5 = v_t + u v_x + v v_y + w v_z - u + p_y / rho
 *
 * Scans evaluate points independently (optionally on several threads) and
 * reduce in grid order, so results do not depend on scheduling.
 */

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "eval.hpp"
#include "expr.hpp"
#include "families.hpp"

namespace seaconv {

/// Points where |rho| is below this are left out of the r4 and r5 statistics.
inline constexpr double kRhoFloor = 1e-9;

// ---------------------------------------------------------------------------
// Grid

struct GridAxis {
  double min = 0.0;
  double max = 0.0;
  int count = 1;

  [[nodiscard]] double at(int i) const {
    if (count == 1) return min;
    if (i == count - 1) return max;
    return min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
};

/// Tensor grid over (t, x, y, z); points are ordered lexicographically.
struct Grid {
  std::array<GridAxis, 4> axes{};

  [[nodiscard]] std::size_t size() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= static_cast<std::size_t>(a.count);
    return n;
  }

  [[nodiscard]] Point4 point(std::size_t index) const {
    Point4 p{};
    for (int i = 3; i >= 0; --i) {
      const auto c = static_cast<std::size_t>(axes[i].count);
      p[i] = axes[i].at(static_cast<int>(index % c));
      index /= c;
    }
    return p;
  }

  void validate() const {
    for (int i = 0; i < 4; ++i) {
      const auto& a = axes[i];
      const std::string name = var_name(static_cast<Var>(i));
      if (a.count < 1) throw ConfigError("grid axis " + name + ": count must be at least 1");
      if (!(a.min <= a.max)) throw ConfigError("grid axis " + name + ": min must not exceed max");
      if (!std::isfinite(a.min) || !std::isfinite(a.max)) throw ConfigError("grid axis " + name + ": not finite");
    }
  }

  static Grid uniform(double lo, double hi, int count) {
    Grid g;
    for (auto& a : g.axes) a = {lo, hi, count};
    return g;
  }
};

namespace detail {

inline double parse_double(std::string_view s, const std::string& what) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError("malformed number '" + std::string(s) + "' in " + what);
  }
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

/// Parse "t=0:1:3,x=-1:1:5,...". Axes not mentioned are the single point 0.
[[nodiscard]] inline Grid parse_grid(std::string_view spec) {
  Grid g;
  std::array<bool, 4> seen{};
  for (auto item : detail::split(spec, ',')) {
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw ConfigError("grid item '" + std::string(item) + "' lacks '='");
    auto name = item.substr(0, eq);
    while (!name.empty() && name.back() == ' ') name.remove_suffix(1);
    int axis = -1;
    for (int i = 0; i < 4; ++i) {
      if (name == var_name(static_cast<Var>(i))) axis = i;
    }
    if (axis < 0) throw ConfigError("unknown grid axis '" + std::string(name) + "'");
    if (seen[axis]) throw ConfigError("grid axis '" + std::string(name) + "' given twice");
    seen[axis] = true;
    const auto parts = detail::split(item.substr(eq + 1), ':');
    if (parts.size() != 3) {
      throw ConfigError("grid axis '" + std::string(name) + "' must be min:max:count");
    }
    const std::string what = "grid axis " + std::string(name);
    GridAxis a;
    a.min = detail::parse_double(parts[0], what);
    a.max = detail::parse_double(parts[1], what);
    const double c = detail::parse_double(parts[2], what);
    if (c != std::floor(c) || c < 1 || c > 1e6) throw ConfigError(what + ": count must be a positive integer");
    a.count = static_cast<int>(c);
    g.axes[axis] = a;
  }
  g.validate();
  return g;
}

// ---------------------------------------------------------------------------
// Pointwise residuals

struct PointResidual {
  std::array<double, 5> r{};
  /// |rho| below kRhoFloor: r4 and r5 are NaN.
  bool small_rho = false;
};

namespace detail {

inline PointResidual residual_unchecked(const Solution& s, const Point4& pt, const EvalOptions& opt) {
  const std::array<Expr, 5> f = s.fields();
  const auto J = eval_jets(f, pt, 1, opt);
  const Jet4 &u = J[0], &v = J[1], &w = J[2], &p = J[3], &rho = J[4];
  const double U = u.value(), V = v.value(), W = w.value(), R = rho.value();
  auto adv = [&](const Jet4& q) { return q.d(0) + U * q.d(1) + V * q.d(2) + W * q.d(3); };
  PointResidual out;
  out.r[0] = u.d(1) + v.d(2) + w.d(3);
  out.r[1] = p.d(3) - R;
  out.r[2] = adv(rho);
  if (std::abs(R) < kRhoFloor) {
    out.small_rho = true;
    out.r[3] = out.r[4] = std::numeric_limits<double>::quiet_NaN();
  } else {
    out.r[3] = adv(u) + V + p.d(1) / R;
    out.r[4] = adv(v) - U + p.d(2) / R;
  }
  return out;
}

}  // namespace detail

/// Residuals (r1..r5) at an in-guard point. Throws GuardError outside the
/// guards. r4 and r5 are NaN where |rho| < kRhoFloor.
[[nodiscard]] inline std::array<double, 5> residual_at(const Solution& s, const Point4& pt,
                                                       const EvalOptions& opt = {}) {
  if (auto g = guard_violation(s, pt, opt)) throw GuardError("point violates guard " + *g);
  return detail::residual_unchecked(s, pt, opt).r;
}

// ---------------------------------------------------------------------------
// Scans

struct EquationStats {
  double max_abs = 0.0;
  double rms = 0.0;
  Point4 worst{};
  std::size_t count = 0;
};

struct ResidualReport {
  std::array<EquationStats, 5> eq{};
  std::size_t total = 0;
  std::size_t evaluated = 0;
  /// Guard violations plus points where evaluation failed.
  std::size_t excluded = 0;
  std::size_t domain_errors = 0;
  /// In-guard points left out of r4 and r5 because |rho| is tiny.
  std::size_t small_rho = 0;
  std::map<std::string, std::size_t> excluded_by_guard;
  std::string first_domain_error;

  [[nodiscard]] double max_abs() const {
    double m = 0.0;
    for (const auto& e : eq) m = std::max(m, e.max_abs);
    return m;
  }

  [[nodiscard]] bool passes(double tol) const {
    return evaluated > 0 && domain_errors == 0 && max_abs() <= tol;
  }
};

struct ScanOptions {
  /// 0 picks the hardware concurrency; 1 runs sequentially.
  unsigned threads = 0;
  EvalCache* cache = nullptr;
};

namespace detail {

struct PointOutcome {
  enum Kind { ok, excluded, domain_error } kind = ok;
  PointResidual res;
  std::string reason;
};

inline PointOutcome scan_point(const Solution& s, const Point4& pt, const EvalOptions& opt) {
  PointOutcome o;
  if (auto g = guard_violation(s, pt, opt)) {
    o.kind = PointOutcome::excluded;
    o.reason = *g;
    return o;
  }
  try {
    o.res = residual_unchecked(s, pt, opt);
  } catch (const Error& e) {
    o.kind = PointOutcome::domain_error;
    o.reason = e.what();
  }
  return o;
}

template <typename F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  // Contiguous blocks keep neighbouring points (which share memoized
  // quadratures) on the same worker.
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::size_t block = (n + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t end = std::min(n, (w + 1) * block);
      for (std::size_t i = w * block; i < end; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// Residual statistics over every in-guard grid point. Throws GuardError
/// when no grid point is in domain.
[[nodiscard]] inline ResidualReport residual_scan(const Solution& s, const Grid& grid, const ScanOptions& so = {}) {
  grid.validate();
  EvalCache local;
  const EvalOptions opt{so.cache ? so.cache : &local};
  const std::size_t n = grid.size();
  std::vector<detail::PointOutcome> outcomes(n);
  detail::parallel_for(n, so.threads, [&](std::size_t i) { outcomes[i] = detail::scan_point(s, grid.point(i), opt); });

  ResidualReport rep;
  rep.total = n;
  std::array<double, 5> sumsq{};
  for (std::size_t i = 0; i < n; ++i) {
    const auto& o = outcomes[i];
    if (o.kind == detail::PointOutcome::excluded) {
      ++rep.excluded;
      ++rep.excluded_by_guard[o.reason];
      continue;
    }
    if (o.kind == detail::PointOutcome::domain_error) {
      ++rep.excluded;
      ++rep.domain_errors;
      if (rep.first_domain_error.empty()) rep.first_domain_error = o.reason;
      continue;
    }
    ++rep.evaluated;
    if (o.res.small_rho) ++rep.small_rho;
    const Point4 pt = grid.point(i);
    for (int k = 0; k < 5; ++k) {
      const double r = o.res.r[k];
      if (std::isnan(r) && o.res.small_rho && k >= 3) continue;
      auto& e = rep.eq[k];
      const double a = std::isfinite(r) ? std::abs(r) : std::numeric_limits<double>::infinity();
      if (e.count == 0 || a > e.max_abs) {
        e.max_abs = a;
        e.worst = pt;
      }
      sumsq[k] += a * a;
      ++e.count;
    }
  }
  if (rep.evaluated == 0) {
    throw GuardError("no grid point lies inside the solution's domain" +
                     (rep.first_domain_error.empty() ? std::string() : " (" + rep.first_domain_error + ")"));
  }
  for (int k = 0; k < 5; ++k) {
    auto& e = rep.eq[k];
    e.rms = e.count ? std::sqrt(sumsq[k] / static_cast<double>(e.count)) : 0.0;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Finite-difference oracle

struct FdReport {
  std::array<double, 4> ad{};
  std::array<double, 4> fd{};
  /// max over coordinates of |ad - fd| / max(|ad|, 1e-2)
  double max_disagreement = 0.0;

  [[nodiscard]] bool passes(double rel_tol = 1e-5) const { return max_disagreement <= rel_tol; }
};

/// Compare first partials from jets with central differences of step h.
[[nodiscard]] inline FdReport fd_cross_check(const Expr& e, const Point4& pt, double h = 1e-4,
                                             const EvalOptions& opt = {}) {
  FdReport r;
  const Jet4 j = eval_jet(e, pt, 1, opt);
  for (int i = 0; i < 4; ++i) {
    Point4 a = pt, b = pt;
    a[i] += h;
    b[i] -= h;
    r.ad[i] = j.d(i);
    r.fd[i] = (eval_value(e, a, opt) - eval_value(e, b, opt)) / (2.0 * h);
    const double scale = std::max(std::abs(r.ad[i]), 1e-2);
    r.max_disagreement = std::max(r.max_disagreement, std::abs(r.ad[i] - r.fd[i]) / scale);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Two-dimensional checks

struct HarmonicReport {
  double max_abs = 0.0;
  Point4 worst{};
};

/// max |theta_xx + theta_yy| over the grid (z is ignored).
[[nodiscard]] inline HarmonicReport check_harmonic(const Expr& theta, const Grid& grid) {
  if (free_variables(theta).contains(Var::z)) throw Error("harmonic check: theta must not depend on z");
  grid.validate();
  HarmonicReport r;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point4 pt = grid.point(i);
    const Jet4 j = eval_jet(theta, pt, 2);
    const double lap = std::abs(j.d(1, 1) + j.d(2, 2));
    if (i == 0 || lap > r.max_abs) {
      r.max_abs = lap;
      r.worst = pt;
    }
  }
  return r;
}

/// Residuals of the planar momentum equations with pressure perturbation eta
/// and of the vorticity compatibility condition.
struct Reduced2dReport {
  /// u_t + u u_x + v u_y + v + eta_x
  EquationStats momentum_x;
  /// v_t + u v_x + v v_y - u + eta_y
  EquationStats momentum_y;
  /// omega_t + u omega_x + v omega_y + (u_x + v_y)(omega + 1), omega = u_y - v_x
  EquationStats vorticity;

  [[nodiscard]] double max_abs() const {
    return std::max({momentum_x.max_abs, momentum_y.max_abs, vorticity.max_abs});
  }
};

[[nodiscard]] inline Reduced2dReport check_reduced_2d(const Expr& u, const Expr& v, const Expr& eta,
                                                      const Grid& grid) {
  for (const Expr* e : {&u, &v, &eta}) {
    if (free_variables(*e).contains(Var::z)) throw Error("reduced 2D check: expressions must not depend on z");
  }
  grid.validate();
  Reduced2dReport rep;
  std::array<double, 3> sumsq{};
  std::array<EquationStats*, 3> stats{&rep.momentum_x, &rep.momentum_y, &rep.vorticity};
  const std::array<Expr, 3> es{u, v, eta};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point4 pt = grid.point(i);
    const auto J = eval_jets(es, pt, 2);
    const Jet4 &U = J[0], &V = J[1], &H = J[2];
    const double u0 = U.value(), v0 = V.value();
    const double omega = U.d(2) - V.d(1);
    const double omega_t = U.d(0, 2) - V.d(0, 1);
    const double omega_x = U.d(1, 2) - V.d(1, 1);
    const double omega_y = U.d(2, 2) - V.d(1, 2);
    const std::array<double, 3> r{
        U.d(0) + u0 * U.d(1) + v0 * U.d(2) + v0 + H.d(1),
        V.d(0) + u0 * V.d(1) + v0 * V.d(2) - u0 + H.d(2),
        omega_t + u0 * omega_x + v0 * omega_y + (U.d(1) + V.d(2)) * (omega + 1.0),
    };
    for (int k = 0; k < 3; ++k) {
      auto& e = *stats[k];
      const double a = std::abs(r[k]);
      if (e.count == 0 || a > e.max_abs) {
        e.max_abs = a;
        e.worst = pt;
      }
      sumsq[k] += a * a;
      ++e.count;
    }
  }
  for (int k = 0; k < 3; ++k) stats[k]->rms = std::sqrt(sumsq[k] / static_cast<double>(stats[k]->count));
  return rep;
}

}  // namespace seaconv
