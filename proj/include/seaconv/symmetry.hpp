#pragma once

/**
 * @file symmetry.hpp
 * @brief The four solution-to-solution maps of the sea-convection system.
 *
 * With alpha a function of t:
 *
 *  T1: fields at (t, x + alpha, y, z + alpha'' x - alpha' y);
 *      u -= alpha', w += -alpha'' u + alpha' v - alpha''' x + alpha'' y
 *  T2: fields at (t, x, y + alpha, z + alpha' x + alpha'' y);
 *      v -= alpha', w += -alpha' u - alpha'' v - alpha'' x - alpha''' y
 *  T3: fields at (t, x, y, z + alpha); w -= alpha'
 *  T4: p += alpha
 *
 * By default the u and v inside the T1 and T2 corrections of w are the
 * transformed fields. CorrectionFields::original uses the original fields
 * composed with the shifted coordinates instead.
 */

#include <string>

#include "errors.hpp"
#include "expr.hpp"
#include "families.hpp"

namespace seaconv {

struct SymmetryKind {
  int k = 4;
  ParamFnPtr alpha;
};

enum class CorrectionFields { transformed, original };

struct SymmetryOptions {
  CorrectionFields correction_fields = CorrectionFields::transformed;
  ProbeOptions probe;
};

[[nodiscard]] inline Solution apply_symmetry(const Solution& sol, const SymmetryKind& kind,
                                             const SymmetryOptions& opt = {}) {
  if (kind.k < 1 || kind.k > 4) throw Error("symmetry index must be 1, 2, 3 or 4");
  if (!kind.alpha) throw Error("symmetry needs a function alpha(t)");
  detail::probe_smooth(kind.alpha, "alpha", kind.k <= 2 ? 4 : 1, opt.probe);

  const Expr x = var_x(), y = var_y(), z = var_z();
  const Expr a = of_t(kind.alpha), a1 = of_t(kind.alpha, 1), a2 = of_t(kind.alpha, 2), a3 = of_t(kind.alpha, 3);

  Substitution phi;
  switch (kind.k) {
    case 1: phi = {{Var::x, x + a}, {Var::z, z + a2 * x - a1 * y}}; break;
    case 2: phi = {{Var::y, y + a}, {Var::z, z + a1 * x + a2 * y}}; break;
    case 3: phi = {{Var::z, z + a}}; break;
    default: break;
  }

  Solution out;
  out.family = sol.family;
  out.params = sol.params;
  out.functions = sol.functions;
  bool known = false;
  for (const auto& f : out.functions) known = known || f == kind.alpha;
  if (!known) out.functions.push_back(kind.alpha);

  if (kind.k == 4) {
    out.u = sol.u;
    out.v = sol.v;
    out.w = sol.w;
    out.p = sol.p + a;
    out.guards = sol.guards;
  } else {
    const Expr u_phi = substitute(sol.u, phi);
    const Expr v_phi = substitute(sol.v, phi);
    const Expr w_phi = substitute(sol.w, phi);
    out.p = substitute(sol.p, phi);
    out.u = kind.k == 1 ? u_phi - a1 : u_phi;
    out.v = kind.k == 2 ? v_phi - a1 : v_phi;
    const bool fresh = opt.correction_fields == CorrectionFields::transformed;
    const Expr& cu = fresh ? out.u : u_phi;
    const Expr& cv = fresh ? out.v : v_phi;
    switch (kind.k) {
      case 1: out.w = w_phi - a2 * cu + a1 * cv - a3 * x + a2 * y; break;
      case 2: out.w = w_phi - a1 * cu - a2 * cv - a2 * x - a3 * y; break;
      default: out.w = w_phi - a1; break;
    }
    for (const auto& g : sol.guards) out.guards.push_back({g.name, substitute(g.expr, phi), g.kind, g.threshold});
  }
  out.rho = diff(out.p, Var::z);
  out.history = sol.history;
  out.history.push_back("T" + std::to_string(kind.k) + "(" + detail::fn_source(kind.alpha) + ")");
  return out;
}

}  // namespace seaconv
