#pragma once

/**
 * @file config.hpp
 * @brief Plain-text configurations and solution descriptors.
 *
 * A configuration is line oriented:
 *
 *     # comment
 *     family = theorem_2_1
 *     alpha(t) = sin(t)          # parameter function of one variable
 *     theta(t,x,y) = x^2 - y^2   # field expression (theta, zeta)
 *     b1 = 0.5                   # constant
 *     transform = 1 : t^2/2      # symmetry T1 with alpha(t) = t^2/2
 *
 * Functions are registered in file order, so a definition may use any
 * function defined above it. A descriptor is the same format written back
 * in canonical form; loading it rebuilds the identical solution.
 */

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "families.hpp"
#include "parser.hpp"
#include "symmetry.hpp"
#include "verify.hpp"

namespace seaconv {

struct ConfigEntry {
  std::string name;               // "alpha", "b1", ...
  std::vector<std::string> vars;  // declared variables for definitions
  std::string value;              // right-hand side, trimmed
  int line = 0;

  [[nodiscard]] bool is_definition() const { return !vars.empty(); }
  [[nodiscard]] std::string key() const {
    if (vars.empty()) return name;
    std::string k = name + "(";
    for (std::size_t i = 0; i < vars.size(); ++i) k += (i ? "," : "") + vars[i];
    return k + ")";
  }
};

struct Config {
  std::vector<ConfigEntry> entries;

  [[nodiscard]] const ConfigEntry* find(std::string_view name) const {
    for (const auto& e : entries) {
      if (e.name == name && e.name != "transform") return &e;
    }
    return nullptr;
  }
};

struct FamilyInfo {
  const char* tag;
  const char* parameters;
  const char* description;
};

inline constexpr FamilyInfo kFamilies[] = {
    {"theorem_2_1", "alpha(t), beta(t), b1, b2, Im(s), iota(s), sigma(s)", "moving-line family"},
    {"theorem_3_1", "alpha(t), Im(s)", "cylindrical family"},
    {"prop_4_1", "theta(t,x,y) harmonic, zeta(t,x,y)", "irrotational planar family"},
    {"theorem_4_2", "alpha(t), gamma(t), Im(s), zeta(t,x,y)", "radial swirl family"},
    {"theorem_4_3", "alpha(t), beta(t), Im(s), theta(t,x), zeta(t,x,y)", "shear family with an x-integral"},
    {"theorem_4_4", "alpha(t), beta(t), phi(t), Im(s), zeta(t,x,y)", "travelling profile family"},
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

inline bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

inline double config_number(const ConfigEntry& e) {
  try {
    return parse_double(e.value, "'" + e.name + "'");
  } catch (const ConfigError& err) {
    throw ConfigError(err.what(), e.line);
  }
}

}  // namespace detail

[[nodiscard]] inline Config parse_config(std::string_view text) {
  Config cfg;
  std::set<std::string> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string line = detail::trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'name = value'", line_no);
    const std::string lhs = detail::trim(std::string_view(line).substr(0, eq));
    ConfigEntry e;
    e.line = line_no;
    e.value = detail::trim(std::string_view(line).substr(eq + 1));
    if (e.value.empty()) throw ConfigError("empty value for '" + lhs + "'", line_no);
    if (const auto open = lhs.find('('); open != std::string::npos) {
      if (lhs.back() != ')') throw ConfigError("malformed definition '" + lhs + "'", line_no);
      e.name = detail::trim(std::string_view(lhs).substr(0, open));
      const std::string inside = lhs.substr(open + 1, lhs.size() - open - 2);
      for (auto v : detail::split(inside, ',')) {
        std::string var = detail::trim(v);
        if (!detail::is_identifier(var)) throw ConfigError("malformed variable list in '" + lhs + "'", line_no);
        e.vars.push_back(std::move(var));
      }
    } else {
      e.name = lhs;
    }
    if (!detail::is_identifier(e.name)) throw ConfigError("malformed name '" + e.name + "'", line_no);
    if (e.name != "transform" && !seen.insert(e.name).second) {
      throw ConfigError("'" + e.name + "' is defined twice", line_no);
    }
    cfg.entries.push_back(std::move(e));
  }
  return cfg;
}

[[nodiscard]] inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

[[nodiscard]] inline Config load_config(const std::string& path) { return parse_config(read_text_file(path)); }

/// Canonical text form; parse_config of the result gives the same entries.
[[nodiscard]] inline std::string write_descriptor(const Config& cfg) {
  std::string out = "# seaconv solution descriptor\n";
  for (const auto& e : cfg.entries) out += e.key() + " = " + e.value + "\n";
  return out;
}

/// Append a symmetry to a configuration.
[[nodiscard]] inline Config with_transform(Config cfg, int k, const std::string& alpha_src) {
  if (k < 1 || k > 4) throw ConfigError("--k must be 1, 2, 3 or 4");
  if (alpha_src.find('\n') != std::string::npos || alpha_src.find('#') != std::string::npos) {
    throw ConfigError("alpha expression must be a single line without '#'");
  }
  ConfigEntry e;
  e.name = "transform";
  e.value = std::to_string(k) + " : " + detail::trim(alpha_src);
  cfg.entries.push_back(std::move(e));
  return cfg;
}

/// A solution built from a configuration, with the settings that came
/// with it.
struct BuiltSolution {
  Solution solution;
  Context context;
  std::optional<double> tol;
  std::optional<Grid> grid;
  /// Tolerance to use when none is configured.
  double default_tol = 1e-8;
};

namespace detail {

struct FamilySpec {
  std::vector<std::string> functions;  // one-variable
  std::vector<std::string> fields;     // multi-variable expressions
  std::vector<std::string> optional_fields;
  std::vector<std::string> constants;
  bool quadrature = false;
};

inline const FamilySpec& family_spec(const std::string& tag, int line) {
  static const std::map<std::string, FamilySpec> specs = {
      {"rigid_rotation", {{}, {}, {}, {}, false}},
      {"theorem_2_1", {{"alpha", "beta", "Im", "iota", "sigma"}, {}, {}, {"b1", "b2"}, false}},
      {"theorem_3_1", {{"alpha", "Im"}, {}, {}, {}, false}},
      {"prop_4_1", {{}, {"theta"}, {"zeta"}, {}, false}},
      {"theorem_4_2", {{"alpha", "gamma", "Im"}, {}, {"zeta"}, {"varpi0"}, true}},
      {"theorem_4_3", {{"alpha", "beta", "Im"}, {"theta"}, {"zeta"}, {"x0"}, true}},
      {"theorem_4_4", {{"alpha", "beta", "phi", "Im"}, {}, {"zeta"}, {"t0"}, true}},
  };
  auto it = specs.find(tag);
  if (it == specs.end()) {
    std::string known = "rigid_rotation";
    for (const auto& f : kFamilies) known += std::string(", ") + f.tag;
    throw ConfigError("unknown family '" + tag + "' (known: " + known + ")", line);
  }
  return it->second;
}

inline bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

inline FormulaVariant parse_variant(const ConfigEntry& e) {
  if (e.value == "corrected") return FormulaVariant::corrected;
  if (e.value == "as_printed") return FormulaVariant::as_printed;
  throw ConfigError("variant must be 'corrected' or 'as_printed'", e.line);
}

}  // namespace detail

/// Build the solution described by a configuration, applying its transforms
/// in order. Parse failures and hypothesis failures raise ConfigError with
/// the offending line.
[[nodiscard]] inline BuiltSolution build_from_config(const Config& cfg) {
  BuiltSolution out;
  const ConfigEntry* fam = cfg.find("family");
  if (!fam) throw ConfigError("missing 'family'");
  if (fam->is_definition()) throw ConfigError("'family' takes a value", fam->line);
  const auto& spec = detail::family_spec(fam->value, fam->line);

  static const std::vector<std::string> kGeneral = {"family", "tol", "grid", "t_min", "t_max",
                                                    "variant", "symmetry_fields", "transform"};
  std::map<std::string, ParamFnPtr> fns;
  std::map<std::string, Expr> fields;
  std::map<std::string, double> constants;
  ProbeOptions probe;
  FormulaVariant variant = FormulaVariant::corrected;
  SymmetryOptions sym;
  std::vector<const ConfigEntry*> transforms;

  for (const auto& e : cfg.entries) {
    try {
      if (e.is_definition()) {
        const bool field = e.name == "theta" || e.name == "zeta";
        if (field) {
          if (!detail::contains(spec.fields, e.name) && !detail::contains(spec.optional_fields, e.name)) {
            throw ConfigError("family " + fam->value + " does not take " + e.name, e.line);
          }
          VarBindings vars;
          for (const auto& v : e.vars) {
            if (v != "t" && v != "x" && v != "y" && v != "z") {
              throw ConfigError(e.name + " must be declared over t, x, y", e.line);
            }
            vars.emplace(v, static_cast<Var>(std::string("txyz").find(v[0])));
          }
          fields[e.name] = parse_expr(e.value, out.context, vars);
        } else {
          if (e.vars.size() != 1) {
            throw ConfigError("parameter function '" + e.name + "' must take exactly one variable", e.line);
          }
          if (is_reserved_name(e.name)) throw ConfigError("'" + e.name + "' is a reserved name", e.line);
          auto fn = parse_param_fn(e.name, e.vars[0], e.value, out.context);
          out.context.add(fn);
          fns[e.name] = fn;
        }
        continue;
      }
      if (e.name == "family") continue;
      if (e.name == "tol") {
        out.tol = detail::config_number(e);
        if (!(*out.tol > 0.0)) throw ConfigError("tol must be positive", e.line);
      } else if (e.name == "grid") {
        out.grid = parse_grid(e.value);
      } else if (e.name == "t_min") {
        probe.t_min = detail::config_number(e);
      } else if (e.name == "t_max") {
        probe.t_max = detail::config_number(e);
      } else if (e.name == "variant") {
        variant = detail::parse_variant(e);
      } else if (e.name == "symmetry_fields") {
        if (e.value == "transformed") {
          sym.correction_fields = CorrectionFields::transformed;
        } else if (e.value == "original") {
          sym.correction_fields = CorrectionFields::original;
        } else {
          throw ConfigError("symmetry_fields must be 'transformed' or 'original'", e.line);
        }
      } else if (e.name == "transform") {
        transforms.push_back(&e);
      } else if (detail::contains(spec.constants, e.name)) {
        constants[e.name] = detail::config_number(e);
      } else {
        throw ConfigError("unknown setting '" + e.name + "' for family " + fam->value, e.line);
      }
    } catch (const ParseError& err) {
      throw ConfigError("in '" + e.key() + "': " + err.what(), e.line);
    } catch (const ConfigError& err) {
      if (err.line() > 0) throw;
      throw ConfigError(err.what(), e.line);
    } catch (const Error& err) {
      throw ConfigError(err.what(), e.line);
    }
  }
  if (probe.t_min > probe.t_max) throw ConfigError("t_min must not exceed t_max");

  for (const auto& name : spec.functions) {
    if (!fns.count(name)) throw ConfigError("family " + fam->value + " requires " + name + "(...)");
  }
  for (const auto& name : spec.fields) {
    if (!fields.count(name)) throw ConfigError("family " + fam->value + " requires " + name + "(...)");
  }
  auto constant_or = [&](const char* k, double d) {
    auto it = constants.find(k);
    return it == constants.end() ? d : it->second;
  };
  auto field_or_null = [&](const char* k) {
    auto it = fields.find(k);
    return it == fields.end() ? Expr() : it->second;
  };

  try {
    const std::string& tag = fam->value;
    if (tag == "rigid_rotation") {
      out.solution = rigid_rotation();
    } else if (tag == "theorem_2_1") {
      Theorem21Params P;
      P.alpha = fns["alpha"];
      P.beta = fns["beta"];
      P.Im = fns["Im"];
      P.iota = fns["iota"];
      P.sigma = fns["sigma"];
      P.b1 = constant_or("b1", 0.0);
      P.b2 = constant_or("b2", 0.0);
      P.variant = variant;
      P.probe = probe;
      out.solution = build_theorem_2_1(P);
    } else if (tag == "theorem_3_1") {
      Theorem31Params P;
      P.alpha = fns["alpha"];
      P.Im = fns["Im"];
      P.probe = probe;
      out.solution = build_theorem_3_1(P);
    } else if (tag == "prop_4_1") {
      Prop41Params P;
      P.theta = fields["theta"];
      P.zeta = field_or_null("zeta");
      P.probe = probe;
      out.solution = build_prop_4_1(P);
    } else if (tag == "theorem_4_2") {
      Theorem42Params P;
      P.alpha = fns["alpha"];
      P.gamma = fns["gamma"];
      P.Im = fns["Im"];
      P.zeta = field_or_null("zeta");
      P.varpi0 = constant_or("varpi0", 1.0);
      P.variant = variant;
      P.probe = probe;
      out.solution = build_theorem_4_2(P);
    } else if (tag == "theorem_4_3") {
      Theorem43Params P;
      P.alpha = fns["alpha"];
      P.beta = fns["beta"];
      P.Im = fns["Im"];
      P.theta = fields["theta"];
      P.zeta = field_or_null("zeta");
      P.x0 = constant_or("x0", 0.0);
      P.probe = probe;
      out.solution = build_theorem_4_3(P);
    } else {
      Theorem44Params P;
      P.alpha = fns["alpha"];
      P.beta = fns["beta"];
      P.phi = fns["phi"];
      P.Im = fns["Im"];
      P.zeta = field_or_null("zeta");
      P.t0 = constant_or("t0", 0.0);
      P.variant = variant;
      P.probe = probe;
      out.solution = build_theorem_4_4(P);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& err) {
    throw ConfigError(err.what());
  }

  sym.probe = probe;
  int index = 0;
  for (const ConfigEntry* e : transforms) {
    ++index;
    const auto colon = e->value.find(':');
    if (colon == std::string::npos) throw ConfigError("transform must be 'k : alpha expression'", e->line);
    try {
      const double kd = detail::parse_double(e->value.substr(0, colon), "transform index");
      if (kd != 1 && kd != 2 && kd != 3 && kd != 4) throw ConfigError("transform index must be 1, 2, 3 or 4");
      const std::string body = detail::trim(std::string_view(e->value).substr(colon + 1));
      auto alpha = parse_param_fn("transform" + std::to_string(index), "t", body, out.context);
      out.solution = apply_symmetry(out.solution, {static_cast<int>(kd), alpha}, sym);
    } catch (const ParseError& err) {
      throw ConfigError(std::string("in transform: ") + err.what(), e->line);
    } catch (const ConfigError& err) {
      throw ConfigError(err.what(), e->line);
    } catch (const Error& err) {
      throw ConfigError(err.what(), e->line);
    }
  }
  out.default_tol = spec.quadrature || !transforms.empty() ? 1e-7 : 1e-8;
  return out;
}

}  // namespace seaconv
