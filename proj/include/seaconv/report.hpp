#pragma once

/**
 * @file report.hpp
 * @brief CSV export of sampled fields and residual report formatting.
 */

#include <array>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "eval.hpp"
#include "families.hpp"
#include "verify.hpp"

namespace seaconv {

/// 17 significant digits; -0 is written as 0.
[[nodiscard]] inline std::string format_csv_number(double v) {
  if (v == 0.0) return "0";
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline constexpr const char* kExportHeader = "t,x,y,z,u,v,w,p,rho,in_domain";

/// One row per grid point in lexicographic (t,x,y,z) order. Points outside
/// the guards, or where evaluation fails, get empty field cells and `false`.
inline void export_csv(const Solution& s, const Grid& grid, std::ostream& out, unsigned threads = 0) {
  grid.validate();
  EvalCache cache;
  const EvalOptions opt{&cache};
  const std::size_t n = grid.size();
  std::vector<std::string> rows(n);
  const auto fields = s.fields();
  detail::parallel_for(n, threads, [&](std::size_t i) {
    const Point4 pt = grid.point(i);
    std::string row;
    for (double c : pt) row += format_csv_number(c) + ",";
    bool ok = !guard_violation(s, pt, opt).has_value();
    std::vector<double> vals;
    if (ok) {
      try {
        const auto jets = eval_jets(fields, pt, 0, opt);
        for (const auto& j : jets) vals.push_back(j.value());
      } catch (const DomainError&) {
        ok = false;
      }
    }
    for (int k = 0; k < 5; ++k) row += (ok ? format_csv_number(vals[k]) : std::string()) + ",";
    row += ok ? "true" : "false";
    rows[i] = std::move(row);
  });
  out << kExportHeader << "\n";
  for (const auto& r : rows) out << r << "\n";
}

inline constexpr const char* kReportHeader = "eq,max_abs,rms,worst_t,worst_x,worst_y,worst_z";

inline void report_csv(const ResidualReport& rep, std::ostream& out) {
  out << kReportHeader << "\n";
  for (int k = 0; k < 5; ++k) {
    const auto& e = rep.eq[k];
    out << "r" << (k + 1) << "," << format_csv_number(e.max_abs) << "," << format_csv_number(e.rms);
    for (double c : e.worst) out << "," << format_csv_number(c);
    out << "\n";
  }
}

inline void report_text(const ResidualReport& rep, double tol, std::ostream& out) {
  static constexpr std::array<const char*, 5> names = {"continuity", "hydrostatic", "density transport",
                                                       "x-momentum", "y-momentum"};
  out << "points: " << rep.total << " total, " << rep.evaluated << " evaluated, " << rep.excluded
      << " excluded\n";
  for (const auto& [g, c] : rep.excluded_by_guard) out << "  excluded by " << g << ": " << c << "\n";
  if (rep.domain_errors) {
    out << "  evaluation failures: " << rep.domain_errors << " (first: " << rep.first_domain_error << ")\n";
  }
  if (rep.small_rho) out << "  r4/r5 skipped where |rho| < " << kRhoFloor << ": " << rep.small_rho << "\n";
  for (int k = 0; k < 5; ++k) {
    const auto& e = rep.eq[k];
    out << "r" << (k + 1) << " (" << names[k] << "): max " << format_csv_number(e.max_abs) << ", rms "
        << format_csv_number(e.rms) << ", worst at (" << format_csv_number(e.worst[0]) << ", "
        << format_csv_number(e.worst[1]) << ", " << format_csv_number(e.worst[2]) << ", "
        << format_csv_number(e.worst[3]) << ")\n";
  }
  out << (rep.passes(tol) ? "PASS" : "FAIL") << ": max residual " << format_csv_number(rep.max_abs())
      << " against tolerance " << tol << "\n";
}

}  // namespace seaconv
