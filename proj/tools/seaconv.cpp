#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "seaconv/seaconv.hpp"

namespace {

enum Exit { kOk = 0, kTolerance = 1, kConfig = 2 };

struct Options {
  std::string config;
  std::string descriptor;
  std::string grid;
  std::string out;
  std::string alpha;
  std::optional<double> tol;
  int k = 0;
};

seaconv::Config load_input(const Options& o) {
  if (!o.descriptor.empty() && !o.config.empty()) throw seaconv::ConfigError("give either --config or --descriptor");
  if (!o.descriptor.empty()) return seaconv::load_config(o.descriptor);
  if (!o.config.empty()) return seaconv::load_config(o.config);
  throw seaconv::ConfigError("missing --config or --descriptor");
}

seaconv::Grid grid_for(const Options& o, const seaconv::BuiltSolution& b) {
  if (!o.grid.empty()) return seaconv::parse_grid(o.grid);
  if (b.grid) return *b.grid;
  throw seaconv::ConfigError("no grid given (use --grid or a 'grid' setting)");
}

void write_output(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw seaconv::ConfigError("cannot write '" + o.out + "'");
  f << text;
  if (!f.flush()) throw seaconv::ConfigError("cannot write '" + o.out + "'");
}

int cmd_list_families() {
  for (const auto& f : seaconv::kFamilies) std::cout << f.tag << ": " << f.parameters << "  (" << f.description << ")\n";
  return kOk;
}

int cmd_build(const Options& o) {
  const auto cfg = load_input(o);
  (void)seaconv::build_from_config(cfg);
  write_output(o, seaconv::write_descriptor(cfg));
  return kOk;
}

int cmd_verify(const Options& o) {
  const auto cfg = load_input(o);
  const auto built = seaconv::build_from_config(cfg);
  const auto grid = grid_for(o, built);
  const double tol = o.tol ? *o.tol : built.tol.value_or(built.default_tol);
  if (!(tol > 0.0)) throw seaconv::ConfigError("--tol must be positive");
  seaconv::ResidualReport rep;
  try {
    rep = seaconv::residual_scan(built.solution, grid);
  } catch (const seaconv::GuardError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kTolerance;
  }
  seaconv::report_text(rep, tol, std::cout);
  std::ostringstream csv;
  seaconv::report_csv(rep, csv);
  if (o.out.empty()) {
    std::cout << "\n" << csv.str();
  } else {
    write_output(o, csv.str());
  }
  return rep.passes(tol) ? kOk : kTolerance;
}

int cmd_transform(const Options& o) {
  if (o.alpha.empty()) throw seaconv::ConfigError("missing --alpha");
  const auto cfg = seaconv::with_transform(load_input(o), o.k, o.alpha);
  (void)seaconv::build_from_config(cfg);
  write_output(o, seaconv::write_descriptor(cfg));
  return kOk;
}

int cmd_export(const Options& o) {
  const auto cfg = load_input(o);
  const auto built = seaconv::build_from_config(cfg);
  const auto grid = grid_for(o, built);
  std::ostringstream csv;
  seaconv::export_csv(built.solution, grid, csv);
  write_output(o, csv.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact solutions of the sea-convection equations: build, transform, verify, export."};
  app.require_subcommand(1);
  Options o;

  app.add_subcommand("list-families", "List the solution families and their parameters");

  auto* build = app.add_subcommand("build", "Check a configuration and write its solution descriptor");
  build->add_option("--config", o.config, "Configuration file")->required();
  build->add_option("--out", o.out, "Descriptor path (default: stdout)");

  auto* verify = app.add_subcommand("verify", "Scan PDE residuals over a grid");
  verify->add_option("--descriptor", o.descriptor, "Solution descriptor");
  verify->add_option("--config", o.config, "Configuration file");
  verify->add_option("--grid", o.grid, "Grid, e.g. t=0:1:3,x=-1:1:5");
  verify->add_option("--tol", o.tol, "Residual tolerance");
  verify->add_option("--out", o.out, "Report CSV path (default: stdout)");

  auto* transform = app.add_subcommand("transform", "Apply a symmetry T1..T4 to a descriptor");
  transform->add_option("--descriptor", o.descriptor, "Solution descriptor");
  transform->add_option("--config", o.config, "Configuration file");
  transform->add_option("--k", o.k, "Symmetry index")->required()->check(CLI::Range(1, 4));
  transform->add_option("--alpha", o.alpha, "alpha(t) expression")->required();
  transform->add_option("--out", o.out, "Descriptor path (default: stdout)");

  auto* exp = app.add_subcommand("export", "Sample the fields over a grid as CSV");
  exp->add_option("--descriptor", o.descriptor, "Solution descriptor");
  exp->add_option("--config", o.config, "Configuration file");
  exp->add_option("--grid", o.grid, "Grid, e.g. t=0:1:3,x=-1:1:5");
  exp->add_option("--out", o.out, "CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    (void)app.exit(e);
    return kConfig;
  }

  try {
    if (app.got_subcommand("list-families")) return cmd_list_families();
    if (build->parsed()) return cmd_build(o);
    if (verify->parsed()) return cmd_verify(o);
    if (transform->parsed()) return cmd_transform(o);
    return cmd_export(o);
  } catch (const seaconv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
}
