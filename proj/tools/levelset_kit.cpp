// levelset-kit {reinit|advect|converge|derivs} <config> [--out DIR] [--large] [--vtk]
//
// Exit status: 0 success, 1 bad configuration or I/O problem, 2 numerical
// failure (divergence, non-finite values, corrupt fields).

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "levelset/cases.hpp"
#include "levelset/io.hpp"

namespace fs = std::filesystem;
using namespace lsk;

namespace {

struct Options {
  std::string command;
  std::string config;
  std::string out;
  bool large = false;
  bool vtk = false;
  unsigned jobs = 0;
};

class Manifest {
 public:
  Manifest(const Options& o, const CaseSpec& spec) : opt_(o), spec_(spec) {}

  void plan(const std::string& file) { outputs_.push_back(file); }

  // Written before the heavy lifting; the config echo re-parses as a case.
  void write(const fs::path& dir) const {
    const fs::path path = dir / "manifest.toml";
    auto f = open_output(path);
    f << "[manifest]\nversion = \"" << LSK_VERSION << "\"\ncommand = \"" << opt_.command << "\"\nconfig = \""
      << opt_.config << "\"\nseed = \"none (deterministic)\"\nlarge = " << (opt_.large ? "true" : "false")
      << "\noutputs = [";
    for (std::size_t i = 0; i < outputs_.size(); ++i) f << (i ? ", " : "") << '"' << outputs_[i] << '"';
    f << "]\n\n" << to_toml(spec_);
    close_output(f, path);
  }

 private:
  const Options& opt_;
  const CaseSpec& spec_;
  std::vector<std::string> outputs_;
};

void print_rows(const std::vector<ConvergenceRow>& rows) {
  std::printf("%-6s %6s %-10s %-26s %-24s %s\n", "grid", "N_c", "mapping", "norm", "value", "order");
  for (const auto& r : rows)
    std::printf("%-6s %6d %-10s %-26s %-24s %s\n", r.grid.c_str(), r.cells, r.mapping.c_str(), r.norm.c_str(),
                format_real(r.value).c_str(), r.observed_order ? format_real(*r.observed_order).c_str() : "");
}

fs::path out_dir(const Options& o, const CaseSpec& spec) {
  if (!o.out.empty()) return o.out;
  if (const char* env = std::getenv("LSK_OUT_DIR")) return fs::path(env) / spec.name;
  return fs::path("out") / spec.name;
}

int cmd_reinit(const Options& o, const CaseSpec& spec) {
  const fs::path dir = out_dir(o, spec);
  Manifest m(o, spec);
  m.plan("trace.csv");
  m.plan("summary.csv");
  if (o.vtk) m.plan("fields.vtk");
  m.write(dir);
  const RunResult r = run_reinit_case(spec);
  trace_table(r.trace.l1_per_step, r.dt).write(dir / "trace.csv");
  convergence_table(r.rows).write(dir / "summary.csv");
  if (o.vtk) {
    const ScalarField psi = psi0_field(r.final_alpha, InterfaceParams(r.eps_h));
    write_vtk(dir / "fields.vtk", {{"alpha_initial", &r.initial}, {"alpha", &r.final_alpha}, {"psi0", &psi}});
  }
  print_rows(r.rows);
  std::printf("steps run: %d, output: %s\n", r.trace.steps_run, dir.string().c_str());
  return 0;
}

int cmd_advect(const Options& o, const CaseSpec& spec) {
  const fs::path dir = out_dir(o, spec);
  Manifest m(o, spec);
  m.plan("series.csv");
  m.plan("summary.csv");
  if (o.vtk) m.plan("fields.vtk");
  m.write(dir);
  const RunResult r = run_advect_case(spec);
  std::vector<std::string> names{"mass", "min_alpha", "max_alpha", "area_r1", "area_r2"};
  series_table(r.report, names, r.dt).write(dir / "series.csv");
  convergence_table(r.rows).write(dir / "summary.csv");
  if (o.vtk) write_vtk(dir / "fields.vtk", {{"alpha_initial", &r.initial}, {"alpha", &r.final_alpha}});
  print_rows(r.rows);
  std::printf("output: %s\n", dir.string().c_str());
  return 0;
}

int cmd_converge(const Options& o, const CaseSpec& spec) {
  const fs::path dir = out_dir(o, spec);
  const std::vector<double> levels = sweep_levels(spec, o.large);
  Manifest m(o, spec);
  m.plan("convergence.csv");
  for (double l : levels) {
    const std::string id = level_id(l);
    m.plan(id + (spec.advect ? "_series.csv" : "_trace.csv"));
    if (o.vtk) m.plan(id + ".vtk");
  }
  m.write(dir);
  const std::vector<RunResult> results = run_sweep(spec, levels, o.jobs);
  for (const auto& r : results) {
    if (spec.advect)
      series_table(r.report, {"mass", "min_alpha", "max_alpha", "area_r1", "area_r2"}, r.dt).write(dir / (r.grid_id + "_series.csv"));
    else
      trace_table(r.trace.l1_per_step, r.dt).write(dir / (r.grid_id + "_trace.csv"));
    if (o.vtk) write_vtk(dir / (r.grid_id + ".vtk"), {{"alpha", &r.final_alpha}});
  }
  const std::vector<ConvergenceRow> rows = sweep_rows(results);
  convergence_table(rows).write(dir / "convergence.csv");
  print_rows(rows);
  // Least-squares order per (mapping, norm) over all levels.
  std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, std::vector<double>>> fits;
  for (const auto& r : rows) {
    if (!(r.value > 0.0)) continue;
    auto& f = fits[{r.mapping, r.norm}];
    f.first.push_back(1.0 / r.cells);
    f.second.push_back(r.value);
  }
  std::printf("\nfitted orders:\n");
  for (const auto& [key, f] : fits)
    if (f.first.size() >= 2)
      std::printf("  %-10s %-26s %.3f\n", key.first.c_str(), key.second.c_str(), fitted_order(f.first, f.second));
  std::printf("output: %s\n", dir.string().c_str());
  return 0;
}

int cmd_derivs(const Options& o, const CaseSpec& spec) {
  const fs::path dir = out_dir(o, spec);
  Manifest m(o, spec);
  m.plan("derivs.csv");
  if (o.vtk) m.plan("derivs.vtk");
  m.write(dir);
  const ResolvedCase rc = resolve(spec);
  const ScalarField alpha = init_case(spec, rc);
  const Grid& g = rc.grid;
  const int dim = g.dim();
  const DerivativeBundle d = hessian_alpha_mapped(alpha, rc.reinit.kind, rc.params);
  const ScalarField kappa = curvature_field(alpha, rc.reinit.kind, rc.params).kappa;
  const ScalarField kex = exact_curvature(spec, g);
  const ScalarField psi = psi0_field(alpha, rc.params);
  std::vector<std::string> header{"i", "j", "k", "x", "y", "z", "alpha", "psi0"};
  const char* ax = "xyz";
  for (int a = 0; a < dim; ++a) header.push_back(std::string("alpha_") + ax[a]);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) header.push_back(std::string("alpha_") + ax[i] + ax[j]);
  header.push_back("kappa");
  header.push_back("kappa_exact");
  CsvTable t(header);
  // Band cells only; the full fields go to the VTK file.
  g.for_each_cell([&](int i, int j, int k, std::size_t n) {
    if (alpha[n] < 0.05 || alpha[n] > 0.95) return;
    const auto x = g.center(i, j, k);
    std::vector<std::string> row{std::to_string(i), std::to_string(j), std::to_string(k), format_real(x[0]),
                                 format_real(x[1]), format_real(x[2]), format_real(alpha[n]), format_real(psi[n])};
    for (int a = 0; a < dim; ++a) row.push_back(format_real(d.grad[a][n]));
    for (int a = 0; a < dim; ++a)
      for (int b = a; b < dim; ++b) row.push_back(format_real(d.h(a, b)[n]));
    row.push_back(format_real(kappa[n]));
    row.push_back(format_real(kex[n]));
    t.add(std::move(row));
  });
  t.write(dir / "derivs.csv");
  if (o.vtk) write_vtk(dir / "derivs.vtk", {{"alpha", &alpha}, {"psi0", &psi}, {"kappa", &kappa}, {"kappa_exact", &kex}});
  std::printf("%zu band cells written to %s\n", t.size(), (dir / "derivs.csv").string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conservative level-set re-initialization toolkit"};
  app.set_version_flag("--version", std::string(LSK_VERSION));
  Options o;
  app.add_option("command", o.command, "reinit | advect | converge | derivs")
      ->required()
      ->check(CLI::IsMember({"reinit", "advect", "converge", "derivs"}));
  app.add_option("config", o.config, "case file (TOML subset)")->required();
  app.add_option("--out", o.out, "output directory (default out/<case name>)");
  app.add_flag("--large", o.large, "include the large grid levels of a sweep");
  app.add_flag("--vtk", o.vtk, "also write ASCII VTK fields");
  app.add_option("--jobs", o.jobs, "concurrent sweep runs (default: hardware threads)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  try {
    const CaseSpec spec = load_case(o.config);
    o.vtk = o.vtk || spec.output.vtk;
    if (o.command == "reinit") return cmd_reinit(o, spec);
    if (o.command == "advect") return cmd_advect(o, spec);
    if (o.command == "converge") return cmd_converge(o, spec);
    return cmd_derivs(o, spec);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const DataIntegrityError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
}
