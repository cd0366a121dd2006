#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "levelset/advection.hpp"
#include "levelset/config.hpp"
#include "levelset/diagnostics.hpp"
#include "levelset/io.hpp"
#include "levelset/reinit.hpp"

namespace lsk {

struct Heaviside1D {
  double x_gamma = 0.5;
};
struct Circle2D {
  Point2 center{0.5, 0.5};
  double radius = 0.2;
};
// psi0 = 1/2 - y + A sin(4 pi x) sin(4 pi z)
struct Wavy3D {
  double amplitude = 0.03125;
};
using InitSpec = std::variant<Heaviside1D, Circle2D, Wavy3D>;

struct ReinitSpec {
  MappingKind mapping = Psi0{};
  std::optional<double> eps_h_fraction;  // eps_h / dx; sqrt(dim)/4 if unset
  double C = 1.0;
  int n_tau = 256;
  std::optional<double> dtau_fraction;  // dtau / eps_h; solver default if unset
  std::optional<double> stop_l1;
  ReinitForm form = ReinitForm::Conservative;
  bool freeze_normals = false;
};

struct AdvectSpec {
  VelocityModel velocity = Rotation{};
  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<int> n_steps;
  Limiter limiter = Limiter::Minmod;
  TimeScheme scheme = TimeScheme::Euler;
  int n_tau_per_step = 1;
};

struct OutputSpec {
  std::vector<double> bands{0.05, 0.5, 0.95};
  bool vtk = false;
};

struct SweepSpec {
  std::vector<double> levels;
  std::vector<double> large_levels;
};

struct CaseSpec {
  std::string name;
  int dim = 2;
  std::optional<double> level;
  int cells = 64;
  Box box;
  std::array<Boundary, 3> bc{};
  InitSpec init = Circle2D{};
  double eps0_factor = 1.0;  // initial width relative to the target
  ReinitSpec reinit;
  std::optional<AdvectSpec> advect;
  OutputSpec output;
  SweepSpec sweep;
};

inline int init_dim(const InitSpec& init) {
  if (std::holds_alternative<Heaviside1D>(init)) return 1;
  if (std::holds_alternative<Circle2D>(init)) return 2;
  return 3;
}

namespace detail {

inline MappingKind parse_mapping(const Config& c) {
  const std::string m = c.string("reinit.mapping", "psi0");
  const double eps = c.number("reinit.eps", kUnderflowGuard);
  MappingKind k;
  if (m == "psi0") k = Psi0{};
  else if (m == "alpha") k = RawAlpha{};
  else if (m == "psi1") k = Psi1{c.number("reinit.gamma", 0.1), eps};
  else if (m == "psi0prime") k = Psi0Prime{c.number("reinit.gamma", kDefaultGamma), eps};
  else throw ConfigError(c.origin() + ": unknown reinit.mapping '" + m + "'");
  if (std::holds_alternative<Psi0>(k) || std::holds_alternative<RawAlpha>(k)) {
    if (c.has("reinit.gamma")) throw ConfigError(c.origin() + ": reinit.gamma needs mapping psi1 or psi0prime");
  }
  try {
    validate(k);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(c.origin() + ": " + e.what());
  }
  return k;
}

inline Point2 parse_point(const Config& c, const std::string& key, Point2 fallback) {
  if (!c.has(key)) return fallback;
  const auto v = c.numbers(key);
  if (v.size() != 2) throw ConfigError(c.origin() + ": '" + key + "' needs two numbers");
  return {v[0], v[1]};
}

template <class E>
E pick(const Config& c, const std::string& key, const std::vector<std::pair<std::string, E>>& names, E fallback) {
  if (!c.has(key)) return fallback;
  const std::string s = c.string(key);
  for (const auto& [n, e] : names)
    if (n == s) return e;
  throw ConfigError(c.origin() + ": unknown value '" + s + "' for '" + key + "'");
}

}  // namespace detail

inline CaseSpec parse_case(const Config& c) {
  CaseSpec s;
  s.name = c.string("case.name");
  const std::string init = c.string("case.init");
  if (init == "heaviside1d") s.init = Heaviside1D{c.number("case.x_gamma", 0.5)};
  else if (init == "circle2d") s.init = Circle2D{detail::parse_point(c, "case.center", {0.5, 0.5}), c.number("case.radius", 0.2)};
  else if (init == "wavy3d") s.init = Wavy3D{c.number("case.amplitude", 0.03125)};
  else throw ConfigError(c.origin() + ": unknown case.init '" + init + "'");
  s.eps0_factor = c.number("case.eps0_factor", 1.0);
  if (!(s.eps0_factor > 0.0)) throw ConfigError(c.origin() + ": case.eps0_factor must be positive");

  s.dim = c.integer("grid.dim", init_dim(s.init));
  if (s.dim != init_dim(s.init))
    throw ConfigError(c.origin() + ": case.init '" + init + "' needs grid.dim = " + std::to_string(init_dim(s.init)));
  if (c.has("grid.level") == c.has("grid.nc")) throw ConfigError(c.origin() + ": give exactly one of grid.level, grid.nc");
  if (c.has("grid.level")) s.level = c.number("grid.level");
  else s.cells = c.integer("grid.nc");
  for (const char* k : {"grid.lo", "grid.hi"}) {
    if (!c.has(k)) continue;
    const auto v = c.numbers(k);
    if (static_cast<int>(v.size()) != s.dim) throw ConfigError(c.origin() + ": '" + k + "' needs grid.dim numbers");
    for (int a = 0; a < s.dim; ++a) (std::string(k) == "grid.lo" ? s.box.lo : s.box.hi)[a] = v[a];
  }
  if (c.has("grid.periodic")) {
    for (const auto& ax : c.strings("grid.periodic")) {
      const int a = ax == "x" ? 0 : ax == "y" ? 1 : ax == "z" ? 2 : -1;
      if (a < 0 || a >= s.dim) throw ConfigError(c.origin() + ": bad periodic axis '" + ax + "'");
      s.bc[a] = Boundary::Periodic;
    }
  }

  s.reinit.mapping = detail::parse_mapping(c);
  if (c.has("reinit.eps_h_fraction")) s.reinit.eps_h_fraction = c.number("reinit.eps_h_fraction");
  s.reinit.C = c.number("reinit.C", 1.0);
  s.reinit.n_tau = c.integer("reinit.n_tau", 256);
  if (c.has("reinit.dtau_fraction")) s.reinit.dtau_fraction = c.number("reinit.dtau_fraction");
  if (c.has("reinit.stop_l1")) s.reinit.stop_l1 = c.number("reinit.stop_l1");
  s.reinit.form = detail::pick<ReinitForm>(
      c, "reinit.form", {{"conservative", ReinitForm::Conservative}, {"nonconservative", ReinitForm::NonConservative}},
      ReinitForm::Conservative);
  s.reinit.freeze_normals = c.boolean("reinit.freeze_normals", false);

  if (c.has("advect.velocity")) {
    if (s.dim != 2) throw ConfigError(c.origin() + ": advection cases are two-dimensional");
    AdvectSpec a;
    const std::string v = c.string("advect.velocity");
    const double V0 = c.number("advect.V0", 1.0), L = c.number("advect.L", 1.0);
    if (v == "rotation") {
      a.velocity = Rotation{V0, L, detail::parse_point(c, "advect.center", {0.5, 0.5})};
    } else if (v == "vortex") {
      Vortex w{V0, L, {}};
      if (c.has("advect.reverse_at")) w.reverse_at = c.number("advect.reverse_at");
      a.velocity = w;
    } else {
      throw ConfigError(c.origin() + ": unknown advect.velocity '" + v + "'");
    }
    if (c.has("advect.dt")) a.dt = c.number("advect.dt");
    if (c.has("advect.t_end")) a.t_end = c.number("advect.t_end");
    if (c.has("advect.n_steps")) a.n_steps = c.integer("advect.n_steps");
    a.limiter = detail::pick<Limiter>(c, "advect.limiter", {{"minmod", Limiter::Minmod}, {"vanleer", Limiter::VanLeer}},
                                      Limiter::Minmod);
    a.scheme = detail::pick<TimeScheme>(c, "advect.scheme", {{"euler", TimeScheme::Euler}, {"rk3", TimeScheme::RK3}},
                                        TimeScheme::Euler);
    a.n_tau_per_step = c.integer("advect.n_tau_per_step", 1);
    s.advect = a;
  }
  if (c.has("output.bands")) s.output.bands = c.numbers("output.bands");
  s.output.vtk = c.boolean("output.vtk", false);
  if (c.has("sweep.levels")) s.sweep.levels = c.numbers("sweep.levels");
  if (c.has("sweep.large_levels")) s.sweep.large_levels = c.numbers("sweep.large_levels");
  c.ignore_table("manifest");
  c.reject_unknown();
  return s;
}

inline CaseSpec load_case(const std::string& path) { return parse_case(Config::load(path)); }

namespace detail {

inline std::string toml_real(double v) {
  std::ostringstream o;
  o.precision(17);
  o << v;
  std::string s = o.str();
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

inline std::string toml_list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + toml_real(v[i]);
  return s + "]";
}

}  // namespace detail

// Resolved config text; parses back to the same CaseSpec.
inline std::string to_toml(const CaseSpec& s) {
  using detail::toml_list;
  using detail::toml_real;
  std::ostringstream o;
  o << "[case]\nname = \"" << s.name << "\"\n";
  std::visit(
      [&](const auto& i) {
        using I = std::decay_t<decltype(i)>;
        if constexpr (std::is_same_v<I, Heaviside1D>) o << "init = \"heaviside1d\"\nx_gamma = " << toml_real(i.x_gamma) << '\n';
        else if constexpr (std::is_same_v<I, Circle2D>)
          o << "init = \"circle2d\"\ncenter = " << toml_list({i.center.x, i.center.y}) << "\nradius = " << toml_real(i.radius) << '\n';
        else o << "init = \"wavy3d\"\namplitude = " << toml_real(i.amplitude) << '\n';
      },
      s.init);
  o << "eps0_factor = " << toml_real(s.eps0_factor) << "\n\n[grid]\ndim = " << s.dim << '\n';
  if (s.level) o << "level = " << toml_real(*s.level) << '\n';
  else o << "nc = " << s.cells << '\n';
  std::vector<double> lo, hi;
  for (int a = 0; a < s.dim; ++a) {
    lo.push_back(s.box.lo[a]);
    hi.push_back(s.box.hi[a]);
  }
  o << "lo = " << toml_list(lo) << "\nhi = " << toml_list(hi) << "\nperiodic = [";
  bool first = true;
  for (int a = 0; a < s.dim; ++a)
    if (s.bc[a] == Boundary::Periodic) {
      o << (first ? "" : ", ") << '"' << "xyz"[a] << '"';
      first = false;
    }
  o << "]\n\n[reinit]\nmapping = \"" << mapping_name(s.reinit.mapping) << "\"\n";
  if (auto* p = std::get_if<Psi1>(&s.reinit.mapping)) o << "gamma = " << toml_real(p->gamma) << "\neps = " << toml_real(p->eps) << '\n';
  if (auto* p = std::get_if<Psi0Prime>(&s.reinit.mapping))
    o << "gamma = " << toml_real(p->gamma) << "\neps = " << toml_real(p->eps) << '\n';
  if (s.reinit.eps_h_fraction) o << "eps_h_fraction = " << toml_real(*s.reinit.eps_h_fraction) << '\n';
  o << "C = " << toml_real(s.reinit.C) << "\nn_tau = " << s.reinit.n_tau << '\n';
  if (s.reinit.dtau_fraction) o << "dtau_fraction = " << toml_real(*s.reinit.dtau_fraction) << '\n';
  if (s.reinit.stop_l1) o << "stop_l1 = " << toml_real(*s.reinit.stop_l1) << '\n';
  o << "form = \"" << (s.reinit.form == ReinitForm::Conservative ? "conservative" : "nonconservative") << "\"\n";
  o << "freeze_normals = " << (s.reinit.freeze_normals ? "true" : "false") << '\n';
  if (s.advect) {
    const auto& a = *s.advect;
    o << "\n[advect]\n";
    if (auto* r = std::get_if<Rotation>(&a.velocity))
      o << "velocity = \"rotation\"\nV0 = " << toml_real(r->V0) << "\nL = " << toml_real(r->L)
        << "\ncenter = " << toml_list({r->center.x, r->center.y}) << '\n';
    if (auto* v = std::get_if<Vortex>(&a.velocity)) {
      o << "velocity = \"vortex\"\nV0 = " << toml_real(v->V0) << "\nL = " << toml_real(v->L) << '\n';
      if (v->reverse_at) o << "reverse_at = " << toml_real(*v->reverse_at) << '\n';
    }
    if (a.dt) o << "dt = " << toml_real(*a.dt) << '\n';
    if (a.t_end) o << "t_end = " << toml_real(*a.t_end) << '\n';
    if (a.n_steps) o << "n_steps = " << *a.n_steps << '\n';
    o << "limiter = \"" << (a.limiter == Limiter::Minmod ? "minmod" : "vanleer") << "\"\nscheme = \""
      << (a.scheme == TimeScheme::Euler ? "euler" : "rk3") << "\"\nn_tau_per_step = " << a.n_tau_per_step << '\n';
  }
  o << "\n[output]\nbands = " << toml_list(s.output.bands) << "\nvtk = " << (s.output.vtk ? "true" : "false") << '\n';
  o << "\n[sweep]\nlevels = " << toml_list(s.sweep.levels) << "\nlarge_levels = " << toml_list(s.sweep.large_levels)
    << '\n';
  return o.str();
}

// Everything a run needs once the grid level is fixed.
struct ResolvedCase {
  Grid grid;
  std::string grid_id;
  double level = 0.0;  // refinement index i of m_i; 0 when unknown
  InterfaceParams params;
  ReinitConfig reinit;
  std::optional<AdvectConfig> advect;
  VelocityModel velocity = Rotation{};
};

inline std::string level_id(double level) {
  std::ostringstream o;
  o << 'm' << level;
  return o.str();
}

inline ResolvedCase resolve(const CaseSpec& s, std::optional<double> level_override = {}) {
  const std::optional<double> level = level_override ? level_override : s.level;
  const int n = level ? cells_for_level(*level) : s.cells;
  Grid g;
  try {
    g = build_grid(s.dim, n, s.box, 2, s.bc);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  const double frac = s.reinit.eps_h_fraction.value_or(std::sqrt(static_cast<double>(s.dim)) / 4.0);
  if (!(frac > 0.0)) throw ConfigError("reinit: eps_h_fraction must be positive");
  const InterfaceParams p(frac * g.spacing(0), s.reinit.C);
  ReinitConfig rc(p, s.reinit.mapping, std::max(s.reinit.n_tau, 1));
  rc.n_tau = s.reinit.n_tau;
  if (s.reinit.dtau_fraction) rc.dtau = *s.reinit.dtau_fraction * p.eps_h();
  rc.stop_l1 = s.reinit.stop_l1;
  rc.form = s.reinit.form;
  rc.freeze_normals = s.reinit.freeze_normals;
  const double lvl = level ? *level : std::log2(static_cast<double>(n)) - 4.0;
  ResolvedCase r{g, level ? level_id(*level) : "n" + std::to_string(n), lvl, p, rc, std::nullopt, Rotation{}};
  if (s.advect) {
    const auto& a = *s.advect;
    ReinitConfig ar = rc;
    ar.n_tau = std::max(a.n_tau_per_step, 1);
    AdvectConfig ac(ar);
    ac.limiter = a.limiter;
    ac.scheme = a.scheme;
    ac.n_tau_per_step = a.n_tau_per_step;
    if (auto* c = std::get_if<Circle2D>(&s.init)) ac.area_radius = c->radius;
    const auto* rot = std::get_if<Rotation>(&a.velocity);
    // Defaults: 360 i steps per revolution, or dx/8 for the vortex.
    const double period = rot ? 2.0 * std::numbers::pi * rot->L / rot->V0 : 0.0;
    if (a.dt) ac.dt = *a.dt;
    else if (rot) ac.dt = period / std::round(360.0 * lvl);
    else ac.dt = g.spacing(0) / 8.0;
    if (!(ac.dt > 0.0) || !std::isfinite(ac.dt)) throw ConfigError("advect: dt must be positive");
    if (a.n_steps) ac.n_steps = *a.n_steps;
    else if (a.t_end) ac.n_steps = static_cast<int>(std::lround(*a.t_end / ac.dt));
    else if (rot) ac.n_steps = static_cast<int>(std::lround(period / ac.dt));
    else throw ConfigError("advect: the vortex case needs t_end or n_steps");
    if (ac.n_steps < 0) throw ConfigError("advect: n_steps must be >= 0");
    r.advect = ac;
    r.velocity = a.velocity;
  }
  return r;
}

// Analytic psi0 of the case (signed distance, or the algebraic wavy form).
inline double case_psi0(const InitSpec& init, double x, double y, double z) {
  if (auto* h = std::get_if<Heaviside1D>(&init)) return x - h->x_gamma;
  if (auto* c = std::get_if<Circle2D>(&init)) return std::hypot(x - c->center.x, y - c->center.y) - c->radius;
  const double A = std::get<Wavy3D>(init).amplitude, k = 4.0 * std::numbers::pi;
  return 0.5 - y + A * std::sin(k * x) * std::sin(k * z);
}

inline ScalarField init_case(const CaseSpec& s, const ResolvedCase& r) {
  const InterfaceParams p0(s.eps0_factor * r.params.eps_h(), r.params.C());
  ScalarField a(r.grid);
  a.assign([&](double x, double y, double z) { return alpha_from_psi0(case_psi0(s.init, x, y, z), p0); });
  fill_ghosts(a);
  return a;
}

// Target profile of width eps_h.
inline ScalarField exact_alpha(const CaseSpec& s, const ResolvedCase& r) {
  ScalarField a(r.grid);
  a.assign([&](double x, double y, double z) { return alpha_from_psi0(case_psi0(s.init, x, y, z), r.params); });
  fill_ghosts(a);
  return a;
}

// div(grad psi0 / |grad psi0|) of the analytic psi0 at the cell centres.
inline ScalarField exact_curvature(const CaseSpec& s, const Grid& g) {
  ScalarField k(g);
  g.for_each_cell([&](int i, int j, int kk, std::size_t n) {
    const auto x = g.center(i, j, kk);
    if (std::holds_alternative<Heaviside1D>(s.init)) return;
    if (auto* c = std::get_if<Circle2D>(&s.init)) {
      const double r = std::hypot(x[0] - c->center.x, x[1] - c->center.y);
      k[n] = r > 0.0 ? 1.0 / r : 0.0;
      return;
    }
    const double A = std::get<Wavy3D>(s.init).amplitude, w = 4.0 * std::numbers::pi;
    const double sx = std::sin(w * x[0]), cx = std::cos(w * x[0]), sz = std::sin(w * x[2]), cz = std::cos(w * x[2]);
    const double gv[3] = {A * w * cx * sz, -1.0, A * w * sx * cz};
    double H[6] = {};
    H[hessian_slot(0, 0, 3)] = -A * w * w * sx * sz;
    H[hessian_slot(2, 2, 3)] = -A * w * w * sx * sz;
    H[hessian_slot(0, 2, 3)] = A * w * w * cx * cz;
    double kap = 0.0;
    curvature_from_derivatives(gv, H, 3, kap);
    k[n] = kap;
  });
  return k;
}

// Max over band cells of | |grad psi0| - 1 | with centred differences.
inline double sdf_defect(const ScalarField& alpha, const InterfaceParams& p, double lo = 0.05, double hi = 0.95) {
  ScalarField a = alpha;
  fill_ghosts(a);
  const ScalarField m = gradient_magnitude(center_gradient(psi0_field(a, p)));
  double worst = 0.0;
  a.grid().for_each_cell([&](int, int, int, std::size_t n) {
    if (a[n] >= lo && a[n] <= hi) worst = std::max(worst, std::abs(m[n] - 1.0));
  });
  return worst;
}

struct RunResult {
  std::string grid_id;
  int cells = 0;
  double eps_h = 0.0;
  std::vector<ConvergenceRow> rows;
  ConvergenceTrace trace;
  DiagnosticsReport report;
  ScalarField initial;
  ScalarField final_alpha;
  double dt = 0.0;
};

namespace detail {

inline void add_row(RunResult& r, const std::string& mapping, const std::string& norm, double v) {
  r.rows.push_back({r.grid_id, r.cells, r.eps_h, mapping, norm, v, std::nullopt});
}

inline std::string band_tag(double b) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", b);
  return buf;
}

}  // namespace detail

// Re-initialization run plus the error measures of its case family.
inline RunResult run_reinit_case(const CaseSpec& s, std::optional<double> level = {}) {
  const ResolvedCase rc = resolve(s, level);
  RunResult out;
  out.grid_id = rc.grid_id;
  out.cells = rc.grid.cells(0);
  out.eps_h = rc.params.eps_h();
  out.dt = rc.reinit.dtau;
  out.initial = init_case(s, rc);
  auto [alpha, trace] = reinitialize(out.initial, rc.reinit);
  out.final_alpha = std::move(alpha);
  out.trace = std::move(trace);
  const std::string map = mapping_name(rc.reinit.kind);
  const InterfaceParams& p = rc.params;
  detail::add_row(out, map, "final_L1", out.trace.l1_per_step.empty() ? 0.0 : out.trace.l1_per_step.back());
  detail::add_row(out, map, "sdf_Linf", sdf_defect(out.final_alpha, p));

  if (std::holds_alternative<Heaviside1D>(s.init)) {
    const ScalarField ex = exact_alpha(s, rc);
    detail::add_row(out, map, "profile_L1", l1_change(out.final_alpha, ex));
  } else if (auto* c = std::get_if<Circle2D>(&s.init)) {
    // Curvature always from the psi0 mapping, as in the measurement procedure.
    CurvatureOptions full;
    full.full_field = true;
    const ScalarField k = curvature_field(out.final_alpha, Psi0{}, p, full).kappa;
    for (double b : s.output.bands) {
      for (auto rep : {Representation::Psi0, Representation::Alpha}) {
        const auto e = circle_curvature_error(k, out.final_alpha, p, b, c->center, rep);
        detail::add_row(out, map, "kappa_circle_" + detail::band_tag(b) + (rep == Representation::Psi0 ? "_psi0" : "_alpha"),
                        e.value);
      }
    }
    const ScalarField kb = curvature_field(out.final_alpha, Psi0{}, p).kappa;
    const BandNorms bn = band_curvature_norms(kb, exact_curvature(s, rc.grid), out.final_alpha);
    detail::add_row(out, map, "kappa_L1", bn.L1);
    detail::add_row(out, map, "kappa_L2", bn.L2);
    detail::add_row(out, map, "kappa_Linf", bn.Linf);
  } else {
    // With frozen normals every derivative is taken once, before the
    // first step; the curvature measured afterwards is that one.
    const ScalarField& basis = rc.reinit.freeze_normals ? out.initial : out.final_alpha;
    const ScalarField k = curvature_field(basis, rc.reinit.kind, p).kappa;
    const ScalarField kex = exact_curvature(s, rc.grid);
    const BandNorms bn = band_curvature_norms(k, kex, basis);
    detail::add_row(out, map, "kappa_L1", bn.L1);
    detail::add_row(out, map, "kappa_L2", bn.L2);
    detail::add_row(out, map, "kappa_L2_verbatim", bn.L2_verbatim);
    detail::add_row(out, map, "kappa_Linf", bn.Linf);
    ScalarField err(rc.grid);
    rc.grid.for_each_cell([&](int, int, int, std::size_t n) { err[n] = k[n] - kex[n]; });
    fill_ghosts(err);
    detail::add_row(out, map, "kappa_Linf_gamma_alpha", interface_max_error(err, basis, 0.5));
    detail::add_row(out, map, "kappa_Linf_gamma_psi0", interface_max_error(err, psi0_field(basis, p), 0.0));
  }
  return out;
}

// Where the circle centre should be at time t, if known.
inline std::optional<Point2> exact_center(const VelocityModel& m, Point2 c0, double t) {
  if (auto* r = std::get_if<Rotation>(&m)) {
    const double th = -r->V0 / r->L * t, cs = std::cos(th), sn = std::sin(th);
    const double dx = c0.x - r->center.x, dy = c0.y - r->center.y;
    return Point2{r->center.x + cs * dx - sn * dy, r->center.y + sn * dx + cs * dy};
  }
  if (auto* v = std::get_if<Vortex>(&m)) {
    if (v->reverse_at && std::abs(t - 2.0 * *v->reverse_at) < 1e-9) return c0;
    if (std::abs(t) < 1e-12) return c0;
  }
  return std::nullopt;
}

inline RunResult run_advect_case(const CaseSpec& s, std::optional<double> level = {}, const StepObserver& observe = {}) {
  if (!s.advect) throw ConfigError("case '" + s.name + "' has no [advect] table");
  const auto* circle = std::get_if<Circle2D>(&s.init);
  if (!circle) throw ConfigError("advection cases need case.init = \"circle2d\"");
  const ResolvedCase rc = resolve(s, level);
  RunResult out;
  out.grid_id = rc.grid_id;
  out.cells = rc.grid.cells(0);
  out.eps_h = rc.params.eps_h();
  out.dt = rc.advect->dt;
  out.initial = init_case(s, rc);
  auto [alpha, rep] = run_coupled(out.initial, rc.velocity, *rc.advect, observe);
  out.final_alpha = std::move(alpha);
  out.report = std::move(rep);
  const std::string map = mapping_name(rc.reinit.kind);
  const double t_end = rc.advect->dt * rc.advect->n_steps;
  if (auto c = exact_center(rc.velocity, circle->center, t_end)) {
    const int ns = 4 * rc.grid.cells(0);
    const IsoContour ca = extract_isocontour(out.final_alpha, 0.5, ns);
    const IsoContour cp = extract_isocontour(psi0_field(out.final_alpha, rc.params), 0.0, ns);
    detail::add_row(out, map, "L1r_alpha", position_error(ca, *c, circle->radius));
    detail::add_row(out, map, "L1r_psi0", position_error(cp, *c, circle->radius));
  }
  for (const char* n : {"area_r1", "area_r2"}) {
    const auto& v = out.report.series.at(n);
    detail::add_row(out, map, std::string("Et_") + (n + 5), out.report.series.at(std::string(n) + "_Et").front());
    detail::add_row(out, map, std::string("Emax_") + (n + 5), *std::max_element(v.begin(), v.end()));
  }
  const auto& mass = out.report.series.at("mass");
  detail::add_row(out, map, "mass_drift", std::abs(mass.back() - mass.front()) / mass.front());
  return out;
}

inline RunResult run_case(const CaseSpec& s, std::optional<double> level = {}) {
  return s.advect ? run_advect_case(s, level) : run_reinit_case(s, level);
}

inline std::vector<double> sweep_levels(const CaseSpec& s, bool large) {
  std::vector<double> lv = s.sweep.levels;
  if (large) lv.insert(lv.end(), s.sweep.large_levels.begin(), s.sweep.large_levels.end());
  if (lv.empty() && s.level) lv.push_back(*s.level);
  if (lv.empty()) throw ConfigError("sweep: no levels given");
  std::sort(lv.begin(), lv.end());
  return lv;
}

// Runs every level, at most `jobs` at a time, each with its own state.
// Rows come back in level order with observed orders filled in.
inline std::vector<RunResult> run_sweep(const CaseSpec& s, const std::vector<double>& levels, unsigned jobs = 0) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  std::vector<RunResult> results(levels.size());
  for (std::size_t b = 0; b < levels.size(); b += jobs) {
    std::vector<std::future<RunResult>> fs;
    for (std::size_t i = b; i < std::min(levels.size(), b + jobs); ++i)
      fs.push_back(std::async(std::launch::async, [&s, l = levels[i]] { return run_case(s, l); }));
    for (std::size_t i = 0; i < fs.size(); ++i) results[b + i] = fs[i].get();
  }
  return results;
}

inline std::vector<ConvergenceRow> sweep_rows(const std::vector<RunResult>& results) {
  std::vector<ConvergenceRow> rows;
  for (const auto& r : results) rows.insert(rows.end(), r.rows.begin(), r.rows.end());
  std::stable_sort(rows.begin(), rows.end(), [](const ConvergenceRow& a, const ConvergenceRow& b) {
    return std::tie(a.mapping, a.norm) < std::tie(b.mapping, b.norm);
  });
  fill_observed_orders(rows);
  return rows;
}

}  // namespace lsk
