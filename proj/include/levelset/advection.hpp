#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "levelset/diagnostics.hpp"
#include "levelset/error.hpp"
#include "levelset/grid.hpp"
#include "levelset/reinit.hpp"

namespace lsk {

// Rigid rotation about center: V0/L (y - yc, xc - x).
struct Rotation {
  double V0 = 1.0;
  double L = 1.0;
  Point2 center{0.5, 0.5};
};

// Single vortex; the sign flips once t reaches reverse_at.
struct Vortex {
  double V0 = 1.0;
  double L = 1.0;
  std::optional<double> reverse_at;
};

// Cell-centred samples, held fixed in time.
struct Sampled {
  VectorField u;
};

using VelocityModel = std::variant<Rotation, Vortex, Sampled>;

enum class Limiter { Minmod, VanLeer };
enum class TimeScheme { Euler, RK3 };

struct AdvectConfig {
  double dt = 0.0;
  int n_steps = 0;
  Limiter limiter = Limiter::Minmod;
  TimeScheme scheme = TimeScheme::Euler;
  int n_tau_per_step = 0;
  ReinitConfig reinit;
  // Radius of the circular inner phase; switches on the area series.
  std::optional<double> area_radius;

  explicit AdvectConfig(ReinitConfig r) : reinit(std::move(r)) {}
};

inline constexpr double kMaxCourant = 0.5;

namespace detail {

inline double vortex_sign(const Vortex& v, double t) { return v.reverse_at && t >= *v.reverse_at ? -1.0 : 1.0; }

// Stream function with u = d/dy, v = -d/dx.
inline double stream_function(const VelocityModel& m, double x, double y, double t) {
  if (auto* r = std::get_if<Rotation>(&m)) {
    const double dx = x - r->center.x, dy = y - r->center.y;
    return 0.5 * r->V0 / r->L * (dx * dx + dy * dy);
  }
  const auto& v = std::get<Vortex>(m);
  const double k = std::numbers::pi / v.L;
  const double sx = std::sin(k * x), sy = std::sin(k * y);
  return -vortex_sign(v, t) * v.V0 / k * sx * sx * sy * sy;
}

}  // namespace detail

inline std::array<double, 2> velocity_sample(const VelocityModel& m, Point2 x, double t) {
  if (auto* r = std::get_if<Rotation>(&m)) return {r->V0 / r->L * (x.y - r->center.y), r->V0 / r->L * (r->center.x - x.x)};
  if (auto* v = std::get_if<Vortex>(&m)) {
    const double k = std::numbers::pi / v->L, s = detail::vortex_sign(*v, t) * v->V0;
    const double sx = std::sin(k * x.x), sy = std::sin(k * x.y);
    return {-s * sx * sx * std::sin(2 * k * x.y), s * sy * sy * std::sin(2 * k * x.x)};
  }
  throw std::invalid_argument("velocity_sample: sampled fields have no point evaluation");
}

inline VectorField sample_velocity(const VelocityModel& m, const Grid& g, double t) {
  if (auto* s = std::get_if<Sampled>(&m)) return s->u;
  VectorField out(g);
  g.for_each_cell([&](int i, int j, int, std::size_t n) {
    const auto u = velocity_sample(m, {g.center(0, i), g.center(1, j)}, t);
    out[0][n] = u[0];
    out[1][n] = u[1];
  });
  fill_ghosts(out);
  return out;
}

// Faces normal to axis, each given by the coordinates (i, j) and storage
// index of its low-side cell and the interior index receiving the flux on the high side (or
// npos at a wall). Periodic axes visit n faces, walled axes n + 1.
template <class F>
void for_each_face(const Grid& g, int axis, F&& f) {
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  const bool periodic = g.boundary(axis) == Boundary::Periodic;
  const int n = g.cells(axis);
  const std::ptrdiff_t st = g.stride(axis);
  std::array<int, 3> lo{0, 0, 0}, hi{g.cells(0), g.cells(1), g.cells(2)};
  lo[axis] = periodic ? 0 : -1;
  for (int k = lo[2]; k < hi[2]; ++k)
    for (int j = lo[1]; j < hi[1]; ++j)
      for (int i = lo[0]; i < hi[0]; ++i) {
        const int c = axis == 0 ? i : axis == 1 ? j : k;
        const std::size_t low = g.index(i, j, k);
        const bool low_in = c >= 0;
        std::size_t high = npos;
        if (c + 1 < n) high = low + st;
        else if (periodic) high = low + st - static_cast<std::ptrdiff_t>(n) * st;
        f(i, j, low, low_in ? low : npos, high);
      }
}

// Normal velocity per face, stored at the low-side cell's index. Analytic
// models integrate the stream function across the face, so every cell's
// discrete divergence is zero up to rounding.
struct FaceVelocity {
  std::array<std::vector<double>, 3> un;
};

inline FaceVelocity face_velocity(const VelocityModel& m, const Grid& g, double t) {
  if (g.dim() != 2 && !std::holds_alternative<Sampled>(m))
    throw ConfigError("advection: analytic velocity models are two-dimensional");
  FaceVelocity fv;
  for (int a = 0; a < g.dim(); ++a) fv.un[a].assign(g.storage_size(), 0.0);
  if (auto* s = std::get_if<Sampled>(&m)) {
    if (!(s->u.grid() == g)) throw DataIntegrityError("advection: sampled velocity on a different grid");
    VectorField u = s->u;
    fill_ghosts(u);
    for (int a = 0; a < g.dim(); ++a) {
      const std::ptrdiff_t st = g.stride(a);
      const auto& c = u[a].values();
      for_each_face(g, a, [&](int, int, std::size_t low, std::size_t, std::size_t) {
        fv.un[a][low] = 0.5 * (c[low] + c[low + st]);
      });
    }
    return fv;
  }
  const double hx = g.spacing(0), hy = g.spacing(1);
  auto psi = [&](double x, double y) { return detail::stream_function(m, x, y, t); };
  for_each_face(g, 0, [&](int i, int j, std::size_t low, std::size_t, std::size_t) {
    const double xf = g.lo(0) + (i + 1) * hx, y0 = g.lo(1) + j * hy;
    fv.un[0][low] = (psi(xf, y0 + hy) - psi(xf, y0)) / hy;
  });
  for_each_face(g, 1, [&](int i, int j, std::size_t low, std::size_t, std::size_t) {
    const double yf = g.lo(1) + (j + 1) * hy, x0 = g.lo(0) + i * hx;
    fv.un[1][low] = -(psi(x0 + hx, yf) - psi(x0, yf)) / hx;
  });
  return fv;
}

// Largest face-normal Courant number |u_f| dt / dx.
inline double courant_number(const FaceVelocity& fv, const Grid& g, double dt) {
  double c = 0.0;
  for (int a = 0; a < g.dim(); ++a)
    for (double u : fv.un[a]) c = std::max(c, std::abs(u) * dt / g.spacing(a));
  return c;
}

inline double limited_slope(double dm, double dp, Limiter lim) {
  if (dm * dp <= 0.0) return 0.0;
  if (lim == Limiter::Minmod) return dm > 0.0 ? std::min(dm, dp) : std::max(dm, dp);
  return 2.0 * dm * dp / (dm + dp);
}

// Reconstructed states either side of the face above `low`; needs two
// ghost layers.
inline std::pair<double, double> muscl_states_at(const std::vector<double>& v, std::size_t low, std::ptrdiff_t st,
                                                 Limiter lim) {
  const std::size_t high = low + st;
  const double sl = limited_slope(v[low] - v[low - st], v[high] - v[low], lim);
  const double sh = limited_slope(v[high] - v[low], v[high + st] - v[high], lim);
  return {v[low] + 0.5 * sl, v[high] - 0.5 * sh};
}

struct FaceStates {
  std::vector<double> left, right;  // indexed by the low-side cell
};

inline FaceStates muscl_face_states(const ScalarField& f, int axis, Limiter lim) {
  const Grid& g = f.grid();
  const auto& v = f.values();
  FaceStates s{std::vector<double>(v.size(), 0.0), std::vector<double>(v.size(), 0.0)};
  for_each_face(g, axis, [&](int, int, std::size_t low, std::size_t, std::size_t) {
    std::tie(s.left[low], s.right[low]) = muscl_states_at(v, low, g.stride(axis), lim);
  });
  return s;
}

// -div(u alpha) with upwinded MUSCL states; ghosts must be filled. Wall
// faces use the zero-gradient ghost state, so a uniform field stays
// uniform whatever the wall-normal velocity.
inline ScalarField advection_rhs(const ScalarField& alpha, const FaceVelocity& fv, Limiter lim) {
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  const Grid& g = alpha.grid();
  const auto& v = alpha.values();
  ScalarField rhs(g);
  for (int a = 0; a < g.dim(); ++a) {
    const std::ptrdiff_t st = g.stride(a);
    const double inv = 1.0 / g.spacing(a);
    for_each_face(g, a, [&](int, int, std::size_t low, std::size_t from, std::size_t to) {
      const double u = fv.un[a][low];
      if (u == 0.0) return;
      const auto [l, r] = muscl_states_at(v, low, st, lim);
      const double flux = u * (u > 0.0 ? l : r) * inv;
      if (from != npos) rhs[from] -= flux;
      if (to != npos) rhs[to] += flux;
    });
  }
  return rhs;
}

inline void require_cfl(const FaceVelocity& fv, const Grid& g, double dt) {
  const double c = courant_number(fv, g, dt);
  if (!(c <= kMaxCourant)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "advection: Courant number %.4g exceeds %.2g (dt=%.6g, dx=%.6g)", c, kMaxCourant,
                  dt, g.spacing(0));
    throw ConfigError(buf);
  }
}

// One advection step from t to t + dt.
inline ScalarField advect_step(const ScalarField& alpha, const VelocityModel& model, const AdvectConfig& cfg, double t) {
  if (!(cfg.dt > 0.0)) throw ConfigError("advection: dt must be positive");
  const Grid& g = alpha.grid();
  ScalarField u = alpha;
  fill_ghosts(u);
  const FaceVelocity f0 = face_velocity(model, g, t);
  require_cfl(f0, g, cfg.dt);
  ScalarField out(g);
  if (cfg.scheme == TimeScheme::Euler) {
    out = add_scaled(u, cfg.dt, advection_rhs(u, f0, cfg.limiter));
    fill_ghosts(out);
  } else {
    const FaceVelocity f1 = face_velocity(model, g, t + cfg.dt);
    const FaceVelocity fh = face_velocity(model, g, t + 0.5 * cfg.dt);
    require_cfl(f1, g, cfg.dt);
    require_cfl(fh, g, cfg.dt);
    int stage = 0;
    const FaceVelocity* fs[3] = {&f0, &f1, &fh};
    out = tvd_rk3(
        u, cfg.dt, [&](const ScalarField& s) { return advection_rhs(s, *fs[stage++], cfg.limiter); },
        [](ScalarField& s) { fill_ghosts(s); });
  }
  if (!all_finite(out)) throw NumericalError("advection: non-finite value");
  return out;
}

// Called after each coupled step with (step, time, alpha).
using StepObserver = std::function<void(int, double, const ScalarField&)>;

// Advection followed by n_tau_per_step re-initialization steps, n_steps
// times. Series: mass, min_alpha, max_alpha, and with area_radius set
// area_r1 / area_r2 (index 0 is the initial state).
inline std::pair<ScalarField, DiagnosticsReport> run_coupled(ScalarField alpha, const VelocityModel& model,
                                                             const AdvectConfig& cfg,
                                                             const StepObserver& observe = {}) {
  if (cfg.n_steps < 0) throw ConfigError("advection: n_steps must be >= 0");
  if (cfg.n_tau_per_step < 0) throw ConfigError("advection: n_tau_per_step must be >= 0");
  if (cfg.n_tau_per_step > 0) validate(cfg.reinit);
  fill_ghosts(alpha);
  DiagnosticsReport rep;
  const InterfaceParams& p = cfg.reinit.params;
  auto record = [&](const ScalarField& a) {
    double lo = 1.0, hi = 0.0;
    a.grid().for_each_cell([&](int, int, int, std::size_t n) {
      lo = std::min(lo, a[n]);
      hi = std::max(hi, a[n]);
    });
    rep.record("mass", integrate_field(a));
    rep.record("min_alpha", lo);
    rep.record("max_alpha", hi);
    if (cfg.area_radius) {
      rep.record("area_r1", area_error(a, *cfg.area_radius, p, AreaRegion::R1));
      rep.record("area_r2", area_error(a, *cfg.area_radius, p, AreaRegion::R2));
    }
  };
  record(alpha);
  double t = 0.0;
  for (int step = 0; step < cfg.n_steps; ++step) {
    try {
      alpha = advect_step(alpha, model, cfg, t);
      for (int k = 0; k < cfg.n_tau_per_step; ++k) alpha = rk3_step(alpha, cfg.reinit);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " (coupled step " + std::to_string(step + 1) + ")");
    }
    t = (step + 1) * cfg.dt;
    record(alpha);
    if (observe) observe(step + 1, t, alpha);
  }
  if (cfg.area_radius) {
    for (const char* name : {"area_r1", "area_r2"}) {
      const auto& s = rep.series[name];
      CompensatedSum sum;
      for (std::size_t i = 1; i < s.size(); ++i) sum.add(s[i]);
      rep.record(std::string(name) + "_Et", s.size() > 1 ? sum.value() / static_cast<double>(s.size() - 1) : 0.0);
    }
  }
  return {std::move(alpha), std::move(rep)};
}

}  // namespace lsk
