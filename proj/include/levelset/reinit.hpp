#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "levelset/differential.hpp"
#include "levelset/error.hpp"
#include "levelset/grid.hpp"
#include "levelset/maps.hpp"
#include "levelset/norms.hpp"

namespace lsk {

enum class ReinitForm { Conservative, NonConservative };

struct ReinitConfig {
  MappingKind kind = Psi0{};
  InterfaceParams params;
  double dtau;
  int n_tau = 1;
  std::optional<double> stop_l1;
  ReinitForm form = ReinitForm::Conservative;
  // Keep the normals of the first RHS evaluation for the whole run.
  bool freeze_normals = false;

  explicit ReinitConfig(InterfaceParams p, MappingKind k = Psi0{}, int steps = 1)
      : kind(k), params(p), dtau(default_dtau(p, k)), n_tau(steps) {}

  // eps_h, halved for very small gamma.
  static double default_dtau(const InterfaceParams& p, const MappingKind& k) {
    const double g = mapping_gamma(k);
    return (g > 0.0 && g < 1e-6) ? 0.5 * p.eps_h() : p.eps_h();
  }
};

inline void validate(const ReinitConfig& cfg) {
  validate(cfg.kind);
  if (!(cfg.dtau > 0.0) || !std::isfinite(cfg.dtau)) throw ConfigError("reinit: dtau must be positive");
  if (cfg.n_tau < 1) throw ConfigError("reinit: n_tau must be >= 1");
  if (cfg.stop_l1 && !(*cfg.stop_l1 >= 0.0)) throw ConfigError("reinit: stop_l1 must be >= 0");
  if (cfg.form == ReinitForm::NonConservative &&
      !(std::holds_alternative<Psi0>(cfg.kind) || std::holds_alternative<Psi0Prime>(cfg.kind)))
    throw ConfigError("reinit: the non-conservative form needs a psi0 or psi0prime mapping");
}

struct ConvergenceTrace {
  std::vector<double> l1_per_step;
  int steps_run = 0;
};

// Conservative finite-volume right-hand side. alpha ghosts must be filled.
// Face flux along axis a:
//   psi0 kinds: C delta_f (|g_f| - 1) n_a
//   others:     (D w_f |g_f| - C delta_f) n_a,  w = F(alpha) or 1
// Faces on non-periodic walls carry no flux.
inline ScalarField reinit_rhs(const ScalarField& alpha, const ReinitConfig& cfg,
                              const VectorField* frozen_normals = nullptr) {
  const Grid& g = alpha.grid();
  const int dim = g.dim();
  const ScalarField phi = mapped_field(alpha, cfg.kind, cfg.params);
  const VectorField normals = frozen_normals ? *frozen_normals : unit_normals(phi);

  const auto& av = alpha.values();
  std::vector<double> delta(av.size());
  for (std::size_t n = 0; n < av.size(); ++n) delta[n] = delta_of_alpha(std::clamp(av[n], 0.0, 1.0));

  const bool sdf_form = std::holds_alternative<Psi0>(cfg.kind) || std::holds_alternative<Psi0Prime>(cfg.kind);
  std::vector<double> w;
  if (!sdf_form) {
    w.resize(av.size(), 1.0);
    if (auto* k = std::get_if<Psi1>(&cfg.kind))
      for (std::size_t n = 0; n < av.size(); ++n) w[n] = mapping_factor(checked_alpha(av[n]), k->gamma);
  }

  const double C = cfg.params.C();
  const double D = cfg.params.D();
  ScalarField rhs(g);
  double* r = rhs.values().data();
  const double* p = phi.values().data();

  for (int a = 0; a < dim; ++a) {
    const std::ptrdiff_t s = g.stride(a);
    const double inv_dx = 1.0 / g.spacing(a);
    const bool periodic = g.boundary(a) == Boundary::Periodic;
    const double* na = normals[a].values().data();
    std::array<int, 3> lo{0, 0, 0}, hi{g.cells(0), g.cells(1), g.cells(2)};
    lo[a] = periodic ? -1 : 0;
    hi[a] = periodic ? g.cells(a) : g.cells(a) - 1;  // exclusive bound on the low-side cell
    const int last = g.cells(a) - 1;
    for (int k = lo[2]; k < hi[2]; ++k)
      for (int j = lo[1]; j < hi[1]; ++j)
        for (int i = lo[0]; i < hi[0]; ++i) {
          const std::size_t P = g.index(i, j, k);
          const std::size_t F = P + s;
          const double df = 0.5 * (delta[P] + delta[F]);
          double flux;
          if (sdf_form) {
            if (df == 0.0) continue;
            const auto gf = face_gradient_at(p, P, a, g);
            double m2 = 0.0;
            for (int t = 0; t < dim; ++t) m2 += gf[t] * gf[t];
            flux = C * df * (std::sqrt(m2) - 1.0) * 0.5 * (na[P] + na[F]);
          } else {
            const double wf = 0.5 * (w[P] + w[F]);
            if (df == 0.0 && wf == 0.0) continue;
            const auto gf = face_gradient_at(p, P, a, g);
            double m2 = 0.0;
            for (int t = 0; t < dim; ++t) m2 += gf[t] * gf[t];
            flux = (D * wf * std::sqrt(m2) - C * df) * 0.5 * (na[P] + na[F]);
          }
          const int ca = a == 0 ? i : (a == 1 ? j : k);
          if (ca >= 0) r[P] += flux * inv_dx;
          if (ca < last) r[F] -= flux * inv_dx;
        }
  }
  return rhs;
}

// Cell-centred expansion of the same divergence:
//   n.grad(delta) G + n.grad(G) delta + div(n) G delta,  G = |grad psi| - 1.
inline ScalarField reinit_rhs_nonconservative(const ScalarField& alpha, const ReinitConfig& cfg,
                                              const VectorField* frozen_normals = nullptr) {
  validate(cfg);
  const Grid& g = alpha.grid();
  const int dim = g.dim();
  MappedDerivatives d = mapped_derivatives(alpha, cfg.kind, cfg.params, true);
  const VectorField normals = frozen_normals ? *frozen_normals : unit_normals(d.phi);

  ScalarField G = gradient_magnitude(d.grad);
  g.for_each_cell([&](int, int, int, std::size_t n) { G[n] -= 1.0; });
  fill_ghosts(G);
  ScalarField delta(g);
  for (std::size_t n = 0; n < delta.values().size(); ++n) delta[n] = delta_of_alpha(std::clamp(alpha[n], 0.0, 1.0));

  const double C = cfg.params.C();
  ScalarField rhs(g);
  g.for_each_cell([&](int, int, int, std::size_t n) {
    double ndelta = 0.0, nG = 0.0;
    for (int a = 0; a < dim; ++a) {
      const std::ptrdiff_t s = g.stride(a);
      const double h2 = 2.0 * g.spacing(a);
      ndelta += normals[a][n] * (delta[n + s] - delta[n - s]) / h2;
      nG += normals[a][n] * (G[n + s] - G[n - s]) / h2;
    }
    double gv[3] = {0.0, 0.0, 0.0};
    double H[6] = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    for (int i = 0; i < dim; ++i) gv[i] = d.grad[i][n];
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) {
        const int sl = hessian_slot(i, j, dim);
        H[sl] = d.hess[sl][n] + d.coupling[n] * gv[i] * gv[j];
      }
    double div_n = 0.0;
    curvature_from_derivatives(gv, H, dim, div_n);
    rhs[n] = C * (ndelta * G[n] + nG * delta[n] + div_n * G[n] * delta[n]);
  });
  return rhs;
}

inline ScalarField add_scaled(const ScalarField& u, double c, const ScalarField& k) {
  ScalarField out = u;
  auto& o = out.values();
  const auto& kv = k.values();
  for (std::size_t n = 0; n < o.size(); ++n) o[n] += c * kv[n];
  return out;
}

inline double add_scaled(double u, double c, double k) { return u + c * k; }

// Three-stage SSP Runge-Kutta in increment form. Algebraically the
// usual convex combinations; written as u + dt*(...) so that L == 0
// returns u exactly.
template <class State, class Op, class Refill>
State tvd_rk3(const State& u, double dt, Op&& L, Refill&& refill) {
  const State k0 = L(u);
  State u1 = add_scaled(u, dt, k0);
  refill(u1);
  const State k1 = L(u1);
  const State s01 = add_scaled(k0, 1.0, k1);
  State u2 = add_scaled(u, 0.25 * dt, s01);
  refill(u2);
  const State k2 = L(u2);
  const State s = add_scaled(s01, 4.0, k2);
  State u3 = add_scaled(u, dt / 6.0, s);
  refill(u3);
  return u3;
}

inline ScalarField reinit_operator(const ScalarField& alpha, const ReinitConfig& cfg, const VectorField* normals) {
  return cfg.form == ReinitForm::Conservative ? reinit_rhs(alpha, cfg, normals)
                                              : reinit_rhs_nonconservative(alpha, cfg, normals);
}

// One pseudo-time step; ghosts of the input are refilled first.
inline ScalarField rk3_step(const ScalarField& alpha, const ReinitConfig& cfg,
                            const VectorField* frozen_normals = nullptr) {
  ScalarField u = alpha;
  fill_ghosts(u);
  ScalarField out = tvd_rk3(
      u, cfg.dtau, [&](const ScalarField& s) { return reinit_operator(s, cfg, frozen_normals); },
      [](ScalarField& s) { fill_ghosts(s); });
  if (!all_finite(out)) throw NumericalError("reinit: non-finite value after RK3 step");
  return out;
}

inline VectorField reinit_normals(const ScalarField& alpha, const ReinitConfig& cfg) {
  ScalarField u = alpha;
  fill_ghosts(u);
  return unit_normals(mapped_field(u, cfg.kind, cfg.params));
}

// Divergence guard: L1 grew by 1e3 over the first step and is not tiny.
inline constexpr double kDivergenceGrowth = 1e3;
inline constexpr double kDivergenceFloor = 1e-6;

inline std::pair<ScalarField, ConvergenceTrace> reinitialize(ScalarField alpha, const ReinitConfig& cfg) {
  validate(cfg);
  fill_ghosts(alpha);
  ConvergenceTrace trace;
  std::optional<VectorField> frozen;
  if (cfg.freeze_normals) frozen = reinit_normals(alpha, cfg);
  for (int step = 0; step < cfg.n_tau; ++step) {
    ScalarField next = rk3_step(alpha, cfg, frozen ? &*frozen : nullptr);
    const double l1 = l1_change(next, alpha);
    trace.l1_per_step.push_back(l1);
    trace.steps_run = step + 1;
    alpha = std::move(next);
    const double first = trace.l1_per_step.front();
    if (l1 > kDivergenceGrowth * first && l1 > kDivergenceFloor)
      throw NumericalError("reinit: diverged at step " + std::to_string(step + 1));
    if (cfg.stop_l1 && l1 < *cfg.stop_l1) break;
  }
  return {std::move(alpha), std::move(trace)};
}

}  // namespace lsk
