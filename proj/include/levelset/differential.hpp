#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <type_traits>
#include <variant>
#include <vector>

#include "levelset/grid.hpp"
#include "levelset/maps.hpp"

namespace lsk {

inline constexpr double kNormalGuard = 1e-14;
inline constexpr double kCurvatureGuard = 1e-8;

// Slot of the (i,j) Hessian entry: diagonal first, then 01, 02, 12.
inline constexpr int hessian_slot(int i, int j, int dim) {
  const int a = i < j ? i : j;
  const int b = i < j ? j : i;
  if (a == b) return a;
  return dim + (a == 0 ? b - 1 : 2);
}

inline constexpr int hessian_size(int dim) { return dim * (dim + 1) / 2; }

// Central difference along one axis on interior cells; ghosts left at 0.
inline ScalarField central_difference(const ScalarField& f, int axis) {
  const Grid& g = f.grid();
  ScalarField out(g);
  const std::ptrdiff_t s = g.stride(axis);
  const double inv = 1.0 / (2.0 * g.spacing(axis));
  const double* v = f.values().data();
  double* o = out.values().data();
  g.for_each_cell([&](int, int, int, std::size_t n) { o[n] = (v[n + s] - v[n - s]) * inv; });
  return out;
}

// Second-order central gradient. Input ghosts must be filled; output
// ghosts are filled with the grid's boundary rule.
inline VectorField center_gradient(const ScalarField& f) {
  const Grid& g = f.grid();
  VectorField out(g);
  for (int a = 0; a < g.dim(); ++a) {
    out[a] = central_difference(f, a);
    fill_ghosts(out[a]);
  }
  return out;
}

// Full gradient vector on the face between cell n and its +axis neighbour.
// Normal part is the two-point difference; tangential parts average the
// central differences of the two cells sharing the face.
inline std::array<double, 3> face_gradient_at(const double* v, std::size_t n, int axis, const Grid& g) {
  std::array<double, 3> out{0.0, 0.0, 0.0};
  const std::ptrdiff_t s = g.stride(axis);
  out[axis] = (v[n + s] - v[n]) / g.spacing(axis);
  for (int t = 0; t < g.dim(); ++t) {
    if (t == axis) continue;
    const std::ptrdiff_t st = g.stride(t);
    out[t] = (v[n + st] + v[n + s + st] - v[n - st] - v[n + s - st]) / (4.0 * g.spacing(t));
  }
  return out;
}

// Face-gradient vectors on all faces normal to `axis`. Face i sits
// between cells i-1 and i, so there are cells(axis)+1 faces per line.
struct FaceVectors {
  Grid grid;
  int axis = 0;
  std::vector<std::array<double, 3>> values;

  std::size_t index(int i, int j = 0, int k = 0) const {
    std::array<int, 3> c{i, j, k};
    std::array<int, 3> n{grid.cells(0), grid.cells(1), grid.cells(2)};
    n[axis] += 1;
    return static_cast<std::size_t>(c[0]) + static_cast<std::size_t>(n[0]) * (c[1] + static_cast<std::size_t>(n[1]) * c[2]);
  }
  const std::array<double, 3>& at(int i, int j = 0, int k = 0) const { return values[index(i, j, k)]; }
};

inline FaceVectors face_normal_gradient(const ScalarField& f, int axis) {
  const Grid& g = f.grid();
  FaceVectors out{g, axis, {}};
  std::array<int, 3> n{g.cells(0), g.cells(1), g.cells(2)};
  n[axis] += 1;
  out.values.resize(static_cast<std::size_t>(n[0]) * n[1] * n[2]);
  const double* v = f.values().data();
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i) {
        std::array<int, 3> c{i, j, k};
        c[axis] -= 1;  // the cell on the low side of the face
        out.values[out.index(i, j, k)] = face_gradient_at(v, g.index(c[0], c[1], c[2]), axis, g);
      }
  return out;
}

// Derivatives of the mapped scalar phi, plus the per-cell factors that
// turn them into alpha derivatives:
//   alpha_i  = w phi_i
//   alpha_ij = w (phi_ij + c phi_i phi_j)
struct MappedDerivatives {
  ScalarField phi;
  VectorField grad;
  std::vector<ScalarField> hess;  // hessian_slot order
  ScalarField weight;             // w
  ScalarField coupling;           // c
};

struct DerivativeBundle {
  VectorField grad;
  std::vector<ScalarField> hess;

  const ScalarField& h(int i, int j) const { return hess[hessian_slot(i, j, grad.grid().dim())]; }
};

namespace detail {

inline void mapping_weights(const ScalarField& alpha, const MappingKind& kind, const InterfaceParams& p,
                            ScalarField& w, ScalarField& c) {
  const Grid& g = alpha.grid();
  const double eh = p.eps_h();
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        g.for_each_cell([&](int, int, int, std::size_t n) {
          const double a = checked_alpha(alpha[n]);
          if constexpr (std::is_same_v<K, RawAlpha>) {
            w[n] = 1.0;
            c[n] = 0.0;
          } else if constexpr (std::is_same_v<K, Psi1>) {
            w[n] = mapping_factor(a, k.gamma);
            c[n] = mapping_factor_derivative(a, k.gamma);
          } else {
            w[n] = delta_of_alpha(a) / eh;
            c[n] = (1.0 - 2.0 * a) / eh;
          }
        });
      },
      kind);
}

}  // namespace detail

// Works on a copy of alpha with its ghosts refilled.
inline MappedDerivatives mapped_derivatives(ScalarField alpha, const MappingKind& kind, const InterfaceParams& p,
                                            bool with_hessian = true) {
  validate(kind);
  fill_ghosts(alpha);
  const Grid& g = alpha.grid();
  MappedDerivatives d{mapped_field(alpha, kind, p), VectorField(g), {}, ScalarField(g), ScalarField(g)};
  d.grad = center_gradient(d.phi);
  if (with_hessian) {
    d.hess.resize(hessian_size(g.dim()));
    for (int i = 0; i < g.dim(); ++i)
      for (int j = i; j < g.dim(); ++j) d.hess[hessian_slot(i, j, g.dim())] = central_difference(d.grad[i], j);
  }
  detail::mapping_weights(alpha, kind, p, d.weight, d.coupling);
  return d;
}

inline VectorField grad_alpha_mapped(const ScalarField& alpha, const MappingKind& kind, const InterfaceParams& p) {
  MappedDerivatives d = mapped_derivatives(alpha, kind, p, false);
  const Grid& g = alpha.grid();
  VectorField out(g);
  for (int a = 0; a < g.dim(); ++a)
    g.for_each_cell([&](int, int, int, std::size_t n) { out[a][n] = d.weight[n] * d.grad[a][n]; });
  return out;
}

inline DerivativeBundle hessian_alpha_mapped(const ScalarField& alpha, const MappingKind& kind,
                                             const InterfaceParams& p) {
  MappedDerivatives d = mapped_derivatives(alpha, kind, p, true);
  const Grid& g = alpha.grid();
  const int dim = g.dim();
  DerivativeBundle out{VectorField(g), std::vector<ScalarField>(hessian_size(dim), ScalarField(g))};
  g.for_each_cell([&](int, int, int, std::size_t n) {
    const double w = d.weight[n];
    for (int a = 0; a < dim; ++a) out.grad[a][n] = w * d.grad[a][n];
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) {
        const int s = hessian_slot(i, j, dim);
        out.hess[s][n] = w * (d.hess[s][n] + d.coupling[n] * d.grad[i][n] * d.grad[j][n]);
      }
  });
  return out;
}

// n = grad(psi)/|grad(psi)|, zero where the gradient vanishes.
inline VectorField unit_normals(const ScalarField& psi) {
  VectorField gr = center_gradient(psi);
  const Grid& g = psi.grid();
  const int dim = g.dim();
  auto& vals0 = gr[0].values();
  for (std::size_t n = 0; n < vals0.size(); ++n) {
    double m2 = 0.0;
    for (int a = 0; a < dim; ++a) m2 += gr[a][n] * gr[a][n];
    const double m = std::sqrt(m2);
    const double inv = m > kNormalGuard ? 1.0 / m : 0.0;
    for (int a = 0; a < dim; ++a) gr[a][n] *= inv;
  }
  return gr;
}

// Divergence of grad/|grad| from first and second derivatives:
// (|g|^2 tr H - g.H.g) / |g|^3. Returns false when |g| is degenerate.
inline bool curvature_from_derivatives(const double* g, const double* H, int dim, double& kappa) {
  double g2 = 0.0;
  for (int a = 0; a < dim; ++a) g2 += g[a] * g[a];
  const double gm = std::sqrt(g2);
  if (!(gm > kCurvatureGuard)) {
    kappa = 0.0;
    return false;
  }
  double num = 0.0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      if (i == j) continue;
      num += g[j] * g[j] * H[hessian_slot(i, i, dim)] - g[i] * g[j] * H[hessian_slot(i, j, dim)];
    }
  kappa = num / (g2 * gm);
  return true;
}

struct CurvatureOptions {
  double band_lo = 0.05;
  double band_hi = 0.95;
  bool full_field = false;
};

struct CurvatureResult {
  ScalarField kappa;
  std::vector<std::size_t> degenerate;  // band cells with a vanishing gradient
};

// Curvature of the alpha = const surfaces. For the psi-type mappings the
// mapped derivatives carry the (1-2 alpha)/eps_h correction; the common
// factor w cancels between numerator and denominator.
inline CurvatureResult curvature_field(const ScalarField& alpha, const MappingKind& kind, const InterfaceParams& p,
                                       const CurvatureOptions& opt = {}) {
  MappedDerivatives d = mapped_derivatives(alpha, kind, p, true);
  const Grid& g = alpha.grid();
  const int dim = g.dim();
  CurvatureResult out{ScalarField(g), {}};
  g.for_each_cell([&](int, int, int, std::size_t n) {
    const double a = alpha[n];
    const bool in_band = a >= opt.band_lo && a <= opt.band_hi;
    if (!in_band && !opt.full_field) return;
    double gv[3] = {0.0, 0.0, 0.0};
    double H[6] = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    for (int i = 0; i < dim; ++i) gv[i] = d.grad[i][n];
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) {
        const int s = hessian_slot(i, j, dim);
        H[s] = d.hess[s][n] + d.coupling[n] * gv[i] * gv[j];
      }
    double k = 0.0;
    if (!curvature_from_derivatives(gv, H, dim, k) && in_band) out.degenerate.push_back(n);
    out.kappa[n] = k;
  });
  return out;
}

// |grad phi| per cell for the mapped scalar.
inline ScalarField gradient_magnitude(const VectorField& grad) {
  const Grid& g = grad.grid();
  ScalarField out(g);
  g.for_each_cell([&](int, int, int, std::size_t n) {
    double m2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) m2 += grad[a][n] * grad[a][n];
    out[n] = std::sqrt(m2);
  });
  return out;
}

}  // namespace lsk
