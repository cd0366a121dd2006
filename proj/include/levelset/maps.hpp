#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>

#include "levelset/error.hpp"
#include "levelset/grid.hpp"

namespace lsk {

// Guard against underflow of (alpha)^gamma and log(0).
inline constexpr double kUnderflowGuard = 5e-16;
// How far alpha may stray outside [0,1] before it counts as corrupt.
inline constexpr double kAlphaSlack = 1e-10;
inline constexpr double kDefaultGamma = 1e-5;

// Interface half-width and compression speed; D follows from them.
class InterfaceParams {
 public:
  explicit InterfaceParams(double eps_h, double C = 1.0) : eps_h_(eps_h), C_(C) {
    if (!(eps_h > 0.0) || !std::isfinite(eps_h))
      throw std::invalid_argument("interface: eps_h must be positive");
    if (!(C > 0.0) || !std::isfinite(C)) throw std::invalid_argument("interface: C must be positive");
  }
  double eps_h() const { return eps_h_; }
  double C() const { return C_; }
  double D() const { return eps_h_ * C_; }

 private:
  double eps_h_;
  double C_;
};

// sqrt(K) dx / 4 for a K-dimensional problem.
inline double default_eps_h(double dx, int dim) { return std::sqrt(static_cast<double>(dim)) * dx / 4.0; }

struct RawAlpha {};
struct Psi1 {
  double gamma = 0.1;
  double eps = kUnderflowGuard;
};
struct Psi0 {};
struct Psi0Prime {
  double gamma = kDefaultGamma;
  double eps = kUnderflowGuard;
};
using MappingKind = std::variant<RawAlpha, Psi1, Psi0, Psi0Prime>;

inline void validate(const MappingKind& kind) {
  std::visit(
      [](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Psi1> || std::is_same_v<K, Psi0Prime>) {
          if (!(k.gamma > 0.0 && k.gamma < 1.0))
            throw std::invalid_argument("mapping: gamma must lie in (0,1)");
          if (!(k.eps >= 0.0)) throw std::invalid_argument("mapping: eps must be >= 0");
        }
      },
      kind);
}

inline std::string mapping_name(const MappingKind& kind) {
  return std::visit(
      [](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, RawAlpha>) return "alpha";
        else if constexpr (std::is_same_v<K, Psi1>) return "psi1";
        else if constexpr (std::is_same_v<K, Psi0>) return "psi0";
        else return "psi0prime";
      },
      kind);
}

// Mapping gamma if the kind has one.
inline double mapping_gamma(const MappingKind& kind) {
  if (auto* p = std::get_if<Psi1>(&kind)) return p->gamma;
  if (auto* p = std::get_if<Psi0Prime>(&kind)) return p->gamma;
  return 0.0;
}

// Saturates to exactly 0 or 1 roughly 37 eps_h away from the interface,
// which gives delta(alpha) compact support on the grid.
inline double alpha_from_psi0(double psi0, const InterfaceParams& p) {
  return 0.5 * (1.0 + std::tanh(psi0 / (2.0 * p.eps_h())));
}

// Pulls alpha into [0,1]; anything beyond the slack is corrupt data.
inline double checked_alpha(double alpha) {
  if (!(alpha >= -kAlphaSlack && alpha <= 1.0 + kAlphaSlack)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", alpha);
    throw DataIntegrityError(std::string("alpha outside [0,1]: ") + buf);
  }
  return std::clamp(alpha, 0.0, 1.0);
}

inline double psi0_from_alpha(double alpha, const InterfaceParams& p, double eps = kUnderflowGuard) {
  const double a = checked_alpha(alpha);
  return p.eps_h() * std::log((a + eps) / (1.0 - a + eps));
}

inline double psi1_of_alpha(double alpha, double gamma, double eps = kUnderflowGuard) {
  const double a = checked_alpha(alpha);
  const double u = std::pow(a + eps, gamma);
  const double v = std::pow(1.0 - a + eps, gamma);
  return u / (u + v);
}

inline double psi0prime_of_psi1(double psi1, const InterfaceParams& p, double gamma) {
  return 2.0 * p.eps_h() / gamma * (2.0 * psi1 - 1.0);
}

inline double delta_of_alpha(double alpha) { return alpha * (1.0 - alpha); }

inline double zeta_of_alpha(double alpha, double gamma) {
  return std::pow(alpha, gamma) + std::pow(1.0 - alpha, gamma);
}

// F in alpha_i = F psi1_i.
inline double mapping_factor(double alpha, double gamma) {
  const double d = delta_of_alpha(alpha);
  if (d <= 0.0) return 0.0;
  const double z = zeta_of_alpha(alpha, gamma);
  return z * z * std::pow(d, 1.0 - gamma) / gamma;
}

// dF/dalpha; alpha_ij = F (psi1_ij + F' psi1_i psi1_j).
inline double mapping_factor_derivative(double alpha, double gamma) {
  const double d = delta_of_alpha(alpha);
  if (d <= 0.0) return 0.0;
  const double z = zeta_of_alpha(alpha, gamma);
  const double a = 2.0 * gamma * (std::pow(1.0 - alpha, 1.0 - gamma) - std::pow(alpha, 1.0 - gamma));
  const double b = (1.0 - gamma) * (1.0 - 2.0 * alpha) * z * std::pow(d, -gamma);
  return z / gamma * (a + b);
}

// The scalar phi that a mapping kind differentiates.
inline double mapped_value(double alpha, const MappingKind& kind, const InterfaceParams& p) {
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, RawAlpha>) return alpha;
        else if constexpr (std::is_same_v<K, Psi1>) return psi1_of_alpha(alpha, k.gamma, k.eps);
        else if constexpr (std::is_same_v<K, Psi0>) return psi0_from_alpha(alpha, p);
        else return psi0prime_of_psi1(psi1_of_alpha(alpha, k.gamma, k.eps), p, k.gamma);
      },
      kind);
}

// Applied to every stored value, ghosts included.
inline ScalarField mapped_field(const ScalarField& alpha, const MappingKind& kind, const InterfaceParams& p) {
  ScalarField out(alpha.grid());
  auto& o = out.values();
  const auto& a = alpha.values();
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        for (std::size_t n = 0; n < a.size(); ++n) {
          if constexpr (std::is_same_v<K, RawAlpha>) o[n] = a[n];
          else if constexpr (std::is_same_v<K, Psi1>) o[n] = psi1_of_alpha(a[n], k.gamma, k.eps);
          else if constexpr (std::is_same_v<K, Psi0>) o[n] = psi0_from_alpha(a[n], p);
          else o[n] = psi0prime_of_psi1(psi1_of_alpha(a[n], k.gamma, k.eps), p, k.gamma);
        }
      },
      kind);
  return out;
}

inline ScalarField psi0_field(const ScalarField& alpha, const InterfaceParams& p) {
  return mapped_field(alpha, Psi0{}, p);
}

inline ScalarField alpha_field_from_psi0(const ScalarField& psi0, const InterfaceParams& p) {
  ScalarField out(psi0.grid());
  auto& o = out.values();
  const auto& s = psi0.values();
  for (std::size_t n = 0; n < s.size(); ++n) o[n] = alpha_from_psi0(s[n], p);
  return out;
}

}  // namespace lsk
