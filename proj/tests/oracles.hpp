#pragma once

// Closed-form references shared by the unit and acceptance tests. Nothing
// here calls into the library's derivative code.

#include <array>
#include <cmath>
#include <numbers>

namespace oracle {

// Smooth, non-planar level function in 2D and its derivatives.
//   s(x, y) = (x - 0.5) + 0.3 (y - 0.5) + 0.08 sin(2 pi y) + 0.05 (x - 0.5)^2
struct SmoothSheet {
  static double value(double x, double y) {
    const double X = x - 0.5, Y = y - 0.5;
    return X + 0.3 * Y + 0.08 * std::sin(2 * std::numbers::pi * y) + 0.05 * X * X;
  }
  static std::array<double, 2> grad(double x, double y) {
    return {1.0 + 0.1 * (x - 0.5), 0.3 + 0.16 * std::numbers::pi * std::cos(2 * std::numbers::pi * y)};
  }
  // xx, yy, xy
  static std::array<double, 3> hess(double, double y) {
    const double w = 2 * std::numbers::pi;
    return {0.1, -0.08 * w * w * std::sin(w * y), 0.0};
  }
};

// alpha = (1 + tanh(s / 2e)) / 2 and its chain-rule derivatives.
struct TanhProfile {
  double e;

  double a(double s) const { return 0.5 * (1.0 + std::tanh(s / (2.0 * e))); }
  double da(double s) const {
    const double q = a(s);
    return q * (1.0 - q) / e;
  }
  double d2a(double s) const {
    const double q = a(s);
    return q * (1.0 - q) * (1.0 - 2.0 * q) / (e * e);
  }

  std::array<double, 2> grad(double x, double y) const {
    const double s = SmoothSheet::value(x, y), d = da(s);
    const auto g = SmoothSheet::grad(x, y);
    return {d * g[0], d * g[1]};
  }
  std::array<double, 3> hess(double x, double y) const {
    const double s = SmoothSheet::value(x, y), d1 = da(s), d2 = d2a(s);
    const auto g = SmoothSheet::grad(x, y);
    const auto h = SmoothSheet::hess(x, y);
    return {d2 * g[0] * g[0] + d1 * h[0], d2 * g[1] * g[1] + d1 * h[1], d2 * g[0] * g[1] + d1 * h[2]};
  }
};

// Simpson's rule on [a, b] with n (even) panels.
template <class F>
double simpson(F&& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace oracle
