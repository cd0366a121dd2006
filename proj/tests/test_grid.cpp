#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "levelset/grid.hpp"
#include "levelset/maps.hpp"

using namespace lsk;

TEST(Grid, OneDimensionalSpacing) {
  const Grid g = build_grid(1, 128);
  EXPECT_DOUBLE_EQ(g.spacing(0), 7.8125e-3);
  EXPECT_EQ(g.interior_count(), 128u);
  EXPECT_EQ(g.storage_size(), 132u);
}

TEST(Grid, CellCentersInTwoDimensions) {
  const Grid g = build_grid(2, 32);
  EXPECT_EQ(g.interior_count(), 32u * 32u);
  const auto c = g.center(0, 0, 0);
  EXPECT_DOUBLE_EQ(c[0], 1.0 / 64.0);
  EXPECT_DOUBLE_EQ(c[1], 1.0 / 64.0);
  EXPECT_DOUBLE_EQ(g.center(0, 31), 1.0 - 1.0 / 64.0);
}

TEST(Grid, LevelSizes) {
  for (int i = 1; i <= 4; ++i) {
    const Grid g = build_grid(3, cells_for_level(i));
    EXPECT_EQ(g.cells(2), 1 << (4 + i));
  }
  EXPECT_EQ(cells_for_level(3.5), 181);
}

TEST(Grid, RejectsBadInput) {
  EXPECT_THROW(build_grid(0, 16), std::invalid_argument);
  EXPECT_THROW(build_grid(4, 16), std::invalid_argument);
  EXPECT_THROW(build_grid(2, 7), std::invalid_argument);
  EXPECT_THROW(build_grid(2, 16, Box{{0, 0, 0}, {1, 0, 1}}), std::invalid_argument);
  EXPECT_THROW(build_grid(2, 16, {}, 1), std::invalid_argument);
}

TEST(Grid, NonUnitBoxOrigin) {
  const Grid g = build_grid(3, 16, Box{{-0.5, 0.0, -0.5}, {0.5, 1.0, 0.5}});
  EXPECT_DOUBLE_EQ(g.center(0, 0), -0.5 + 1.0 / 32.0);
  EXPECT_DOUBLE_EQ(g.hi(2), 0.5);
}

TEST(Ghosts, ZeroGradientPattern1D) {
  const Grid g = build_grid(1, 8);
  ScalarField f(g);
  for (int i = 0; i < 8; ++i) f(i) = i + 1.0;
  f = fill_neumann_ghosts(f);
  EXPECT_EQ(f(-1), 1.0);
  EXPECT_EQ(f(-2), 1.0);
  EXPECT_EQ(f(8), 8.0);
  EXPECT_EQ(f(9), 8.0);
  // One-sided difference across either wall vanishes.
  EXPECT_EQ(f(0) - f(-1), 0.0);
  EXPECT_EQ(f(8) - f(7), 0.0);
}

TEST(Ghosts, ConstantIsFixedPoint) {
  const Grid g = build_grid(3, 8);
  ScalarField f(g);
  f.assign([](double, double, double) { return 0.375; });
  fill_ghosts(f);
  for (double v : f.values()) EXPECT_EQ(v, 0.375);
}

TEST(Ghosts, PeriodicWraps) {
  const Grid g(2, {8, 8, 1}, Box{}, {Boundary::Periodic, Boundary::ZeroGradient, Boundary::ZeroGradient});
  ScalarField f(g);
  f.assign([](double x, double y, double) { return 10.0 * x + y; });
  fill_ghosts(f);
  for (int j = -2; j < 10; ++j) {
    const int jj = std::clamp(j, 0, 7);
    EXPECT_EQ(f(-1, j), f(7, jj));
    EXPECT_EQ(f(-2, j), f(6, jj));
    EXPECT_EQ(f(8, j), f(0, jj));
    EXPECT_EQ(f(9, j), f(1, jj));
  }
}

TEST(Ghosts, FillIsIdempotent) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int dim = 1; dim <= 3; ++dim) {
    const Grid g = build_grid(dim, 8);
    ScalarField f(g);
    g.for_each_cell([&](int, int, int, std::size_t n) { f[n] = u(rng); });
    ScalarField once = fill_neumann_ghosts(f);
    ScalarField twice = fill_neumann_ghosts(once);
    EXPECT_EQ(once.values(), twice.values());
  }
}

TEST(Integrate, ConstantAndZero) {
  for (int n : {8, 16, 32}) {
    const Grid g = build_grid(2, n);
    EXPECT_EQ(integrate_field(ScalarField(g, 1.0)), 1.0);
    EXPECT_EQ(integrate_field(ScalarField(g, 0.0)), 0.0);
  }
}

TEST(Integrate, Linearity) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Grid g = build_grid(2, 32);
  ScalarField a(g), b(g), c(g);
  const double s = 0.7, t = -2.3;
  g.for_each_cell([&](int, int, int, std::size_t n) {
    a[n] = u(rng);
    b[n] = u(rng);
    c[n] = s * a[n] + t * b[n];
  });
  EXPECT_NEAR(integrate_field(c), s * integrate_field(a) + t * integrate_field(b), 1e-15);
}

TEST(Integrate, CircleProfileApproachesDiscArea) {
  // Integral of 1 - alpha over the disc side is pi R^2 up to an O(eps_h^2) term.
  const double R = 0.15;
  const Grid g = build_grid(2, 512);
  const InterfaceParams p(default_eps_h(g.spacing(0), 2));
  ScalarField inside(g);
  inside.assign([&](double x, double y, double) {
    return 1.0 - alpha_from_psi0(std::hypot(x - 0.5, y - 0.5) - R, p);
  });
  EXPECT_NEAR(integrate_field(inside), std::numbers::pi * R * R, 1e-5);
}

TEST(Integrate, SmoothProfileConvergesSecondOrder) {
  auto err = [](int n) {
    const Grid g = build_grid(1, n);
    ScalarField f(g);
    f.assign([](double x, double, double) { return std::exp(x); });
    return std::abs(integrate_field(f) - (std::exp(1.0) - 1.0));
  };
  const double order = std::log2(err(32) / err(64));
  EXPECT_NEAR(order, 2.0, 0.05);
}

TEST(CompensatedSum, OrderInvariance) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> xs(10000);
  for (auto& x : xs) x = u(rng) * std::pow(10.0, 8.0 * u(rng));
  CompensatedSum fwd, rev;
  for (double x : xs) fwd.add(x);
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) rev.add(*it);
  EXPECT_NEAR(fwd.value(), rev.value(), 1e-15 * std::abs(fwd.value()) + 1e-300);
}
