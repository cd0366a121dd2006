#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "levelset/maps.hpp"

using namespace lsk;

namespace {

// Composite Simpson rule; independent of the library.
template <class F>
double simpson(F&& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace

TEST(InterfaceParams, DiffusivityAndValidation) {
  const InterfaceParams p(0.01, 2.0);
  EXPECT_EQ(p.D(), 0.01 * 2.0);
  EXPECT_THROW(InterfaceParams(0.0), std::invalid_argument);
  EXPECT_THROW(InterfaceParams(-1.0), std::invalid_argument);
  EXPECT_THROW(InterfaceParams(0.01, 0.0), std::invalid_argument);
}

TEST(InterfaceParams, DefaultWidth) {
  EXPECT_DOUBLE_EQ(default_eps_h(0.1, 1), 0.025);
  EXPECT_DOUBLE_EQ(default_eps_h(0.1, 2), std::sqrt(2.0) * 0.025);
  EXPECT_DOUBLE_EQ(default_eps_h(0.1, 3), std::sqrt(3.0) * 0.025);
}

TEST(Mapping, Validation) {
  EXPECT_NO_THROW(validate(MappingKind{Psi1{0.1, 5e-16}}));
  EXPECT_THROW(validate(MappingKind{Psi1{0.0, 5e-16}}), std::invalid_argument);
  EXPECT_THROW(validate(MappingKind{Psi0Prime{1.0, 5e-16}}), std::invalid_argument);
  EXPECT_THROW(validate(MappingKind{Psi0Prime{1e-5, -1.0}}), std::invalid_argument);
  EXPECT_EQ(mapping_name(Psi0Prime{}), "psi0prime");
}

TEST(AlphaFromPsi0, ClosedFormValues) {
  const InterfaceParams p(0.01);
  EXPECT_EQ(alpha_from_psi0(0.0, p), 0.5);
  EXPECT_NEAR(alpha_from_psi0(0.01, p), 0.7310585786300049, 1e-15);
  EXPECT_EQ(alpha_from_psi0(1e3, p), 1.0);
  EXPECT_EQ(alpha_from_psi0(-1e3, p), 0.0);
}

TEST(AlphaFromPsi0, StrictlyIncreasing) {
  const InterfaceParams p(0.01);
  double prev = alpha_from_psi0(-0.2, p);
  for (int i = 1; i <= 400; ++i) {
    const double a = alpha_from_psi0(-0.2 + 0.001 * i, p);
    EXPECT_GT(a, prev);
    prev = a;
  }
}

TEST(Psi0FromAlpha, ValuesAndRoundTrip) {
  const InterfaceParams p(0.01);
  EXPECT_EQ(psi0_from_alpha(0.5, p), 0.0);
  EXPECT_NEAR(psi0_from_alpha(0.7310585786300049, p), 0.01, 1e-12);
  for (int i = -80; i <= 80; ++i) {
    const double d = 0.1 * i * p.eps_h();
    EXPECT_NEAR(psi0_from_alpha(alpha_from_psi0(d, p), p), d, 1e-12);
    if (d != 0.0) {
      EXPECT_NEAR(psi0_from_alpha(alpha_from_psi0(d, p), p) / d, 1.0, 1e-10);
    }
  }
}

TEST(Psi0FromAlpha, ClampBoundsAndRejectsCorruptData) {
  const InterfaceParams p(0.01);
  const double cap = p.eps_h() * std::log((1.0 + kUnderflowGuard) / kUnderflowGuard);
  EXPECT_NEAR(psi0_from_alpha(1.0, p), cap, 1e-12);
  EXPECT_NEAR(psi0_from_alpha(0.0, p), -cap, 1e-12);
  EXPECT_NEAR(cap / p.eps_h(), 35.23, 0.01);
  EXPECT_THROW(psi0_from_alpha(1.01, p), DataIntegrityError);
  EXPECT_THROW(psi0_from_alpha(-0.5, p), DataIntegrityError);
  EXPECT_THROW(psi0_from_alpha(std::nan(""), p), DataIntegrityError);
}

TEST(Psi1, SymmetryAndGuard) {
  for (double g : {1e-16, 1e-5, 0.1, 0.9}) EXPECT_DOUBLE_EQ(psi1_of_alpha(0.5, g), 0.5);
  EXPECT_EQ(psi1_of_alpha(0.0, 0.1, 0.0), 0.0);
  const double guarded = psi1_of_alpha(0.0, 0.1, 5e-16);
  EXPECT_GT(guarded, 0.0);
  EXPECT_LT(guarded, 0.05);
}

TEST(Psi1, GuardRestoresContinuity) {
  // A saturated tanh profile produces alpha == 0 next to alpha ~ 1e-17.
  const double g = 0.1;
  const double tiny = 1e-17;
  EXPECT_GT(psi1_of_alpha(tiny, g, 0.0) - psi1_of_alpha(0.0, g, 0.0), 1e-2);
  EXPECT_LT(std::abs(psi1_of_alpha(tiny, g) - psi1_of_alpha(0.0, g)), 1e-3);
}

TEST(Psi1, StrictlyIncreasingWithGuard) {
  for (double g : {1e-5, 0.1, 0.5}) {
    double prev = psi1_of_alpha(0.0, g);
    for (int i = 1; i <= 1000; ++i) {
      const double v = psi1_of_alpha(i / 1000.0, g);
      EXPECT_GT(v, prev) << "gamma=" << g << " i=" << i;
      prev = v;
    }
  }
}

TEST(Psi1, SmallGammaLimitIsOneHalf) {
  for (double a : {0.01, 0.2, 0.7, 0.99}) EXPECT_NEAR(psi1_of_alpha(a, 1e-12), 0.5, 1e-10);
}

TEST(Psi1, ActsLikeANarrowerProfile) {
  // Without the guard psi1(alpha(d; w), gamma) = alpha(d; w / gamma), so
  // shrinking w at fixed gamma drives both towards the Heaviside function.
  const double gamma = 0.1;
  for (double w : {1e-2, 1e-3, 1e-4}) {
    const InterfaceParams p(w), narrow(w / gamma);
    for (double m : {-10.0, -3.0, 0.0, 3.0, 10.0})
      EXPECT_NEAR(psi1_of_alpha(alpha_from_psi0(m * w, p), gamma, 0.0), alpha_from_psi0(m * w, narrow), 1e-12);
  }
  const InterfaceParams sharp(1e-5);
  EXPECT_NEAR(psi1_of_alpha(alpha_from_psi0(0.05, sharp), gamma, 0.0), 1.0, 1e-12);
  EXPECT_NEAR(psi1_of_alpha(alpha_from_psi0(-0.05, sharp), gamma, 0.0), 0.0, 1e-12);
  EXPECT_EQ(psi1_of_alpha(alpha_from_psi0(0.0, sharp), gamma), 0.5);
}

TEST(Psi0Prime, InterfaceAndEquivalence) {
  const InterfaceParams p(0.01);
  EXPECT_EQ(psi0prime_of_psi1(0.5, p, 1e-5), 0.0);
  // psi0' tracks psi0 inside the band for small gamma.
  const double gamma = 1e-5;
  for (int i = -40; i <= 40; ++i) {
    const double d = 0.1 * i * p.eps_h();
    const double a = alpha_from_psi0(d, p);
    const double prime = psi0prime_of_psi1(psi1_of_alpha(a, gamma), p, gamma);
    EXPECT_NEAR(prime, psi0_from_alpha(a, p), 1e-6 * p.eps_h() + 1e-4 * std::abs(d));
  }
}

TEST(Psi0Prime, TinyGammaStaircase) {
  // gamma = 1e-16: psi1 - 1/2 is resolved with a handful of ulps only.
  const InterfaceParams p(0.01);
  const double gamma = 1e-16;
  std::set<double> levels;
  for (int i = -100; i <= 100; ++i) {
    const double a = alpha_from_psi0(0.04 * i * p.eps_h(), p);
    levels.insert(psi0prime_of_psi1(psi1_of_alpha(a, gamma), p, gamma));
  }
  EXPECT_LT(levels.size(), 60u);
}

TEST(Delta, Values) {
  EXPECT_EQ(delta_of_alpha(0.0), 0.0);
  EXPECT_EQ(delta_of_alpha(1.0), 0.0);
  EXPECT_EQ(delta_of_alpha(0.5), 0.25);
}

TEST(Delta, NormalisesLikeDirac) {
  const InterfaceParams p(0.01);
  const double e = p.eps_h();
  auto f = [&](double s) { return delta_of_alpha(alpha_from_psi0(s, p)) / e; };
  // Over +-10 eps_h the exact value is tanh(5); the tails hold 9.1e-5.
  EXPECT_NEAR(simpson(f, -10 * e, 10 * e, 20000), std::tanh(5.0), 1e-12);
  EXPECT_NEAR(simpson(f, -40 * e, 40 * e, 80000), 1.0, 1e-12);
}

TEST(Zeta, Values) {
  for (double a : {0.0, 0.3, 0.5, 1.0}) EXPECT_DOUBLE_EQ(zeta_of_alpha(a, 1.0), 1.0);
  EXPECT_NEAR(zeta_of_alpha(0.5, 1e-5), 1.999986137104434, 1e-14);
  double worst = 0.0;
  for (int i = 0; i <= 900; ++i) worst = std::max(worst, std::abs(zeta_of_alpha(0.05 + 0.001 * i, 1e-5) - 2.0));
  EXPECT_LT(worst, 1e-4);
}

TEST(MappingFactor, MatchesDerivativeOfInverseMap) {
  // F = d alpha / d psi1, checked against a centred difference of the inverse map.
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  for (double g : {0.1, 0.3}) {
    for (int t = 0; t < 50; ++t) {
      const double a = u(rng);
      const double h = 1e-6;
      const double dpsi = (psi1_of_alpha(a + h, g, 0.0) - psi1_of_alpha(a - h, g, 0.0)) / (2 * h);
      EXPECT_NEAR(mapping_factor(a, g) * dpsi, 1.0, 1e-7);
      const double dF = (mapping_factor(a + h, g) - mapping_factor(a - h, g)) / (2 * h);
      EXPECT_NEAR(mapping_factor_derivative(a, g), dF, 1e-6 * std::max(1.0, std::abs(dF)));
    }
  }
  EXPECT_EQ(mapping_factor(0.0, 0.1), 0.0);
  EXPECT_EQ(mapping_factor_derivative(1.0, 0.1), 0.0);
}

TEST(MappedField, CoversGhosts) {
  const Grid g = build_grid(1, 16);
  const InterfaceParams p(g.spacing(0) / 2);
  ScalarField a(g);
  a.assign([&](double x, double, double) { return alpha_from_psi0(x - 0.5, p); });
  fill_ghosts(a);
  const ScalarField s = mapped_field(a, Psi0{}, p);
  EXPECT_NEAR(s(-2), psi0_from_alpha(a(0), p), 1e-15);
  EXPECT_NEAR(s(8), g.center(0, 8) - 0.5, 1e-12);
}
