#include <gtest/gtest.h>

#include <cmath>

#include "instances.hpp"

using namespace fixtures;

namespace {

void expect_fields(const Solution& s, const Point4& pt, std::initializer_list<double> want) {
  const auto f = evaluate_fields(s, pt);
  int i = 0;
  for (double w : want) {
    EXPECT_NEAR(f[i], w, 1e-12 * std::max(1.0, std::abs(w))) << kFieldNames[i];
    ++i;
  }
}

}  // namespace

TEST(Families, RigidRotation) { expect_fields(rigid_rotation(), {0, 2, 3, 5}, {-3, 2, 0, 5, 1}); }

TEST(Families, Theorem21LinearInstance) {
  expect_fields(thm21("t", "0", 1, 0, "s", "0", "s^2/2"), {1, 1, 1, 1}, {2, 1, -2, 2, 2});
}

TEST(Families, Theorem31AtRestingAlpha) {
  const auto f = evaluate_fields(thm31("0", "s"), {0, 2, 0, -3});
  const double R = std::sqrt(7.0 / 4.0);
  EXPECT_NEAR(f[0], 0.0, 1e-15);
  EXPECT_NEAR(f[1], 1.0 - 2.0 * R, 1e-14);
  EXPECT_NEAR(f[4], -1.0 / (4.0 * R), 1e-14);
}

TEST(Families, Prop41CubicPotential) {
  // theta = t(x^3 - 3xy^2): u = 6, v = -6, theta_tx = 0, theta_y = -6 at (1,1,1,0)
  // so p = 0 - 0 + 6 - (36 + 36)/2 = -30.
  const auto f = evaluate_fields(prop41("t*(x^3 - 3*x*y^2)", "0"), {1, 1, 1, 0});
  EXPECT_DOUBLE_EQ(f[0], 6.0);
  EXPECT_DOUBLE_EQ(f[1], -6.0);
  EXPECT_DOUBLE_EQ(f[3], -30.0);
  EXPECT_DOUBLE_EQ(f[4], 1.0);
}

TEST(Families, Theorem43Trivial) {
  const auto f = evaluate_fields(thm43("0", "0", "s", "x"), {0, 3, 0, 0});
  EXPECT_NEAR(f[1], 6.0, 1e-12);
  EXPECT_NEAR(f[3], -9.0, 1e-12);
}

TEST(Families, Theorem44Trivial) {
  expect_fields(thm44("1", "1", "1", "0"), {0, 1, 2, 3}, {-1, 1, 3, 2});
}

TEST(Families, RadialIntegralClosedForm) {
  // Im = s, alpha = gamma = 1, varpi0 = 1: J = (1 - 1/r^2) + 2 ln r^2 + (r^2 - 1)
  const Solution s = thm42("1", "1", "s");
  const double r2 = 2.0;
  const double want = (1 - 1 / r2) + 2 * std::log(r2) + (r2 - 1);
  EXPECT_NEAR(eval_value(s.extras.at("radial_integral"), {0, 1, 1, 0}), want, 1e-10);
}

TEST(Families, AmplitudeIsOneAtBaseTime) {
  const Solution s = thm44("1 + t", "2 + sin(t)", "cos(t)", "s");
  EXPECT_DOUBLE_EQ(eval_value(s.extras.at("amplitude"), {0, 0.3, 0.4, 0}), 1.0);
}

TEST(HarmonicPoly, Expansion) {
  Params P;
  const auto c = P.t("c", "2*t");
  const Expr e = harmonic_poly({{2, HarmonicPart::Re, nullptr}, {3, HarmonicPart::Im, c}, {0, HarmonicPart::Im, c}});
  // Re (2+i)^2 = 3, Im (2+i)^3 = 11
  EXPECT_DOUBLE_EQ(eval_value(e, {0.5, 2, 1, 0}), 3.0 + 11.0);
  EXPECT_DOUBLE_EQ(eval_value(harmonic_poly({{0, HarmonicPart::Re, nullptr}}), {0, 5, 7, 0}), 1.0);
  EXPECT_DOUBLE_EQ(eval_value(harmonic_poly({}), {0, 5, 7, 0}), 0.0);
}

TEST(HarmonicPoly, IsHarmonic) {
  for (int n = 0; n <= 6; ++n) {
    for (auto part : {HarmonicPart::Re, HarmonicPart::Im}) {
      const Expr e = harmonic_poly({{n, part, nullptr}});
      EXPECT_LE(probe_harmonic(e, {}).max_abs, 1e-9) << n;
    }
  }
}

TEST(Hypotheses, MissingParameters) {
  EXPECT_THROW((void)build_theorem_2_1({}), HypothesisError);
  EXPECT_THROW((void)build_theorem_3_1({}), HypothesisError);
  EXPECT_THROW((void)build_prop_4_1({}), HypothesisError);
  EXPECT_THROW((void)build_theorem_4_2({}), HypothesisError);
  EXPECT_THROW((void)build_theorem_4_3({}), HypothesisError);
  EXPECT_THROW((void)build_theorem_4_4({}), HypothesisError);
}

TEST(Hypotheses, NonHarmonicPotential) {
  EXPECT_THROW((void)prop41("x^2", "0"), HypothesisError);
  EXPECT_THROW((void)prop41("x^2 - y^2", "z"), Error);
}

TEST(Hypotheses, VanishingCoefficients) {
  try {
    (void)thm44("1", "0", "1", "s");
    FAIL() << "no error";
  } catch (const HypothesisError& e) {
    EXPECT_NE(std::string(e.what()).find("beta vanishes"), std::string::npos);
  }
  EXPECT_THROW((void)thm42("0", "1", "s"), HypothesisError);
}

TEST(Hypotheses, ThetaVariables) { EXPECT_THROW((void)thm43("0", "0", "s", "x + y"), Error); }

TEST(Guards, CylinderAxisAndRadicand) {
  const Solution s = thm31("0", "s");
  EXPECT_TRUE(in_domain(s, {0, 1, 1, -1}));
  EXPECT_FALSE(in_domain(s, {0, 0, 0, -1}));
  EXPECT_FALSE(in_domain(s, {0, 1, 0, 1}));
  EXPECT_THROW((void)evaluate_fields(s, {0, 1, 0, 1}), GuardError);
  const auto g = guard_violation(s, {0, 0, 0, -1});
  ASSERT_TRUE(g.has_value());
  EXPECT_NE(g->find("eps_axis"), std::string::npos);
}

TEST(Guards, DensityIsPressureGradient) {
  for (const auto& inst : family_instances()) {
    const auto pts = random_in_domain(inst.solution, inst.grid, 20, 5);
    ASSERT_FALSE(pts.empty()) << inst.name;
    for (const auto& pt : pts) {
      const auto J = eval_jets(std::array<Expr, 2>{inst.solution.p, inst.solution.rho}, pt, 1);
      EXPECT_LE(std::abs(J[0].d(3) - J[1].value()), 1e-14 * std::max(1.0, std::abs(J[1].value()))) << inst.name;
    }
  }
}
