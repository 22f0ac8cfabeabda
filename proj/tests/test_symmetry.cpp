#include <gtest/gtest.h>

#include <cmath>

#include "instances.hpp"

using namespace fixtures;

namespace {

void expect_fields(const Solution& s, const Point4& pt, std::initializer_list<double> want) {
  const auto f = evaluate_fields(s, pt);
  int i = 0;
  for (double w : want) {
    EXPECT_NEAR(f[i], w, 1e-13 * std::max(1.0, std::abs(w))) << kFieldNames[i];
    ++i;
  }
}

}  // namespace

TEST(Symmetry, T1OnRigidRotation) {
  expect_fields(apply_symmetry(rigid_rotation(), symmetry(1, "t")), {1, 1, 2, 3}, {-3, 2, 2, 1, 1});
}

TEST(Symmetry, T2UsesTransformedVelocities) {
  const Solution s = apply_symmetry(rigid_rotation(), symmetry(2, "t^2/2"));
  const double t = 0.7, x = 1.3, y = -0.4, z = 0.2;
  expect_fields(s, {t, x, y, z}, {-(y + t * t / 2), x - t, t * y + t * t * t / 2 - 2 * x + t, z + t * x + y, 1});
}

TEST(Symmetry, T2OriginalVelocitiesVariant) {
  SymmetryOptions o;
  o.correction_fields = CorrectionFields::original;
  const Solution s = apply_symmetry(rigid_rotation(), symmetry(2, "t^2/2"), o);
  const double t = 0.7, x = 1.3, y = -0.4;
  // v is taken before the -alpha' shift, so w loses the +t term.
  EXPECT_NEAR(eval_value(s.w, {t, x, y, 0}), t * y + t * t * t / 2 - 2 * x, 1e-14);
}

TEST(Symmetry, T3ShiftsHeight) {
  const Solution s = apply_symmetry(rigid_rotation(), symmetry(3, "t"));
  const double t = 0.4, x = 1.5, y = -2.0, z = 0.25;
  expect_fields(s, {t, x, y, z}, {-y, x, -1, z + t, 1});
}

TEST(Symmetry, T4OnlyChangesPressure) {
  const Solution base = thm21("sin(t)", "cos(t)", 0.5, -0.3, "tanh(s)", "s", "exp(s)");
  const Solution s = apply_symmetry(base, symmetry(4, "7"));
  const Point4 pt{0.3, 0.2, 0.5, 0.7};
  const auto a = evaluate_fields(base, pt), b = evaluate_fields(s, pt);
  for (int i : {0, 1, 2, 4}) EXPECT_EQ(a[i], b[i]) << kFieldNames[i];
  EXPECT_NEAR(b[3], a[3] + 7.0, 1e-14);
}

TEST(Symmetry, T3ComposesAdditively) {
  const Solution base = thm31("sin(t)", "tanh(s)");
  const Solution twice = apply_symmetry(apply_symmetry(base, symmetry(3, "t")), symmetry(3, "t"));
  const Solution once = apply_symmetry(base, symmetry(3, "2*t"));
  for (const auto& pt : random_in_domain(once, cylinder_box(-1.5), 25, 9)) {
    const auto a = evaluate_fields(twice, pt), b = evaluate_fields(once, pt);
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(a[i], b[i], 1e-13 * std::max(1.0, std::abs(b[i])));
  }
}

TEST(Symmetry, GuardsAreTransported) {
  const Solution s = apply_symmetry(thm31("0", "s"), symmetry(1, "t"));
  ASSERT_EQ(s.guards.size(), 2u);
  // The axis moves to x = -alpha(t).
  EXPECT_FALSE(in_domain(s, {1.0, -1.0, 0.0, -1.0}));
  EXPECT_TRUE(in_domain(s, {1.0, 0.0, 0.0, -5.0}));
}

TEST(Symmetry, HistoryRecordsTransforms) {
  const Solution s = apply_symmetry(apply_symmetry(rigid_rotation(), symmetry(1, "t")), symmetry(4, "sin(t)"));
  ASSERT_EQ(s.history.size(), 2u);
  EXPECT_EQ(s.history[0], "T1(t)");
  EXPECT_EQ(s.history[1], "T4(sin(t))");
}

TEST(Symmetry, ResidualsStaySmall) {
  for (const auto& inst : family_instances()) {
    if (inst.name.find("trivial") != std::string::npos || inst.name.find("zero") != std::string::npos) continue;
    for (int k = 1; k <= 4; ++k) {
      const Solution s = apply_symmetry(inst.solution, symmetry(k, "sin(t)"));
      for (const auto& pt : random_in_domain(s, inst.grid, 3, 17)) {
        for (double r : residual_at(s, pt)) {
          if (!std::isnan(r)) {
            EXPECT_LE(std::abs(r), 1e-7) << inst.name << " T" << k;
          }
        }
      }
    }
  }
}

TEST(Symmetry, RejectsBadIndex) {
  EXPECT_THROW((void)apply_symmetry(rigid_rotation(), symmetry(5, "t")), Error);
  EXPECT_THROW((void)apply_symmetry(rigid_rotation(), {1, nullptr}), Error);
}
