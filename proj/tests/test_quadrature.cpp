#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "seaconv/eval.hpp"
#include "seaconv/parser.hpp"

using namespace seaconv;

namespace {

std::shared_ptr<const Antiderivative> anti(const char* src) {
  return make_antiderivative(parse_expr(src, Context{}, bindings_for(VarSet::one_variable())));
}

}  // namespace

TEST(AdaptiveSimpson, PolynomialAndLog) {
  EXPECT_NEAR(antiderivative_value(*anti("s^2"), 0.0, 2.0), 8.0 / 3.0, 1e-13);
  EXPECT_NEAR(antiderivative_value(*anti("1/s"), 1.0, std::numbers::e), 1.0, 1e-10);
}

TEST(AdaptiveSimpson, GaussianAgainstErf) {
  const double want = std::sqrt(std::numbers::pi) / 2.0 * std::erf(1.0);
  EXPECT_NEAR(antiderivative_value(*anti("exp(-s^2)"), 0.0, 1.0), want, 1e-10);
  EXPECT_NEAR(antiderivative_value(*anti("exp(-s^2)"), 0.0, 1.0), 0.746824, 5e-7);
}

TEST(AdaptiveSimpson, ZeroAtBaseAndAntisymmetric) {
  const auto f = anti("cos(s)*exp(s/3)");
  EXPECT_EQ(antiderivative_value(*f, 0.7, 0.7), 0.0);
  EXPECT_EQ(antiderivative_value(*f, 0.2, 1.9), -antiderivative_value(*f, 1.9, 0.2));
}

TEST(AdaptiveSimpson, Additivity) {
  const auto f = anti("tanh(s) + s^3 - sin(2*s)");
  const double ab = antiderivative_value(*f, -0.5, 0.4);
  const double bc = antiderivative_value(*f, 0.4, 1.7);
  const double ac = antiderivative_value(*f, -0.5, 1.7);
  EXPECT_NEAR(ab + bc, ac, 1e-9);
}

TEST(AdaptiveSimpson, CubicsAreExact) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (int n = 0; n < 50; ++n) {
    const double a = d(rng), b = d(rng), c = d(rng), e = d(rng), lo = d(rng), hi = d(rng);
    auto f = [&](double s) { return ((a * s + b) * s + c) * s + e; };
    auto F = [&](double s) { return ((a / 4 * s + b / 3) * s + c / 2) * s * s + e * s; };
    EXPECT_NEAR(adaptive_simpson(f, lo, hi), F(hi) - F(lo), 1e-12 * std::max(1.0, std::abs(F(hi) - F(lo))));
  }
}

TEST(AdaptiveSimpson, VectorIntegrand) {
  auto f = [](double s) { return std::vector<double>{s, s * s, std::exp(s)}; };
  const auto r = adaptive_simpson(f, 0.0, 1.0);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_NEAR(r[0], 0.5, 1e-12);
  EXPECT_NEAR(r[1], 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(r[2], std::numbers::e - 1.0, 1e-10);
}

TEST(AdaptiveSimpson, DepthLimit) {
  QuadratureOptions q;
  q.abs_tol = q.rel_tol = 1e-15;
  q.max_depth = 3;
  EXPECT_THROW((void)adaptive_simpson([](double s) { return std::sin(1.0 / s); }, 1e-3, 1.0, q), QuadratureError);
}

TEST(AdaptiveSimpson, NonFiniteIntegrand) {
  EXPECT_THROW((void)adaptive_simpson([](double s) { return 1.0 / s; }, -1.0, 1.0), QuadratureError);
}

TEST(AdaptiveSimpson, IntegrandDomainError) {
  EXPECT_THROW((void)antiderivative_value(*anti("log(s)"), -1.0, 1.0), DomainError);
}

TEST(AntiderivJetRule, FundamentalTheorem) {
  const auto f = anti("s^2");
  const Jet4 x = Jet4::variable(1, 1, 2.0);
  const Jet4 r = antideriv_jet_rule(*f, 0.0, x);
  EXPECT_NEAR(r.value(), 8.0 / 3.0, 1e-13);
  EXPECT_DOUBLE_EQ(r.d(1), 4.0);
}

TEST(AntiderivJetRule, ConstantIntegrand) {
  const auto f = anti("1");
  const Jet4 t = Jet4::variable(1, 0, 1.0);
  const Jet4 r = antideriv_jet_rule(*f, 0.0, t);
  EXPECT_NEAR(r.value(), 1.0, 1e-14);
  EXPECT_DOUBLE_EQ(r.d(0), 1.0);
}

TEST(AntiderivJetRule, RadialIntegrand) {
  const auto f = anti("(1 + s)^2 / s^2");
  const Jet4 w = Jet4::variable(1, 1, 2.0);
  const Jet4 r = antideriv_jet_rule(*f, 1.0, w);
  EXPECT_NEAR(r.value(), 1.5 + 2.0 * std::log(2.0), 1e-9);
  EXPECT_DOUBLE_EQ(r.d(1), 9.0 / 4.0);
}

TEST(IntegralNode, DerivativesComeFromIntegrand) {
  const auto f = anti("exp(-s^2) + s*sin(s)");
  Context ctx;
  const Expr e = integral(f, constant(0.1), parse_expr("x*y + t", ctx));
  const Point4 p{0.3, 0.8, -0.6, 0.0};
  const Jet4 j = eval_jet(e, p, 2);
  const double s = 0.3 + 0.8 * -0.6;
  const double fs = std::exp(-s * s) + s * std::sin(s);
  const double dfs = -2 * s * std::exp(-s * s) + std::sin(s) + s * std::cos(s);
  EXPECT_NEAR(j.d(0), fs, 1e-12);
  EXPECT_NEAR(j.d(1), -0.6 * fs, 1e-12);
  EXPECT_NEAR(j.d(1, 2), fs + 0.8 * -0.6 * dfs, 1e-12);
  EXPECT_NEAR(j.value(), antiderivative_value(*f, 0.1, s), 1e-15);
}

TEST(IntegralNode, VariableLowerLimit) {
  const auto f = anti("cos(s)");
  const Expr e = integral(f, var_t(), var_x());
  const Jet4 j = eval_jet(e, {0.2, 1.1, 0, 0}, 1);
  EXPECT_NEAR(j.value(), std::sin(1.1) - std::sin(0.2), 1e-11);
  EXPECT_NEAR(j.d(0), -std::cos(0.2), 1e-14);
  EXPECT_NEAR(j.d(1), std::cos(1.1), 1e-14);
}

TEST(AxisIntegral, MatchesClosedForm) {
  Context ctx;
  const Expr integrand = parse_expr("exp(t*x) + y*x^2", ctx);
  auto a = std::make_shared<const AxisAntiderivative>(make_axis_antiderivative(integrand, Var::x, 0.0));
  const Expr e = axis_integral(a);
  const double t = 0.7, x = 1.3, y = -0.4;
  // F = (exp(t x) - 1)/t + y x^3/3
  const Jet4 j = eval_jet(e, {t, x, y, 0.5}, 2);
  EXPECT_NEAR(j.value(), (std::exp(t * x) - 1) / t + y * x * x * x / 3, 1e-10);
  EXPECT_NEAR(j.d(1), std::exp(t * x) + y * x * x, 1e-12);
  EXPECT_NEAR(j.d(2), x * x * x / 3, 1e-10);
  EXPECT_NEAR(j.d(0), x * std::exp(t * x) / t - (std::exp(t * x) - 1) / (t * t), 1e-9);
  EXPECT_NEAR(j.d(3), 0.0, 1e-15);
}
