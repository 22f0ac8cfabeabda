#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "seaconv/eval.hpp"
#include "seaconv/parser.hpp"

using namespace seaconv;

namespace {

Context with_fns(std::initializer_list<std::pair<const char*, const char*>> defs, const char* var = "s") {
  Context ctx;
  for (auto [name, body] : defs) ctx.add(parse_param_fn(name, var, body, ctx));
  return ctx;
}

double fd(const Expr& e, Point4 p, int i, double h = 1e-4) {
  Point4 a = p, b = p;
  a[i] += h;
  b[i] -= h;
  return (eval_value(e, a) - eval_value(e, b)) / (2 * h);
}

}  // namespace

TEST(Jet, ProductAndComposition) {
  Jet4 x = Jet4::variable(3, 1, 2.0), y = Jet4::variable(3, 2, 3.0);
  Jet4 f = x * x * y;
  EXPECT_DOUBLE_EQ(f.value(), 12.0);
  EXPECT_DOUBLE_EQ(f.d(1), 12.0);
  EXPECT_DOUBLE_EQ(f.d(2), 4.0);
  EXPECT_DOUBLE_EQ(f.d(1, 1), 6.0);
  EXPECT_DOUBLE_EQ(f.d(1, 2), 4.0);
  EXPECT_DOUBLE_EQ(f.partial({0, 2, 1, 0}), 2.0);
}

TEST(Jet, OrderLimit) {
  EXPECT_THROW(Jet4(13), std::exception);
  EXPECT_NO_THROW(Jet1(40));
}

TEST(Parser, TreeShape) {
  Context ctx;
  const Expr e = parse_expr("x*y + sin(t)", ctx);
  EXPECT_EQ(free_variables(e), (VarSet{Var::t, Var::x, Var::y}));
  EXPECT_EQ(e.node().op, Op::Add);
}

TEST(Parser, DerivativeAnnotation) {
  Context ctx = with_fns({{"alpha", "s^2"}});
  const Expr e = parse_expr("alpha'(t)*x + z", ctx);
  EXPECT_NE(to_string(e).find("alpha'(t)"), std::string::npos);
  EXPECT_DOUBLE_EQ(eval_value(e, {1.5, 2, 0, 1}), 7.0);
}

TEST(Parser, SyntaxErrorOffset) {
  Context ctx;
  try {
    (void)parse_expr("x + (", ctx);
    FAIL() << "no parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }
}

TEST(Parser, RejectsUnknownNames) {
  Context ctx;
  EXPECT_THROW((void)parse_expr("foo(x)", ctx), ParseError);
  EXPECT_THROW((void)parse_expr("q + 1", ctx), ParseError);
  EXPECT_THROW((void)parse_param_fn("f", "s", "s + x", ctx), Error);
}

TEST(Parser, RoundTrip) {
  Context ctx = with_fns({{"alpha", "sin(s)"}, {"Im", "tanh(s)"}});
  for (const char* src : {"x*y + sin(t)", "-(x - y)^3 / (1 + z^2)", "alpha''(t)*x - alpha'(t)*y",
                          "Im(alpha(t)*x + z)^2", "atan2(y, x) + sqrt(x^2 + y^2)", "exp(-t)*log(2 + x)",
                          "x^-2 + 2^x", "1.5e-3*x - -y", "cos(t)^2 + tanh(z/3)"}) {
    const Expr e = parse_expr(src, ctx);
    const Expr back = parse_expr(to_string(e), ctx);
    EXPECT_TRUE(structurally_equal(e, back)) << src << " -> " << to_string(e);
  }
}

TEST(Eval, Elementary) {
  Context ctx;
  const Jet4 j = eval_jet(parse_expr("x*y + sin(t)", ctx), {0, 2, 3, 1}, 2);
  EXPECT_DOUBLE_EQ(j.value(), 6.0);
  EXPECT_DOUBLE_EQ(j.d(0), 1.0);
  EXPECT_DOUBLE_EQ(j.d(1), 3.0);
  EXPECT_DOUBLE_EQ(j.d(2), 2.0);
  EXPECT_DOUBLE_EQ(j.d(1, 2), 1.0);
  EXPECT_DOUBLE_EQ(j.d(0, 0), 0.0);
}

TEST(Eval, DomainErrors) {
  Context ctx;
  EXPECT_THROW((void)eval_jet(parse_expr("sqrt(z)", ctx), {0, 0, 0, -1}, 0), DomainError);
  EXPECT_THROW((void)eval_value(parse_expr("log(x)", ctx), {0, 0, 0, 0}), DomainError);
  EXPECT_THROW((void)eval_value(parse_expr("1/x", ctx), {0, 0, 0, 0}), DomainError);
  EXPECT_THROW((void)eval_value(parse_expr("atan2(y, x)", ctx), {0, 0, 0, 0}), DomainError);
  EXPECT_THROW((void)eval_jet(parse_expr("x", ctx), {0, 0, 0, 0}, 13), Error);
}

TEST(Eval, ParamFnApplication) {
  Context ctx;
  ctx.add(parse_param_fn("alpha", "t", "t^2", ctx));
  ctx.add(parse_param_fn("Im", "s", "s", ctx));
  const Expr e = parse_expr("Im(alpha'(t)*x + z)", ctx);
  EXPECT_DOUBLE_EQ(eval_value(e, {1, 2, 0, 3}), 7.0);
}

TEST(Eval, Deriv1d) {
  Context ctx;
  EXPECT_DOUBLE_EQ(deriv_1d(*parse_param_fn("f", "s", "s^3", ctx), 2.0, 2), 12.0);
  EXPECT_DOUBLE_EQ(deriv_1d(*parse_param_fn("g", "s", "sin(s)", ctx), 0.0, 3), -1.0);
  EXPECT_NEAR(deriv_1d(*parse_param_fn("h", "s", "exp(2*s)", ctx), 0.0, 4), 16.0, 1e-12);
  EXPECT_THROW((void)deriv_1d(*parse_param_fn("k", "s", "s", ctx), 0.0, 7), Error);
}

TEST(Eval, HigherDerivativesMatchClosedForm) {
  Context ctx;
  const Expr e = parse_expr("exp(x)*sin(y) + x^3*y^2 + atan2(y, x)", ctx);
  const Point4 p{0, 0.7, 0.4, 0};
  const Jet4 j = eval_jet(e, p, 4);
  const double x = 0.7, y = 0.4, r2 = x * x + y * y;
  EXPECT_NEAR(j.d(1, 2), std::exp(x) * std::cos(y) + 6 * x * x * y + (y * y - x * x) / (r2 * r2), 1e-12);
  const Jet4 k = eval_jet(parse_expr("exp(x)*sin(y) + x^3*y^2", ctx), p, 4);
  EXPECT_NEAR(k.partial({0, 4, 0, 0}), std::exp(x) * std::sin(y), 1e-10);
  EXPECT_NEAR(k.partial({0, 3, 1, 0}), std::exp(x) * std::cos(y) + 12 * y, 1e-10);
}

TEST(Eval, ChainRule) {
  Context ctx;
  ctx.add(parse_param_fn("g", "s", "sin(s) + s^3", ctx));
  const Expr h = parse_expr("t*x + y^2 - z/3", ctx);
  const Expr gh = parse_expr("g(t*x + y^2 - z/3)", ctx);
  const Point4 p{0.3, -1.2, 0.8, 2.0};
  const Jet4 jh = eval_jet(h, p, 1), jg = eval_jet(gh, p, 1);
  const double g1 = deriv_1d(*ctx.find("g"), jh.value(), 1);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(jg.d(i), g1 * jh.d(i), 1e-12 * std::max(1.0, std::abs(jg.d(i))));
}

TEST(Eval, AgreesWithFiniteDifferences) {
  Context ctx = with_fns({{"alpha", "sin(s)"}, {"Im", "tanh(s)"}});
  const char* corpus[] = {"x*y + sin(t)", "exp(-t)*cos(x*y) + z^3", "Im(alpha(t)*x + z)", "sqrt(1 + x^2 + y^2)",
                          "atan2(y, x)*z", "log(2 + x*x)/(1 + t)", "(x + y)^(1.5)", "alpha''(t)*x^2*z"};
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(0.2, 1.0);
  for (const char* src : corpus) {
    const Expr e = parse_expr(src, ctx);
    for (int n = 0; n < 10; ++n) {
      const Point4 p{d(rng), d(rng), d(rng), d(rng)};
      const Jet4 j = eval_jet(e, p, 1);
      for (int i = 0; i < 4; ++i) {
        const double f = fd(e, p, i);
        if (std::abs(j.d(i)) < 1e-2) {
          EXPECT_NEAR(j.d(i), f, 1e-7) << src;
        } else {
          EXPECT_NEAR(j.d(i), f, 1e-5 * std::abs(j.d(i))) << src;
        }
      }
    }
  }
}

TEST(Substitute, Identity) {
  Context ctx;
  const Expr e = parse_expr("-y", ctx);
  EXPECT_TRUE(structurally_equal(substitute(e, {{Var::y, var_y()}}), e));
}

TEST(Substitute, CoordinateShift) {
  Context ctx;
  ctx.add(parse_param_fn("alpha", "t", "t", ctx));
  const Expr e = parse_expr("x*z", ctx);
  const Expr s = substitute(e, {{Var::x, parse_expr("x + alpha(t)", ctx)}, {Var::z, parse_expr("z - y", ctx)}});
  EXPECT_DOUBLE_EQ(eval_value(s, {1, 1, 2, 3}), 2.0);
}

TEST(Substitute, CommutesWithEvaluation) {
  Context ctx;
  const Expr e = parse_expr("sin(x)*exp(y) + z^2*t", ctx);
  const Expr s = substitute(e, {{Var::x, parse_expr("x + 0.5", ctx)}, {Var::z, parse_expr("z - 1.25", ctx)}});
  const Point4 p{0.4, 0.1, -0.3, 2.0};
  const double want = eval_value(e, {0.4, 0.6, -0.3, 0.75});
  EXPECT_NEAR(eval_value(s, p), want, 1e-13 * std::abs(want));
}
