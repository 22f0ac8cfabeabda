#include <gtest/gtest.h>

#include <sstream>

#include "seaconv/config.hpp"
#include "seaconv/report.hpp"

using namespace seaconv;

namespace {

const char* kRotation = "family = rigid_rotation\ngrid = t=0:0:1,x=2:2:1,y=3:3:1,z=5:5:1\n";

const char* kTheorem21 = R"(# moving line
family = theorem_2_1
alpha(t) = t
beta(t) = 0
b1 = 1
b2 = 0
Im(s) = s
iota(s) = 0
sigma(s) = s^2/2
)";

int error_line(const std::string& text) {
  try {
    (void)build_from_config(parse_config(text));
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST(Config, ParsesEntries) {
  const Config c = parse_config(kTheorem21);
  ASSERT_EQ(c.entries.size(), 8u);
  EXPECT_EQ(c.entries[1].key(), "alpha(t)");
  EXPECT_EQ(c.entries[1].value, "t");
  EXPECT_EQ(c.entries[1].line, 3);
  ASSERT_NE(c.find("b1"), nullptr);
  EXPECT_FALSE(c.find("b1")->is_definition());
  EXPECT_EQ(c.find("gamma"), nullptr);
}

TEST(Config, ErrorLines) {
  EXPECT_EQ(error_line("family = theorem_2_1\nalpha(t) = t +\n"), 2);
  EXPECT_EQ(error_line("family = theorem_2_1\nalpha(t) = t\nalpha(t) = t\n"), 3);
  EXPECT_EQ(error_line("family = nope\n"), 1);
  EXPECT_EQ(error_line("family = rigid_rotation\njust words\n"), 2);
}

TEST(Config, MissingParameter) {
  std::string text = kTheorem21;
  text.erase(text.find("sigma"));
  try {
    (void)build_from_config(parse_config(text));
    FAIL() << "no error";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("sigma"), std::string::npos);
  }
}

TEST(Config, BuildsAndEvaluates) {
  const BuiltSolution b = build_from_config(parse_config(kTheorem21));
  const auto f = evaluate_fields(b.solution, {1, 1, 1, 1});
  const double want[] = {2, 1, -2, 2, 2};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(f[i], want[i], 1e-12);
  EXPECT_EQ(b.default_tol, 1e-8);
}

TEST(Descriptor, RoundTripIsStable) {
  const Config c = with_transform(parse_config(kTheorem21), 1, "sin(t)");
  const std::string d1 = write_descriptor(c);
  const std::string d2 = write_descriptor(parse_config(d1));
  EXPECT_EQ(d1, d2);
  EXPECT_NE(d1.find("transform = 1 : sin(t)"), std::string::npos);
  const BuiltSolution a = build_from_config(c), b = build_from_config(parse_config(d1));
  const Point4 pt{0.3, 0.4, 0.5, 0.6};
  EXPECT_EQ(evaluate_fields(a.solution, pt), evaluate_fields(b.solution, pt));
  EXPECT_EQ(a.default_tol, 1e-7);
}

TEST(Descriptor, TransformsStack) {
  Config c = parse_config(kRotation);
  c = with_transform(c, 1, "t");
  c = with_transform(c, 4, "7");
  const BuiltSolution b = build_from_config(parse_config(write_descriptor(c)));
  EXPECT_EQ(b.solution.history.size(), 2u);
  EXPECT_THROW((void)with_transform(c, 5, "t"), ConfigError);
}

TEST(Csv, NumberFormat) {
  EXPECT_EQ(format_csv_number(-0.0), "0");
  EXPECT_EQ(format_csv_number(0.0), "0");
  EXPECT_EQ(format_csv_number(-3.0), "-3");
  EXPECT_EQ(format_csv_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_csv_number(1e-300), "1e-300");
  for (double v : {0.1, 1.0 / 3.0, -2.5e17, 6.02214076e23}) EXPECT_EQ(std::stod(format_csv_number(v)), v);
}

TEST(Csv, ExportRows) {
  const BuiltSolution b = build_from_config(parse_config(kRotation));
  std::ostringstream os;
  export_csv(b.solution, *b.grid, os);
  EXPECT_EQ(os.str(), std::string(kExportHeader) + "\n0,2,3,5,-3,2,0,5,1,true\n");
}

TEST(Csv, ExportMarksExcludedPoints) {
  const BuiltSolution b =
      build_from_config(parse_config("family = theorem_3_1\nalpha(t) = 0\nIm(s) = s\n"));
  std::ostringstream os;
  export_csv(b.solution, parse_grid("x=1:1:1,z=1:1:1"), os);
  EXPECT_EQ(os.str(), std::string(kExportHeader) + "\n0,1,0,1,,,,,,false\n");
}

TEST(Csv, ReportColumns) {
  const BuiltSolution b = build_from_config(parse_config(kRotation));
  std::ostringstream os;
  report_csv(residual_scan(b.solution, *b.grid), os);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "eq,max_abs,rms,worst_t,worst_x,worst_y,worst_z");
  std::getline(in, line);
  EXPECT_EQ(line, "r1,0,0,0,2,3,5");
  int rows = 1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 5);
}

TEST(Families, Listing) {
  ASSERT_EQ(std::size(kFamilies), 6u);
  EXPECT_STREQ(kFamilies[0].tag, "theorem_2_1");
  EXPECT_STREQ(kFamilies[0].parameters, "alpha(t), beta(t), b1, b2, Im(s), iota(s), sigma(s)");
  EXPECT_STREQ(kFamilies[2].tag, "prop_4_1");
  EXPECT_STREQ(kFamilies[2].parameters, "theta(t,x,y) harmonic, zeta(t,x,y)");
  EXPECT_STREQ(kFamilies[5].tag, "theorem_4_4");
}
