#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "magplate/study.hpp"

using namespace magplate;
using nlohmann::json;

TEST(Expression, Arithmetic) {
  EXPECT_DOUBLE_EQ(Expression::parse("1 + 2*3")(0, 0), 7);
  EXPECT_DOUBLE_EQ(Expression::parse("-x1^2")(3, 0), -9);
  EXPECT_DOUBLE_EQ(Expression::parse("2^3^2")(0, 0), 512);
  EXPECT_DOUBLE_EQ(Expression::parse("(x1 - x2) / 4")(3, 1), 0.5);
  EXPECT_DOUBLE_EQ(Expression::parse("1e-3 * x3")(0, 0, 2), 2e-3);
  EXPECT_DOUBLE_EQ(Expression::parse("2*-x2")(0, 1.5), -3);
}

TEST(Expression, Functions) {
  const double pi = std::acos(-1.0);
  EXPECT_NEAR(Expression::parse("0.1*sin(pi*x1)*sin(pi*x2)")(0.5, 0.5), 0.1, 1e-15);
  EXPECT_NEAR(Expression::parse("cos(x1)^2 + sin(x1)^2")(0.7, 0), 1.0, 1e-15);
  EXPECT_NEAR(Expression::parse("sqrt(abs(-4)) + exp(0) + log(e)")(0, 0), 4.0, 1e-15);
  EXPECT_NEAR(Expression::parse("atan(1)")(0, 0), pi / 4, 1e-15);
  EXPECT_DOUBLE_EQ(Expression::parse("3")(1, 2), 3);
}

TEST(Expression, Errors) {
  for (const char* bad : {"", "1 +", "sin x1", "foo(1)", "x4", "(1", "1)", "2 ** 3", "x1 x2"})
    EXPECT_THROW(Expression::parse(bad), ConfigError) << bad;
}

TEST(Config, MinimalFileGetsDefaults) {
  auto c = config_from_json(json::object());
  EXPECT_EQ(c.density.p, 4);
  EXPECT_EQ(c.density.beta, 9);
  EXPECT_EQ(c.grid.nx, 64);
  EXPECT_EQ(c.grid.nz, 16);
  ASSERT_EQ(c.h.size(), 5u);
  EXPECT_EQ(c.h.back(), 0.0125);
  EXPECT_TRUE(c.components.magnetostatic);
  EXPECT_FALSE(c.components.loads);
  auto s = make_state(c);
  EXPECT_EQ(s.lambda[0], Vec3::UnitX());
}

TEST(Config, RejectsBetaAtMostTwoP) {
  try {
    config_from_json(json{{"density", {{"beta", 8}}}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("beta > 2p"), std::string::npos) << e.what();
  }
}

TEST(Config, RejectsBadHLists) {
  EXPECT_THROW(config_from_json(json{{"h", {0.1, 0.2}}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"h", json::array()}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"h", {0.1, 0.1}}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"h", {1.5}}}), ConfigError);
}

TEST(Config, UnknownKeysNamePath) {
  try {
    config_from_json(json{{"grid", {{"nx", 8}, {"nzz", 4}}}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("grid.nzz"), std::string::npos) << e.what();
  }
  EXPECT_THROW(config_from_json(json{{"colour", 1}}), ConfigError);
  try {
    config_from_json(json{{"state", {{"u", {"x1", "sin("}}}}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("state.u"), std::string::npos) << e.what();
  }
  EXPECT_THROW(config_from_json(json{{"grid", {{"nx", "8"}}}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"poisson", {{"solver", "multigrid"}}}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"queries", {{{"target", {0, 0}}}}}}), ConfigError);
}

TEST(Config, StateFromExpressions) {
  auto c = config_from_json(json{{"grid", {{"nx", 8}, {"ny", 8}}},
                                 {"state", {{"v", "x1*x2"}, {"lambda", {"1", "1", 0}}}}});
  auto s = make_state(c);
  EXPECT_NEAR((s.lambda[5] - Vec3(1, 1, 0).normalized()).norm(), 0.0, 1e-15);
  Vec2 x = s.grid().node(std::size_t(10));
  EXPECT_DOUBLE_EQ(s.v[10], x.x() * x.y());
  EXPECT_THROW(make_state(config_from_json(json{{"grid", {{"nx", 8}, {"ny", 8}}}, {"state", {{"lambda", {"x1", 0, 0}}}}})),
               ConfigError);
}

TEST(Config, ParseFileErrors) {
  EXPECT_THROW(parse_config("/nonexistent/config.json"), ConfigError);
  auto p = std::filesystem::temp_directory_path() / "magplate_bad.json";
  std::ofstream(p) << "{ \"h\": [0.1,, ] }";
  EXPECT_THROW(parse_config(p.string()), ConfigError);
}

TEST(Study, SummaryFlags) {
  ConvergenceTable t;
  t.E.elastic = 1;
  for (double h : {0.4, 0.2, 0.1, 0.05}) {
    StudyRow r;
    r.h = h;
    r.Eh.elastic = 1 + h;
    r.Eh.exchange = 0.5;  // constant gap: never decreases
    t.rows.push_back(r);
  }
  summarize(t, {"elastic", "exchange", "magnetostatic"});
  EXPECT_NEAR(t.components[0].fitted_rate, 1.0, 1e-12);
  EXPECT_TRUE(t.components[0].monotone);
  EXPECT_TRUE(t.components[0].pass);
  EXPECT_FALSE(t.components[1].pass);
  EXPECT_TRUE(t.components[2].pass);  // all gaps zero
  EXPECT_FALSE(t.ok());
}

TEST(Study, SmallRunAndCsvRoundTrip) {
  auto c = config_from_json(json{{"grid", {{"nx", 8}, {"ny", 8}, {"nz", 4}}},
                                 {"density", {{"kappa", 0}}},
                                 {"state", {{"v", "0.1*sin(pi*x1)*sin(pi*x2)"}}},
                                 {"components", {{"magnetostatic", false}}},
                                 {"h", {0.2, 0.1, 0.05}}});
  auto t = run_gamma_study(c);
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_TRUE(t.ok());
  EXPECT_TRUE(t.components[0].monotone);
  auto dir = std::filesystem::temp_directory_path() / "magplate_study";
  auto paths = emit_reports(t, dir.string());
  auto csv = read_csv_table((dir / "gamma_table.csv").string());
  ASSERT_EQ(csv.rows.size(), 3u);
  EXPECT_EQ(csv.columns[0], "h");
  EXPECT_EQ(csv.columns[1], "Eh_elastic");
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_EQ(csv.rows[r][0], t.rows[r].h);
    EXPECT_EQ(csv.rows[r][1], t.rows[r].Eh.elastic);
    EXPECT_EQ(csv.rows[r][3], t.components[0].gaps[r]);
  }
  std::ifstream sj(dir / "gamma_summary.json");
  auto summary = json::parse(sj);
  EXPECT_TRUE(summary["components"]["elastic"].contains("fitted_rate"));
  EXPECT_TRUE(summary["components"]["elastic"]["pass"].get<bool>());
  // Deterministic table.
  auto t2 = run_gamma_study(c);
  auto dir2 = std::filesystem::temp_directory_path() / "magplate_study2";
  emit_reports(t2, dir2.string());
  std::ifstream a(dir / "gamma_table.csv"), b(dir2 / "gamma_table.csv");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
}
