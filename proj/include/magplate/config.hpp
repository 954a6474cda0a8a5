#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "magplate/expression.hpp"
#include "magplate/recovery.hpp"

namespace magplate {

struct GridConfig {
  int nx = 64, ny = 64, nz = 16;
  Vec2 origin{0, 0}, extent{1, 1};
  int margin = 4;  // cells of V around S
  Grid2 grid2() const { return Grid2(nx, ny, origin, extent); }
};

struct StateConfig {
  std::array<Expression, 2> u;
  Expression v;
  std::array<Expression, 3> lambda;
};

// Field dumps that override the expressions.
struct InputsConfig {
  std::string u, v, lambda, deformation;
};

struct LoadsConfig {
  std::array<Expression, 2> f;
  Expression g;
  std::array<Expression, 3> hfield;
};

struct ComponentsConfig {
  bool elastic = true, exchange = true, magnetostatic = true, loads = false;
};

struct RecoveryConfig {
  bool picard = false;
  bool ciarlet_necas = false;
};

struct DegreeQueryConfig {
  Vec3 target = Vec3::Zero();
  double r = 0;  // 0: h / 4
};

struct ReduceConfig {
  Mat2 H = Mat2::Identity();
  Vec3 nu = Vec3::UnitX();
  std::vector<double> k;
  bool finite_difference = false;  // assemble C^nu by finite differences
};

struct StudyConfig {
  DensitySpec density;
  GridConfig grid;
  MagOptions poisson;
  StateConfig state;
  InputsConfig inputs;
  std::vector<double> h{0.2, 0.1, 0.05, 0.025, 0.0125};
  ComponentsConfig components;
  LoadsConfig loads;
  MinimizeOptions minimize;
  RecoveryConfig recovery;
  std::vector<DegreeQueryConfig> queries;
  ReduceConfig reduce;
  std::string output = "out";
  nlohmann::json source;  // the parsed document, defaults not filled
};

// Strict: unknown keys and wrong types throw ConfigError naming the key path.
StudyConfig config_from_json(const nlohmann::json& j);
StudyConfig parse_config(const std::string& path);
std::string config_hash(const StudyConfig& cfg);

// lambda from expressions, normalized at every point.
std::function<Vec3(const Vec2&)> lambda_function(const StudyConfig& cfg);
LimitState make_state(const StudyConfig& cfg);
LoadSpec make_loads(const StudyConfig& cfg, const Grid2& g);

}  // namespace magplate
