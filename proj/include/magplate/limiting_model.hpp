#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <json.hpp>

#include "magplate/density.hpp"
#include "magplate/grid.hpp"
#include "magplate/quadratic_forms.hpp"

namespace magplate {

struct LimitState {
  VecField2 u;
  ScalarField2 v;
  Vec3Field2 lambda;

  const Grid2& grid() const { return lambda.grid(); }
  // Same grid everywhere, finite values, |lambda| = 1 within 1e-10.
  void validate() const;
  static LimitState constant(const Grid2& g, const Vec3& lambda);
};

struct LoadSpec {
  VecField2 f;
  ScalarField2 g;
  Vec3Field2 hfield;

  static LoadSpec zero(const Grid2& grid);
  void validate(const Grid2& grid) const;
};

struct EnergyReport {
  double membrane = 0;
  double bending = 0;
  double elastic = 0;  // membrane + bending for the 2D model
  double exchange = 0;
  double magnetostatic = 0;
  double loads = 0;

  double total() const { return elastic + exchange + magnetostatic; }
  // E - L
  double total_with_loads() const { return total() - loads; }
  nlohmann::json to_json() const;
};

struct LimitGradient {
  VecField2 u;
  ScalarField2 v;
  Vec3Field2 lambda;  // tangent to lambda nodewise
};

class LimitingModel {
 public:
  explicit LimitingModel(DensitySpec spec, std::shared_ptr<const TensorProvider> provider = nullptr);

  EnergyReport energy(const LimitState& s) const;
  double loads(const LimitState& s, const LoadSpec& l) const;
  // Discrete E - L (L omitted when loads is null).
  double total(const LimitState& s, const LoadSpec* l) const;
  // Gradient of total() with respect to node values.
  LimitGradient gradient(const LimitState& s, const LoadSpec* l) const;

  const DensitySpec& spec() const { return spec_; }
  const TensorProvider& provider() const { return *provider_; }

 private:
  DensitySpec spec_;
  std::shared_ptr<const TensorProvider> provider_;
};

EnergyReport eval_E(const LimitState& s, const TensorProvider& provider, const DensitySpec& spec);
double eval_L(const LimitState& s, const LoadSpec& l);

struct MinimizeOptions {
  double tol = 1e-6;
  int max_iter = 5000;
  double armijo = 1e-4;
  // First trial step; later trials use the Barzilai-Borwein step, then Armijo halving.
  double initial_step = 1.0;
  // Zero u, v on the boundary ring and v on the next ring (approximates v = dv = 0).
  bool clamp = false;
  // Cycle through the u, v, lambda blocks instead of a joint step.
  bool alternate = false;
  // lambda = e3 is a critical point; a seeded random tilt of this size, the same
  // at every node, breaks it.
  double initial_jitter = 0;
  std::uint64_t seed = 0;
};

struct TraceRow {
  int iter;
  double F;
  double gradnorm;
  double step;
};

struct MinimizeResult {
  LimitState state;
  std::vector<TraceRow> trace;
  bool converged = false;
  int iterations = 0;
  double F = 0;
};

MinimizeResult minimize_F(const LimitState& initial, const LoadSpec* loads, const LimitingModel& model,
                          const MinimizeOptions& opt = {});

}  // namespace magplate
