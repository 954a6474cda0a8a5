#pragma once

#include <functional>
#include <memory>

#include "magplate/degree.hpp"
#include "magplate/three_d_model.hpp"

namespace magplate {

struct RecoveryInput {
  LimitState state;
  DensitySpec spec;
  double h = 0.1;
  int nz = 16;      // cells through Omega's thickness
  int margin = 4;   // cells of the neighbourhood V around S
  // Closed form of lambda on V; when empty the sampled field is extended.
  std::function<Vec3(const Vec2&)> lambda_fn;
  std::shared_ptr<const TensorProvider> provider;  // default_provider(spec) when null
  bool picard = false;  // fixed-point iteration instead of RK4 for eta
};

struct Corrections {
  Vec3Field2 a, b;
};

// a: minimizer for H = sym grad' u; b: minimizer for H = -(grad')^2 v, so that
// div' u + 2 a^3 = 0 and -Lap' v + 2 b^3 = 0 hold nodewise.
Corrections build_corrections(const LimitState& s, const TensorProvider& C);

// Ansatz displacement ybar - z_h on S x (-1, 1) (2 nz cells, same spacing as Omega).
Vec3Field3 build_ansatz(const LimitState& s, const Corrections& ab, double h, double beta, int nz);

struct EtaResult {
  ScalarField3 delta;  // eta - x3 on Omega
  double det_min = 0, det_max = 0;  // of grad_h ybar on the extended grid
  int picard_iterations = 0;
};

// d eta / d x3 = 1 / det grad_h ybar (x', eta), eta(x', 0) = 0, column by column.
// Throws NumericError when det grad_h ybar leaves [1/2, 2].
EtaResult solve_eta(const Vec3Field3& wbar, double h, int nz, bool picard = false);

// y(x', x3) = ybar(x', eta(x', x3)), cubic in x3.
Deformation3 compose(const Vec3Field3& wbar, const ScalarField3& delta, double h);

// Unit field on S.enlarged(margin); equals lambda on S.
Vec3Field2 extend_magnetization(const Vec3Field2& lambda, int margin,
                                const std::function<Vec3(const Vec2&)>& fn = nullptr);

struct InjectivityReport {
  double margin = 0;  // max |grad (y - z_h)| in physical coordinates
  CiarletNecasResult cn;
};
InjectivityReport injectivity_margin(const Deformation3& d, bool ciarlet_necas = true);

struct RecoveryDiagnostics {
  double det_residual = 0;  // max |det grad_h y - 1|
  double ybar_det_min = 0, ybar_det_max = 0;
  double eta_sup = 0;       // max |eta - x3|
  double sup_distance = 0;  // max |y - z_h|
  double trace_a = 0, trace_b = 0;  // max nodewise |tr A|, |tr B|
  InjectivityReport injectivity;
  int picard_iterations = 0;
  nlohmann::json to_json() const;
};

struct RecoveryState {
  Vec3Field3 wbar;
  ScalarField3 delta;
  Deformation3 y;
  Corrections ab;
  SphereMap Lambda;
  RecoveryDiagnostics diag;
};

RecoveryState build_recovery(const RecoveryInput& in, bool ciarlet_necas = false);

}  // namespace magplate
