#pragma once

#include <utility>

#include "magplate/density.hpp"
#include "magplate/grid.hpp"
#include "magplate/limiting_model.hpp"
#include "magplate/stray_field.hpp"

namespace magplate {

// y = z_h + w + t, with z_h(x) = (x', h x3). Only w enters the elastic term,
// so translations leave it bitwise unchanged.
struct Deformation3 {
  Vec3Field3 w;
  Vec3 translation = Vec3::Zero();
  double h = 1;

  static Deformation3 identity(const Grid3& g, double h);
  static Deformation3 from_positions(const Vec3Field3& y, double h);

  const Grid3& grid() const { return w.grid(); }
  Vec3 reference(std::size_t p) const {
    Vec3 x = grid().node(p);
    return Vec3(x.x(), x.y(), h * x.z());
  }
  Vec3 body(std::size_t p) const { return reference(p) + w[p]; }
  Vec3 position(std::size_t p) const { return body(p) + translation; }
  Vec3Field3 positions() const;
  // grad_h y - I.
  Mat3Field3 strain() const { return scaled_grad3(w, h); }
  // h > 0, finite values.
  void validate() const;
};

// Sphere-valued map on a neighbourhood V of S, placed in space by a rigid
// frame: m(xi) = R Lambda((R^T (xi - c))').
class SphereMap {
 public:
  SphereMap() = default;
  // lambda_ext lives on S.enlarged(margin); on the S nodes the exchange
  // density and Jacobian are taken from the S-grid stencils so that the
  // undeformed pullback reproduces the limiting exchange energy.
  SphereMap(Vec3Field2 lambda_ext, const Grid2& S, int margin);

  const Grid2& domain() const { return lambda_.grid(); }
  const Vec3Field2& values() const { return lambda_; }
  int margin() const { return margin_; }
  const Mat3& rotation() const { return R_; }
  const Vec3& offset() const { return c_; }

  // Planar coordinates in the map's own frame.
  Vec2 local(const Vec3& xi) const;
  // local(body + shift), with the frame offset taken off the shift first so
  // that a common translation of body and map cancels exactly.
  Vec2 local(const Vec3& body, const Vec3& shift) const;
  bool covers_local(const Vec2& q) const { return contains(domain(), q); }
  Vec3 value_local(const Vec2& q) const { return R_ * interpolate(lambda_, q).normalized(); }
  double density_local(const Vec2& q) const { return interpolate(dens_, q); }
  bool covers(const Vec3& xi) const;
  Vec3 value(const Vec3& xi) const;
  double exchange_density(const Vec3& xi) const;
  // Spatial gradient of m at xi.
  Mat3 gradient(const Vec3& xi) const;
  SphereMap transported(const Mat3& R, const Vec3& c) const;

 private:
  Vec3Field2 lambda_;
  Mat32Field2 jac_;
  ScalarField2 dens_;
  int margin_ = 0;
  Mat3 R_ = Mat3::Identity();
  Vec3 c_ = Vec3::Zero();
};

// nu = m o y at the nodes of Omega.
Vec3Field3 pullback(const SphereMap& m, const Deformation3& d);

struct ElasticResult {
  double value = 0;          // kInfinite when the det constraint is violated
  double max_det_violation = 0;
};

// h^{-beta} int_Omega W(grad_h y, nu).
ElasticResult eval_elastic_h(const Deformation3& d, const Vec3Field3& nu, const DensitySpec& spec);
// alpha int_Omega |grad' Lambda|^2 (y(x)) dx.
double eval_exchange_h_pullback(const Deformation3& d, const SphereMap& m, double alpha);
// (alpha / h) int over the rasterized deformed body of |grad m|^2.
double eval_exchange_h_eulerian(const Deformation3& d, const SphereMap& m, double alpha, int nz_film = 0,
                                double padding = 2.0);

struct AveragedDisplacements {
  VecField2 u;
  ScalarField2 v;
};
AveragedDisplacements averaged_displacements(const Deformation3& d, double beta);

enum class RigidConvention {
  RotateTranslate,  // T(xi) = R xi + c
  TransposeShift    // T(xi) = R^T xi - c
};

std::pair<Deformation3, SphereMap> transport_rigid(const Deformation3& d, const SphereMap& m, const Mat3& R,
                                                   const Vec3& c,
                                                   RigidConvention conv = RigidConvention::RotateTranslate);

// h^{-beta/2} int f.(y' - x') + h^{1-beta/2} int g y^3 + int_Omega hfield(y') . nu.
double eval_loads_h(const Deformation3& d, const Vec3Field3& nu, const LoadSpec& loads, const DensitySpec& spec);

struct MagOptions {
  double padding = 4;
  double grading = 1.2;
  int supersample = 2;
  PoissonSolver solver = PoissonSolver::Spectral;
  double tol = 1e-10;
};

// (1/2h) int |grad psi|^2 after aligning y with z_h by the best rigid motion.
double eval_mag_h(const Deformation3& d, const Vec3Field3& nu, const MagOptions& opt = {});

struct Eh3Options {
  MagOptions mag;
  bool elastic = true, exchange = true, magnetostatic = true;
};

EnergyReport eval_E_h(const Deformation3& d, const SphereMap& m, const DensitySpec& spec, const LoadSpec* loads = nullptr,
                      const Eh3Options& opt = {});

// Rotation R and shift c minimizing sum w |R y + c - z_h|^2 (weights: quadrature).
std::pair<Mat3, Vec3> kabsch_to_reference(const Deformation3& d);

}  // namespace magplate
