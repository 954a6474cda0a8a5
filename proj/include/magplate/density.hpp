#pragma once

#include <memory>

#include "magplate/types.hpp"

namespace magplate {

struct DensitySpec {
  double p = 4;
  double beta = 9;
  double alpha = 1;
  double kappa = 1;
  double det_tol = 1e-8;

  void validate() const;
};

using Mat9 = Eigen::Matrix<double, 9, 9>;
using Vec9 = Eigen::Matrix<double, 9, 1>;

inline Vec9 flatten(const Mat3& G) {
  Vec9 g;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g(3 * i + j) = G(i, j);
  return g;
}

inline Mat3 unflatten(const Vec9& g) {
  Mat3 G;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) G(i, j) = g(3 * i + j);
  return G;
}

// Hessian of F -> W(F, nu) at F = I, flattened with index 3i+j.
struct ElasticTensor {
  Vec3 nu = Vec3::UnitZ();
  Mat9 K = Mat9::Zero();
  // Richardson estimate of the finite-difference error (0 for closed forms).
  double fd_error = 0;

  double operator()(int i, int j, int k, int l) const { return K(3 * i + j, 3 * k + l); }
  double contract(const Mat3& G) const {
    Vec9 g = flatten(G);
    return g.dot(K * g);
  }
};

double dist_so3(const Mat3& F);
// dist(I + G; SO(3)) without forming I + G.
double dist_so3_strain(const Mat3& G);
// det(I + G) - 1.
double det_minus_one(const Mat3& G);

double eval_W(const Mat3& F, const Vec3& nu, const DensitySpec& spec);
// W(I + G, nu); accurate when |G| is tiny.
double eval_W_strain(const Mat3& G, const Vec3& nu, const DensitySpec& spec);
// Returns kInfinite off the constraint |det F - 1| <= det_tol.
double eval_W_inc(const Mat3& F, const Vec3& nu, const DensitySpec& spec);
double eval_W_k(const Mat3& F, const Vec3& nu, double k, const DensitySpec& spec);

// Central-difference Hessian of W(., nu) at I with the given step, symmetrized;
// fd_error compares against step 2*step.
ElasticTensor assemble_C_nu(const Vec3& nu, const DensitySpec& spec, double step = 1e-4);
// 2 P_sym + 8 kappa (nu x nu)(nu x nu)^T, i.e. Q3 = 2|sym G|^2 + 8 kappa (nu.sym G nu)^2.
ElasticTensor closed_form_C_nu(const Vec3& nu, double kappa);

// W(I + G, nu) - Q3(G, nu)/2.
double remainder_probe(const Mat3& G, const Vec3& nu, const DensitySpec& spec);

class TensorProvider {
 public:
  virtual ~TensorProvider() = default;
  virtual ElasticTensor tensor(const Vec3& nu) const = 0;
  // Gradient of nu -> G:C^nu G along the sphere (tangent to nu).
  virtual Vec3 q3_nu_gradient(const Mat3& G, const Vec3& nu) const;
};

class ClosedFormProvider : public TensorProvider {
 public:
  explicit ClosedFormProvider(double kappa) : kappa_(kappa) {}
  ElasticTensor tensor(const Vec3& nu) const override { return closed_form_C_nu(nu, kappa_); }
  Vec3 q3_nu_gradient(const Mat3& G, const Vec3& nu) const override;

 private:
  double kappa_;
};

class FiniteDifferenceProvider : public TensorProvider {
 public:
  explicit FiniteDifferenceProvider(DensitySpec spec) : spec_(spec) {}
  ElasticTensor tensor(const Vec3& nu) const override { return assemble_C_nu(nu, spec_); }

 private:
  DensitySpec spec_;
};

std::shared_ptr<const TensorProvider> default_provider(const DensitySpec& spec);

// Orthonormal pair spanning the tangent plane at nu.
std::pair<Vec3, Vec3> tangent_basis(const Vec3& nu);

}  // namespace magplate
