#include "magplate/density.hpp"

#include <cmath>

namespace magplate {

void DensitySpec::validate() const {
  if (!(p > 3)) throw ConfigError("density.p must exceed 3");
  if (!(beta > 2 * p)) throw ConfigError("density.beta must exceed 2*p (beta > 2p)");
  if (!(alpha > 0)) throw ConfigError("density.alpha must be positive");
  if (!(kappa >= 0)) throw ConfigError("density.kappa must be nonnegative");
  if (!(det_tol > 0)) throw ConfigError("density.det_tol must be positive");
}

double det_minus_one(const Mat3& G) {
  double tr = G.trace();
  double cof = 0.5 * (tr * tr - (G * G).trace());
  return tr + cof + G.determinant();
}

double dist_so3_strain(const Mat3& G) {
  if (!G.allFinite()) throw ConfigError("non-finite deformation gradient");
  Mat3 E = G + G.transpose() + G.transpose() * G;
  Eigen::SelfAdjointEigenSolver<Mat3> es(E, Eigen::EigenvaluesOnly);
  Vec3 e = es.eigenvalues();
  if (1.0 + det_minus_one(G) > 0) {
    double s = 0;
    for (int i = 0; i < 3; ++i) {
      double ei = std::max(e(i), -1.0);
      double d = ei / (1.0 + std::sqrt(1.0 + ei));
      s += d * d;
    }
    return std::sqrt(s);
  }
  // Reflection: the nearest rotation flips the smallest singular value.
  Vec3 sv = Eigen::JacobiSVD<Mat3>(Mat3::Identity() + G).singularValues();
  return std::sqrt((sv(0) - 1) * (sv(0) - 1) + (sv(1) - 1) * (sv(1) - 1) + (sv(2) + 1) * (sv(2) + 1));
}

double dist_so3(const Mat3& F) { return dist_so3_strain(F - Mat3::Identity()); }

double eval_W_strain(const Mat3& G, const Vec3& nu, const DensitySpec& spec) {
  require_unit(nu);
  double d = dist_so3_strain(G);
  Vec3 gtn = G.transpose() * nu;
  double c = 2 * nu.dot(G * nu) + gtn.squaredNorm();
  return d * d + std::pow(d, spec.p) + spec.kappa * c * c;
}

double eval_W(const Mat3& F, const Vec3& nu, const DensitySpec& spec) {
  return eval_W_strain(F - Mat3::Identity(), nu, spec);
}

double eval_W_inc(const Mat3& F, const Vec3& nu, const DensitySpec& spec) {
  double w = eval_W(F, nu, spec);
  return std::abs(F.determinant() - 1) <= spec.det_tol ? w : kInfinite;
}

double eval_W_k(const Mat3& F, const Vec3& nu, double k, const DensitySpec& spec) {
  if (!(k >= 0)) throw ConfigError("penalty index k must be nonnegative");
  double dm = F.determinant() - 1;
  return eval_W(F, nu, spec) + 0.5 * k * dm * dm;
}

namespace {

Mat9 fd_hessian(const Vec3& nu, const DensitySpec& spec, double s) {
  Mat9 H;
  auto E = [](int a) {
    Mat3 m = Mat3::Zero();
    m(a / 3, a % 3) = 1;
    return m;
  };
  for (int a = 0; a < 9; ++a) {
    for (int b = a; b < 9; ++b) {
      Mat3 P = s * (E(a) + E(b)), M = s * (E(a) - E(b));
      double v = eval_W_strain(P, nu, spec) - eval_W_strain(M, nu, spec) - eval_W_strain(-M, nu, spec) +
                 eval_W_strain(-P, nu, spec);
      H(a, b) = H(b, a) = v / (4 * s * s);
    }
  }
  return H;
}

}  // namespace

ElasticTensor assemble_C_nu(const Vec3& nu, const DensitySpec& spec, double step) {
  require_unit(nu);
  ElasticTensor t;
  t.nu = nu;
  t.K = fd_hessian(nu, spec, step);
  t.fd_error = (t.K - fd_hessian(nu, spec, 2 * step)).cwiseAbs().maxCoeff();
  return t;
}

ElasticTensor closed_form_C_nu(const Vec3& nu, double kappa) {
  require_unit(nu);
  ElasticTensor t;
  t.nu = nu;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      t.K(3 * i + j, 3 * i + j) += 1;
      t.K(3 * i + j, 3 * j + i) += 1;
    }
  Vec9 v = flatten(nu * nu.transpose());
  t.K += 8 * kappa * v * v.transpose();
  return t;
}

double remainder_probe(const Mat3& G, const Vec3& nu, const DensitySpec& spec) {
  if (G.norm() > 0.5) throw ConfigError("remainder_probe expects |G| <= 0.5");
  return eval_W_strain(G, nu, spec) - 0.5 * assemble_C_nu(nu, spec).contract(G);
}

std::pair<Vec3, Vec3> tangent_basis(const Vec3& nu) {
  Vec3 a = std::abs(nu.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  Vec3 t1 = (a - a.dot(nu) * nu).normalized();
  return {t1, nu.cross(t1)};
}

Vec3 TensorProvider::q3_nu_gradient(const Mat3& G, const Vec3& nu) const {
  const double s = 1e-3;
  auto [t1, t2] = tangent_basis(nu);
  Vec3 g = Vec3::Zero();
  for (const Vec3& t : {t1, t2}) {
    double fp = tensor((nu + s * t).normalized()).contract(G);
    double fm = tensor((nu - s * t).normalized()).contract(G);
    g += (fp - fm) / (2 * s) * t;
  }
  return g;
}

Vec3 ClosedFormProvider::q3_nu_gradient(const Mat3& G, const Vec3& nu) const {
  Mat3 S = sym_part(G);
  Vec3 Sn = S * nu;
  Vec3 g = 32 * kappa_ * nu.dot(Sn) * Sn;
  return g - g.dot(nu) * nu;
}

std::shared_ptr<const TensorProvider> default_provider(const DensitySpec& spec) {
  return std::make_shared<ClosedFormProvider>(spec.kappa);
}

}  // namespace magplate
