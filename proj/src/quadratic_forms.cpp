#include "magplate/quadratic_forms.hpp"

namespace magplate {

double q3(const Mat3& G, const ElasticTensor& C) { return C.contract(G); }

Mat3 embed(const Mat2& H, const Vec3& c) {
  Mat3 G = Mat3::Zero();
  G.topLeftCorner<2, 2>() = H;
  G.col(2) += c;
  G.row(2) += c.transpose();
  return G;
}

namespace {

Vec9 basis(int a) {
  Mat3 E = Mat3::Zero();
  E(a, 2) += 1;
  E(2, a) += 1;
  return flatten(E);
}

}  // namespace

ReductionResult q2_inc(const Mat2& H, const ElasticTensor& C) {
  ReductionResult r;
  const double c3 = -0.5 * H.trace();
  Vec9 g0 = flatten(embed(H, Vec3(0, 0, c3)));
  Mat2 A;
  Vec2 b;
  for (int a = 0; a < 2; ++a) {
    Vec9 ea = basis(a);
    b(a) = ea.dot(C.K * g0);
    for (int c = 0; c < 2; ++c) A(a, c) = ea.dot(C.K * basis(c));
  }
  Eigen::LDLT<Mat2> ldlt(A);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 1e-14 * A.norm()))
    throw NumericError("q2_inc: singular reduction system");
  Vec2 cp = ldlt.solve(-b);
  r.c = Vec3(cp(0), cp(1), c3);
  r.G = embed(H, r.c);
  Vec9 g = flatten(r.G);
  Vec9 Kg = C.K * g;
  r.value = g.dot(Kg);
  Mat3 S = unflatten(Kg);
  // dG/dH_ab = e_a x e_b - delta_ab e3 x e3 through the trace constraint.
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 2; ++c) r.dH(a, c) = 2 * (S(a, c) - (a == c ? S(2, 2) : 0.0));
  return r;
}

ReductionResult q2_k(const Mat2& H, double k, const ElasticTensor& C) {
  if (!(k >= 0)) throw ConfigError("penalty index k must be nonnegative");
  ReductionResult r;
  Vec9 t = flatten(Mat3::Identity());
  Mat9 K = C.K + k * t * t.transpose();
  Vec9 g0 = flatten(embed(H, Vec3::Zero()));
  Eigen::Matrix3d A;
  Vec3 b;
  for (int a = 0; a < 3; ++a) {
    Vec9 ea = basis(a);
    b(a) = ea.dot(K * g0);
    for (int c = 0; c < 3; ++c) A(a, c) = ea.dot(K * basis(c));
  }
  Eigen::LDLT<Mat3> ldlt(A);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 1e-14 * A.norm()))
    throw NumericError("q2_k: singular reduction system");
  r.c = ldlt.solve(-b);
  r.G = embed(H, r.c);
  Vec9 g = flatten(r.G);
  Vec9 Kg = K * g;
  r.value = g.dot(Kg);
  Mat3 S = unflatten(Kg);
  r.dH = 2 * S.topLeftCorner<2, 2>();
  return r;
}

}  // namespace magplate
