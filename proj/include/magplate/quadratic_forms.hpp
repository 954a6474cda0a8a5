#pragma once

#include "magplate/density.hpp"

namespace magplate {

struct ReductionResult {
  double value = 0;
  Vec3 c = Vec3::Zero();
  // Minimizing 3x3 argument: H (top-left) + c x e3 + e3 x c.
  Mat3 G = Mat3::Zero();
  // d value / d H at fixed nu (envelope theorem).
  Mat2 dH = Mat2::Zero();
};

double q3(const Mat3& G, const ElasticTensor& C);

// H embedded in the top-left block plus c x e3 + e3 x c.
Mat3 embed(const Mat2& H, const Vec3& c);

// min over c with c3 = -tr H / 2 (so tr G = 0).
ReductionResult q2_inc(const Mat2& H, const ElasticTensor& C);
// Unconstrained min over c of Q3 + k (tr G)^2.
ReductionResult q2_k(const Mat2& H, double k, const ElasticTensor& C);

}  // namespace magplate
