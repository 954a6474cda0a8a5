#pragma once

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>
#include <string>

namespace magplate {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;

// Bad input: malformed config, violated preconditions.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical breakdown: solver failure, det out of range, residual too large.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kInfinite = std::numeric_limits<double>::infinity();

inline Mat3 skew_part(const Mat3& G) { return 0.5 * (G - G.transpose()); }
inline Mat3 sym_part(const Mat3& G) { return 0.5 * (G + G.transpose()); }

void require_unit(const Vec3& nu, double tol = 1e-10, const char* what = "nu");

}  // namespace magplate
