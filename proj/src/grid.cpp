#include "magplate/grid.hpp"

#include <algorithm>
#include <cmath>

namespace magplate {

void require_unit(const Vec3& nu, double tol, const char* what) {
  if (!nu.allFinite() || std::abs(nu.norm() - 1.0) > tol)
    throw ConfigError(std::string(what) + " must be a unit vector");
}

Grid2::Grid2(int nx_, int ny_, Vec2 origin_, Vec2 extent_) : nx(nx_), ny(ny_), origin(origin_), extent(extent_) {
  if (nx < 4 || ny < 4) throw ConfigError("Grid2 needs at least 4 cells per axis");
  if (!(extent.x() > 0 && extent.y() > 0) || !extent.allFinite() || !origin.allFinite())
    throw ConfigError("Grid2 extent must be positive");
}

Grid2 Grid2::enlarged(int m) const {
  return Grid2(nx + 2 * m, ny + 2 * m, origin - Vec2(m * dx(), m * dy()),
               Vec2(extent.x() + 2 * m * dx(), extent.y() + 2 * m * dy()));
}

Grid3::Grid3(const Grid2& base_, int nz_, double half_) : base(base_), nz(nz_), half(half_) {
  if (nz < 4) throw ConfigError("Grid3 needs at least 4 cells along x3");
  if (!(half > 0)) throw ConfigError("Grid3 half-thickness must be positive");
}

Stencil derivative_stencil(int c, int n, double h) {
  Stencil s{};
  if (c == 0) {
    s = {{0, 1, 2, 3}, {-2.0 / h, 3.5 / h, -2.0 / h, 0.5 / h}, 4};
  } else if (c == n - 1) {
    s = {{0, -1, -2, -3}, {2.0 / h, -3.5 / h, 2.0 / h, -0.5 / h}, 4};
  } else {
    s = {{-1, 1, 0, 0}, {-0.5 / h, 0.5 / h, 0.0, 0.0}, 2};
  }
  return s;
}

VecField2 grad2(const ScalarField2& f) {
  ScalarField2 d0 = diff(f, 0), d1 = diff(f, 1);
  VecField2 out(f.grid());
  for (std::size_t p = 0; p < f.size(); ++p) out[p] = Vec2(d0[p], d1[p]);
  return out;
}

MatField2 jacobian2(const VecField2& f) {
  VecField2 d0 = diff(f, 0), d1 = diff(f, 1);
  MatField2 out(f.grid());
  for (std::size_t p = 0; p < f.size(); ++p) {
    out[p].col(0) = d0[p];
    out[p].col(1) = d1[p];
  }
  return out;
}

Mat32Field2 jacobian2(const Vec3Field2& f) {
  Vec3Field2 d0 = diff(f, 0), d1 = diff(f, 1);
  Mat32Field2 out(f.grid());
  for (std::size_t p = 0; p < f.size(); ++p) {
    out[p].col(0) = d0[p];
    out[p].col(1) = d1[p];
  }
  return out;
}

MatField2 hess2(const ScalarField2& f) {
  MatField2 J = jacobian2(grad2(f));
  for (auto& m : J.values()) {
    double off = 0.5 * (m(0, 1) + m(1, 0));
    m(0, 1) = m(1, 0) = off;
  }
  return J;
}

Mat3Field3 scaled_grad3(const Vec3Field3& f, double h) {
  if (!(h > 0)) throw ConfigError("thickness h must be positive");
  Vec3Field3 d0 = diff(f, 0), d1 = diff(f, 1), d2 = diff(f, 2);
  Mat3Field3 out(f.grid());
  for (std::size_t p = 0; p < f.size(); ++p) {
    out[p].col(0) = d0[p];
    out[p].col(1) = d1[p];
    out[p].col(2) = d2[p] / h;
  }
  return out;
}

namespace {

std::vector<double> trapezoid(int cells, double h) {
  std::vector<double> w(cells + 1, h);
  w.front() = w.back() = 0.5 * h;
  return w;
}

std::vector<double> simpson(int cells, double h) {
  if (cells % 2 != 0) return trapezoid(cells, h);
  std::vector<double> w(cells + 1);
  for (int k = 0; k <= cells; ++k) w[k] = (k == 0 || k == cells) ? h / 3 : (k % 2 ? 4 * h / 3 : 2 * h / 3);
  return w;
}

}  // namespace

ScalarField2 quadrature_weights(const Grid2& g) {
  auto wx = trapezoid(g.nx, g.dx()), wy = trapezoid(g.ny, g.dy());
  ScalarField2 w(g);
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) w.at(i, j) = wx[i] * wy[j];
  return w;
}

std::vector<double> x3_weights(const Grid3& g) { return simpson(g.nz, g.dz()); }

ScalarField3 quadrature_weights(const Grid3& g) {
  ScalarField2 w2 = quadrature_weights(g.base);
  auto wz = x3_weights(g);
  ScalarField3 w(g);
  const std::size_t n2 = g.base.node_count();
  for (int k = 0; k <= g.nz; ++k)
    for (std::size_t q = 0; q < n2; ++q) w[k * n2 + q] = w2[q] * wz[k];
  return w;
}

double integrate(const ScalarField2& f) {
  ScalarField2 w = quadrature_weights(f.grid());
  double s = 0;
  for (std::size_t p = 0; p < f.size(); ++p) s += w[p] * f[p];
  return s;
}

double integrate(const ScalarField3& f) {
  ScalarField3 w = quadrature_weights(f.grid());
  double s = 0;
  for (std::size_t p = 0; p < f.size(); ++p) s += w[p] * f[p];
  return s;
}

bool contains(const Grid2& g, const Vec2& p, double slack) {
  Vec2 r = p - g.origin;
  return r.x() >= -slack && r.y() >= -slack && r.x() <= g.extent.x() + slack && r.y() <= g.extent.y() + slack;
}

template <class V>
V interpolate(const Field<Grid2, V>& f, const Vec2& p) {
  const Grid2& g = f.grid();
  if (!contains(g, p, 1e-9 * (g.dx() + g.dy()))) throw NumericError("interpolation point outside grid");
  double sx = (p.x() - g.origin.x()) / g.dx(), sy = (p.y() - g.origin.y()) / g.dy();
  int i = std::clamp(int(std::floor(sx)), 0, g.nx - 1);
  int j = std::clamp(int(std::floor(sy)), 0, g.ny - 1);
  double tx = sx - i, ty = sy - j;
  return (1 - ty) * ((1 - tx) * f.at(i, j) + tx * f.at(i + 1, j)) + ty * ((1 - tx) * f.at(i, j + 1) + tx * f.at(i + 1, j + 1));
}

template <class V>
V interpolate_x3(const Field<Grid3, V>& f, int i, int j, double s) {
  const Grid3& g = f.grid();
  double t = (s + g.half) / g.dz();
  if (t < -1e-9 || t > g.nz + 1e-9) throw NumericError("x3 interpolation point outside grid");
  int k0 = std::clamp(int(std::floor(t)) - 1, 0, g.nz - 3);
  V acc = zero_value<V>();
  for (int a = 0; a < 4; ++a) {
    double l = 1;
    for (int b = 0; b < 4; ++b)
      if (b != a) l *= (t - (k0 + b)) / double(a - b);
    acc += l * f.at(i, j, k0 + a);
  }
  return acc;
}

template <class V>
Field<Grid2, V> restrict_margin(const Field<Grid2, V>& f, int m) {
  const Grid2& g = f.grid();
  Grid2 sub(g.nx - 2 * m, g.ny - 2 * m, g.origin + Vec2(m * g.dx(), m * g.dy()),
            Vec2(g.extent.x() - 2 * m * g.dx(), g.extent.y() - 2 * m * g.dy()));
  Field<Grid2, V> out(sub);
  for (int j = 0; j <= sub.ny; ++j)
    for (int i = 0; i <= sub.nx; ++i) out.at(i, j) = f.at(i + m, j + m);
  return out;
}

template <class V>
Field<Grid3, V> restrict_slab(const Field<Grid3, V>& f, const Grid3& target) {
  const Grid3& g = f.grid();
  if (!(g.base == target.base) || std::abs(g.dz() - target.dz()) > 1e-14 * g.dz())
    throw ConfigError("slab restriction needs matching spacing");
  int off = int(std::lround((target.x3(0) - g.x3(0)) / g.dz()));
  if (off < 0 || off + target.nz > g.nz) throw ConfigError("slab outside source grid");
  Field<Grid3, V> out(target);
  const std::size_t n2 = g.base.node_count();
  for (int k = 0; k <= target.nz; ++k)
    for (std::size_t q = 0; q < n2; ++q) out[k * n2 + q] = f[(k + off) * n2 + q];
  return out;
}

template double interpolate(const ScalarField2&, const Vec2&);
template Vec2 interpolate(const VecField2&, const Vec2&);
template Vec3 interpolate(const Vec3Field2&, const Vec2&);
template Mat32 interpolate(const Mat32Field2&, const Vec2&);
template double interpolate_x3(const ScalarField3&, int, int, double);
template Vec3 interpolate_x3(const Vec3Field3&, int, int, double);
template Mat3 interpolate_x3(const Mat3Field3&, int, int, double);
template ScalarField2 restrict_margin(const ScalarField2&, int);
template VecField2 restrict_margin(const VecField2&, int);
template Vec3Field2 restrict_margin(const Vec3Field2&, int);
template ScalarField3 restrict_slab(const ScalarField3&, const Grid3&);
template Vec3Field3 restrict_slab(const Vec3Field3&, const Grid3&);
template Mat3Field3 restrict_slab(const Mat3Field3&, const Grid3&);

}  // namespace magplate
