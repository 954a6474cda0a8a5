#pragma once

#include <array>
#include <cstddef>
#include <type_traits>
#include <utility>
#include <vector>

#include "magplate/types.hpp"

namespace magplate {

template <class V>
V zero_value() {
  if constexpr (std::is_arithmetic_v<V>) {
    return V(0);
  } else {
    return V::Zero();
  }
}

struct Grid2 {
  int nx = 4, ny = 4;
  Vec2 origin{0.0, 0.0};
  Vec2 extent{1.0, 1.0};

  Grid2() = default;
  Grid2(int nx_, int ny_, Vec2 origin_ = Vec2(0, 0), Vec2 extent_ = Vec2(1, 1));

  double dx() const { return extent.x() / nx; }
  double dy() const { return extent.y() / ny; }
  double spacing(int axis) const { return axis == 0 ? dx() : dy(); }
  int nodes(int axis) const { return axis == 0 ? nx + 1 : ny + 1; }
  std::size_t node_count() const { return std::size_t(nx + 1) * std::size_t(ny + 1); }
  std::size_t index(int i, int j) const { return std::size_t(j) * std::size_t(nx + 1) + std::size_t(i); }
  std::size_t stride(int axis) const { return axis == 0 ? 1 : std::size_t(nx + 1); }
  Vec2 node(int i, int j) const { return origin + Vec2(i * dx(), j * dy()); }
  Vec2 node(std::size_t p) const { return node(int(p % (nx + 1)), int(p / (nx + 1))); }
  double area() const { return extent.x() * extent.y(); }
  // Same spacing, m extra cells on every side.
  Grid2 enlarged(int m) const;
  bool operator==(const Grid2& o) const {
    return nx == o.nx && ny == o.ny && origin == o.origin && extent == o.extent;
  }
};

// Omega = S x (-half, half); half = 1/2 for the reference plate.
struct Grid3 {
  Grid2 base;
  int nz = 4;
  double half = 0.5;

  Grid3() = default;
  Grid3(const Grid2& base_, int nz_, double half_ = 0.5);

  int nx() const { return base.nx; }
  int ny() const { return base.ny; }
  double dz() const { return 2.0 * half / nz; }
  double spacing(int axis) const { return axis == 2 ? dz() : base.spacing(axis); }
  int nodes(int axis) const { return axis == 2 ? nz + 1 : base.nodes(axis); }
  double x3(int k) const { return -half + k * dz(); }
  std::size_t node_count() const { return base.node_count() * std::size_t(nz + 1); }
  std::size_t index(int i, int j, int k) const { return std::size_t(k) * base.node_count() + base.index(i, j); }
  std::size_t stride(int axis) const { return axis == 2 ? base.node_count() : base.stride(axis); }
  Vec3 node(int i, int j, int k) const {
    Vec2 p = base.node(i, j);
    return Vec3(p.x(), p.y(), x3(k));
  }
  Vec3 node(std::size_t p) const {
    std::size_t n2 = base.node_count();
    Vec2 q = base.node(p % n2);
    return Vec3(q.x(), q.y(), x3(int(p / n2)));
  }
  std::array<int, 3> ijk(std::size_t p) const {
    std::size_t n2 = base.node_count();
    int k = int(p / n2);
    std::size_t r = p % n2;
    return {int(r % (nx() + 1)), int(r / (nx() + 1)), k};
  }
  bool operator==(const Grid3& o) const { return base == o.base && nz == o.nz && half == o.half; }
};

template <class G>
constexpr int grid_dim() {
  return std::is_same_v<G, Grid3> ? 3 : 2;
}

template <class G, class V>
class Field {
 public:
  using value_type = V;

  Field() = default;
  explicit Field(const G& g, const V& init = zero_value<V>()) : grid_(g), data_(g.node_count(), init) {}
  Field(const G& g, std::vector<V> data);

  // f receives node coordinates (Vec2 or Vec3).
  template <class Fn>
  static Field sample(const G& g, Fn&& f) {
    Field out(g);
    for (std::size_t p = 0; p < out.size(); ++p) out.data_[p] = f(g.node(p));
    return out;
  }

  const G& grid() const { return grid_; }
  std::size_t size() const { return data_.size(); }
  V& operator[](std::size_t p) { return data_[p]; }
  const V& operator[](std::size_t p) const { return data_[p]; }
  template <class... I>
  V& at(I... idx) { return data_[grid_.index(idx...)]; }
  template <class... I>
  const V& at(I... idx) const { return data_[grid_.index(idx...)]; }
  std::vector<V>& values() { return data_; }
  const std::vector<V>& values() const { return data_; }

  template <class Fn>
  auto map(Fn&& fn) const {
    using R = std::decay_t<decltype(fn(data_[0]))>;
    Field<G, R> out(grid_);
    for (std::size_t p = 0; p < size(); ++p) out[p] = fn(data_[p]);
    return out;
  }

 private:
  G grid_;
  std::vector<V> data_;
};

template <class G, class V>
Field<G, V>::Field(const G& g, std::vector<V> data) : grid_(g), data_(std::move(data)) {
  if (data_.size() != g.node_count()) throw ConfigError("field size does not match grid");
}

using ScalarField2 = Field<Grid2, double>;
using VecField2 = Field<Grid2, Vec2>;
using Vec3Field2 = Field<Grid2, Vec3>;
using MatField2 = Field<Grid2, Mat2>;
using Mat32Field2 = Field<Grid2, Mat32>;
using ScalarField3 = Field<Grid3, double>;
using Vec3Field3 = Field<Grid3, Vec3>;
using Mat3Field3 = Field<Grid3, Mat3>;

// First-derivative stencil on n equispaced nodes at position c: central in the
// interior, (-2, 7/2, -2, 1/2)/h at the ends. The end closure has the same
// leading error h^2 f'''/6 as the central one, so composing it with itself
// stays second order up to the boundary and is exact for quadratics.
struct Stencil {
  int offset[4];
  double weight[4];
  int count;
};
Stencil derivative_stencil(int c, int n, double h);

// d/dx_axis with the stencil above; requires at least 4 nodes on the axis.
template <class G, class V>
Field<G, V> diff(const Field<G, V>& f, int axis) {
  const G& g = f.grid();
  const int n = g.nodes(axis);
  if (n < 4) throw ConfigError("grid too small for derivative stencil (need >= 4 nodes per axis)");
  const std::size_t s = g.stride(axis);
  const double h = g.spacing(axis);
  Field<G, V> out(g);
  for (std::size_t p = 0; p < f.size(); ++p) {
    int c = int((p / s) % std::size_t(n));
    Stencil st = derivative_stencil(c, n, h);
    V acc = zero_value<V>();
    for (int m = 0; m < st.count; ++m) acc += st.weight[m] * f[p + std::ptrdiff_t(st.offset[m]) * std::ptrdiff_t(s)];
    out[p] = acc;
  }
  return out;
}

// Transpose of diff(., axis) as a matrix acting on node values.
template <class G, class V>
Field<G, V> diff_adjoint(const Field<G, V>& f, int axis) {
  const G& g = f.grid();
  const int n = g.nodes(axis);
  if (n < 4) throw ConfigError("grid too small for derivative stencil (need >= 4 nodes per axis)");
  const std::size_t s = g.stride(axis);
  const double h = g.spacing(axis);
  Field<G, V> out(g);
  for (std::size_t p = 0; p < f.size(); ++p) {
    int c = int((p / s) % std::size_t(n));
    Stencil st = derivative_stencil(c, n, h);
    for (int m = 0; m < st.count; ++m) out[p + std::ptrdiff_t(st.offset[m]) * std::ptrdiff_t(s)] += st.weight[m] * f[p];
  }
  return out;
}

VecField2 grad2(const ScalarField2& f);
// Rows are components, columns are derivative directions.
MatField2 jacobian2(const VecField2& f);
Mat32Field2 jacobian2(const Vec3Field2& f);
// grad2 applied twice, mixed entries averaged.
MatField2 hess2(const ScalarField2& f);
// Columns d1, d2, d3/h.
Mat3Field3 scaled_grad3(const Vec3Field3& f, double h);

// Trapezoid in x1, x2; composite Simpson in x3 when nz is even (trapezoid otherwise).
ScalarField2 quadrature_weights(const Grid2& g);
ScalarField3 quadrature_weights(const Grid3& g);
double integrate(const ScalarField2& f);
double integrate(const ScalarField3& f);
// Weights of the x3 rule alone, length nz+1, summing to 2*half.
std::vector<double> x3_weights(const Grid3& g);

// Bilinear interpolation; throws if p lies outside the grid.
template <class V>
V interpolate(const Field<Grid2, V>& f, const Vec2& p);
bool contains(const Grid2& g, const Vec2& p, double slack = 1e-12);

// Cubic Lagrange interpolation along x3 in column (i, j) at height s.
template <class V>
V interpolate_x3(const Field<Grid3, V>& f, int i, int j, double s);

// Restriction of a field on an enlarged grid back to the subgrid of nodes
// offset by m cells.
template <class V>
Field<Grid2, V> restrict_margin(const Field<Grid2, V>& f, int m);

// Restriction of a Grid3 field with half = H to the central slab with half h.
template <class V>
Field<Grid3, V> restrict_slab(const Field<Grid3, V>& f, const Grid3& target);

}  // namespace magplate
