#pragma once

#include <vector>

#include "magplate/grid.hpp"

namespace magplate {

// Tensor-product box for the stray field: uniform in x, y, arbitrary z nodes.
struct BoxGrid {
  double x0 = 0, y0 = 0, dx = 1, dy = 1;
  int nx = 0, ny = 0;  // cells
  std::vector<double> z;  // increasing node coordinates

  int nz() const { return int(z.size()) - 1; }
  std::size_t cell_count() const { return std::size_t(nx) * ny * nz(); }
  std::size_t node_count() const { return std::size_t(nx + 1) * (ny + 1) * (nz() + 1); }
  std::size_t cell(int i, int j, int k) const { return (std::size_t(k) * ny + j) * nx + i; }
  std::size_t node(int i, int j, int k) const { return (std::size_t(k) * (ny + 1) + j) * (nx + 1) + i; }
  double dz(int k) const { return z[k + 1] - z[k]; }
  double cell_volume(int k) const { return dx * dy * dz(k); }
  Vec3 cell_center(int i, int j, int k) const {
    return Vec3(x0 + (i + 0.5) * dx, y0 + (j + 0.5) * dy, 0.5 * (z[k] + z[k + 1]));
  }
  Vec3 lo() const { return Vec3(x0, y0, z.front()); }
  Vec3 hi() const { return Vec3(x0 + nx * dx, y0 + ny * dy, z.back()); }
  // Cell containing coordinate c along z; -1 if outside.
  int find_z(double c) const;
  void validate() const;
};

BoxGrid uniform_box(const Vec3& lo, const Vec3& hi, int nx, int ny, int nz);

// Box around the thin plate S x (-h/2, h/2): lateral nodes continue the S
// grid, padded so the box is `padding` times wider; z is aligned with the
// film (nz_film cells), graded geometrically outside up to +-padding*L/2.
BoxGrid make_plate_box(const Grid2& S, double h, int nz_film, double padding, double grading = 1.2);

}  // namespace magplate
