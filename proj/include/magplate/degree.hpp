#pragma once

#include <optional>

#include "magplate/box_grid.hpp"
#include "magplate/three_d_model.hpp"

namespace magplate {

// Occupancy of box cells by the deformed body, stored on a sub-box of the
// box lattice: cell (i, j, k) of the sub-box is cell (i0+i, j0+j, k0+k) of box.
struct OccupancyMask {
  BoxGrid box;
  int i0 = 0, j0 = 0, k0 = 0, ni = 0, nj = 0, nk = 0;
  std::vector<double> fraction;  // share of supersample points inside the image
  std::vector<Vec3> nu;          // sum of nu over hit points / points per cell

  std::size_t local(int i, int j, int k) const { return (std::size_t(k) * nj + j) * ni + i; }
  double volume() const;
  // Full-box cell array of occupancy-weighted nu, for the Poisson solve.
  std::vector<Vec3> magnetization() const;
  // Cells with fraction >= 1/2, as box cell centres.
  std::vector<Vec3> occupied_centers() const;
};

// Rasterizes images of the source cells (trilinear maps of their corners)
// by inverting each at supersample points inside its image bounding box.
OccupancyMask deformed_mask(const Deformation3& d, const BoxGrid& box, int supersample = 2,
                            const Vec3Field3* nu = nullptr);
// Box on the same lateral lattice as S around the deformed body, z aligned
// with the undeformed film (nz_film cells through the thickness, 0 = as the
// deformation grid).
BoxGrid image_box(const Deformation3& d, int pad_cells = 2, int nz_film = 0);

struct DegreeResult {
  int degree = 0;
  double raw = 0;
  double residual = 0;  // |raw - degree|
  double boundary_distance = 0;  // dist(target, y(boundary nodes))
};

// deg(y, Omega, target) from int psi_r(y - target) det grad y dx with the
// bump c (1 - |z|^2/r^2)^4. Throws when the residual reaches 0.1 or the
// target is within r of the image of the boundary.
DegreeResult degree_at(const Deformation3& d, const Vec3& target, double r);

struct CiarletNecasResult {
  double lhs = 0;  // int |det grad y|
  double rhs = 0;  // measure of the rasterized image
  bool pass = false;
};

CiarletNecasResult ciarlet_necas_check(const Deformation3& d, double slack = 0.05);

// Every box cell centred in S^eps x (theta h I) is occupied (fraction >= 1/2).
bool subcylinder_inside(const OccupancyMask& mask, const Grid2& S, double eps, double theta, double h);
// Every occupied cell centre lies in S^{-eps} x (ell h I).
bool supercylinder_contains(const OccupancyMask& mask, const Grid2& S, double eps, double ell, double h);

}  // namespace magplate
