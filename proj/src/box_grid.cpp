#include "magplate/box_grid.hpp"

#include <algorithm>
#include <cmath>

namespace magplate {

int BoxGrid::find_z(double c) const {
  if (c < z.front() || c > z.back()) return -1;
  auto it = std::upper_bound(z.begin(), z.end(), c);
  int k = int(it - z.begin()) - 1;
  return std::min(k, nz() - 1);
}

void BoxGrid::validate() const {
  if (nx < 2 || ny < 2 || nz() < 2) throw ConfigError("box grid needs at least 2 cells per axis");
  if (!(dx > 0 && dy > 0)) throw ConfigError("box spacing must be positive");
  for (int k = 0; k < nz(); ++k)
    if (!(z[k + 1] > z[k])) throw ConfigError("box z nodes must increase");
}

BoxGrid uniform_box(const Vec3& lo, const Vec3& hi, int nx, int ny, int nz) {
  BoxGrid b;
  b.x0 = lo.x();
  b.y0 = lo.y();
  b.nx = nx;
  b.ny = ny;
  b.dx = (hi.x() - lo.x()) / nx;
  b.dy = (hi.y() - lo.y()) / ny;
  b.z.resize(nz + 1);
  for (int k = 0; k <= nz; ++k) b.z[k] = lo.z() + (hi.z() - lo.z()) * k / nz;
  b.validate();
  return b;
}

BoxGrid make_plate_box(const Grid2& S, double h, int nz_film, double padding, double grading) {
  if (!(padding >= 2)) throw ConfigError("padding factor must be at least 2");
  if (!(h > 0)) throw ConfigError("thickness h must be positive");
  if (!(grading >= 1)) throw ConfigError("z grading must be >= 1");
  BoxGrid b;
  b.dx = S.dx();
  b.dy = S.dy();
  int px = int(std::ceil(0.5 * (padding - 1) * S.nx)), py = int(std::ceil(0.5 * (padding - 1) * S.ny));
  b.nx = S.nx + 2 * px;
  b.ny = S.ny + 2 * py;
  b.x0 = S.origin.x() - px * b.dx;
  b.y0 = S.origin.y() - py * b.dy;
  const double top = 0.5 * padding * std::max(S.extent.x(), S.extent.y());
  const double dzf = h / nz_film;
  std::vector<double> up;
  double zc = 0.5 * h, s = dzf;
  while (zc < top) {
    s *= grading;
    zc += s;
    up.push_back(zc);
  }
  for (auto it = up.rbegin(); it != up.rend(); ++it) b.z.push_back(-*it);
  for (int k = 0; k <= nz_film; ++k) b.z.push_back(-0.5 * h + k * dzf);
  for (double u : up) b.z.push_back(u);
  b.validate();
  return b;
}

}  // namespace magplate
