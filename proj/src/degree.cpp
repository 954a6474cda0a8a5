#include "magplate/degree.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace magplate {

namespace {

using Corners = std::array<Vec3, 8>;  // corner (a,b,c) at index a + 2b + 4c

Corners cell_corners(const Vec3Field3& P, int i, int j, int k) {
  Corners c;
  for (int q = 0; q < 8; ++q) c[q] = P.at(i + (q & 1), j + ((q >> 1) & 1), k + ((q >> 2) & 1));
  return c;
}

template <class V>
V trilinear(const std::array<V, 8>& c, const Vec3& s) {
  V acc = c[0] * 0.0;
  for (int q = 0; q < 8; ++q) {
    double w = ((q & 1) ? s.x() : 1 - s.x()) * (((q >> 1) & 1) ? s.y() : 1 - s.y()) * (((q >> 2) & 1) ? s.z() : 1 - s.z());
    acc += w * c[q];
  }
  return acc;
}

Mat3 trilinear_jacobian(const Corners& c, const Vec3& s) {
  Mat3 J = Mat3::Zero();
  for (int q = 0; q < 8; ++q) {
    double a = (q & 1) ? 1 : -1, b = ((q >> 1) & 1) ? 1 : -1, g = ((q >> 2) & 1) ? 1 : -1;
    double wx = (q & 1) ? s.x() : 1 - s.x(), wy = ((q >> 1) & 1) ? s.y() : 1 - s.y(), wz = ((q >> 2) & 1) ? s.z() : 1 - s.z();
    J.col(0) += a * wy * wz * c[q];
    J.col(1) += b * wx * wz * c[q];
    J.col(2) += g * wx * wy * c[q];
  }
  return J;
}

// Local coordinates of p in the trilinear cell, if p lies in it.
std::optional<Vec3> invert(const Corners& c, const Vec3& p, double scale) {
  Vec3 s(0.5, 0.5, 0.5);
  for (int it = 0; it < 30; ++it) {
    Vec3 r = trilinear(c, s) - p;
    if (r.norm() <= 1e-13 * scale) break;
    Mat3 J = trilinear_jacobian(c, s);
    Eigen::FullPivLU<Mat3> lu(J);
    if (!lu.isInvertible()) return std::nullopt;
    s -= lu.solve(r);
    if (!s.allFinite() || s.cwiseAbs().maxCoeff() > 10) return std::nullopt;
  }
  if ((trilinear(c, s) - p).norm() > 1e-9 * scale) return std::nullopt;
  const double e = 1e-12;
  if (s.minCoeff() < -e || s.maxCoeff() > 1 + e) return std::nullopt;
  return s;
}

}  // namespace

double OccupancyMask::volume() const {
  double v = 0;
  for (int k = 0; k < nk; ++k)
    for (int j = 0; j < nj; ++j)
      for (int i = 0; i < ni; ++i) v += fraction[local(i, j, k)] * box.cell_volume(k0 + k);
  return v;
}

std::vector<Vec3> OccupancyMask::magnetization() const {
  std::vector<Vec3> mu(box.cell_count(), Vec3::Zero());
  for (int k = 0; k < nk; ++k)
    for (int j = 0; j < nj; ++j)
      for (int i = 0; i < ni; ++i) mu[box.cell(i0 + i, j0 + j, k0 + k)] = nu[local(i, j, k)];
  return mu;
}

std::vector<Vec3> OccupancyMask::occupied_centers() const {
  std::vector<Vec3> out;
  for (int k = 0; k < nk; ++k)
    for (int j = 0; j < nj; ++j)
      for (int i = 0; i < ni; ++i)
        if (fraction[local(i, j, k)] >= 0.5) out.push_back(box.cell_center(i0 + i, j0 + j, k0 + k));
  return out;
}

OccupancyMask deformed_mask(const Deformation3& d, const BoxGrid& box, int supersample, const Vec3Field3* nu) {
  box.validate();
  if (supersample < 1) throw ConfigError("supersample must be >= 1");
  if (nu && !(nu->grid() == d.grid())) throw ConfigError("magnetization grid does not match the deformation");
  const Grid3& g = d.grid();
  Vec3Field3 P = d.positions();
  Vec3 lo = P[0], hi = P[0];
  for (const Vec3& p : P.values()) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 blo = box.lo(), bhi = box.hi();
  if ((lo.array() <= blo.array()).any() || (hi.array() >= bhi.array()).any())
    throw ConfigError("deformed body leaves the rasterization box");
  auto ix = [&](double x) { return std::clamp(int(std::floor((x - box.x0) / box.dx)), 0, box.nx - 1); };
  auto iy = [&](double y) { return std::clamp(int(std::floor((y - box.y0) / box.dy)), 0, box.ny - 1); };
  auto iz = [&](double z) { return std::max(0, box.find_z(z)); };
  OccupancyMask m;
  m.box = box;
  m.i0 = ix(lo.x());
  m.j0 = iy(lo.y());
  m.k0 = iz(lo.z());
  m.ni = ix(hi.x()) - m.i0 + 1;
  m.nj = iy(hi.y()) - m.j0 + 1;
  m.nk = iz(hi.z()) - m.k0 + 1;
  const int s = supersample, s3 = s * s * s;
  const std::size_t ncell = std::size_t(m.ni) * m.nj * m.nk;
  std::vector<unsigned char> hit(ncell * s3, 0);
  m.fraction.assign(ncell, 0);
  m.nu.assign(ncell, Vec3::Zero());
  const double scale = (hi - lo).norm() + 1e-300;
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        Corners c = cell_corners(P, i, j, k);
        Vec3 clo = c[0], chi = c[0];
        for (const Vec3& q : c) {
          clo = clo.cwiseMin(q);
          chi = chi.cwiseMax(q);
        }
        std::array<Vec3, 8> cn;
        if (nu)
          for (int q = 0; q < 8; ++q) cn[q] = nu->at(i + (q & 1), j + ((q >> 1) & 1), k + ((q >> 2) & 1));
        for (int bk = iz(clo.z()); bk <= iz(chi.z()); ++bk)
          for (int bj = iy(clo.y()); bj <= iy(chi.y()); ++bj)
            for (int bi = ix(clo.x()); bi <= ix(chi.x()); ++bi) {
              std::size_t lc = m.local(bi - m.i0, bj - m.j0, bk - m.k0);
              for (int q = 0; q < s3; ++q) {
                unsigned char& hq = hit[lc * s3 + q];
                if (hq) continue;
                int a = q % s, b = (q / s) % s, cc = q / (s * s);
                Vec3 p(box.x0 + (bi + (a + 0.5) / s) * box.dx, box.y0 + (bj + (b + 0.5) / s) * box.dy,
                       box.z[bk] + (cc + 0.5) / s * box.dz(bk));
                if ((p.array() < clo.array()).any() || (p.array() > chi.array()).any()) continue;
                auto loc = invert(c, p, scale);
                if (!loc) continue;
                hq = 1;
                m.fraction[lc] += 1.0 / s3;
                if (nu) m.nu[lc] += trilinear(cn, *loc) / s3;
              }
            }
      }
  return m;
}

BoxGrid image_box(const Deformation3& d, int pad_cells, int nz_film) {
  const Grid3& g = d.grid();
  Vec3Field3 P = d.positions();
  Vec3 lo = P[0], hi = P[0];
  for (const Vec3& p : P.values()) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  BoxGrid b;
  b.dx = g.base.dx();
  b.dy = g.base.dy();
  double ox = g.base.origin.x(), oy = g.base.origin.y();
  int i0 = int(std::floor((lo.x() - ox) / b.dx)) - pad_cells, i1 = int(std::ceil((hi.x() - ox) / b.dx)) + pad_cells;
  int j0 = int(std::floor((lo.y() - oy) / b.dy)) - pad_cells, j1 = int(std::ceil((hi.y() - oy) / b.dy)) + pad_cells;
  b.x0 = ox + i0 * b.dx;
  b.y0 = oy + j0 * b.dy;
  b.nx = i1 - i0;
  b.ny = j1 - j0;
  const double dz = nz_film > 0 ? d.h / nz_film : d.h * g.dz();
  const double zb = -0.5 * d.h;
  int k0 = int(std::floor((lo.z() - zb) / dz)) - pad_cells, k1 = int(std::ceil((hi.z() - zb) / dz)) + pad_cells;
  for (int k = k0; k <= k1; ++k) b.z.push_back(zb + k * dz);
  b.validate();
  return b;
}

DegreeResult degree_at(const Deformation3& d, const Vec3& target, double r) {
  if (!(r > 0)) throw ConfigError("mollifier radius must be positive");
  const Grid3& g = d.grid();
  Vec3Field3 P = d.positions();
  DegreeResult res;
  res.boundary_distance = kInfinite;
  for (int k = 0; k <= g.nz; ++k)
    for (int j = 0; j <= g.ny(); ++j)
      for (int i = 0; i <= g.nx(); ++i) {
        if (!(i == 0 || j == 0 || k == 0 || i == g.nx() || j == g.ny() || k == g.nz)) continue;
        res.boundary_distance = std::min(res.boundary_distance, (P.at(i, j, k) - target).norm());
      }
  if (!(res.boundary_distance > r)) throw ConfigError("degree target within the mollifier radius of the boundary image");
  // Normalization of c (1 - t^2)^4 over the ball: 4 pi r^3 c int_0^1 (1 - t^2)^4 t^2 dt = 1.
  static const double xg[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
  double radial = 0;
  for (int p = 0; p < 200; ++p)
    for (double x : xg) {
      double t = (p + x) / 200;
      radial += std::pow(1 - t * t, 4) * t * t * 0.5 / 200;
    }
  const double c = 1.0 / (4 * std::acos(-1.0) * r * r * r * radial);
  double acc = 0;
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        Corners cc = cell_corners(P, i, j, k);
        Vec3 clo = cc[0], chi = cc[0];
        for (const Vec3& q : cc) {
          clo = clo.cwiseMin(q);
          chi = chi.cwiseMax(q);
        }
        Vec3 gap = (clo - target).cwiseMax(target - chi).cwiseMax(Vec3::Zero());
        if (gap.norm() >= r) continue;
        int m[3];
        for (int a = 0; a < 3; ++a) {
          double len = 0;
          for (int q = 0; q < 8; ++q)
            if (!((q >> a) & 1)) len = std::max(len, (cc[q | (1 << a)] - cc[q]).norm());
          m[a] = std::max(1, int(std::ceil(3 * len / r)));
        }
        for (int c2 = 0; c2 < m[2]; ++c2)
          for (int b = 0; b < m[1]; ++b)
            for (int a = 0; a < m[0]; ++a)
              for (int q = 0; q < 8; ++q) {
                Vec3 s((a + xg[q & 1]) / m[0], (b + xg[(q >> 1) & 1]) / m[1], (c2 + xg[(q >> 2) & 1]) / m[2]);
                double rho2 = (trilinear(cc, s) - target).squaredNorm() / (r * r);
                if (rho2 >= 1) continue;
                double wq = 0.125 / (double(m[0]) * m[1] * m[2]);
                acc += wq * c * std::pow(1 - rho2, 4) * trilinear_jacobian(cc, s).determinant();
              }
      }
  res.raw = acc;
  res.degree = int(std::lround(acc));
  res.residual = std::abs(acc - res.degree);
  if (!(res.residual < 0.1)) {
    std::ostringstream os;
    os << "degree integral not near an integer (value " << acc << "); reduce the radius or move the target";
    throw NumericError(os.str());
  }
  return res;
}

CiarletNecasResult ciarlet_necas_check(const Deformation3& d, double slack) {
  Mat3Field3 G = d.strain();
  ScalarField3 a = G.map([&](const Mat3& m) { return std::abs(1 + det_minus_one(m)); });
  CiarletNecasResult r;
  r.lhs = d.h * integrate(a);
  r.rhs = deformed_mask(d, image_box(d, 2), 2).volume();
  r.pass = r.lhs <= r.rhs * (1 + slack);
  return r;
}

namespace {
double rect_signed_depth(const Grid2& S, double x, double y) {
  // Positive inside: distance to the rectangle boundary; negative outside.
  double dx = std::min(x - S.origin.x(), S.origin.x() + S.extent.x() - x);
  double dy = std::min(y - S.origin.y(), S.origin.y() + S.extent.y() - y);
  if (dx >= 0 && dy >= 0) return std::min(dx, dy);
  double ox = std::max(0.0, -dx), oy = std::max(0.0, -dy);
  return -std::sqrt(ox * ox + oy * oy);
}
}  // namespace

bool subcylinder_inside(const OccupancyMask& mask, const Grid2& S, double eps, double theta, double h) {
  const BoxGrid& b = mask.box;
  for (int k = 0; k < b.nz(); ++k)
    for (int j = 0; j < b.ny; ++j)
      for (int i = 0; i < b.nx; ++i) {
        Vec3 c = b.cell_center(i, j, k);
        if (rect_signed_depth(S, c.x(), c.y()) <= eps || std::abs(c.z()) >= 0.5 * theta * h) continue;
        int li = i - mask.i0, lj = j - mask.j0, lk = k - mask.k0;
        if (li < 0 || lj < 0 || lk < 0 || li >= mask.ni || lj >= mask.nj || lk >= mask.nk) return false;
        if (mask.fraction[mask.local(li, lj, lk)] < 0.5) return false;
      }
  return true;
}

bool supercylinder_contains(const OccupancyMask& mask, const Grid2& S, double eps, double ell, double h) {
  for (int k = 0; k < mask.nk; ++k)
    for (int j = 0; j < mask.nj; ++j)
      for (int i = 0; i < mask.ni; ++i) {
        if (mask.fraction[mask.local(i, j, k)] <= 0) continue;
        Vec3 c = mask.box.cell_center(mask.i0 + i, mask.j0 + j, mask.k0 + k);
        if (rect_signed_depth(S, c.x(), c.y()) < -eps || std::abs(c.z()) >= 0.5 * ell * h) return false;
      }
  return true;
}

}  // namespace magplate
