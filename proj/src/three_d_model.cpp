#include "magplate/three_d_model.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/SVD>

#include "magplate/degree.hpp"

namespace magplate {

namespace {

Vec3Field3 reference_positions(const Grid3& g, double h) {
  return Vec3Field3::sample(g, [h](const Vec3& x) { return Vec3(x.x(), x.y(), h * x.z()); });
}

void require_rotation(const Mat3& R) {
  if (!R.allFinite() || (R.transpose() * R - Mat3::Identity()).norm() > 1e-10 || std::abs(R.determinant() - 1) > 1e-10)
    throw ConfigError("rigid motion: R is not a rotation");
}

}  // namespace

Deformation3 Deformation3::identity(const Grid3& g, double h) {
  Deformation3 d;
  d.w = Vec3Field3(g);
  d.h = h;
  return d;
}

Deformation3 Deformation3::from_positions(const Vec3Field3& y, double h) {
  Deformation3 d;
  d.h = h;
  d.w = y;
  Vec3Field3 z = reference_positions(y.grid(), h);
  for (std::size_t p = 0; p < y.size(); ++p) d.w[p] = y[p] - z[p];
  return d;
}

Vec3Field3 Deformation3::positions() const {
  Vec3Field3 y(grid());
  for (std::size_t p = 0; p < y.size(); ++p) y[p] = position(p);
  return y;
}

void Deformation3::validate() const {
  if (!(h > 0) || !std::isfinite(h)) throw ConfigError("deformation: h must be positive");
  if (!translation.allFinite()) throw ConfigError("deformation: non-finite translation");
  for (const Vec3& v : w.values())
    if (!v.allFinite()) throw ConfigError("deformation: non-finite values");
  Mat3Field3 G = strain();
  for (std::size_t p = 0; p < G.size(); ++p)
    if (!(1 + det_minus_one(G[p]) > 0)) {
      std::ostringstream os;
      os << "deformation: det grad_h y <= 0 at node " << p;
      throw ConfigError(os.str());
    }
}

SphereMap::SphereMap(Vec3Field2 lambda_ext, const Grid2& S, int margin) : lambda_(std::move(lambda_ext)), margin_(margin) {
  if (margin < 0) throw ConfigError("sphere map: negative margin");
  if (!(lambda_.grid() == S.enlarged(margin))) throw ConfigError("sphere map: field grid is not S enlarged by the margin");
  for (Vec3& v : lambda_.values()) {
    if (!v.allFinite() || v.norm() < 1e-12) throw ConfigError("sphere map: zero or non-finite value");
    v.normalize();
  }
  jac_ = jacobian2(lambda_);
  if (margin > 0) {
    Mat32Field2 inner = jacobian2(restrict_margin(lambda_, margin));
    for (int j = 0; j <= S.ny; ++j)
      for (int i = 0; i <= S.nx; ++i) jac_.at(i + margin, j + margin) = inner.at(i, j);
  }
  dens_ = jac_.map([](const Mat32& J) { return J.squaredNorm(); });
}

Vec2 SphereMap::local(const Vec3& xi) const {
  Vec3 q = R_.transpose() * (xi - c_);
  return Vec2(q.x(), q.y());
}

Vec2 SphereMap::local(const Vec3& body, const Vec3& shift) const {
  Vec3 q = R_.transpose() * (body + (shift - c_));
  return Vec2(q.x(), q.y());
}

bool SphereMap::covers(const Vec3& xi) const { return covers_local(local(xi)); }

Vec3 SphereMap::value(const Vec3& xi) const { return value_local(local(xi)); }

double SphereMap::exchange_density(const Vec3& xi) const { return density_local(local(xi)); }

Mat3 SphereMap::gradient(const Vec3& xi) const {
  Mat32 J = interpolate(jac_, local(xi));
  Mat3 J3 = Mat3::Zero();
  J3.leftCols<2>() = J;
  return R_ * J3 * R_.transpose();
}

SphereMap SphereMap::transported(const Mat3& R, const Vec3& c) const {
  require_rotation(R);
  SphereMap out = *this;
  out.R_ = R * R_;
  out.c_ = R * c_ + c;
  return out;
}

Vec3Field3 pullback(const SphereMap& m, const Deformation3& d) {
  Vec3Field3 nu(d.grid());
  for (std::size_t p = 0; p < nu.size(); ++p) {
    Vec2 q = m.local(d.body(p), d.translation);
    if (!m.covers_local(q)) {
      std::ostringstream os;
      os << "deformed node " << p << " leaves the domain of the magnetization";
      throw ConfigError(os.str());
    }
    nu[p] = m.value_local(q);
  }
  return nu;
}

ElasticResult eval_elastic_h(const Deformation3& d, const Vec3Field3& nu, const DensitySpec& spec) {
  if (!(nu.grid() == d.grid())) throw ConfigError("magnetization grid does not match the deformation");
  Mat3Field3 G = d.strain();
  ScalarField3 wq = quadrature_weights(d.grid());
  ElasticResult r;
  double acc = 0;
  for (std::size_t p = 0; p < G.size(); ++p) {
    r.max_det_violation = std::max(r.max_det_violation, std::abs(det_minus_one(G[p])));
    acc += wq[p] * eval_W_strain(G[p], nu[p], spec);
  }
  r.value = r.max_det_violation > spec.det_tol ? kInfinite : std::pow(d.h, -spec.beta) * acc;
  return r;
}

double eval_exchange_h_pullback(const Deformation3& d, const SphereMap& m, double alpha) {
  ScalarField3 wq = quadrature_weights(d.grid());
  double acc = 0;
  for (std::size_t p = 0; p < wq.size(); ++p) {
    Vec2 q = m.local(d.body(p), d.translation);
    if (!m.covers_local(q)) throw ConfigError("deformed body leaves the domain of the magnetization");
    acc += wq[p] * m.density_local(q);
  }
  return alpha * acc;
}

double eval_exchange_h_eulerian(const Deformation3& d, const SphereMap& m, double alpha, int nz_film, double padding) {
  BoxGrid box = image_box(d, std::max(2, int(std::ceil(padding))), nz_film);
  OccupancyMask mask = deformed_mask(d, box, 2);
  double acc = 0, vol = 0;
  for (int k = 0; k < mask.nk; ++k)
    for (int j = 0; j < mask.nj; ++j)
      for (int i = 0; i < mask.ni; ++i) {
        double f = mask.fraction[mask.local(i, j, k)];
        if (f <= 0) continue;
        Vec3 c = box.cell_center(mask.i0 + i, mask.j0 + j, mask.k0 + k);
        if (!m.covers(c)) throw ConfigError("deformed body leaves the domain of the magnetization");
        double dv = f * box.cell_volume(mask.k0 + k);
        acc += dv * m.exchange_density(c);
        vol += dv;
      }
  if (vol <= 0) throw NumericError("exchange: empty occupancy mask");
  return alpha * acc / d.h;
}

AveragedDisplacements averaged_displacements(const Deformation3& d, double beta) {
  const Grid3& g = d.grid();
  std::vector<double> wz = x3_weights(g);
  AveragedDisplacements out{VecField2(g.base), ScalarField2(g.base)};
  const double su = std::pow(d.h, -beta / 2), sv = std::pow(d.h, 1 - beta / 2);
  for (int k = 0; k <= g.nz; ++k)
    for (int j = 0; j <= g.ny(); ++j)
      for (int i = 0; i <= g.nx(); ++i) {
        // The reference part h x3 averages to zero over the symmetric thickness.
        Vec3 a = d.w[g.index(i, j, k)] + d.translation;
        out.u.at(i, j) += wz[k] * Vec2(a.x(), a.y());
        out.v.at(i, j) += wz[k] * a.z();
      }
  for (auto& u : out.u.values()) u *= su;
  for (auto& v : out.v.values()) v *= sv;
  return out;
}

std::pair<Deformation3, SphereMap> transport_rigid(const Deformation3& d, const SphereMap& m, const Mat3& R, const Vec3& c,
                                                   RigidConvention conv) {
  require_rotation(R);
  Mat3 Q = R;
  Vec3 b = c;
  if (conv == RigidConvention::TransposeShift) {
    Q = R.transpose();
    b = -c;
  }
  Deformation3 out = d;
  const Mat3 Qm = Q - Mat3::Identity();
  for (std::size_t p = 0; p < d.w.size(); ++p) out.w[p] = Q * d.w[p] + Qm * d.reference(p);
  out.translation = Q * d.translation + b;
  return {out, m.transported(Q, b)};
}

double eval_loads_h(const Deformation3& d, const Vec3Field3& nu, const LoadSpec& loads, const DensitySpec& spec) {
  const Grid3& g = d.grid();
  loads.validate(g.base);
  if (!(nu.grid() == g)) throw ConfigError("magnetization grid does not match the deformation");
  ScalarField3 wq = quadrature_weights(g);
  const Grid2& S = g.base;
  const Vec2 lo = S.origin, hi = S.origin + S.extent;
  const double sf = std::pow(d.h, -spec.beta / 2), sg = std::pow(d.h, 1 - spec.beta / 2);
  double acc = 0;
  for (int k = 0; k <= g.nz; ++k)
    for (int j = 0; j <= g.ny(); ++j)
      for (int i = 0; i <= g.nx(); ++i) {
        std::size_t p = g.index(i, j, k);
        Vec3 y = d.position(p);
        Vec2 x = S.node(i, j);
        double t = sf * loads.f.at(i, j).dot(Vec2(y.x() - x.x(), y.y() - x.y())) + sg * loads.g.at(i, j) * y.z();
        // Zeeman field taken constant beyond S along the normal.
        Vec2 q = Vec2(y.x(), y.y()).cwiseMax(lo).cwiseMin(hi);
        t += interpolate(loads.hfield, q).dot(nu[p]);
        acc += wq[p] * t;
      }
  return acc;
}

std::pair<Mat3, Vec3> kabsch_to_reference(const Deformation3& d) {
  ScalarField3 wq = quadrature_weights(d.grid());
  double W = 0;
  Vec3 yb = Vec3::Zero(), zb = Vec3::Zero();
  for (std::size_t p = 0; p < wq.size(); ++p) {
    W += wq[p];
    yb += wq[p] * d.position(p);
    zb += wq[p] * d.reference(p);
  }
  yb /= W;
  zb /= W;
  Mat3 H = Mat3::Zero();
  for (std::size_t p = 0; p < wq.size(); ++p) H += wq[p] * (d.position(p) - yb) * (d.reference(p) - zb).transpose();
  Eigen::JacobiSVD<Mat3> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 D = Mat3::Identity();
  D(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1 : 1;
  Mat3 R = svd.matrixV() * D * svd.matrixU().transpose();
  return {R, zb - R * yb};
}

double eval_mag_h(const Deformation3& d, const Vec3Field3& nu, const MagOptions& opt) {
  if (!(nu.grid() == d.grid())) throw ConfigError("magnetization grid does not match the deformation");
  auto [R, c] = kabsch_to_reference(d);
  Vec3Field3 y = d.positions();
  Vec3Field3 nr(d.grid());
  for (std::size_t p = 0; p < y.size(); ++p) {
    y[p] = R * y[p] + c;
    nr[p] = R * nu[p];
  }
  Deformation3 aligned = Deformation3::from_positions(y, d.h);
  const Grid3& g = d.grid();
  BoxGrid box = make_plate_box(g.base, d.h, g.nz, opt.padding, opt.grading);
  OccupancyMask mask = deformed_mask(aligned, box, opt.supersample, &nr);
  PoissonProblem prob;
  prob.box = box;
  prob.mu = mask.magnetization();
  prob.padding = opt.padding;
  prob.tol = opt.tol;
  prob.solver = opt.solver;
  return solve_stray(prob).energy / d.h;
}

EnergyReport eval_E_h(const Deformation3& d, const SphereMap& m, const DensitySpec& spec, const LoadSpec* loads,
                      const Eh3Options& opt) {
  spec.validate();
  d.validate();
  Vec3Field3 nu = pullback(m, d);
  EnergyReport r;
  if (opt.elastic) r.elastic = eval_elastic_h(d, nu, spec).value;
  if (opt.exchange) r.exchange = eval_exchange_h_pullback(d, m, spec.alpha);
  if (opt.magnetostatic) r.magnetostatic = eval_mag_h(d, nu, opt.mag);
  if (loads) r.loads = eval_loads_h(d, nu, *loads, spec);
  return r;
}

}  // namespace magplate
