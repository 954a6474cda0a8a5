#include "magplate/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "magplate/parallel.hpp"
#include "magplate/quadratic_forms.hpp"

namespace magplate {

Corrections build_corrections(const LimitState& s, const TensorProvider& C) {
  s.validate();
  const Grid2& g = s.grid();
  Corrections out{Vec3Field2(g), Vec3Field2(g)};
  MatField2 Ju = jacobian2(s.u);
  MatField2 Hv = hess2(s.v);
  parallel_for(g.node_count(), [&](std::size_t b, std::size_t e) {
    for (std::size_t p = b; p < e; ++p) {
      ElasticTensor T = C.tensor(s.lambda[p]);
      Mat2 Hu = 0.5 * (Ju[p] + Ju[p].transpose());
      out.a[p] = q2_inc(Hu, T).c;
      out.b[p] = q2_inc(Mat2(-Hv[p]), T).c;
    }
  });
  return out;
}

Vec3Field3 build_ansatz(const LimitState& s, const Corrections& ab, double h, double beta, int nz) {
  const Grid2& S = s.grid();
  Grid3 ext(S, 2 * nz, 1.0);
  VecField2 dv = grad2(s.v);
  const double e0 = std::pow(h, beta / 2), em = std::pow(h, beta / 2 - 1), ep = std::pow(h, beta / 2 + 1);
  Vec3Field3 w(ext);
  for (int k = 0; k <= ext.nz; ++k) {
    const double x3 = ext.x3(k);
    for (std::size_t q = 0; q < S.node_count(); ++q) {
      const Vec2& u = s.u[q];
      const Vec2& gv = dv[q];
      w[k * S.node_count() + q] = e0 * Vec3(u.x() - x3 * gv.x(), u.y() - x3 * gv.y(), 0) + em * Vec3(0, 0, s.v[q]) +
                                  ep * (2 * x3 * ab.a[q] + x3 * x3 * ab.b[q]);
    }
  }
  return w;
}

namespace {

// One column of delta' = psi(s + delta), delta(0) = 0, at the Omega nodes.
void rk4_column(const ScalarField3& psi, int i, int j, int nz, std::vector<double>& out) {
  const int c = nz / 2;
  const double dz = 1.0 / nz, hs = dz / 4;
  auto f = [&](double s, double d) { return interpolate_x3(psi, i, j, s + d); };
  out[c] = 0;
  for (int dir : {1, -1}) {
    double d = 0, s = 0;
    const double st = dir * hs;
    for (int k = 1; k <= c; ++k) {
      for (int sub = 0; sub < 4; ++sub) {
        double k1 = f(s, d);
        double k2 = f(s + st / 2, d + st / 2 * k1);
        double k3 = f(s + st / 2, d + st / 2 * k2);
        double k4 = f(s + st, d + st * k3);
        d += st / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        s = dir * (k * 4 + sub + 1 - 4) * hs;
      }
      s = dir * k * dz;
      out[c + dir * k] = d;
    }
  }
}

// Fixed-point iteration of delta(s) = int_0^s psi(t + delta(t)) dt, Simpson on each substep.
int picard_column(const ScalarField3& psi, int i, int j, int nz, std::vector<double>& out) {
  const int c = nz / 2, m = 4 * c;
  const double hs = 1.0 / nz / 4;
  int iters = 0;
  for (int dir : {1, -1}) {
    std::vector<double> d(m + 1, 0.0), nd(m + 1, 0.0);
    for (int it = 0;; ++it) {
      if (it == 200) throw NumericError("eta: fixed-point iteration did not converge");
      nd[0] = 0;
      double prev = interpolate_x3(psi, i, j, 0.0);
      double change = 0, scale = 0;
      for (int q = 1; q <= m; ++q) {
        double s = dir * q * hs;
        double mid = interpolate_x3(psi, i, j, s - dir * hs / 2 + 0.5 * (d[q - 1] + d[q]));
        double cur = interpolate_x3(psi, i, j, s + d[q]);
        nd[q] = nd[q - 1] + dir * hs / 6 * (prev + 4 * mid + cur);
        prev = cur;
        change = std::max(change, std::abs(nd[q] - d[q]));
        scale = std::max(scale, std::abs(nd[q]));
      }
      d.swap(nd);
      iters = std::max(iters, it + 1);
      if (change <= 1e-15 * scale || change == 0) break;
    }
    for (int k = 1; k <= c; ++k) out[c + dir * k] = d[4 * k];
  }
  out[c] = 0;
  return iters;
}

}  // namespace

EtaResult solve_eta(const Vec3Field3& wbar, double h, int nz, bool picard) {
  const Grid3& ext = wbar.grid();
  if (nz % 2 != 0 || ext.nz != 2 * nz || ext.half != 1.0) throw ConfigError("eta: ansatz grid must be S x (-1,1) with 2 nz cells, nz even");
  Mat3Field3 G = scaled_grad3(wbar, h);
  ScalarField3 psi(ext);
  EtaResult r;
  r.det_min = kInfinite;
  r.det_max = -kInfinite;
  for (std::size_t p = 0; p < G.size(); ++p) {
    double dm = det_minus_one(G[p]);
    r.det_min = std::min(r.det_min, 1 + dm);
    r.det_max = std::max(r.det_max, 1 + dm);
    psi[p] = -dm / (1 + dm);
  }
  if (!(r.det_min >= 0.5 && r.det_max <= 2)) {
    std::ostringstream os;
    os << "det grad_h ybar in [" << r.det_min << ", " << r.det_max << "], outside [1/2, 2]: h too large for this state";
    throw NumericError(os.str());
  }
  const Grid2& S = ext.base;
  Grid3 omega(S, nz);
  r.delta = ScalarField3(omega);
  std::vector<int> iters(S.node_count(), 0);
  parallel_for(S.node_count(), [&](std::size_t b, std::size_t e) {
    std::vector<double> col(nz + 1);
    for (std::size_t q = b; q < e; ++q) {
      int i = int(q % (S.nx + 1)), j = int(q / (S.nx + 1));
      if (picard)
        iters[q] = picard_column(psi, i, j, nz, col);
      else
        rk4_column(psi, i, j, nz, col);
      for (int k = 0; k <= nz; ++k) r.delta.at(i, j, k) = col[k];
    }
  });
  r.picard_iterations = *std::max_element(iters.begin(), iters.end());
  return r;
}

Deformation3 compose(const Vec3Field3& wbar, const ScalarField3& delta, double h) {
  const Grid3& g = delta.grid();
  if (!(wbar.grid().base == g.base)) throw ConfigError("compose: grids do not match");
  Deformation3 d = Deformation3::identity(g, h);
  for (int k = 0; k <= g.nz; ++k)
    for (int j = 0; j <= g.ny(); ++j)
      for (int i = 0; i <= g.nx(); ++i) {
        double dl = delta.at(i, j, k);
        double s = g.x3(k) + dl;
        if (!(std::abs(s) < wbar.grid().half)) throw NumericError("compose: eta leaves (-1, 1)");
        d.w.at(i, j, k) = interpolate_x3(wbar, i, j, s) + Vec3(0, 0, h * dl);
      }
  return d;
}

Vec3Field2 extend_magnetization(const Vec3Field2& lambda, int margin, const std::function<Vec3(const Vec2&)>& fn) {
  const Grid2& S = lambda.grid();
  if (margin < 0) throw ConfigError("extension margin must be >= 0");
  Grid2 V = S.enlarged(margin);
  Vec3Field2 ext(V);
  auto inside = [&](int i, int j) { return i >= margin && j >= margin && i <= S.nx + margin && j <= S.ny + margin; };
  for (int j = 0; j <= V.ny; ++j)
    for (int i = 0; i <= V.nx; ++i) {
      if (inside(i, j))
        ext.at(i, j) = lambda.at(i - margin, j - margin);
      else if (fn)
        ext.at(i, j) = fn(V.node(i, j));
      else
        ext.at(i, j) = lambda.at(std::clamp(i - margin, 0, S.nx), std::clamp(j - margin, 0, S.ny));
    }
  if (!fn) {
    // Jacobi smoothing of the collar, S nodes held fixed.
    for (int pass = 0; pass < 2 * margin; ++pass) {
      Vec3Field2 next = ext;
      for (int j = 0; j <= V.ny; ++j)
        for (int i = 0; i <= V.nx; ++i) {
          if (inside(i, j)) continue;
          Vec3 acc = ext.at(i, j);
          int n = 1;
          for (auto [a, b] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
            int ii = i + a, jj = j + b;
            if (ii < 0 || jj < 0 || ii > V.nx || jj > V.ny) continue;
            acc += ext.at(ii, jj);
            ++n;
          }
          next.at(i, j) = acc / n;
        }
      ext = std::move(next);
    }
  }
  for (int j = 0; j <= V.ny; ++j)
    for (int i = 0; i <= V.nx; ++i) {
      if (inside(i, j)) continue;
      Vec3& e = ext.at(i, j);
      double n = e.norm();
      if (!(n >= 0.5)) {
        std::ostringstream os;
        os << "magnetization extension has norm " << n << " < 1/2 at " << V.node(i, j).transpose();
        throw NumericError(os.str());
      }
      e /= n;
    }
  return ext;
}

InjectivityReport injectivity_margin(const Deformation3& d, bool ciarlet_necas) {
  InjectivityReport r;
  Mat3Field3 G = d.strain();
  for (const Mat3& m : G.values()) r.margin = std::max(r.margin, Eigen::JacobiSVD<Mat3>(m).singularValues()(0));
  if (ciarlet_necas) r.cn = ciarlet_necas_check(d);
  return r;
}

nlohmann::json RecoveryDiagnostics::to_json() const {
  nlohmann::json j{{"det_residual", det_residual},
                   {"ybar_det_min", ybar_det_min},
                   {"ybar_det_max", ybar_det_max},
                   {"eta_sup", eta_sup},
                   {"sup_distance", sup_distance},
                   {"trace_a", trace_a},
                   {"trace_b", trace_b},
                   {"injectivity_margin", injectivity.margin},
                   {"picard_iterations", picard_iterations}};
  if (injectivity.cn.rhs > 0)
    j["ciarlet_necas"] = {{"lhs", injectivity.cn.lhs}, {"rhs", injectivity.cn.rhs}, {"pass", injectivity.cn.pass}};
  return j;
}

RecoveryState build_recovery(const RecoveryInput& in, bool ciarlet_necas) {
  in.spec.validate();
  in.state.validate();
  if (!(in.h > 0)) throw ConfigError("recovery: h must be positive");
  if (in.nz < 4 || in.nz % 2 != 0) throw ConfigError("recovery: nz must be even and >= 4");
  if (in.margin < 1) throw ConfigError("recovery: margin must be >= 1");
  auto provider = in.provider ? in.provider : default_provider(in.spec);
  const Grid2& S = in.state.grid();
  RecoveryState r;
  r.ab = build_corrections(in.state, *provider);
  MatField2 Ju = jacobian2(in.state.u);
  MatField2 Hv = hess2(in.state.v);
  for (std::size_t p = 0; p < S.node_count(); ++p) {
    r.diag.trace_a = std::max(r.diag.trace_a, std::abs(Ju[p].trace() + 2 * r.ab.a[p].z()));
    r.diag.trace_b = std::max(r.diag.trace_b, std::abs(-Hv[p].trace() + 2 * r.ab.b[p].z()));
  }
  r.wbar = build_ansatz(in.state, r.ab, in.h, in.spec.beta, in.nz);
  EtaResult eta = solve_eta(r.wbar, in.h, in.nz, in.picard);
  r.delta = eta.delta;
  r.diag.ybar_det_min = eta.det_min;
  r.diag.ybar_det_max = eta.det_max;
  r.diag.picard_iterations = eta.picard_iterations;
  r.y = compose(r.wbar, r.delta, in.h);
  Mat3Field3 G = r.y.strain();
  for (const Mat3& m : G.values()) r.diag.det_residual = std::max(r.diag.det_residual, std::abs(det_minus_one(m)));
  for (double v : r.delta.values()) r.diag.eta_sup = std::max(r.diag.eta_sup, std::abs(v));
  for (const Vec3& v : r.y.w.values()) r.diag.sup_distance = std::max(r.diag.sup_distance, v.norm());
  r.Lambda = SphereMap(extend_magnetization(in.state.lambda, in.margin, in.lambda_fn), S, in.margin);
  r.diag.injectivity = injectivity_margin(r.y, ciarlet_necas);
  return r;
}

}  // namespace magplate
