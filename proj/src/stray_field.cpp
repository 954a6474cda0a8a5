#include "magplate/stray_field.hpp"

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <sstream>

#include "magplate/parallel.hpp"

namespace magplate {

namespace {

// Edge (i,j,k) along `axis` joins node (i,j,k) to its +axis neighbour. Its
// dual area collects quarter faces of the (up to 4) adjacent cells, and its mu
// is the area-weighted mean of their component along the edge.
struct EdgeValue {
  double area, mu;
};

EdgeValue edge_value(const BoxGrid& b, const std::vector<Vec3>& mu, int axis, int i, int j, int k) {
  double a = 0, m = 0;
  for (int s = -1; s <= 0; ++s)
    for (int t = -1; t <= 0; ++t) {
      int ci = i, cj = j, ck = k;
      double share;
      if (axis == 0) {
        cj += s;
        ck += t;
        if (cj < 0 || cj >= b.ny || ck < 0 || ck >= b.nz()) continue;
        share = 0.25 * b.dy * b.dz(ck);
      } else if (axis == 1) {
        ci += s;
        ck += t;
        if (ci < 0 || ci >= b.nx || ck < 0 || ck >= b.nz()) continue;
        share = 0.25 * b.dx * b.dz(ck);
      } else {
        ci += s;
        cj += t;
        if (ci < 0 || ci >= b.nx || cj < 0 || cj >= b.ny) continue;
        share = 0.25 * b.dx * b.dy;
      }
      a += share;
      if (!mu.empty()) m += share * mu[b.cell(ci, cj, ck)](axis);
    }
  return {a, a > 0 ? m / a : 0.0};
}

double dual_dz(const BoxGrid& b, int k) { return 0.5 * (b.dz(k - 1) + b.dz(k)); }

// b_n = sum over edges of s * A_e * mu_e (head +, tail -), interior nodes only.
std::vector<double> rhs(const BoxGrid& b, const std::vector<Vec3>& mu) {
  std::vector<double> r(b.node_count(), 0);
  parallel_for(std::size_t(b.nz() - 1), [&](std::size_t kb, std::size_t ke) {
    for (std::size_t kk = kb; kk < ke; ++kk) {
      int k = int(kk) + 1;
      for (int j = 1; j < b.ny; ++j)
        for (int i = 1; i < b.nx; ++i) {
          double v = 0;
          EdgeValue e;
          e = edge_value(b, mu, 0, i - 1, j, k);
          v += e.area * e.mu;
          e = edge_value(b, mu, 0, i, j, k);
          v -= e.area * e.mu;
          e = edge_value(b, mu, 1, i, j - 1, k);
          v += e.area * e.mu;
          e = edge_value(b, mu, 1, i, j, k);
          v -= e.area * e.mu;
          e = edge_value(b, mu, 2, i, j, k - 1);
          v += e.area * e.mu;
          e = edge_value(b, mu, 2, i, j, k);
          v -= e.area * e.mu;
          r[b.node(i, j, k)] = v;
        }
    }
  });
  return r;
}

// A_e / l_e for edges touching interior nodes depends on geometry only.
void apply_L(const BoxGrid& b, const std::vector<double>& x, std::vector<double>& y) {
  const std::size_t sx = 1, sy = std::size_t(b.nx + 1), sz = sy * (b.ny + 1);
  const double axy = b.dx * b.dy;
  parallel_for(std::size_t(b.nz() - 1), [&](std::size_t kb, std::size_t ke) {
    for (std::size_t kk = kb; kk < ke; ++kk) {
      int k = int(kk) + 1;
      double dzd = dual_dz(b, k);
      double cx = b.dy * dzd / b.dx, cy = b.dx * dzd / b.dy, czm = axy / b.dz(k - 1), czp = axy / b.dz(k);
      for (int j = 1; j < b.ny; ++j)
        for (int i = 1; i < b.nx; ++i) {
          std::size_t n = b.node(i, j, k);
          double v = x[n];
          y[n] = cx * (2 * v - x[n - sx] - x[n + sx]) + cy * (2 * v - x[n - sy] - x[n + sy]) + czm * (v - x[n - sz]) +
                 czp * (v - x[n + sz]);
        }
    }
  });
}

double dot_interior(const BoxGrid& b, const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0;
  for (int k = 1; k < b.nz(); ++k)
    for (int j = 1; j < b.ny; ++j)
      for (int i = 1; i < b.nx; ++i) {
        std::size_t n = b.node(i, j, k);
        s += x[n] * y[n];
      }
  return s;
}

void solve_cg(const BoxGrid& b, const std::vector<double>& r0, const PoissonProblem& pr,
              StrayFieldSolution& out) {
  const std::size_t nn = b.node_count();
  std::vector<double> x(nn, 0), r = r0, z(nn, 0), p(nn, 0), Ap(nn, 0), diag(nn, 1);
  for (int k = 1; k < b.nz(); ++k) {
    double dzd = dual_dz(b, k);
    double dk = 2 * b.dy * dzd / b.dx + 2 * b.dx * dzd / b.dy + b.dx * b.dy * (1 / b.dz(k - 1) + 1 / b.dz(k));
    for (int j = 1; j < b.ny; ++j)
      for (int i = 1; i < b.nx; ++i) diag[b.node(i, j, k)] = dk;
  }
  double bnorm = std::sqrt(dot_interior(b, r0, r0));
  if (bnorm == 0) {
    out.psi = x;
    return;
  }
  for (std::size_t n = 0; n < nn; ++n) z[n] = r[n] / diag[n];
  p = z;
  double rz = dot_interior(b, r, z);
  int it = 0;
  double rel = 1;
  for (; it < pr.max_iter; ++it) {
    apply_L(b, p, Ap);
    double alpha = rz / dot_interior(b, p, Ap);
    for (std::size_t n = 0; n < nn; ++n) {
      x[n] += alpha * p[n];
      r[n] -= alpha * Ap[n];
    }
    rel = std::sqrt(dot_interior(b, r, r)) / bnorm;
    if (rel < pr.tol) break;
    for (std::size_t n = 0; n < nn; ++n) z[n] = r[n] / diag[n];
    double rz2 = dot_interior(b, r, z);
    double beta = rz2 / rz;
    rz = rz2;
    for (std::size_t n = 0; n < nn; ++n) p[n] = z[n] + beta * p[n];
  }
  // Boundary entries of r, x stay zero: apply_L and the rhs only touch interior nodes.
  out.iterations = it + 1;
  out.residual = rel;
  if (!(rel < pr.tol)) {
    std::ostringstream os;
    os << "stray-field CG did not converge: relative residual " << rel << " after " << pr.max_iter << " iterations";
    throw NumericError(os.str());
  }
  out.psi = std::move(x);
}

void solve_spectral(const BoxGrid& b, const std::vector<double>& r0, StrayFieldSolution& out) {
  const int mx = b.nx - 1, my = b.ny - 1, nz = b.nz();
  const std::size_t plane = std::size_t(mx) * my;
  std::vector<double> hat(plane * (nz + 1), 0);
  double* buf = fftw_alloc_real(plane);
  double* res = fftw_alloc_real(plane);
  fftw_plan plan = fftw_plan_r2r_2d(my, mx, buf, res, FFTW_RODFT00, FFTW_RODFT00, FFTW_ESTIMATE);
  auto transform_plane = [&](int k, const std::vector<double>& src, bool from_nodes) {
    for (int j = 0; j < my; ++j)
      for (int i = 0; i < mx; ++i)
        buf[std::size_t(j) * mx + i] = from_nodes ? src[b.node(i + 1, j + 1, k)] : src[plane * k + std::size_t(j) * mx + i];
    fftw_execute(plan);
  };
  for (int k = 1; k < nz; ++k) {
    transform_plane(k, r0, true);
    std::copy(res, res + plane, hat.begin() + plane * k);
  }
  std::vector<double> dzd(nz + 1, 0);
  for (int k = 1; k < nz; ++k) dzd[k] = 0.5 * (b.dz(k - 1) + b.dz(k));
  const double pi = std::acos(-1.0);
  const double axy = b.dx * b.dy;
  parallel_for(plane, [&](std::size_t pb, std::size_t pe) {
    std::vector<double> c(nz + 1), d(nz + 1);
    for (std::size_t pq = pb; pq < pe; ++pq) {
      int p = int(pq % mx) + 1, q = int(pq / mx) + 1;
      double sp = 2 - 2 * std::cos(p * pi / b.nx), sq = 2 - 2 * std::cos(q * pi / b.ny);
      double lat = b.dy / b.dx * sp + b.dx / b.dy * sq;
      // Thomas on k = 1..nz-1.
      double prev_c = 0, prev_d = 0;
      for (int k = 1; k < nz; ++k) {
        double lo = k > 1 ? -axy / b.dz(k - 1) : 0;
        double up = k < nz - 1 ? -axy / b.dz(k) : 0;
        double diag = lat * dzd[k] + axy * (1 / b.dz(k - 1) + 1 / b.dz(k));
        double rhsv = hat[plane * k + pq];
        double m = diag - lo * prev_c;
        c[k] = up / m;
        d[k] = (rhsv - lo * prev_d) / m;
        prev_c = c[k];
        prev_d = d[k];
      }
      for (int k = nz - 1; k >= 1; --k) {
        double v = d[k] - (k < nz - 1 ? c[k] * hat[plane * (k + 1) + pq] : 0);
        hat[plane * k + pq] = v;
      }
    }
  });
  out.psi.assign(b.node_count(), 0);
  const double scale = 1.0 / (4.0 * b.nx * b.ny);
  for (int k = 1; k < nz; ++k) {
    transform_plane(k, hat, false);
    for (int j = 0; j < my; ++j)
      for (int i = 0; i < mx; ++i) out.psi[b.node(i + 1, j + 1, k)] = scale * res[std::size_t(j) * mx + i];
  }
  fftw_destroy_plan(plan);
  fftw_free(buf);
  fftw_free(res);
  out.iterations = 1;
}

}  // namespace

double dirichlet_energy(const BoxGrid& b, const std::vector<double>& psi) {
  return 0.5 * maxwell_misfit(b, {}, psi);
}

double maxwell_misfit(const BoxGrid& b, const std::vector<Vec3>& mu, const std::vector<double>& psi) {
  const std::size_t st[3] = {1, std::size_t(b.nx + 1), std::size_t(b.nx + 1) * (b.ny + 1)};
  double s = 0;
  for (int k = 0; k <= b.nz(); ++k)
    for (int j = 0; j <= b.ny; ++j)
      for (int i = 0; i <= b.nx; ++i) {
        std::size_t n = b.node(i, j, k);
        const bool has[3] = {i < b.nx, j < b.ny, k < b.nz()};
        for (int axis = 0; axis < 3; ++axis) {
          if (!has[axis]) continue;
          double len = axis == 0 ? b.dx : axis == 1 ? b.dy : b.dz(k);
          EdgeValue e = edge_value(b, mu, axis, i, j, k);
          double g = (psi[n + st[axis]] - psi[n]) / len - e.mu;
          s += e.area * len * g * g;
        }
      }
  return s;
}

StrayFieldSolution solve_stray(const PoissonProblem& pr) {
  const BoxGrid& b = pr.box;
  b.validate();
  if (pr.mu.size() != b.cell_count()) throw ConfigError("magnetization size does not match the box");
  if (!(pr.padding >= 2)) throw ConfigError("padding factor must be at least 2");
  // Support strictly inside: the outermost cell layer must be empty.
  for (int k = 0; k < b.nz(); ++k)
    for (int j = 0; j < b.ny; ++j)
      for (int i = 0; i < b.nx; ++i) {
        bool edge = i == 0 || j == 0 || k == 0 || i == b.nx - 1 || j == b.ny - 1 || k == b.nz() - 1;
        const Vec3& m = pr.mu[b.cell(i, j, k)];
        if (!m.allFinite()) throw ConfigError("non-finite magnetization");
        if (edge && m.squaredNorm() > 0) throw ConfigError("magnetization support touches the box boundary");
      }
  std::vector<double> r = rhs(b, pr.mu);
  StrayFieldSolution out;
  if (pr.solver == PoissonSolver::Spectral) {
    solve_spectral(b, r, out);
    std::vector<double> Lx(b.node_count(), 0);
    apply_L(b, out.psi, Lx);
    double rn = 0, bn = 0;
    for (int k = 1; k < b.nz(); ++k)
      for (int j = 1; j < b.ny; ++j)
        for (int i = 1; i < b.nx; ++i) {
          std::size_t n = b.node(i, j, k);
          rn += (Lx[n] - r[n]) * (Lx[n] - r[n]);
          bn += r[n] * r[n];
        }
    out.residual = bn > 0 ? std::sqrt(rn / bn) : 0;
  } else {
    solve_cg(b, r, pr, out);
  }
  out.energy = dirichlet_energy(b, out.psi);
  out.grad_norm = std::sqrt(2 * out.energy);
  double mc = 0;
  for (int k = 0; k < b.nz(); ++k)
    for (int j = 0; j < b.ny; ++j)
      for (int i = 0; i < b.nx; ++i) mc += b.cell_volume(k) * pr.mu[b.cell(i, j, k)].squaredNorm();
  out.mu_norm = std::sqrt(mc);
  double me = 0;
  for (int k = 0; k <= b.nz(); ++k)
    for (int j = 0; j <= b.ny; ++j)
      for (int i = 0; i <= b.nx; ++i) {
        const bool has[3] = {i < b.nx, j < b.ny, k < b.nz()};
        for (int axis = 0; axis < 3; ++axis) {
          if (!has[axis]) continue;
          double len = axis == 0 ? b.dx : axis == 1 ? b.dy : b.dz(k);
          EdgeValue ev = edge_value(b, pr.mu, axis, i, j, k);
          me += ev.area * len * ev.mu * ev.mu;
        }
      }
  out.mu_edge_norm = std::sqrt(me);
  return out;
}

double thin_film_reference(const Vec3Field2& lambda) {
  ScalarField2 q = lambda.map([](const Vec3& l) {
    require_unit(l, 1e-10, "lambda");
    return l.z() * l.z();
  });
  return 0.5 * integrate(q);
}

}  // namespace magplate
