#include "magplate/limiting_model.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "magplate/parallel.hpp"

namespace magplate {

void LimitState::validate() const {
  const Grid2& g = grid();
  if (!(u.grid() == g) || !(v.grid() == g)) throw ConfigError("LimitState fields live on different grids");
  for (std::size_t p = 0; p < g.node_count(); ++p) {
    if (!u[p].allFinite() || !std::isfinite(v[p])) throw ConfigError("LimitState has non-finite values");
    require_unit(lambda[p], 1e-10, "lambda");
  }
}

LimitState LimitState::constant(const Grid2& g, const Vec3& lambda) {
  return {VecField2(g), ScalarField2(g), Vec3Field2(g, lambda)};
}

LoadSpec LoadSpec::zero(const Grid2& grid) { return {VecField2(grid), ScalarField2(grid), Vec3Field2(grid)}; }

void LoadSpec::validate(const Grid2& grid) const {
  if (!(f.grid() == grid) || !(g.grid() == grid) || !(hfield.grid() == grid))
    throw ConfigError("load fields do not match the state grid");
  for (std::size_t p = 0; p < grid.node_count(); ++p)
    if (!f[p].allFinite() || !std::isfinite(g[p]) || !hfield[p].allFinite()) throw ConfigError("non-finite load");
}

nlohmann::json EnergyReport::to_json() const {
  return {{"elastic", elastic},     {"membrane", membrane}, {"bending", bending},
          {"exchange", exchange},   {"magnetostatic", magnetostatic}, {"loads", loads},
          {"total", total()},       {"total_with_loads", total_with_loads()}};
}

LimitingModel::LimitingModel(DensitySpec spec, std::shared_ptr<const TensorProvider> provider)
    : spec_(spec), provider_(provider ? std::move(provider) : default_provider(spec)) {
  spec_.validate();
}

namespace {

struct NodeTerms {
  double mem, bend, exch, mag;
};

struct Derived {
  MatField2 Hu, Hv;
  Mat32Field2 Jl;
  ScalarField2 w;
};

Derived derive(const LimitState& s) {
  Derived d;
  d.Hu = jacobian2(s.u);
  for (auto& m : d.Hu.values()) m = 0.5 * (m + m.transpose()).eval();
  d.Hv = hess2(s.v);
  d.Jl = jacobian2(s.lambda);
  d.w = quadrature_weights(s.grid());
  return d;
}

}  // namespace

EnergyReport LimitingModel::energy(const LimitState& s) const {
  s.validate();
  Derived d = derive(s);
  const std::size_t n = s.grid().node_count();
  std::vector<NodeTerms> terms(n);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t p = b; p < e; ++p) {
      ElasticTensor C = provider_->tensor(s.lambda[p]);
      terms[p] = {q2_inc(d.Hu[p], C).value, q2_inc(d.Hv[p], C).value, d.Jl[p].squaredNorm(),
                  s.lambda[p].z() * s.lambda[p].z()};
    }
  });
  EnergyReport r;
  for (std::size_t p = 0; p < n; ++p) {
    r.membrane += d.w[p] * terms[p].mem;
    r.bending += d.w[p] * terms[p].bend;
    r.exchange += d.w[p] * terms[p].exch;
    r.magnetostatic += d.w[p] * terms[p].mag;
  }
  r.membrane *= 0.5;
  r.bending /= 24.0;
  r.exchange *= spec_.alpha;
  r.magnetostatic *= 0.5;
  r.elastic = r.membrane + r.bending;
  return r;
}

double eval_L(const LimitState& s, const LoadSpec& l) {
  l.validate(s.grid());
  ScalarField2 w = quadrature_weights(s.grid());
  double acc = 0;
  for (std::size_t p = 0; p < w.size(); ++p) acc += w[p] * (l.f[p].dot(s.u[p]) + l.g[p] * s.v[p] + l.hfield[p].dot(s.lambda[p]));
  return acc;
}

double LimitingModel::loads(const LimitState& s, const LoadSpec& l) const { return eval_L(s, l); }

double LimitingModel::total(const LimitState& s, const LoadSpec* l) const {
  double e = energy(s).total();
  return l ? e - loads(s, *l) : e;
}

EnergyReport eval_E(const LimitState& s, const TensorProvider& provider, const DensitySpec& spec) {
  struct Borrowed : TensorProvider {
    const TensorProvider& p;
    explicit Borrowed(const TensorProvider& q) : p(q) {}
    ElasticTensor tensor(const Vec3& nu) const override { return p.tensor(nu); }
    Vec3 q3_nu_gradient(const Mat3& G, const Vec3& nu) const override { return p.q3_nu_gradient(G, nu); }
  };
  return LimitingModel(spec, std::make_shared<Borrowed>(provider)).energy(s);
}

LimitGradient LimitingModel::gradient(const LimitState& s, const LoadSpec* l) const {
  s.validate();
  const Grid2& g = s.grid();
  Derived d = derive(s);
  const std::size_t n = g.node_count();
  MatField2 Mu(g), Mv(g);
  Vec3Field2 glam(g);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t p = b; p < e; ++p) {
      ElasticTensor C = provider_->tensor(s.lambda[p]);
      ReductionResult rm = q2_inc(d.Hu[p], C), rb = q2_inc(d.Hv[p], C);
      Mu[p] = 0.5 * d.w[p] * rm.dH;
      Mv[p] = d.w[p] / 24.0 * rb.dH;
      glam[p] = d.w[p] * (0.5 * provider_->q3_nu_gradient(rm.G, s.lambda[p]) +
                          provider_->q3_nu_gradient(rb.G, s.lambda[p]) / 24.0 +
                          Vec3(0, 0, s.lambda[p].z()));
    }
  });
  LimitGradient out{VecField2(g), ScalarField2(g), Vec3Field2(g)};
  // u: H = sym(J), J(r, c) = D_c u_r, and dH is symmetric.
  for (int c = 0; c < 2; ++c) {
    VecField2 col(g);
    for (std::size_t p = 0; p < n; ++p) col[p] = Mu[p].col(c);
    VecField2 t = diff_adjoint(col, c);
    for (std::size_t p = 0; p < n; ++p) out.u[p] += t[p];
  }
  // v: J(r, c) = D_c D_r v.
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      ScalarField2 m(g);
      for (std::size_t p = 0; p < n; ++p) m[p] = Mv[p](r, c);
      ScalarField2 t = diff_adjoint(diff_adjoint(m, c), r);
      for (std::size_t p = 0; p < n; ++p) out.v[p] += t[p];
    }
  for (int c = 0; c < 2; ++c) {
    Vec3Field2 wd(g);
    for (std::size_t p = 0; p < n; ++p) wd[p] = 2 * spec_.alpha * d.w[p] * d.Jl[p].col(c);
    Vec3Field2 t = diff_adjoint(wd, c);
    for (std::size_t p = 0; p < n; ++p) glam[p] += t[p];
  }
  if (l) {
    l->validate(g);
    for (std::size_t p = 0; p < n; ++p) {
      out.u[p] -= d.w[p] * l->f[p];
      out.v[p] -= d.w[p] * l->g[p];
      glam[p] -= d.w[p] * l->hfield[p];
    }
  }
  for (std::size_t p = 0; p < n; ++p) {
    const Vec3& lam = s.lambda[p];
    out.lambda[p] = glam[p] - glam[p].dot(lam) * lam;
  }
  return out;
}

namespace {

std::vector<char> clamp_mask(const Grid2& g, int rings) {
  std::vector<char> m(g.node_count(), 0);
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      int dist = std::min({i, j, g.nx - i, g.ny - j});
      if (dist < rings) m[g.index(i, j)] = 1;
    }
  return m;
}

}  // namespace

MinimizeResult minimize_F(const LimitState& initial, const LoadSpec* loads, const LimitingModel& model,
                          const MinimizeOptions& opt) {
  initial.validate();
  const Grid2& g = initial.grid();
  const std::size_t n = g.node_count();
  LimitState x = initial;
  if (opt.initial_jitter > 0) {
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> N(0.0, 1.0);
    Vec3 tilt(N(rng), N(rng), N(rng));
    for (auto& lam : x.lambda.values()) lam = (lam + opt.initial_jitter * tilt).normalized();
  }
  std::vector<char> mu = opt.clamp ? clamp_mask(g, 1) : std::vector<char>(n, 0);
  std::vector<char> mv = opt.clamp ? clamp_mask(g, 2) : std::vector<char>(n, 0);
  for (std::size_t p = 0; p < n; ++p) {
    if (mu[p]) x.u[p].setZero();
    if (mv[p]) x.v[p] = 0;
  }
  ScalarField2 w = quadrature_weights(g);

  MinimizeResult res;
  double F = model.total(x, loads);
  if (!std::isfinite(F)) throw NumericError("minimize_F: non-finite energy at iterate 0");
  double step = opt.initial_step;
  // Previous iterate and gradient for the Barzilai-Borwein trial step.
  LimitState xprev;
  LimitGradient gprev;
  bool have_prev = false;
  for (int it = 0; it < opt.max_iter; ++it) {
    LimitGradient gr = model.gradient(x, loads);
    int block = opt.alternate ? it % 3 : -1;
    bool use_u = block < 0 || block == 0, use_v = block < 0 || block == 1, use_l = block < 0 || block == 2;
    double g2 = 0, g2all = 0;
    for (std::size_t p = 0; p < n; ++p) {
      if (mu[p]) gr.u[p].setZero();
      if (mv[p]) gr.v[p] = 0;
      double q = (gr.u[p].squaredNorm() + gr.v[p] * gr.v[p] + gr.lambda[p].squaredNorm()) / w[p];
      g2all += q;
      g2 += ((use_u ? gr.u[p].squaredNorm() : 0) + (use_v ? gr.v[p] * gr.v[p] : 0) +
             (use_l ? gr.lambda[p].squaredNorm() : 0)) / w[p];
    }
    double gnorm = std::sqrt(g2all);
    res.trace.push_back({it, F, gnorm, step});
    if (gnorm < opt.tol) {
      res.converged = true;
      break;
    }
    if (g2 == 0) continue;
    double t = 2 * step;
    if (have_prev && !opt.alternate) {
      double ss = 0, sy = 0;
      for (std::size_t p = 0; p < n; ++p) {
        Vec2 su = x.u[p] - xprev.u[p];
        double sv = x.v[p] - xprev.v[p];
        Vec3 sl = x.lambda[p] - xprev.lambda[p];
        ss += w[p] * (su.squaredNorm() + sv * sv + sl.squaredNorm());
        sy += su.dot(gr.u[p] - gprev.u[p]) + sv * (gr.v[p] - gprev.v[p]) + sl.dot(gr.lambda[p] - gprev.lambda[p]);
      }
      if (sy > 0 && std::isfinite(ss / sy)) t = ss / sy;
    }
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      LimitState y = x;
      for (std::size_t p = 0; p < n; ++p) {
        if (use_u) y.u[p] -= t * gr.u[p] / w[p];
        if (use_v) y.v[p] -= t * gr.v[p] / w[p];
        if (use_l) y.lambda[p] = (y.lambda[p] - t * gr.lambda[p] / w[p]).normalized();
      }
      double Fy = model.total(y, loads);
      if (!std::isfinite(Fy)) {
        std::ostringstream os;
        os << "minimize_F: non-finite energy in line search at iterate " << it;
        throw NumericError(os.str());
      }
      if (Fy <= F - opt.armijo * t * g2) {
        xprev = std::move(x);
        gprev = std::move(gr);
        have_prev = true;
        x = std::move(y);
        F = Fy;
        step = t;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // step underflow: no further decrease representable
  }
  res.iterations = int(res.trace.size()) - 1;
  res.state = std::move(x);
  res.F = F;
  return res;
}

}  // namespace magplate
