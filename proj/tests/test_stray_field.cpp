#include <gtest/gtest.h>

#include <random>

#include "magplate/stray_field.hpp"
#include "oracles.hpp"

using namespace magplate;

namespace {

// Surface-charge oracle for a uniformly magnetized unit cube (m = e3): charges
// +-1 on the top/bottom faces, E = (S_same - S_opp) / (4 pi) where S are the
// face-face Coulomb integrals reduced to the difference variables.
double cube_energy_oracle() {
  auto kernel = [](double d) {
    return [d](double u, double v) { return (1 - std::abs(u)) * (1 - std::abs(v)) / std::sqrt(u * u + v * v + d * d); };
  };
  auto integrate2 = [](auto f) {
    double s = 0;
    for (double a : {-1.0, 0.0})
      for (double b : {-1.0, 0.0})
        s += oracle::gauss1d([&](double u) { return oracle::gauss1d([&](double v) { return f(u, v); }, b, b + 1, 24); }, a, a + 1, 24);
    return s;
  };
  // Closed form of the self term of a unit square.
  double same = 4.0 / 3.0 * (1 - std::sqrt(2.0)) + 4 * std::log(1 + std::sqrt(2.0));
  double opp = integrate2(kernel(1.0));
  return (same - opp) / (4 * std::acos(-1.0));
}

std::vector<Vec3> random_compact(const BoxGrid& b, std::mt19937_64& rng, int margin) {
  std::normal_distribution<double> N(0, 1);
  std::vector<Vec3> mu(b.cell_count(), Vec3::Zero());
  for (int k = margin; k < b.nz() - margin; ++k)
    for (int j = margin; j < b.ny - margin; ++j)
      for (int i = margin; i < b.nx - margin; ++i) mu[b.cell(i, j, k)] = Vec3(N(rng), N(rng), N(rng));
  return mu;
}

}  // namespace

TEST(StrayField, ZeroMagnetization) {
  PoissonProblem p;
  p.box = uniform_box(Vec3(-1, -1, -1), Vec3(1, 1, 1), 8, 8, 8);
  p.mu.assign(p.box.cell_count(), Vec3::Zero());
  auto s = solve_stray(p);
  for (double v : s.psi) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(s.energy, 0.0);
}

TEST(StrayField, RejectsSupportOnBoundary) {
  PoissonProblem p;
  p.box = uniform_box(Vec3(-1, -1, -1), Vec3(1, 1, 1), 8, 8, 8);
  p.mu.assign(p.box.cell_count(), Vec3::Zero());
  p.mu[p.box.cell(0, 3, 3)] = Vec3::UnitX();
  EXPECT_THROW(solve_stray(p), ConfigError);
  p.mu.resize(3);
  EXPECT_THROW(solve_stray(p), ConfigError);
}

TEST(StrayField, StabilityAndSolverAgreement) {
  std::mt19937_64 rng(41);
  BoxGrid b = make_plate_box(Grid2(8, 8), 0.1, 4, 3.0, 1.3);
  for (int t = 0; t < 20; ++t) {
    PoissonProblem p;
    p.box = b;
    p.mu = random_compact(b, rng, 4);
    auto s = solve_stray(p);
    EXPECT_LE(s.grad_norm, s.mu_edge_norm * (1 + 1e-12));
    EXPECT_LE(s.mu_edge_norm, s.mu_norm * (1 + 1e-12));
    EXPECT_LT(s.residual, 1e-10);
    if (t < 3) {
      p.solver = PoissonSolver::ConjugateGradient;
      p.tol = 1e-12;
      auto c = solve_stray(p);
      EXPECT_NEAR(c.energy, s.energy, 1e-8 * s.energy);
    }
  }
}

TEST(StrayField, VariationalCharacterization) {
  std::mt19937_64 rng(42);
  PoissonProblem p;
  p.box = uniform_box(Vec3(-1, -1, -1), Vec3(1, 1, 1), 12, 12, 12);
  p.mu = random_compact(p.box, rng, 3);
  auto s = solve_stray(p);
  double J0 = maxwell_misfit(p.box, p.mu, s.psi);
  std::normal_distribution<double> N(0, 1);
  for (int t = 0; t < 10; ++t) {
    auto psi = s.psi;
    for (int k = 2; k < 10; ++k)
      for (int j = 2; j < 10; ++j)
        for (int i = 2; i < 10; ++i) psi[p.box.node(i, j, k)] += 1e-3 * N(rng);
    EXPECT_GE(maxwell_misfit(p.box, p.mu, psi), J0 - 1e-12);
  }
  // Gauge: only differences of psi enter.
  auto shifted = s.psi;
  for (double& v : shifted) v += 3.0;
  EXPECT_NEAR(dirichlet_energy(p.box, shifted), s.energy, 1e-10 * s.energy);
}

TEST(StrayField, UniformCube) {
  double ref = cube_energy_oracle();
  EXPECT_NEAR(ref, 1.0 / 6.0, 1e-3);
  PoissonProblem p;
  p.box = uniform_box(Vec3(-2, -2, -2), Vec3(2, 2, 2), 64, 64, 64);
  p.mu.assign(p.box.cell_count(), Vec3::Zero());
  for (int k = 24; k < 40; ++k)
    for (int j = 24; j < 40; ++j)
      for (int i = 24; i < 40; ++i) p.mu[p.box.cell(i, j, k)] = Vec3::UnitZ();
  auto s = solve_stray(p);
  EXPECT_NEAR(s.energy, ref, 0.05 * ref);
  RecordProperty("cube_energy", std::to_string(s.energy));
}

TEST(StrayField, ThinFilmReference) {
  Grid2 g(64, 64);
  EXPECT_EQ(thin_film_reference(Vec3Field2(g, Vec3::UnitX())), 0.0);
  EXPECT_NEAR(thin_film_reference(Vec3Field2(g, Vec3::UnitZ())), 0.5, 1e-14);
  auto lam = Vec3Field2::sample(Grid2(512, 4), [](Vec2 x) { return Vec3(std::sin(x.x()), 0, std::cos(x.x())); });
  double ref = 0.5 * oracle::gauss1d([](double x) { return std::cos(x) * std::cos(x); }, 0, 1, 8);
  EXPECT_NEAR(thin_film_reference(lam), ref, 1e-6);
}
