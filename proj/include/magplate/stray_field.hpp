#pragma once

#include <vector>

#include "magplate/box_grid.hpp"

namespace magplate {

enum class PoissonSolver { Spectral, ConjugateGradient };

struct PoissonProblem {
  BoxGrid box;
  std::vector<Vec3> mu;  // per cell, already weighted by occupancy
  double padding = 4;    // recorded for diagnostics; the box already includes it
  double tol = 1e-10;    // CG relative residual
  int max_iter = 20000;
  PoissonSolver solver = PoissonSolver::Spectral;
};

struct StrayFieldSolution {
  std::vector<double> psi;  // box nodes, zero on the boundary
  double energy = 0;        // 1/2 int |grad psi|^2
  double grad_norm = 0;     // ||grad psi||_L2
  double mu_norm = 0;       // ||mu||_L2 over cells
  double mu_edge_norm = 0;  // ||mu||_L2 after averaging onto edges
  int iterations = 0;
  double residual = 0;      // relative residual of the discrete equation
};

// Minimizes 1/2 sum_e w_e (D psi - mu)_e^2 over psi with psi = 0 on the box
// boundary: nodal psi, edge differences D, edge values of mu averaged from
// the cells sharing the edge (volume weights). Spectral: DST-I in x, y and a
// tridiagonal solve in z; CG: Jacobi-preconditioned, matrix-free.
StrayFieldSolution solve_stray(const PoissonProblem& problem);

// sum_e w_e |(D psi)_e - mu_e|^2, the variational functional (empty mu means 0).
double maxwell_misfit(const BoxGrid& box, const std::vector<Vec3>& mu, const std::vector<double>& psi);
// 1/2 sum_e w_e (D psi)_e^2
double dirichlet_energy(const BoxGrid& box, const std::vector<double>& psi);

// 1/2 int_S (lambda^3)^2
double thin_film_reference(const Vec3Field2& lambda);

}  // namespace magplate
