#pragma once

#include <functional>
#include <span>
#include <vector>

#include "mfhb/grid.hpp"

namespace mfhb {

// Explicit solver for the kinetic Fokker-Planck equation
//   d_t rho = -d_theta(rho r) - d_r(rho (force - gamma r)) + (gamma/beta) d^2_r rho
// on a truncated (theta, r) grid with zero-flux boundaries. Transport in theta
// uses minmod-limited MUSCL reconstruction; the r-direction drift and diffusion
// are combined into a Chang-Cooper exponential-fitting flux. Both keep the
// density nonnegative and conserve mass under the asserted CFL bound.

// Largest stable step for the given force column:
// 0.4 * min(h_theta/max|r|, h_r/max|force - gamma r|, h_r^2/(2 gamma/beta)).
double cfl_dt(const PhaseGrid& grid, std::span<const double> force, double gamma, double beta);

// One explicit step; force[i] = -d_theta F'(theta_i) per theta cell.
GridDensity fp_step(const GridDensity& rho, std::span<const double> force, double gamma,
                    double beta, double dt);

// force = -d_theta(U[rho^theta] + V + g): trapezoid quadrature for U[rho^theta],
// centered differences inside, second-order one-sided at the ends.
std::vector<double> nonlinear_force(const GridDensity& rho, const GridKernels& kernels);

// F([rho]^theta) evaluated from theta-cell masses (midpoint quadrature).
using ThetaPotential = std::function<double(std::span<const double> cell_masses)>;

ThetaPotential linear_theta_potential(std::vector<double> f_values);
ThetaPotential kernel_theta_potential(const GridKernels& kernels);

// E(rho) = F([rho]^theta) + <|r|^2/2, rho> + beta^{-1} <log rho, rho>.
// Cells below 1e-300 are excluded from the entropy sum (0 log 0 := 0).
double grid_free_energy(const GridDensity& rho, const ThetaPotential& potential, double beta);

// gamma * integral of |r + beta^{-1} d_r log rho|^2 rho over interior r cells.
double grid_dissipation(const GridDensity& rho, double beta, double gamma);

struct ProductFormGaps {
  double r_marginal_l1 = 0.0;    // L1 gap of r-marginal to the grid-normalized Gaussian
  double independence_gap = 0.0; // max_theta L1 gap between rho(r|theta) and the r-marginal
};

ProductFormGaps check_product_form(const GridDensity& rho, double beta);

// Lower-bound constant of the free-energy inequality, computed by grid
// quadrature of (1 + alpha(g + r^2/2)) exp(-1 - alpha(g + r^2/2)).
double free_energy_bound_constant(const PhaseGrid& grid, std::span<const double> g_values,
                                  double alpha);

struct FpRunRecord {
  std::int64_t step;
  double time;
  double free_energy;
  double dissipation;
  double mass;
};

struct FpRunResult {
  GridDensity density;
  std::vector<FpRunRecord> records;
  double dt = 0.0;
  std::int64_t steps = 0;
};

// Integrates to time_end with the linear force -f'(theta) (frozen) or the
// self-consistent nonlinear force recomputed each step.
FpRunResult run_linear_fp(GridDensity rho, const std::vector<double>& f_values, double gamma,
                          double beta, double time_end, std::int64_t record_every = 10,
                          double dt_scale = 1.0);
FpRunResult run_nonlinear_fp(GridDensity rho, const GridKernels& kernels, double gamma,
                             double beta, double time_end, std::int64_t record_every = 10,
                             double dt_scale = 1.0);

}  // namespace mfhb
