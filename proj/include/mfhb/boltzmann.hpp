#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mfhb/grid.hpp"

namespace mfhb {

// T(rho) = exp(-beta F'(rho)) / Z_2(rho) on a theta grid, with F'(rho) =
// U[rho] + V + g. Exponents are max-stabilized before exponentiating.
ThetaDensity apply_T(const ThetaDensity& rho, const GridKernels& kernels, double beta);

struct FixedPointResult {
  ThetaDensity density;
  int iterations = 0;
  double residual = 0.0;  // ||T(rho) - rho||_1 at exit
  bool converged = false;
};

// Damped iteration rho <- (1-eta) rho + eta T(rho) until the L1 residual drops
// below tol. If the residual increases, eta is halved (deterministically) down
// to eta/64; it recovers by doubling after sustained decrease.
FixedPointResult solve_fixed_point(const ThetaDensity& init, const GridKernels& kernels,
                                   double beta, double damping = 0.5, double tol = 1e-9,
                                   int max_iter = 20000);

// Eq.-(15)-style empirical comparison on a 2-d theta grid (d = 2): Boltzmann
// cell masses from exp(-beta F'(mu^n)) (sub-sampled per cell) vs the particle
// histogram. Both vectors are normalized on the grid; particles outside it are
// reported as overflow mass.
struct EmpiricalComparison {
  std::vector<double> field_mass;  // per cell, sums to 1
  std::vector<double> hist_mass;   // per cell, sums to 1 (over in-grid particles)
  double l1_gap = 0.0;
  double overflow = 0.0;  // fraction of particles outside the grid
};

EmpiricalComparison compare_empirical(const Ensemble& ens, const Dataset& data,
                                      ActivationSpec act, const RegularizerSpec& reg,
                                      double beta, const ThetaGrid& grid, int subsamples = 8);

// Pooled variant: histogram over all snapshots, field averaged over the
// per-snapshot normalized fields (stationary-state estimate).
EmpiricalComparison compare_empirical_pooled(std::span<const Ensemble> snapshots,
                                             const Dataset& data, ActivationSpec act,
                                             const RegularizerSpec& reg, double beta,
                                             const ThetaGrid& grid, int subsamples = 8);

// F'([mu^n]^theta) evaluated on a rectangular grid spec (cell centers),
// row-major in the grid's cell order.
std::vector<double> potential_field_on_grid(const Ensemble& ens, const Dataset& data,
                                            ActivationSpec act, const RegularizerSpec& reg,
                                            const ThetaGrid& grid, const ThetaSlice& slice);

// F_lambda(rho) = (1/2)U[rho,rho] + <V,rho> + (1/2)|y|^2 + lambda <g,rho>.
double f_lambda(const ThetaDensity& rho, const GridKernels& kernels, double lambda);

// Global grid infimum of F = F_1 over densities on the grid (convex QP on the
// probability simplex), via accelerated projected gradient descent.
struct GridInfimum {
  double value = 0.0;
  std::vector<double> masses;  // optimal cell masses
};

GridInfimum grid_infimum(const GridKernels& kernels, int iterations = 8000);

// Euclidean projection onto the probability simplex (sort-based).
std::vector<double> project_simplex(std::span<const double> v);

}  // namespace mfhb
