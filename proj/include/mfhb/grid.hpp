#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "mfhb/model.hpp"
#include "mfhb/types.hpp"

namespace mfhb {

// Uniform cell-centered (theta, r) phase grid in 1+1 dimensions.
struct PhaseGrid {
  double theta_min = -6.0, theta_max = 6.0;
  double r_min = -6.0, r_max = 6.0;
  int n_theta = 128, n_r = 128;

  double h_theta() const { return (theta_max - theta_min) / n_theta; }
  double h_r() const { return (r_max - r_min) / n_r; }
  double theta(int i) const { return theta_min + (i + 0.5) * h_theta(); }
  double r(int j) const { return r_min + (j + 0.5) * h_r(); }
  double cell_area() const { return h_theta() * h_r(); }
  int cells() const { return n_theta * n_r; }
  int idx(int i, int j) const { return i * n_r + j; }

  void validate() const {
    if (n_theta < 3 || n_r < 3) throw std::invalid_argument("PhaseGrid: counts must be >= 3");
    if (!(theta_max > theta_min) || !(r_max > r_min))
      throw std::invalid_argument("PhaseGrid: empty domain");
  }
};

// Nonnegative density on a PhaseGrid, stored row-major [i_theta * n_r + j_r].
struct GridDensity {
  PhaseGrid grid;
  std::vector<double> values;

  double mass() const;
  void normalize();  // rescale to midpoint-quadrature mass 1
  std::vector<double> theta_marginal() const;  // density per theta cell (r-quadrature)
  std::vector<double> r_marginal() const;      // density per r cell
};

GridDensity gaussian_phase_density(const PhaseGrid& grid, double theta_mean, double theta_var,
                                   double r_mean, double r_var);

// Gibbs product exp(-beta(f(theta) + r^2/2)) normalized on the grid.
GridDensity gibbs_product_density(const PhaseGrid& grid, const std::vector<double>& f_values,
                                  double beta);

// Rectangular theta grid, 1-d or 2-d, cell-centered.
struct ThetaGrid {
  int dim = 1;  // 1 or 2
  std::array<double, 2> min{{-6.0, -6.0}};
  std::array<double, 2> max{{6.0, 6.0}};
  std::array<int, 2> count{{128, 1}};

  double h(int axis) const { return (max[axis] - min[axis]) / count[axis]; }
  int cells() const { return dim == 1 ? count[0] : count[0] * count[1]; }
  double cell_weight() const { return dim == 1 ? h(0) : h(0) * h(1); }
  std::array<double, 2> center(int c) const {
    if (dim == 1) return {min[0] + (c + 0.5) * h(0), 0.0};
    const int i = c / count[1], j = c % count[1];
    return {min[0] + (i + 0.5) * h(0), min[1] + (j + 0.5) * h(1)};
  }
  static ThetaGrid line(double lo, double hi, int n) {
    ThetaGrid g;
    g.dim = 1;
    g.min[0] = lo;
    g.max[0] = hi;
    g.count = {n, 1};
    return g;
  }
  static ThetaGrid plane(double lo1, double hi1, int n1, double lo2, double hi2, int n2) {
    ThetaGrid g;
    g.dim = 2;
    g.min = {lo1, lo2};
    g.max = {hi1, hi2};
    g.count = {n1, n2};
    return g;
  }
};

// Density on a ThetaGrid, normalized to quadrature mass 1.
struct ThetaDensity {
  ThetaGrid grid;
  std::vector<double> values;

  double mass() const;
  void normalize();
  static ThetaDensity uniform(const ThetaGrid& g);
};

double l1_distance(const ThetaDensity& a, const ThetaDensity& b);

// Maps grid coordinates to full ParamPoints: grid axis k drives flattened
// coordinate axes[k]; all other coordinates come from the base point.
struct ThetaSlice {
  ParamPoint base;            // supplies frozen coordinates and the dimension
  std::array<int, 2> axes{{0, 1}};  // flat indices driven by grid axes

  ParamPoint point(const ThetaGrid& grid, int cell) const {
    auto flat = base.flatten();
    const auto c = grid.center(cell);
    for (int k = 0; k < grid.dim; ++k) flat[static_cast<std::size_t>(axes[k])] = c[k];
    return ParamPoint::from_flat(flat);
  }
};

// Quadratic-loss kernels precomputed on a theta grid: basis[c*m+j] holds
// Psi(theta_c)(x_j), so U[rho](c) = (1/m) B (B^T p) with cell masses p.
// The linear case (U == 0) is represented by an empty basis and V = f.
struct GridKernels {
  int m = 0;
  int n_cells = 0;
  std::vector<double> basis;  // n_cells x m, empty in the linear case
  std::vector<double> v;      // V(theta_c), or f(theta_c) in the linear case
  std::vector<double> g;      // regularizer values per cell
  double half_y_sq = 0.0;

  bool linear() const { return basis.empty(); }

  // out[c] = U[p](theta_c) for cell masses p (sums against the basis factor).
  void apply_u(std::span<const double> cell_masses, std::span<double> out) const;

  // (1/2) U[p,p] + <V,p> + (1/2)|y|^2  (no regularizer term)
  double f0(std::span<const double> cell_masses) const;

  static GridKernels build(const ThetaGrid& grid, const Dataset& data, ActivationSpec act,
                           const RegularizerSpec& reg, const ThetaSlice& slice);
  static GridKernels linear_case(const ThetaGrid& grid, const std::vector<double>& f_values);
};

}  // namespace mfhb
