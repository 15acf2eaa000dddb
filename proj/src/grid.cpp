#include "mfhb/grid.hpp"

#include <cmath>

#include "mfhb/parallel.hpp"

namespace mfhb {

double GridDensity::mass() const {
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc * grid.cell_area();
}

void GridDensity::normalize() {
  const double m = mass();
  if (!(m > 0)) throw std::runtime_error("GridDensity: cannot normalize zero mass");
  for (double& v : values) v /= m;
}

std::vector<double> GridDensity::theta_marginal() const {
  std::vector<double> out(grid.n_theta, 0.0);
  for (int i = 0; i < grid.n_theta; ++i) {
    double acc = 0.0;
    for (int j = 0; j < grid.n_r; ++j) acc += values[grid.idx(i, j)];
    out[i] = acc * grid.h_r();
  }
  return out;
}

std::vector<double> GridDensity::r_marginal() const {
  std::vector<double> out(grid.n_r, 0.0);
  for (int j = 0; j < grid.n_r; ++j) {
    double acc = 0.0;
    for (int i = 0; i < grid.n_theta; ++i) acc += values[grid.idx(i, j)];
    out[j] = acc * grid.h_theta();
  }
  return out;
}

GridDensity gaussian_phase_density(const PhaseGrid& grid, double theta_mean, double theta_var,
                                   double r_mean, double r_var) {
  grid.validate();
  GridDensity rho;
  rho.grid = grid;
  rho.values.resize(grid.cells());
  for (int i = 0; i < grid.n_theta; ++i) {
    const double dt2 = (grid.theta(i) - theta_mean) * (grid.theta(i) - theta_mean);
    for (int j = 0; j < grid.n_r; ++j) {
      const double dr2 = (grid.r(j) - r_mean) * (grid.r(j) - r_mean);
      rho.values[grid.idx(i, j)] = std::exp(-0.5 * dt2 / theta_var - 0.5 * dr2 / r_var);
    }
  }
  rho.normalize();
  return rho;
}

GridDensity gibbs_product_density(const PhaseGrid& grid, const std::vector<double>& f_values,
                                  double beta) {
  grid.validate();
  if (static_cast<int>(f_values.size()) != grid.n_theta)
    throw std::invalid_argument("gibbs_product_density: f size mismatch");
  GridDensity rho;
  rho.grid = grid;
  rho.values.resize(grid.cells());
  double fmin = f_values[0];
  for (double f : f_values) fmin = std::min(fmin, f);
  for (int i = 0; i < grid.n_theta; ++i)
    for (int j = 0; j < grid.n_r; ++j)
      rho.values[grid.idx(i, j)] =
          std::exp(-beta * (f_values[i] - fmin + 0.5 * grid.r(j) * grid.r(j)));
  rho.normalize();
  return rho;
}

double ThetaDensity::mass() const {
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc * grid.cell_weight();
}

void ThetaDensity::normalize() {
  const double m = mass();
  if (!(m > 0)) throw std::runtime_error("ThetaDensity: cannot normalize zero mass");
  for (double& v : values) v /= m;
}

ThetaDensity ThetaDensity::uniform(const ThetaGrid& g) {
  ThetaDensity rho;
  rho.grid = g;
  rho.values.assign(g.cells(), 1.0);
  rho.normalize();
  return rho;
}

double l1_distance(const ThetaDensity& a, const ThetaDensity& b) {
  if (a.values.size() != b.values.size())
    throw std::invalid_argument("l1_distance: grid size mismatch");
  double acc = 0.0;
  for (std::size_t c = 0; c < a.values.size(); ++c) acc += std::abs(a.values[c] - b.values[c]);
  return acc * a.grid.cell_weight();
}

void GridKernels::apply_u(std::span<const double> cell_masses, std::span<double> out) const {
  if (linear()) {
    for (auto& v : out) v = 0.0;
    return;
  }
  // q_j = sum_c basis[c][j] p_c, then out[c] = (1/m) sum_j basis[c][j] q_j
  std::vector<double> q(m, 0.0);
  for (int c = 0; c < n_cells; ++c) {
    const double p = cell_masses[c];
    if (p == 0.0) continue;
    const double* row = basis.data() + static_cast<std::size_t>(c) * m;
    for (int j = 0; j < m; ++j) q[j] += row[j] * p;
  }
  const double inv_m = 1.0 / m;
  parallel_for(0, n_cells, [&](std::int64_t c) {
    const double* row = basis.data() + static_cast<std::size_t>(c) * m;
    double acc = 0.0;
    for (int j = 0; j < m; ++j) acc += row[j] * q[j];
    out[c] = acc * inv_m;
  });
}

double GridKernels::f0(std::span<const double> cell_masses) const {
  double lin = 0.0;
  for (int c = 0; c < n_cells; ++c) lin += v[c] * cell_masses[c];
  if (linear()) return lin;
  std::vector<double> q(m, 0.0);
  for (int c = 0; c < n_cells; ++c) {
    const double p = cell_masses[c];
    if (p == 0.0) continue;
    const double* row = basis.data() + static_cast<std::size_t>(c) * m;
    for (int j = 0; j < m; ++j) q[j] += row[j] * p;
  }
  double quad = 0.0;
  for (int j = 0; j < m; ++j) quad += q[j] * q[j];
  return 0.5 * quad / m + lin + half_y_sq;
}

GridKernels GridKernels::build(const ThetaGrid& grid, const Dataset& data, ActivationSpec act,
                               const RegularizerSpec& reg, const ThetaSlice& slice) {
  data.validate();
  GridKernels k;
  k.m = data.size();
  k.n_cells = grid.cells();
  k.basis.resize(static_cast<std::size_t>(k.n_cells) * k.m);
  k.v.resize(k.n_cells);
  k.g.resize(k.n_cells);
  const double inv_m = 1.0 / k.m;
  parallel_for(0, k.n_cells, [&](std::int64_t c) {
    const ParamPoint theta = slice.point(grid, static_cast<int>(c));
    double* row = k.basis.data() + static_cast<std::size_t>(c) * k.m;
    double vc = 0.0;
    for (int j = 0; j < k.m; ++j) {
      row[j] = basis_eval(theta, data.features[j], act);
      vc += data.labels[j] * row[j];
    }
    k.v[c] = -vc * inv_m;
    k.g[c] = regularizer_value(theta, reg);
  });
  double y2 = 0.0;
  for (double y : data.labels) y2 += y * y;
  k.half_y_sq = 0.5 * y2 * inv_m;
  return k;
}

GridKernels GridKernels::linear_case(const ThetaGrid& grid, const std::vector<double>& f_values) {
  if (static_cast<int>(f_values.size()) != grid.cells())
    throw std::invalid_argument("GridKernels::linear_case: size mismatch");
  GridKernels k;
  k.m = 0;
  k.n_cells = grid.cells();
  k.v = f_values;
  k.g.assign(k.n_cells, 0.0);
  return k;
}

}  // namespace mfhb
