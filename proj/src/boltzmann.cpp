#include "mfhb/boltzmann.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "mfhb/parallel.hpp"

namespace mfhb {

ThetaDensity apply_T(const ThetaDensity& rho, const GridKernels& kernels, double beta) {
  const ThetaGrid& grid = rho.grid;
  const int cells = grid.cells();
  if (kernels.n_cells != cells) throw std::invalid_argument("apply_T: kernel grid mismatch");
  if (!(beta > 0)) throw std::invalid_argument("apply_T: beta must be > 0");

  const double w = grid.cell_weight();
  std::vector<double> masses(cells);
  for (int c = 0; c < cells; ++c) masses[c] = rho.values[c] * w;

  std::vector<double> phi(cells);
  kernels.apply_u(masses, phi);
  double max_exp = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < cells; ++c) {
    phi[c] = -beta * (phi[c] + kernels.v[c] + kernels.g[c]);
    max_exp = std::max(max_exp, phi[c]);
  }

  ThetaDensity out;
  out.grid = grid;
  out.values.resize(cells);
  double z = 0.0;
  for (int c = 0; c < cells; ++c) {
    out.values[c] = std::exp(phi[c] - max_exp);
    z += out.values[c];
  }
  z *= w;
  if (!(z > 0) || !std::isfinite(z))
    throw std::runtime_error("apply_T: Z_2 underflow, beta/grid mis-scaled");
  for (double& v : out.values) v /= z;
  return out;
}

FixedPointResult solve_fixed_point(const ThetaDensity& init, const GridKernels& kernels,
                                   double beta, double damping, double tol, int max_iter) {
  if (!(damping > 0.0) || damping > 1.0)
    throw std::invalid_argument("solve_fixed_point: damping must be in (0,1]");
  const double w = init.grid.cell_weight();
  FixedPointResult res;
  res.density = init;
  double eta = damping;
  double prev_residual = std::numeric_limits<double>::infinity();
  int good_streak = 0;
  for (int it = 0; it < max_iter; ++it) {
    const ThetaDensity mapped = apply_T(res.density, kernels, beta);
    double residual = 0.0;
    for (std::size_t c = 0; c < mapped.values.size(); ++c)
      residual += std::abs(mapped.values[c] - res.density.values[c]);
    residual *= w;
    res.residual = residual;
    res.iterations = it;  // damped updates applied so far
    if (residual < tol) {
      res.density = mapped;  // final polish keeps the stopping contract
      res.converged = true;
      return res;
    }
    res.iterations = it + 1;
    if (residual > prev_residual) {
      eta = std::max(eta * 0.5, damping / 64.0);
      good_streak = 0;
    } else if (++good_streak >= 8 && eta < damping) {
      eta = std::min(eta * 2.0, damping);
      good_streak = 0;
    }
    prev_residual = residual;
    for (std::size_t c = 0; c < mapped.values.size(); ++c)
      res.density.values[c] = (1.0 - eta) * res.density.values[c] + eta * mapped.values[c];
  }
  res.converged = false;
  return res;
}

namespace {

EmpiricalComparison compare_impl(std::span<const Ensemble> snapshots, const Dataset& data,
                                 ActivationSpec act, const RegularizerSpec& reg, double beta,
                                 const ThetaGrid& grid, int subsamples) {
  if (grid.dim != 2) throw std::invalid_argument("compare_empirical: needs a 2-d theta grid");
  if (snapshots.empty()) throw std::invalid_argument("compare_empirical: no snapshots");
  for (const auto& ens : snapshots)
    if (ens.dim != 2) throw std::invalid_argument("compare_empirical: needs d = 2");

  const int cells = grid.cells();
  const int sub = std::max(1, subsamples);

  EmpiricalComparison out;
  out.field_mass.assign(cells, 0.0);
  out.hist_mass.assign(cells, 0.0);

  // Field: per-snapshot cell masses from sub-grid samples of exp(-beta F'),
  // averaged across snapshots.
  std::vector<double> cell_w(static_cast<std::size_t>(cells) * sub * sub);
  for (const auto& ens : snapshots) {
    const auto resid = residuals(ens, data, act);
    parallel_for(0, cells, [&](std::int64_t c) {
      const int i = static_cast<int>(c) / grid.count[1];
      const int j = static_cast<int>(c) % grid.count[1];
      double* wv = cell_w.data() + static_cast<std::size_t>(c) * sub * sub;
      for (int si = 0; si < sub; ++si) {
        const double t1 = grid.min[0] + (i + (si + 0.5) / sub) * grid.h(0);
        for (int sj = 0; sj < sub; ++sj) {
          const double t2 = grid.min[1] + (j + (sj + 0.5) / sub) * grid.h(1);
          ParamPoint theta;
          theta.a = {t1};
          theta.b = t2;
          wv[si * sub + sj] = potential_value(resid, data, theta, act, reg);
        }
      }
    });
    double max_exp = -std::numeric_limits<double>::infinity();
    for (double& v : cell_w) {
      v = -beta * v;
      max_exp = std::max(max_exp, v);
    }
    std::vector<double> mass(cells, 0.0);
    double z = 0.0;
    for (int c = 0; c < cells; ++c) {
      const double* wv = cell_w.data() + static_cast<std::size_t>(c) * sub * sub;
      double acc = 0.0;
      for (int s = 0; s < sub * sub; ++s) acc += std::exp(wv[s] - max_exp);
      mass[c] = acc;
      z += acc;
    }
    for (int c = 0; c < cells; ++c) out.field_mass[c] += mass[c] / z;

    // histogram the snapshot
    for (const auto& p : ens.particles) {
      const double t1 = p.theta.a[0];
      const double t2 = p.theta.b;
      const int i = static_cast<int>(std::floor((t1 - grid.min[0]) / grid.h(0)));
      const int j = static_cast<int>(std::floor((t2 - grid.min[1]) / grid.h(1)));
      if (i < 0 || i >= grid.count[0] || j < 0 || j >= grid.count[1]) {
        out.overflow += 1.0;
      } else {
        out.hist_mass[i * grid.count[1] + j] += 1.0;
      }
    }
  }

  const double snaps = static_cast<double>(snapshots.size());
  for (double& v : out.field_mass) v /= snaps;

  double total = 0.0;
  for (const auto& ens : snapshots) total += ens.size();
  const double in_grid = total - out.overflow;
  if (in_grid > 0)
    for (double& v : out.hist_mass) v /= in_grid;
  out.overflow /= total;

  for (int c = 0; c < cells; ++c) out.l1_gap += std::abs(out.field_mass[c] - out.hist_mass[c]);
  return out;
}

}  // namespace

EmpiricalComparison compare_empirical(const Ensemble& ens, const Dataset& data,
                                      ActivationSpec act, const RegularizerSpec& reg,
                                      double beta, const ThetaGrid& grid, int subsamples) {
  return compare_impl({&ens, 1}, data, act, reg, beta, grid, subsamples);
}

EmpiricalComparison compare_empirical_pooled(std::span<const Ensemble> snapshots,
                                             const Dataset& data, ActivationSpec act,
                                             const RegularizerSpec& reg, double beta,
                                             const ThetaGrid& grid, int subsamples) {
  return compare_impl(snapshots, data, act, reg, beta, grid, subsamples);
}

std::vector<double> potential_field_on_grid(const Ensemble& ens, const Dataset& data,
                                            ActivationSpec act, const RegularizerSpec& reg,
                                            const ThetaGrid& grid, const ThetaSlice& slice) {
  std::vector<ParamPoint> points;
  points.reserve(grid.cells());
  for (int c = 0; c < grid.cells(); ++c) points.push_back(slice.point(grid, c));
  return potential_field(ens, data, points, act, reg);
}

double f_lambda(const ThetaDensity& rho, const GridKernels& kernels, double lambda) {
  const double w = rho.grid.cell_weight();
  std::vector<double> masses(rho.values.size());
  for (std::size_t c = 0; c < masses.size(); ++c) masses[c] = rho.values[c] * w;
  double val = kernels.f0(masses);
  for (std::size_t c = 0; c < masses.size(); ++c) val += lambda * kernels.g[c] * masses[c];
  return val;
}

std::vector<double> project_simplex(std::span<const double> v) {
  const int n = static_cast<int>(v.size());
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0.0;
  double tau = 0.0;
  int k = 0;
  for (int i = 0; i < n; ++i) {
    css += u[i];
    const double t = (css - 1.0) / (i + 1);
    if (u[i] - t > 0) {
      tau = t;
      k = i + 1;
    }
  }
  (void)k;
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = std::max(v[i] - tau, 0.0);
  return out;
}

GridInfimum grid_infimum(const GridKernels& kernels, int iterations) {
  const int cells = kernels.n_cells;
  // F(p) = (1/2m)|B^T p|^2 + <V+g, p> + const over the simplex; Lipschitz
  // constant bounded by the largest row sum of the Gram factor.
  std::vector<double> lin(cells);
  for (int c = 0; c < cells; ++c) lin[c] = kernels.v[c] + kernels.g[c];

  double lip = 1e-12;
  if (!kernels.linear()) {
    // ||U||_2 <= max_c sum_c' |U(c,c')| estimated through the factor B:
    // row sums of U = (1/m) B (B^T 1).
    std::vector<double> ones(cells, 1.0);
    std::vector<double> row(cells);
    kernels.apply_u(ones, row);
    for (int c = 0; c < cells; ++c) lip = std::max(lip, std::abs(row[c]));
    lip *= 2.0;  // Gershgorin with signed row sums; headroom for tanh bases
  }

  std::vector<double> p(cells, 1.0 / cells);
  std::vector<double> z = p;
  std::vector<double> grad(cells), next(cells);
  double t_prev = 1.0;
  for (int it = 0; it < iterations; ++it) {
    kernels.apply_u(z, grad);
    for (int c = 0; c < cells; ++c) grad[c] += lin[c];
    for (int c = 0; c < cells; ++c) next[c] = z[c] - grad[c] / lip;
    next = project_simplex(next);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_prev * t_prev));
    const double mom = (t_prev - 1.0) / t_next;
    for (int c = 0; c < cells; ++c) z[c] = next[c] + mom * (next[c] - p[c]);
    p.swap(next);
    t_prev = t_next;
  }
  GridInfimum out;
  out.masses = p;
  out.value = kernels.f0(p);
  for (int c = 0; c < cells; ++c) out.value += kernels.g[c] * p[c];
  return out;
}

}  // namespace mfhb
