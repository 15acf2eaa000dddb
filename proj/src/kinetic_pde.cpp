#include "mfhb/kinetic_pde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mfhb/parallel.hpp"

namespace mfhb {

namespace {

constexpr double kDensityFloor = 1e-300;
constexpr double kNegativityTol = -1e-12;

double minmod(double a, double b) {
  if (a > 0 && b > 0) return std::min(a, b);
  if (a < 0 && b < 0) return std::max(a, b);
  return 0.0;
}

// Chang-Cooper weight on the right cell: F = v[(1-delta) rho_L + delta rho_R]
// - D (rho_R - rho_L)/h, exact zero-flux on rho_R/rho_L = exp(v h / D).
double cc_delta(double w) {
  if (std::abs(w) < 1e-8) return 0.5 - w / 12.0;
  return 1.0 / w - 1.0 / std::expm1(w);
}

}  // namespace

double cfl_dt(const PhaseGrid& grid, std::span<const double> force, double gamma, double beta) {
  grid.validate();
  const double diffusion = gamma / beta;
  double max_r = 0.0;
  for (int j = 0; j < grid.n_r; ++j) max_r = std::max(max_r, std::abs(grid.r(j)));
  double max_accel = 0.0;
  for (int i = 0; i < grid.n_theta; ++i)
    for (int j = 0; j < grid.n_r; ++j)
      max_accel = std::max(max_accel, std::abs(force[i] - gamma * grid.r(j)));
  double dt = grid.h_theta() / std::max(max_r, 1e-300);
  dt = std::min(dt, grid.h_r() / std::max(max_accel, 1e-300));
  dt = std::min(dt, grid.h_r() * grid.h_r() / (2.0 * diffusion));
  return 0.4 * dt;
}

GridDensity fp_step(const GridDensity& rho, std::span<const double> force, double gamma,
                    double beta, double dt) {
  const PhaseGrid& g = rho.grid;
  if (static_cast<int>(force.size()) != g.n_theta)
    throw std::invalid_argument("fp_step: force must have one entry per theta cell");
  const double limit = cfl_dt(g, force, gamma, beta);
  if (dt > limit * (1.0 + 1e-12))
    throw std::runtime_error("fp_step: CFL violation, dt > " + std::to_string(limit));

  const int nt = g.n_theta;
  const int nr = g.n_r;
  const double ht = g.h_theta();
  const double hr = g.h_r();
  const double diffusion = gamma / beta;

  GridDensity out = rho;

  // theta transport, velocity r_j per row: minmod-limited MUSCL faces.
  // Flux at interface i+1/2 uses the upwind side's reconstructed face value.
  std::vector<double> flux_theta(static_cast<std::size_t>(nt - 1) * nr);
  parallel_for(0, nt - 1, [&](std::int64_t i) {
    for (int j = 0; j < nr; ++j) {
      const double v = g.r(j);
      double face;
      if (v > 0) {
        const double c = rho.values[g.idx(static_cast<int>(i), j)];
        const double left = i > 0 ? rho.values[g.idx(static_cast<int>(i) - 1, j)] : c;
        const double right = rho.values[g.idx(static_cast<int>(i) + 1, j)];
        face = c + 0.5 * minmod(c - left, right - c);
      } else {
        const double c = rho.values[g.idx(static_cast<int>(i) + 1, j)];
        const double left = rho.values[g.idx(static_cast<int>(i), j)];
        const double right =
            i + 2 < nt ? rho.values[g.idx(static_cast<int>(i) + 2, j)] : c;
        face = c - 0.5 * minmod(c - left, right - c);
      }
      flux_theta[i * nr + j] = v * face;
    }
  });

  // r drift+diffusion, Chang-Cooper flux at interface j+1/2.
  std::vector<double> flux_r(static_cast<std::size_t>(nt) * (nr - 1));
  parallel_for(0, nt, [&](std::int64_t i) {
    for (int j = 0; j + 1 < nr; ++j) {
      const double r_face = 0.5 * (g.r(j) + g.r(j + 1));
      const double v = force[i] - gamma * r_face;
      const double w = v * hr / diffusion;
      const double delta = cc_delta(w);
      const double lo = rho.values[g.idx(static_cast<int>(i), j)];
      const double hi = rho.values[g.idx(static_cast<int>(i), j + 1)];
      flux_r[i * (nr - 1) + j] = v * ((1.0 - delta) * lo + delta * hi) - diffusion * (hi - lo) / hr;
    }
  });

  parallel_for(0, nt, [&](std::int64_t i) {
    for (int j = 0; j < nr; ++j) {
      double dv = 0.0;
      if (i + 1 < nt) dv -= flux_theta[i * nr + j] / ht;
      if (i > 0) dv += flux_theta[(i - 1) * nr + j] / ht;
      if (j + 1 < nr) dv -= flux_r[i * (nr - 1) + j] / hr;
      if (j > 0) dv += flux_r[i * (nr - 1) + j - 1] / hr;
      out.values[g.idx(static_cast<int>(i), j)] += dt * dv;
    }
  });

  double min_v = 0.0;
  for (double v : out.values) min_v = std::min(min_v, v);
  if (min_v < kNegativityTol)
    throw std::runtime_error("fp_step: density went negative beyond tolerance: " +
                             std::to_string(min_v));
  return out;
}

std::vector<double> nonlinear_force(const GridDensity& rho, const GridKernels& kernels) {
  const PhaseGrid& g = rho.grid;
  const int nt = g.n_theta;
  if (kernels.n_cells != nt)
    throw std::invalid_argument("nonlinear_force: kernel grid mismatch");
  const auto marginal = rho.theta_marginal();

  // trapezoid weights over the cell-centered theta nodes
  std::vector<double> masses(nt);
  for (int i = 0; i < nt; ++i) {
    double w = g.h_theta();
    if (i == 0 || i == nt - 1) w *= 0.5;
    masses[i] = marginal[i] * w;
  }
  std::vector<double> phi(nt);
  kernels.apply_u(masses, phi);
  for (int i = 0; i < nt; ++i) phi[i] += kernels.v[i] + kernels.g[i];

  std::vector<double> force(nt);
  const double ht = g.h_theta();
  for (int i = 1; i + 1 < nt; ++i) force[i] = -(phi[i + 1] - phi[i - 1]) / (2.0 * ht);
  force[0] = -(-3.0 * phi[0] + 4.0 * phi[1] - phi[2]) / (2.0 * ht);
  force[nt - 1] = -(3.0 * phi[nt - 1] - 4.0 * phi[nt - 2] + phi[nt - 3]) / (2.0 * ht);
  return force;
}

ThetaPotential linear_theta_potential(std::vector<double> f_values) {
  return [f = std::move(f_values)](std::span<const double> masses) {
    double acc = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) acc += f[i] * masses[i];
    return acc;
  };
}

ThetaPotential kernel_theta_potential(const GridKernels& kernels) {
  return [&kernels](std::span<const double> masses) {
    double acc = kernels.f0(masses);
    for (std::size_t i = 0; i < masses.size(); ++i) acc += kernels.g[i] * masses[i];
    return acc;
  };
}

double grid_free_energy(const GridDensity& rho, const ThetaPotential& potential, double beta) {
  const PhaseGrid& g = rho.grid;
  const auto marginal = rho.theta_marginal();
  std::vector<double> masses(g.n_theta);
  for (int i = 0; i < g.n_theta; ++i) masses[i] = marginal[i] * g.h_theta();

  double kinetic = 0.0;
  double neg_entropy = 0.0;
  const double area = g.cell_area();
  for (int i = 0; i < g.n_theta; ++i) {
    for (int j = 0; j < g.n_r; ++j) {
      const double v = rho.values[g.idx(i, j)];
      if (v <= kDensityFloor) continue;  // 0 log 0 := 0
      const double r = g.r(j);
      kinetic += 0.5 * r * r * v;
      neg_entropy += v * std::log(v);
    }
  }
  return potential(masses) + kinetic * area + neg_entropy * area / beta;
}

double grid_dissipation(const GridDensity& rho, double beta, double gamma) {
  const PhaseGrid& g = rho.grid;
  const double hr = g.h_r();
  const double area = g.cell_area();
  double acc = 0.0;
  for (int i = 0; i < g.n_theta; ++i) {
    for (int j = 1; j + 1 < g.n_r; ++j) {
      const double c = rho.values[g.idx(i, j)];
      const double lo = rho.values[g.idx(i, j - 1)];
      const double hi = rho.values[g.idx(i, j + 1)];
      if (c <= kDensityFloor || lo <= kDensityFloor || hi <= kDensityFloor) continue;
      const double dlog = (std::log(hi) - std::log(lo)) / (2.0 * hr);
      const double term = g.r(j) + dlog / beta;
      acc += term * term * c;
    }
  }
  return gamma * acc * area;
}

ProductFormGaps check_product_form(const GridDensity& rho, double beta) {
  const PhaseGrid& g = rho.grid;
  const auto r_marg = rho.r_marginal();

  // reference: exp(-beta r^2/2) normalized on the truncated grid
  std::vector<double> gauss(g.n_r);
  double z = 0.0;
  for (int j = 0; j < g.n_r; ++j) {
    gauss[j] = std::exp(-0.5 * beta * g.r(j) * g.r(j));
    z += gauss[j] * g.h_r();
  }
  for (double& v : gauss) v /= z;

  ProductFormGaps gaps;
  for (int j = 0; j < g.n_r; ++j)
    gaps.r_marginal_l1 += std::abs(r_marg[j] - gauss[j]) * g.h_r();

  const auto t_marg = rho.theta_marginal();
  double max_marg = 0.0;
  for (double v : t_marg) max_marg = std::max(max_marg, v);
  const double floor = 1e-8 * max_marg;
  for (int i = 0; i < g.n_theta; ++i) {
    if (t_marg[i] <= floor) continue;
    double l1 = 0.0;
    for (int j = 0; j < g.n_r; ++j) {
      const double cond = rho.values[g.idx(i, j)] / t_marg[i];
      l1 += std::abs(cond - r_marg[j]) * g.h_r();
    }
    gaps.independence_gap = std::max(gaps.independence_gap, l1);
  }
  return gaps;
}

double free_energy_bound_constant(const PhaseGrid& grid, std::span<const double> g_values,
                                  double alpha) {
  double acc = 0.0;
  for (int i = 0; i < grid.n_theta; ++i) {
    for (int j = 0; j < grid.n_r; ++j) {
      const double c = 1.0 + alpha * (g_values[i] + 0.5 * grid.r(j) * grid.r(j));
      acc += c * std::exp(-c);
    }
  }
  return acc * grid.cell_area();
}

namespace {

FpRunResult run_fp(GridDensity rho, const std::vector<double>* linear_f,
                   const GridKernels* kernels, double gamma, double beta, double time_end,
                   std::int64_t record_every, double dt_scale) {
  FpRunResult out;
  ThetaPotential potential = linear_f ? linear_theta_potential(*linear_f)
                                      : kernel_theta_potential(*kernels);
  std::vector<double> force =
      linear_f ? std::vector<double>() : nonlinear_force(rho, *kernels);
  if (linear_f) {
    // frozen force from f: -df/dtheta via centered differences on f values
    const int nt = rho.grid.n_theta;
    const double ht = rho.grid.h_theta();
    force.resize(nt);
    const auto& f = *linear_f;
    for (int i = 1; i + 1 < nt; ++i) force[i] = -(f[i + 1] - f[i - 1]) / (2.0 * ht);
    force[0] = -(-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * ht);
    force[nt - 1] = -(3.0 * f[nt - 1] - 4.0 * f[nt - 2] + f[nt - 3]) / (2.0 * ht);
  }

  // conservative dt: nonlinear forces drift a little over the run
  double dt = cfl_dt(rho.grid, force, gamma, beta) * dt_scale;
  const auto steps = static_cast<std::int64_t>(std::ceil(time_end / dt));
  dt = time_end / static_cast<double>(steps);
  out.dt = dt;
  out.steps = steps;

  auto record = [&](std::int64_t k) {
    const double mass = rho.mass();
    if (std::abs(mass - 1.0) > 1e-8)
      throw std::runtime_error("fp run: mass drifted to " + std::to_string(mass));
    out.records.push_back({k, k * dt, grid_free_energy(rho, potential, beta),
                           grid_dissipation(rho, beta, gamma), mass});
  };
  record(0);
  for (std::int64_t k = 0; k < steps; ++k) {
    if (!linear_f) force = nonlinear_force(rho, *kernels);
    rho = fp_step(rho, force, gamma, beta, dt);
    if ((k + 1) % record_every == 0 || k + 1 == steps) record(k + 1);
  }
  out.density = std::move(rho);
  return out;
}

}  // namespace

FpRunResult run_linear_fp(GridDensity rho, const std::vector<double>& f_values, double gamma,
                          double beta, double time_end, std::int64_t record_every,
                          double dt_scale) {
  return run_fp(std::move(rho), &f_values, nullptr, gamma, beta, time_end, record_every,
                dt_scale);
}

FpRunResult run_nonlinear_fp(GridDensity rho, const GridKernels& kernels, double gamma,
                             double beta, double time_end, std::int64_t record_every,
                             double dt_scale) {
  return run_fp(std::move(rho), nullptr, &kernels, gamma, beta, time_end, record_every,
                dt_scale);
}

}  // namespace mfhb
