#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mfhb/kinetic_pde.hpp"
#include "mfhb/presets.hpp"
#include "mfhb/rng.hpp"

using namespace mfhb;

namespace {

PhaseGrid small_grid(int n, double box = 6.0) {
  PhaseGrid g;
  g.theta_min = -box;
  g.theta_max = box;
  g.r_min = -box;
  g.r_max = box;
  g.n_theta = n;
  g.n_r = n;
  return g;
}

std::vector<double> quadratic_f(const PhaseGrid& g) {
  std::vector<double> f(g.n_theta);
  for (int i = 0; i < g.n_theta; ++i) f[i] = 0.5 * g.theta(i) * g.theta(i);
  return f;
}

GridDensity random_density(const PhaseGrid& g, std::uint64_t seed) {
  GridDensity rho;
  rho.grid = g;
  rho.values.resize(g.cells());
  RngStream s(seed, 100);
  for (auto& v : rho.values) v = 0.05 + s.next_uniform();
  rho.normalize();
  return rho;
}

}  // namespace

TEST_CASE("null dynamics leaves the density unchanged") {
  // velocity r multiplies the theta flux; a density supported on the r = 0
  // row with zero force and (numerically) zero diffusion must not move
  PhaseGrid g = small_grid(9);
  GridDensity rho;
  rho.grid = g;
  rho.values.assign(g.cells(), 0.0);
  const int mid = g.n_r / 2;  // r = -6 + (4.5)*4/3... center cell index for odd n
  for (int i = 0; i < g.n_theta; ++i) rho.values[g.idx(i, mid)] = 1.0;
  rho.normalize();
  REQUIRE(std::abs(g.r(mid)) < 1e-12);

  std::vector<double> force(g.n_theta, 0.0);
  const double gamma = 1e-14, beta = 1e14;  // diffusion gamma/beta ~ 1e-28
  const auto next = fp_step(rho, force, gamma, beta, 1e-4);
  for (int c = 0; c < g.cells(); ++c)
    CHECK(next.values[c] == doctest::Approx(rho.values[c]).epsilon(1e-10));
}

TEST_CASE("mass is conserved over a thousand steps") {
  PhaseGrid g = small_grid(48);
  const auto f = quadratic_f(g);
  GridDensity rho = gaussian_phase_density(g, 1.0, 0.5, -0.5, 0.4);
  std::vector<double> force(g.n_theta);
  for (int i = 0; i < g.n_theta; ++i) force[i] = -g.theta(i);
  const double dt = cfl_dt(g, force, 1.0, 1.0);
  for (int k = 0; k < 1000; ++k) rho = fp_step(rho, force, 1.0, 1.0, dt);
  CHECK(std::abs(rho.mass() - 1.0) < 1e-8);
  double min_v = 0.0;
  for (double v : rho.values) min_v = std::min(min_v, v);
  CHECK(min_v >= -1e-12);
}

TEST_CASE("cfl violation is rejected") {
  PhaseGrid g = small_grid(32);
  GridDensity rho = gaussian_phase_density(g, 0.0, 1.0, 0.0, 1.0);
  std::vector<double> force(g.n_theta, 0.0);
  const double dt = cfl_dt(g, force, 1.0, 1.0);
  CHECK_THROWS_AS(fp_step(rho, force, 1.0, 1.0, 10.0 * dt), std::runtime_error);
}

TEST_CASE("linear case converges to the Gibbs product") {
  PhaseGrid g = small_grid(64);
  const auto f = quadratic_f(g);
  GridDensity rho0 = gaussian_phase_density(g, 1.5, 0.64, -1.0, 0.36);
  const auto run = run_linear_fp(std::move(rho0), f, 1.0, 1.0, 25.0, 50);
  const auto gibbs = gibbs_product_density(g, f, 1.0);
  double l1 = 0.0;
  for (int c = 0; c < g.cells(); ++c) l1 += std::abs(run.density.values[c] - gibbs.values[c]);
  l1 *= g.cell_area();
  CHECK(l1 < 0.02);

  // L1 decreases monotonically after burn-in (sampled at records)
  // and the free energy never increases beyond slack
  for (std::size_t k = 0; k + 1 < run.records.size(); ++k)
    CHECK(run.records[k + 1].free_energy <= run.records[k].free_energy + 5e-6);
}

TEST_CASE("nonlinear force: symmetry, closed form and dense-quadrature oracle") {
  SUBCASE("even potential gives an odd force") {
    PhaseGrid g = small_grid(40);
    GridDensity rho;
    rho.grid = g;
    rho.values.resize(g.cells());
    for (int i = 0; i < g.n_theta; ++i)
      for (int j = 0; j < g.n_r; ++j)
        rho.values[g.idx(i, j)] =
            std::exp(-0.5 * g.theta(i) * g.theta(i) - 0.5 * g.r(j) * g.r(j));
    rho.normalize();
    // linear kernels with even f act like U == 0, V + g even
    std::vector<double> f(g.n_theta);
    for (int i = 0; i < g.n_theta; ++i) f[i] = std::cos(g.theta(i)) + g.theta(i) * g.theta(i);
    ThetaGrid tg = ThetaGrid::line(g.theta_min, g.theta_max, g.n_theta);
    const auto kernels = GridKernels::linear_case(tg, f);
    const auto force = nonlinear_force(rho, kernels);
    for (int i = 0; i < g.n_theta; ++i)
      CHECK(force[i] == doctest::Approx(-force[g.n_theta - 1 - i]).epsilon(1e-10));
  }

  SUBCASE("pure quadratic regularizer gives force = -theta exactly") {
    PhaseGrid g = small_grid(32);
    GridDensity rho = gaussian_phase_density(g, 0.3, 1.0, 0.0, 1.0);
    ThetaGrid tg = ThetaGrid::line(g.theta_min, g.theta_max, g.n_theta);
    const auto kernels = GridKernels::linear_case(tg, quadratic_f(g));
    const auto force = nonlinear_force(rho, kernels);
    for (int i = 0; i < g.n_theta; ++i)
      CHECK(force[i] == doctest::Approx(-g.theta(i)).epsilon(1e-12));
  }

  SUBCASE("matches a dense-matrix quadrature oracle") {
    const auto prob = desk_problem_1d(48);
    PhaseGrid g;
    g.theta_min = prob.grid.min[0];
    g.theta_max = prob.grid.max[0];
    g.r_min = -4;
    g.r_max = 4;
    g.n_theta = 48;
    g.n_r = 24;
    GridDensity rho = gaussian_phase_density(g, 0.5, 1.2, 0.0, 0.5);

    const auto force = nonlinear_force(rho, prob.kernels);

    // oracle: dense U matrix through the closure kernels, trapezoid in theta
    const auto uv = uv_kernels(prob.data, prob.act);
    const auto marginal = rho.theta_marginal();
    const int nt = g.n_theta;
    std::vector<double> phi(nt);
    for (int i = 0; i < nt; ++i) {
      const ParamPoint ti = prob.slice.point(prob.grid, i);
      double acc = 0.0;
      for (int c = 0; c < nt; ++c) {
        double w = g.h_theta();
        if (c == 0 || c == nt - 1) w *= 0.5;
        acc += uv.U(ti, prob.slice.point(prob.grid, c)) * marginal[c] * w;
      }
      phi[i] = acc + uv.V(ti) + regularizer_value(ti, prob.reg);
    }
    std::vector<double> oracle(nt);
    const double ht = g.h_theta();
    for (int i = 1; i + 1 < nt; ++i) oracle[i] = -(phi[i + 1] - phi[i - 1]) / (2 * ht);
    oracle[0] = -(-3 * phi[0] + 4 * phi[1] - phi[2]) / (2 * ht);
    oracle[nt - 1] = -(3 * phi[nt - 1] - 4 * phi[nt - 2] + phi[nt - 3]) / (2 * ht);
    for (int i = 0; i < nt; ++i)
      CHECK(force[i] == doctest::Approx(oracle[i]).epsilon(1e-10));
  }
}

TEST_CASE("grid free energy: gaussian analytic value") {
  // E = <f,rho> + <r^2/2,rho> + <log rho,rho> at beta=1 for the standard
  // product gaussian with f = theta^2/2: 1/2 + 1/2 - log(2 pi e) = -log(2 pi)
  PhaseGrid g = small_grid(192, 7.0);
  GridDensity rho = gaussian_phase_density(g, 0.0, 1.0, 0.0, 1.0);
  const auto pot = linear_theta_potential(quadratic_f(g));
  const double e = grid_free_energy(rho, pot, 1.0);
  CHECK(e == doctest::Approx(-std::log(2.0 * std::numbers::pi)).epsilon(0.003));
}

TEST_CASE("grid free energy: uniform box closed form and shift linearity") {
  PhaseGrid g = small_grid(50, 3.0);
  GridDensity rho;
  rho.grid = g;
  rho.values.assign(g.cells(), 1.0);
  rho.normalize();

  // closed-form discrete sums over midpoints: sum theta_i^2 via Faulhaber
  const int n = g.n_theta;
  const double h = g.h_theta();
  // midpoints are -L + (i + 1/2) h; sum of squares has an exact closed form:
  // sum_i (a + i h)^2 = n a^2 + 2 a h n(n-1)/2 + h^2 (n-1)n(2n-1)/6
  const double a = g.theta_min + 0.5 * h;
  const double sum_sq =
      n * a * a + a * h * n * (n - 1.0) + h * h * (n - 1.0) * n * (2.0 * n - 1.0) / 6.0;
  const double mean_pot = 0.5 * sum_sq / n;  // <theta^2/2> under uniform
  const double mean_kin = 0.5 * sum_sq / n;  // same grid in r
  const double neg_entropy = std::log(1.0 / (12.0 * 6.0 * 1.0));  // log rho, rho uniform
  // rho = 1/(6*6) on a [-3,3]^2 box
  const double expected = mean_pot + mean_kin + std::log(1.0 / 36.0);
  (void)neg_entropy;
  const auto pot = linear_theta_potential(quadratic_f(g));
  const double e = grid_free_energy(rho, pot, 1.0);
  CHECK(e == doctest::Approx(expected).epsilon(1e-10));

  // adding a constant to the potential shifts E by exactly that constant
  auto f_shift = quadratic_f(g);
  for (double& v : f_shift) v += 2.5;
  const double e2 = grid_free_energy(rho, linear_theta_potential(f_shift), 1.0);
  CHECK(e2 - e == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("dissipation: zero on the gaussian r-marginal, nonnegative in general") {
  PhaseGrid g = small_grid(64);
  const double beta = 2.0;
  GridDensity rho;
  rho.grid = g;
  rho.values.resize(g.cells());
  for (int i = 0; i < g.n_theta; ++i) {
    const double th = std::exp(-0.3 * g.theta(i) * g.theta(i));
    for (int j = 0; j < g.n_r; ++j)
      rho.values[g.idx(i, j)] = th * std::exp(-0.5 * beta * g.r(j) * g.r(j));
  }
  rho.normalize();
  CHECK(grid_dissipation(rho, beta, 1.0) < 1e-10);

  const auto rnd = random_density(g, 5);
  CHECK(grid_dissipation(rnd, beta, 1.0) >= 0.0);
}

TEST_CASE("free energy decay rate matches the dissipation on the linear benchmark") {
  PhaseGrid g = small_grid(64);
  const auto f = quadratic_f(g);
  GridDensity rho = gaussian_phase_density(g, 1.0, 0.8, -0.5, 0.5);
  const auto run = run_linear_fp(std::move(rho), f, 1.0, 1.0, 6.0, 5);
  double dmax = 0.0;
  for (const auto& rec : run.records) dmax = std::max(dmax, rec.dissipation);
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < run.records.size(); ++k) {
    const auto& lo = run.records[k];
    const auto& hi = run.records[k + 1];
    const double dm = 0.5 * (lo.dissipation + hi.dissipation);
    if (hi.time < 1.0 || dm < 0.05 * dmax) continue;
    const double fd = (hi.free_energy - lo.free_energy) / (hi.time - lo.time);
    worst = std::max(worst, std::abs(fd + dm) / dm);
  }
  CHECK(worst < 0.05);
}

TEST_CASE("product form gaps: exact product, perturbed product, thresholds") {
  PhaseGrid g = small_grid(96);
  const double beta = 1.0;
  GridDensity prod;
  prod.grid = g;
  prod.values.resize(g.cells());
  for (int i = 0; i < g.n_theta; ++i) {
    const double th = std::exp(-0.4 * std::abs(g.theta(i)));
    for (int j = 0; j < g.n_r; ++j)
      prod.values[g.idx(i, j)] = th * std::exp(-0.5 * beta * g.r(j) * g.r(j));
  }
  prod.normalize();
  const auto gaps = check_product_form(prod, beta);
  CHECK(gaps.r_marginal_l1 < 1e-10);
  CHECK(gaps.independence_gap < 1e-10);

  GridDensity pert = prod;
  for (int i = 0; i < g.n_theta; ++i)
    for (int j = 0; j < g.n_r; ++j)
      pert.values[g.idx(i, j)] *= 1.0 + 0.1 * std::sin(g.theta(i)) * std::sin(g.r(j));
  pert.normalize();
  const auto pgaps = check_product_form(pert, beta);
  CHECK(pgaps.independence_gap > 0.01);
}

TEST_CASE("free energy lower bound holds for random densities") {
  // E(rho) >= F_0 + (1/2) <g,rho> - C(beta/2)/beta with C from grid quadrature
  const auto prob = desk_problem_1d(48);
  PhaseGrid g;
  g.theta_min = prob.grid.min[0];
  g.theta_max = prob.grid.max[0];
  g.r_min = -5;
  g.r_max = 5;
  g.n_theta = 48;
  g.n_r = 40;
  const double beta = 3.0;
  const double alpha = 0.5 * beta;
  const double c_alpha = free_energy_bound_constant(g, prob.kernels.g, alpha);
  const auto pot = kernel_theta_potential(prob.kernels);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto rho = random_density(g, seed);
    const auto marginal = rho.theta_marginal();
    std::vector<double> masses(g.n_theta);
    for (int i = 0; i < g.n_theta; ++i) masses[i] = marginal[i] * g.h_theta();
    const double f0 = prob.kernels.f0(masses);
    double g_term = 0.0;
    for (int i = 0; i < g.n_theta; ++i) g_term += prob.kernels.g[i] * masses[i];
    const double lhs = grid_free_energy(rho, pot, beta);
    CHECK(lhs >= f0 + 0.5 * g_term - c_alpha / beta - 1e-12);
  }
}

TEST_CASE("gibbs product is stationary up to truncation error that shrinks under refinement") {
  auto residual_rate = [](int n) {
    PhaseGrid g = small_grid(n);
    std::vector<double> f(g.n_theta);
    std::vector<double> force(g.n_theta);
    for (int i = 0; i < g.n_theta; ++i) {
      f[i] = 0.5 * g.theta(i) * g.theta(i);
      force[i] = -g.theta(i);
    }
    const auto rho = gibbs_product_density(g, f, 1.0);
    const double dt = cfl_dt(g, force, 1.0, 1.0);
    const auto next = fp_step(rho, force, 1.0, 1.0, dt);
    double l1 = 0.0;
    for (int c = 0; c < g.cells(); ++c) l1 += std::abs(next.values[c] - rho.values[c]);
    return l1 * g.cell_area() / dt;
  };
  const double coarse = residual_rate(64);
  const double fine = residual_rate(128);
  CHECK(fine < coarse / 1.5);
}
