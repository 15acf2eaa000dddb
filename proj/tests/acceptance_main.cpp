// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line each. Exit code 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mfhb/boltzmann.hpp"
#include "mfhb/diagnostics.hpp"
#include "mfhb/dynamics.hpp"
#include "mfhb/kinetic_pde.hpp"
#include "mfhb/parallel.hpp"
#include "mfhb/presets.hpp"
#include "mfhb/rng.hpp"

using namespace mfhb;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  int id;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double limit_seconds = 0.0;
};

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

const ActivationSpec kSigmoid{ActivationKind::Sigmoid};

Ensemble random_ensemble(int n, int d, std::uint64_t seed) {
  RunConfig cfg;
  cfg.n = n;
  cfg.d = d;
  cfg.seed = seed;
  return init_ensemble(cfg);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------- criteria

Criterion criterion_gradient_identity() {
  Criterion c{1, "gradient identity (n grad f vs interaction gradient)"};
  c.limit_seconds = 5.0;
  double worst = 0.0;
  RngStream pick(1000, 1);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 1 + static_cast<int>(pick.next_u64() % 10);
    const int d = 2 + static_cast<int>(pick.next_u64() % 9);
    const int m = 1 + static_cast<int>(pick.next_u64() % 50);
    const auto data = sample_dataset(d, 1 + static_cast<int>(pick.next_u64() % 5), m,
                                     pick.next_u64());
    const auto reg = rep % 3 == 0
                         ? RegularizerSpec::none()
                         : (rep % 3 == 1 ? RegularizerSpec::smoothed_norm(0.05, 1e-3)
                                         : RegularizerSpec::quadratic(0.2));
    Ensemble ens = random_ensemble(n, d, pick.next_u64());
    const auto grads = interaction_gradient(ens, data, kSigmoid, reg);
    const double h = 1e-5;
    for (int i = 0; i < n; ++i) {
      const auto flat = ens.particles[i].theta.flatten();
      for (int k = 0; k < d; ++k) {
        Ensemble hi = ens, lo = ens;
        auto fhi = flat, flo = flat;
        fhi[k] += h;
        flo[k] -= h;
        hi.particles[i].theta = ParamPoint::from_flat(fhi);
        lo.particles[i].theta = ParamPoint::from_flat(flo);
        const double fd =
            (loss(hi, data, kSigmoid, reg) - loss(lo, data, kSigmoid, reg)) / (2 * h);
        const double scaled = n * fd;
        const double rel =
            std::abs(grads[i][k] - scaled) / std::max({1e-8, std::abs(grads[i][k]), std::abs(scaled)});
        worst = std::max(worst, rel);
      }
    }
  }
  c.pass = worst < 1e-5;
  c.detail = "max rel err " + fmt(worst) + " (tol 1e-5, 50 configs)";
  return c;
}

Criterion criterion_kernel_identity() {
  Criterion c{2, "kernel identity (U/V reconstruction of the risk)"};
  c.limit_seconds = 5.0;
  double worst = 0.0;
  RngStream pick(2000, 2);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 1 + static_cast<int>(pick.next_u64() % 10);
    const int d = 2 + static_cast<int>(pick.next_u64() % 5);
    const int m = 1 + static_cast<int>(pick.next_u64() % 50);
    const auto data = sample_dataset(d, 1 + static_cast<int>(pick.next_u64() % 4), m,
                                     pick.next_u64());
    const auto ens = random_ensemble(n, d, pick.next_u64());
    const auto k = uv_kernels(data, kSigmoid);
    double uacc = 0.0, vacc = 0.0;
    for (int i = 0; i < n; ++i) {
      vacc += k.V(ens.particles[i].theta) / n;
      for (int j = 0; j < n; ++j)
        uacc += k.U(ens.particles[i].theta, ens.particles[j].theta) / (static_cast<double>(n) * n);
    }
    const double reconstructed = 0.5 * uacc + vacc + k.half_y_sq;
    worst = std::max(worst, std::abs(reconstructed - risk(ens, data, kSigmoid)));
  }
  c.pass = worst < 1e-10;
  c.detail = "max abs err " + fmt(worst) + " (tol 1e-10, 50 instances)";
  return c;
}

Criterion criterion_linear_stationarity(const LinearFpResult& run) {
  Criterion c{3, "linear-case stationarity (128x128 Gibbs limit)"};
  c.limit_seconds = 60.0;
  c.pass = run.final_l1_to_gibbs < 1e-2 && run.max_energy_increase <= 1e-6;
  c.detail = "final L1 " + fmt(run.final_l1_to_gibbs) + " (tol 1e-2), max dE " +
             fmt(run.max_energy_increase) + " (slack 1e-6)";
  return c;
}

Criterion criterion_dissipation_identity(const LinearFpResult& run) {
  Criterion c{4, "dissipation identity (dE/dt vs -D along the run)"};
  c.limit_seconds = 60.0;
  double dmax = 0.0;
  for (const auto& rec : run.records) dmax = std::max(dmax, rec.dissipation);
  double worst = 0.0;
  int used = 0;
  for (std::size_t k = 0; k + 1 < run.records.size(); ++k) {
    const auto& lo = run.records[k];
    const auto& hi = run.records[k + 1];
    const double dm = 0.5 * (lo.dissipation + hi.dissipation);
    if (hi.time < 1.0 || dm < 0.05 * dmax) continue;  // burn-in, interior only
    const double fd = (hi.free_energy - lo.free_energy) / (hi.time - lo.time);
    worst = std::max(worst, std::abs(fd + dm) / dm);
    ++used;
  }
  c.pass = used > 10 && worst < 0.05;
  c.detail = "max rel err " + fmt(worst) + " over " + std::to_string(used) +
             " intervals (tol 5%)";
  return c;
}

Criterion criterion_product_structure() {
  Criterion c{5, "product structure (SHB velocity marginal and independence)"};
  c.limit_seconds = 180.0;
  RunConfig cfg;
  cfg.d = 2;
  cfg.n = 2000;
  cfg.n0 = 20;
  cfg.m = 100;
  cfg.beta = 16.0;
  cfg.gamma = 1.0;
  cfg.dt = 0.01;
  cfg.steps = 50000;
  cfg.seed = 7;
  cfg.record_every = 50000;
  cfg.integrator = Integrator::SHB;
  cfg.regularizer = RegularizerSpec::smoothed_norm(0.01, 1e-3);
  const auto data = sample_dataset(cfg.d, cfg.n0, cfg.m, 7);
  const auto run = run_trajectory(cfg, data);

  const auto gaps = velocity_stationarity(run.final_ensemble, cfg.beta);
  const auto indep = theta_r_independence(run.final_ensemble);
  const double mc_mean = std::sqrt(cfg.d / (cfg.beta * cfg.n));
  const double mc_cov = std::sqrt(2.0 / cfg.n) / cfg.beta;
  const double corr_limit = 5.0 / std::sqrt(static_cast<double>(cfg.n));
  c.pass = gaps.mean_gap < 4.0 * mc_mean && gaps.cov_gap < 4.0 * mc_cov &&
           indep.max_abs_correlation < corr_limit;
  c.detail = "mean gap " + fmt(gaps.mean_gap) + "/" + fmt(4.0 * mc_mean) + ", cov gap " +
             fmt(gaps.cov_gap) + "/" + fmt(4.0 * mc_cov) + ", max corr " +
             fmt(indep.max_abs_correlation) + "/" + fmt(corr_limit);
  return c;
}

Criterion criterion_fixed_point_uniqueness(const BoltzmannSweepResult& sweep) {
  Criterion c{6, "fixed-point uniqueness (three initializations, 1-d and 2-d)"};
  c.limit_seconds = 30.0;
  c.pass = sweep.uniqueness_gap_1d < 1e-6 && sweep.uniqueness_gap_2d < 1e-6 &&
           sweep.linear_case_iterations == 1;
  c.detail = "1-d gap " + fmt(sweep.uniqueness_gap_1d) + ", 2-d gap " +
             fmt(sweep.uniqueness_gap_2d) + " (tol 1e-6), linear iters " +
             std::to_string(sweep.linear_case_iterations);
  return c;
}

Criterion criterion_pde_fixed_point_agreement() {
  Criterion c{7, "pde long-time marginal vs boltzmann fixed point"};
  c.limit_seconds = 120.0;
  const int nt = 128;
  const auto prob = desk_problem_1d(nt);
  const double beta = 4.0, gamma = 1.0;

  PhaseGrid g;
  g.theta_min = prob.grid.min[0];
  g.theta_max = prob.grid.max[0];
  g.r_min = -4.0;
  g.r_max = 4.0;
  g.n_theta = nt;
  g.n_r = 128;
  GridDensity rho0;
  rho0.grid = g;
  rho0.values.resize(g.cells());
  for (int i = 0; i < g.n_theta; ++i)
    for (int j = 0; j < g.n_r; ++j)
      rho0.values[g.idx(i, j)] = std::exp(-0.5 * g.theta(i) * g.theta(i) -
                                          0.5 * beta * g.r(j) * g.r(j));
  rho0.normalize();

  const auto run = run_nonlinear_fp(std::move(rho0), prob.kernels, gamma, beta, 40.0, 50, 0.8);
  const auto marginal = run.density.theta_marginal();

  const auto fp = solve_fixed_point(ThetaDensity::uniform(prob.grid), prob.kernels, beta, 0.5,
                                    1e-10, 20000);
  double l1 = 0.0;
  for (int i = 0; i < nt; ++i) l1 += std::abs(marginal[i] - fp.density.values[i]);
  l1 *= prob.grid.cell_weight();
  c.pass = fp.converged && l1 < 3e-2;
  c.detail = "L1 " + fmt(l1) + " (tol 3e-2), pde steps " + std::to_string(run.steps);
  return c;
}

Criterion criterion_beta_trend(const BoltzmannSweepResult& sweep,
                               const WidthSweepResult& width) {
  Criterion c{8, "beta trend (thm-4 gap decay and shb beta ordering)"};
  c.limit_seconds = 600.0;
  bool decreasing = true;
  for (std::size_t i = 0; i + 1 < sweep.gaps.size(); ++i)
    decreasing = decreasing && sweep.gaps[i] > sweep.gaps[i + 1];
  bool positive = true;
  for (double gap : sweep.gaps) positive = positive && gap > 0.0;

  // least-squares fit of gap ~ c (1+log beta)/beta, then a 1.25x envelope
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < sweep.betas.size(); ++i) {
    const double phi = (1.0 + std::log(sweep.betas[i])) / sweep.betas[i];
    num += phi * sweep.gaps[i];
    den += phi * phi;
  }
  const double c_fit = num / den;
  bool bounded = true;
  double worst_ratio = 0.0;
  for (std::size_t i = 0; i < sweep.betas.size(); ++i) {
    const double bound = 1.25 * c_fit * (1.0 + std::log(sweep.betas[i])) / sweep.betas[i];
    worst_ratio = std::max(worst_ratio, sweep.gaps[i] / bound);
    bounded = bounded && sweep.gaps[i] <= bound;
  }

  // width sweep: mean final loss of SHB(1e4) <= mean final loss of SHB(1e2)
  double lo_beta_mean = 0.0, hi_beta_mean = 0.0;
  for (std::size_t ni = 0; ni < width.n_values.size(); ++ni) {
    lo_beta_mean += width.mean_final[0][ni];
    hi_beta_mean += width.mean_final[1][ni];
  }
  const bool shb_ordering = hi_beta_mean <= lo_beta_mean;

  c.pass = decreasing && positive && bounded && shb_ordering;
  c.detail = "gaps";
  for (double gap : sweep.gaps) c.detail += " " + fmt(gap);
  c.detail += "; envelope ratio " + fmt(worst_ratio) + "; shb means " +
              fmt(hi_beta_mean / width.n_values.size()) + " <= " +
              fmt(lo_beta_mean / width.n_values.size());
  return c;
}

Criterion criterion_width_trend(const WidthSweepResult& width) {
  Criterion c{9, "width trend (hb loss decreasing in n, n=200 below 1e-2 of init)"};
  c.limit_seconds = 900.0;
  const std::size_t hb = 2;  // row order in preset_width_sweep
  bool decreasing = true;
  for (std::size_t ni = 0; ni + 1 < width.n_values.size(); ++ni)
    decreasing = decreasing && width.mean_final[hb][ni] > width.mean_final[hb][ni + 1];

  double init_mean = 0.0, final_mean = 0.0;
  int count = 0;
  for (const auto& cell : width.cells) {
    if (cell.method != "hb" || cell.n != 200) continue;
    init_mean += cell.initial_risk;
    final_mean += cell.final_risk;
    ++count;
  }
  init_mean /= count;
  final_mean /= count;
  const bool deep = final_mean < 1e-2 * init_mean;
  const bool shape_ok =
      width.cells.size() == width.methods.size() * width.n_values.size() * 20;

  c.pass = decreasing && deep && shape_ok;
  c.detail = "hb means";
  for (std::size_t ni = 0; ni < width.n_values.size(); ++ni)
    c.detail += " " + fmt(width.mean_final[hb][ni]);
  c.detail += "; final/init(n=200) " + fmt(final_mean / init_mean) + " (tol 1e-2)";
  return c;
}

Criterion criterion_fig2_agreement(const StationaryMarginalsResult& sm) {
  Criterion c{10, "fig-2 agreement (empirical histogram vs boltzmann field)"};
  c.limit_seconds = 300.0;
  const int n = 200;
  const double beta = 250.0;
  const double mc_mean = std::sqrt(2.0 / (beta * n));
  const double mc_cov = std::sqrt(2.0 / n) / beta;
  const bool velocity_ok =
      sm.velocity.mean_gap < 4.0 * mc_mean && sm.velocity.cov_gap < 4.0 * mc_cov;
  c.pass = sm.comparison.l1_gap < 0.15 && velocity_ok && sm.argmax_match;
  c.detail = "L1 gap " + fmt(sm.comparison.l1_gap) + " (tol 0.15), overflow " +
             fmt(sm.comparison.overflow) + ", argmax match " +
             (sm.argmax_match ? "yes" : "no") + ", vel gaps " + fmt(sm.velocity.mean_gap) +
             "/" + fmt(4.0 * mc_mean) + " and " + fmt(sm.velocity.cov_gap) + "/" +
             fmt(4.0 * mc_cov);
  return c;
}

Criterion criterion_consistency_trend(const ConsistencyResult& res) {
  Criterion c{11, "consistency trend (mean-curve gaps shrink with n)"};
  c.limit_seconds = 600.0;
  const auto& sup = res.table.pairwise_sup;
  c.pass = sup.size() >= 2 && sup.front() > sup.back();
  c.detail = "sup diffs";
  for (double v : sup) c.detail += " " + fmt(v);
  return c;
}

Criterion criterion_determinism() {
  Criterion c{12, "determinism (byte-identical reruns, thread-count invariance)"};
  c.limit_seconds = 600.0;
  const fs::path base = fs::temp_directory_path() / "mfhb_acceptance_det";
  fs::remove_all(base);
  const fs::path d1 = base / "serial", d2 = base / "rerun", d3 = base / "threaded";

  set_thread_count(1);
  preset_potential_evolution(d1);
  preset_potential_evolution(d2);
  set_thread_count(4);
  preset_potential_evolution(d3);
  set_thread_count(1);

  bool ok = true;
  std::string first_diff;
  for (const auto& entry : fs::directory_iterator(d1)) {
    const auto name = entry.path().filename();
    const auto ref = slurp(entry.path());
    if (ref != slurp(d2 / name) || ref != slurp(d3 / name)) {
      ok = false;
      if (first_diff.empty()) first_diff = name.string();
    }
  }
  fs::remove_all(base);
  c.pass = ok;
  c.detail = ok ? "potential_evolution rerun and 4-thread outputs byte-identical"
                : "mismatch in " + first_diff;
  return c;
}

}  // namespace

int main() {
  const fs::path out_base = fs::temp_directory_path() / "mfhb_acceptance_out";
  fs::remove_all(out_base);
  std::vector<Criterion> results;
  auto timed = [&](const std::function<Criterion()>& fn, double extra = 0.0) {
    const double t0 = now_s();
    Criterion c = fn();
    c.seconds = now_s() - t0 + extra;
    if (c.limit_seconds > 0 && c.seconds > c.limit_seconds) {
      c.pass = false;
      c.detail += " [over time budget " + fmt(c.seconds) + "s > " + fmt(c.limit_seconds) + "s]";
    }
    std::printf("[%2d/12] %s  %s (%s) [%.1fs]\n", c.id, c.pass ? "PASS" : "FAIL",
                c.name.c_str(), c.detail.c_str(), c.seconds);
    std::fflush(stdout);
    results.push_back(c);
  };

  timed(criterion_gradient_identity);
  timed(criterion_kernel_identity);

  const double t_lin = now_s();
  const auto linear_run = preset_linear_fp(out_base / "linear_fp");
  const double lin_seconds = now_s() - t_lin;
  timed([&] { return criterion_linear_stationarity(linear_run); }, lin_seconds);
  timed([&] { return criterion_dissipation_identity(linear_run); }, lin_seconds);

  timed(criterion_product_structure);

  const double t_boltz = now_s();
  const auto sweep = preset_boltzmann_fixed_point(out_base / "boltzmann_fixed_point");
  const double boltz_seconds = now_s() - t_boltz;
  timed([&] { return criterion_fixed_point_uniqueness(sweep); }, boltz_seconds);

  timed(criterion_pde_fixed_point_agreement);

  const double t_width = now_s();
  const auto width = preset_width_sweep(out_base / "width_sweep");
  const double width_seconds = now_s() - t_width;
  timed([&] { return criterion_beta_trend(sweep, width); }, width_seconds + boltz_seconds);
  timed([&] { return criterion_width_trend(width); }, width_seconds);

  const double t_sm = now_s();
  const auto sm = preset_stationary_marginals(out_base / "stationary_marginals");
  const double sm_seconds = now_s() - t_sm;
  timed([&] { return criterion_fig2_agreement(sm); }, sm_seconds);

  const double t_cons = now_s();
  const auto cons = preset_consistency(out_base / "consistency");
  const double cons_seconds = now_s() - t_cons;
  timed([&] { return criterion_consistency_trend(cons); }, cons_seconds);

  timed(criterion_determinism);

  int passed = 0;
  for (const auto& c : results) passed += c.pass;
  std::printf("ACCEPTANCE: %d/12 passed\n", passed);
  fs::remove_all(out_base);
  return passed == 12 ? 0 : 1;
}
