#include "mfhb/presets.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "mfhb/io.hpp"
#include "mfhb/serialize.hpp"

namespace mfhb {

using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string> kPresetNames = {
    "width_sweep",    "stationary_marginals", "potential_evolution",
    "linear_fp",      "boltzmann_fixed_point", "consistency"};

namespace {

void write_meta(const fs::path& out_dir, const std::string& preset, const json& params) {
  json meta;
  meta["preset"] = preset;
  meta["version"] = MFHB_VERSION;
  meta["params"] = params;
  write_text_file(out_dir / "meta.json", meta.dump(2) + "\n");
}

void ensure_dir(const fs::path& p) { fs::create_directories(p); }

}  // namespace

// ---------------------------------------------------------------- width sweep

WidthSweepResult preset_width_sweep(const fs::path& out_dir) {
  ensure_dir(out_dir);
  WidthSweepResult res;
  res.methods = {"shb_beta1e2", "shb_beta1e4", "hb", "agd"};
  res.n_values = {10, 25, 50, 100, 200};
  const int n_seeds = 20;
  const std::uint64_t data_seed = 20240;

  RunConfig base;
  base.d = 20;
  base.n0 = 10;
  base.m = 25;
  base.gamma = 1.0;
  base.dt = 0.02;
  base.steps = 20000;
  base.record_every = 20000;  // endpoints only; the sweep reads initial/final
  base.regularizer = RegularizerSpec::none();

  const Dataset data = sample_dataset(base.d, base.n0, base.m, data_seed);

  res.mean_final.assign(res.methods.size(), std::vector<double>(res.n_values.size(), 0.0));
  std::string csv = "method,beta,n,seed,initial_risk,final_risk\n";
  for (std::size_t mi = 0; mi < res.methods.size(); ++mi) {
    const std::string& method = res.methods[mi];
    RunConfig cfg = base;
    if (method == "shb_beta1e2") {
      cfg.integrator = Integrator::SHB;
      cfg.beta = 1e2;
    } else if (method == "shb_beta1e4") {
      cfg.integrator = Integrator::SHB;
      cfg.beta = 1e4;
    } else if (method == "hb") {
      cfg.integrator = Integrator::HB;
      cfg.beta = 1e4;  // near-rest initial velocities
    } else {
      cfg.integrator = Integrator::AGD;
      cfg.beta = 1e4;
    }
    for (std::size_t ni = 0; ni < res.n_values.size(); ++ni) {
      cfg.n = res.n_values[ni];
      double mean = 0.0;
      for (int s = 0; s < n_seeds; ++s) {
        cfg.seed = 1000 + static_cast<std::uint64_t>(s);
        const auto run = run_trajectory(cfg, data);
        WidthSweepCell cell{method,
                            cfg.beta,
                            cfg.n,
                            cfg.seed,
                            run.records.front().risk,
                            run.records.back().risk};
        mean += cell.final_risk;
        csv += method + ',' + format_double(cfg.beta) + ',' + std::to_string(cfg.n) + ',' +
               std::to_string(cfg.seed) + ',' + format_double(cell.initial_risk) + ',' +
               format_double(cell.final_risk) + '\n';
        res.cells.push_back(std::move(cell));
      }
      res.mean_final[mi][ni] = mean / n_seeds;
    }
  }
  write_text_file(out_dir / "final_loss.csv", csv);

  json params;
  params["config"] = to_json(base);
  params["dataset_seed"] = data_seed;
  params["methods"] = res.methods;
  params["n_values"] = res.n_values;
  params["seeds"] = "1000..1019";
  write_meta(out_dir, "width_sweep", params);
  return res;
}

// ----------------------------------------------------- stationary marginals

StationaryMarginalsResult preset_stationary_marginals(const fs::path& out_dir) {
  ensure_dir(out_dir);
  RunConfig cfg;
  cfg.d = 2;
  cfg.n = 200;
  cfg.n0 = 20;
  cfg.m = 100;
  cfg.gamma = 1.0;
  cfg.beta = 250.0;
  cfg.dt = 0.02;
  cfg.steps = 200000;
  cfg.seed = 11;
  cfg.integrator = Integrator::SHB;
  cfg.regularizer = RegularizerSpec::smoothed_norm(0.01, 1e-3);
  cfg.record_every = 2000;
  const std::uint64_t data_seed = 11;
  const std::int64_t snap_from = 100000;
  const std::int64_t snap_every = 400;

  const Dataset data = sample_dataset(cfg.d, cfg.n0, cfg.m, data_seed);
  ActivationSpec act{cfg.activation};

  std::vector<Ensemble> snapshots;
  std::vector<TrajectoryRecord> records;
  Ensemble ens = init_ensemble(cfg);
  records.push_back({0, 0.0, risk(ens, data, act),
                     loss(ens, data, act, cfg.regularizer), mean_kinetic(ens), {}, {}});
  std::vector<double> grads;
  for (std::int64_t k = 0; k < cfg.steps; ++k) {
    advance_inplace(ens, data, cfg, k, grads);
    const std::int64_t step = k + 1;
    if (step >= snap_from && (step - snap_from) % snap_every == 0)
      snapshots.push_back(ens);
    if (step % cfg.record_every == 0 || step == cfg.steps)
      records.push_back({step, ens.time, risk(ens, data, act),
                         loss(ens, data, act, cfg.regularizer), mean_kinetic(ens), {}, {}});
  }

  const ThetaGrid grid = ThetaGrid::plane(-6.0, 6.0, 4, -6.0, 6.0, 4);
  StationaryMarginalsResult res;
  res.comparison = compare_empirical_pooled(snapshots, data, act, cfg.regularizer, cfg.beta,
                                            grid, 24);
  res.velocity = velocity_stationarity(ens, cfg.beta);
  res.independence = theta_r_independence(ens);
  res.final_risk = records.back().risk;
  const auto field_argmax = std::distance(
      res.comparison.field_mass.begin(),
      std::max_element(res.comparison.field_mass.begin(), res.comparison.field_mass.end()));
  const auto hist_argmax = std::distance(
      res.comparison.hist_mass.begin(),
      std::max_element(res.comparison.hist_mass.begin(), res.comparison.hist_mass.end()));
  res.argmax_match = field_argmax == hist_argmax;

  write_text_file(out_dir / "trajectory.csv", trajectory_csv(records));
  write_text_file(out_dir / "marginals.csv", marginals_csv(ens));
  write_text_file(out_dir / "field.csv", theta_field_csv(grid, res.comparison.field_mass));
  write_text_file(out_dir / "hist.csv", theta_field_csv(grid, res.comparison.hist_mass));

  json summary;
  summary["l1_gap"] = res.comparison.l1_gap;
  summary["overflow"] = res.comparison.overflow;
  summary["argmax_match"] = res.argmax_match;
  summary["velocity_mean_gap"] = res.velocity.mean_gap;
  summary["velocity_cov_gap"] = res.velocity.cov_gap;
  summary["theta_r_max_correlation"] = res.independence.max_abs_correlation;
  summary["final_risk"] = res.final_risk;
  write_text_file(out_dir / "summary.json", summary.dump(2) + "\n");

  json params;
  params["config"] = to_json(cfg);
  params["dataset_seed"] = data_seed;
  params["snapshot_from"] = snap_from;
  params["snapshot_every"] = snap_every;
  params["grid"] = {{"min", -6.0}, {"max", 6.0}, {"cells", 4}, {"subsamples", 24}};
  write_meta(out_dir, "stationary_marginals", params);
  return res;
}

// ----------------------------------------------------- potential evolution

void preset_potential_evolution(const fs::path& out_dir) {
  ensure_dir(out_dir);
  RunConfig cfg;
  cfg.d = 2;
  cfg.n = 200;
  cfg.n0 = 20;
  cfg.m = 100;
  cfg.gamma = 1.0;
  cfg.beta = 100.0;
  cfg.dt = 0.01;
  cfg.steps = 10000;
  cfg.seed = 5;
  cfg.integrator = Integrator::SHB;
  cfg.regularizer = RegularizerSpec::smoothed_norm(0.01, 1e-3);
  const std::uint64_t data_seed = 5;

  const Dataset data = sample_dataset(cfg.d, cfg.n0, cfg.m, data_seed);
  ActivationSpec act{cfg.activation};

  const int nc = 40;
  const double lo = -4.0, hi = 4.0;
  const ThetaGrid grid = ThetaGrid::plane(lo, hi, nc, lo, hi, nc);
  ThetaSlice slice;
  slice.base.a = {0.0};
  slice.base.b = 0.0;
  slice.axes = {0, 1};

  const std::vector<std::int64_t> snapshot_steps = {10, 100, 1000, 10000};
  Ensemble ens = init_ensemble(cfg);
  auto emit = [&](std::int64_t step) {
    const auto field = potential_field_on_grid(ens, data, act, cfg.regularizer, grid, slice);
    write_text_file(out_dir / ("field_" + std::to_string(step) + ".csv"),
                    theta_field_csv(grid, field));
  };
  std::vector<double> grads;
  for (std::int64_t k = 0; k < cfg.steps; ++k) {
    advance_inplace(ens, data, cfg, k, grads);
    if (std::find(snapshot_steps.begin(), snapshot_steps.end(), k + 1) != snapshot_steps.end())
      emit(k + 1);
  }

  json params;
  params["config"] = to_json(cfg);
  params["dataset_seed"] = data_seed;
  params["snapshot_steps"] = snapshot_steps;
  params["field_grid"] = {{"min", lo}, {"max", hi}, {"count", nc}};
  write_meta(out_dir, "potential_evolution", params);
}

// --------------------------------------------------------------- linear fp

LinearFpResult preset_linear_fp(const fs::path& out_dir) {
  ensure_dir(out_dir);
  PhaseGrid grid;
  grid.theta_min = -6.0;
  grid.theta_max = 6.0;
  grid.r_min = -6.0;
  grid.r_max = 6.0;
  grid.n_theta = 128;
  grid.n_r = 128;
  const double gamma = 1.0, beta = 1.0, time_end = 25.0;

  std::vector<double> f(grid.n_theta);
  for (int i = 0; i < grid.n_theta; ++i) f[i] = 0.5 * grid.theta(i) * grid.theta(i);

  GridDensity rho0 = gaussian_phase_density(grid, 1.5, 0.64, -1.0, 0.36);
  auto run = run_linear_fp(std::move(rho0), f, gamma, beta, time_end, 20);

  const GridDensity gibbs = gibbs_product_density(grid, f, beta);
  LinearFpResult res;
  for (int c = 0; c < grid.cells(); ++c)
    res.final_l1_to_gibbs += std::abs(run.density.values[c] - gibbs.values[c]);
  res.final_l1_to_gibbs *= grid.cell_area();
  res.mass_error = std::abs(run.density.mass() - 1.0);
  for (std::size_t k = 0; k + 1 < run.records.size(); ++k)
    res.max_energy_increase = std::max(
        res.max_energy_increase, run.records[k + 1].free_energy - run.records[k].free_energy);
  res.records = run.records;

  write_text_file(out_dir / "rho_final.csv", phase_density_csv(run.density));
  json grid_meta;
  grid_meta["theta_min"] = grid.theta_min;
  grid_meta["theta_max"] = grid.theta_max;
  grid_meta["r_min"] = grid.r_min;
  grid_meta["r_max"] = grid.r_max;
  grid_meta["n_theta"] = grid.n_theta;
  grid_meta["n_r"] = grid.n_r;
  write_text_file(out_dir / "rho_final_grid.json", grid_meta.dump(2) + "\n");

  std::string trace = "step,time,free_energy,dissipation,mass\n";
  for (const auto& r : run.records) {
    trace += std::to_string(r.step) + ',' + format_double(r.time) + ',' +
             format_double(r.free_energy) + ',' + format_double(r.dissipation) + ',' +
             format_double(r.mass) + '\n';
  }
  write_text_file(out_dir / "energy_trace.csv", trace);

  json summary;
  summary["final_l1_to_gibbs"] = res.final_l1_to_gibbs;
  summary["max_energy_increase"] = res.max_energy_increase;
  summary["mass_error"] = res.mass_error;
  summary["dt"] = run.dt;
  summary["steps"] = run.steps;
  write_text_file(out_dir / "summary.json", summary.dump(2) + "\n");

  json params;
  params["grid"] = grid_meta;
  params["gamma"] = gamma;
  params["beta"] = beta;
  params["time_end"] = time_end;
  params["potential"] = "theta^2/2";
  params["init"] = "gaussian(theta: 1.5, 0.64; r: -1.0, 0.36)";
  write_meta(out_dir, "linear_fp", params);
  return res;
}

// ------------------------------------------------------------ desk problems

DeskProblem1d desk_problem_1d(int grid_cells) {
  DeskProblem1d p;
  p.data = sample_dataset(2, 3, 40, 42);
  p.grid = ThetaGrid::line(-6.0, 6.0, grid_cells);
  p.slice.base.a = {0.0};
  p.slice.base.b = 1.0;        // grid drives the first-layer weight, b frozen
  p.slice.axes = {0, 1};
  p.reg = RegularizerSpec::quadratic(0.5);
  p.act = ActivationSpec{ActivationKind::Sigmoid};
  p.kernels = GridKernels::build(p.grid, p.data, p.act, p.reg, p.slice);
  return p;
}

DeskProblem2d desk_problem_2d(int cells_per_axis) {
  DeskProblem2d p;
  p.data = sample_dataset(2, 5, 40, 7);
  p.grid = ThetaGrid::plane(-5.0, 5.0, cells_per_axis, -5.0, 5.0, cells_per_axis);
  p.slice.base.a = {0.0};
  p.slice.base.b = 0.0;
  p.slice.axes = {0, 1};
  p.reg = RegularizerSpec::quadratic(0.5);
  p.act = ActivationSpec{ActivationKind::Sigmoid};
  p.kernels = GridKernels::build(p.grid, p.data, p.act, p.reg, p.slice);
  return p;
}

// --------------------------------------------------- boltzmann fixed point

BoltzmannSweepResult preset_boltzmann_fixed_point(const fs::path& out_dir) {
  ensure_dir(out_dir);
  const auto prob = desk_problem_1d();
  BoltzmannSweepResult res;
  res.betas = {4.0, 16.0, 64.0, 256.0};

  const auto inf = grid_infimum(prob.kernels);
  res.infimum = inf.value;

  for (double beta : res.betas) {
    const auto fp = solve_fixed_point(ThetaDensity::uniform(prob.grid), prob.kernels, beta,
                                      0.5, 1e-10, 20000);
    res.iterations.push_back(fp.iterations);
    res.residuals.push_back(fp.residual);
    res.gaps.push_back(f_lambda(fp.density, prob.kernels, 1.0 - 1.0 / beta) - res.infimum);
    std::string name = "fixed_point_beta" + format_double(beta) + ".csv";
    write_text_file(out_dir / name, theta_field_csv(prob.grid, fp.density.values));
  }

  // uniqueness from three initializations, beta = 4
  auto off_center = [&](double center, double var) {
    ThetaDensity rho;
    rho.grid = prob.grid;
    rho.values.resize(prob.grid.cells());
    for (int c = 0; c < prob.grid.cells(); ++c) {
      const double t = prob.grid.center(c)[0] - center;
      rho.values[c] = std::exp(-0.5 * t * t / var);
    }
    rho.normalize();
    return rho;
  };
  {
    const double beta = 4.0;
    std::vector<ThetaDensity> sols;
    for (const auto& init :
         {ThetaDensity::uniform(prob.grid), off_center(2.0, 0.25), off_center(-3.0, 1.0)})
      sols.push_back(solve_fixed_point(init, prob.kernels, beta, 0.5, 1e-10, 20000).density);
    for (std::size_t i = 0; i < sols.size(); ++i)
      for (std::size_t j = i + 1; j < sols.size(); ++j)
        res.uniqueness_gap_1d = std::max(res.uniqueness_gap_1d, l1_distance(sols[i], sols[j]));
  }
  {
    const auto prob2 = desk_problem_2d();
    const double beta = 4.0;
    std::vector<ThetaDensity> sols;
    ThetaDensity gauss;
    gauss.grid = prob2.grid;
    gauss.values.resize(prob2.grid.cells());
    for (int c = 0; c < prob2.grid.cells(); ++c) {
      const auto t = prob2.grid.center(c);
      gauss.values[c] = std::exp(-0.5 * ((t[0] - 1.5) * (t[0] - 1.5) + t[1] * t[1]));
    }
    gauss.normalize();
    ThetaDensity gauss2 = gauss;
    for (int c = 0; c < prob2.grid.cells(); ++c) {
      const auto t = prob2.grid.center(c);
      gauss2.values[c] = std::exp(-((t[0] + 2.0) * (t[0] + 2.0) + (t[1] - 1.0) * (t[1] - 1.0)));
    }
    gauss2.normalize();
    for (const auto& init : {ThetaDensity::uniform(prob2.grid), gauss, gauss2})
      sols.push_back(solve_fixed_point(init, prob2.kernels, beta, 0.5, 1e-10, 20000).density);
    for (std::size_t i = 0; i < sols.size(); ++i)
      for (std::size_t j = i + 1; j < sols.size(); ++j)
        res.uniqueness_gap_2d = std::max(res.uniqueness_gap_2d, l1_distance(sols[i], sols[j]));
  }

  // linear case: T constant, eta = 1 converges in exactly one iteration
  {
    std::vector<double> fvals(prob.grid.cells());
    for (int c = 0; c < prob.grid.cells(); ++c) {
      const double t = prob.grid.center(c)[0];
      fvals[c] = 0.5 * t * t;
    }
    const auto lin = GridKernels::linear_case(prob.grid, fvals);
    const auto fp =
        solve_fixed_point(ThetaDensity::uniform(prob.grid), lin, 1.0, 1.0, 1e-10, 100);
    res.linear_case_iterations = fp.iterations;
  }

  std::string gaps_csv = "beta,gap,iterations,residual\n";
  for (std::size_t i = 0; i < res.betas.size(); ++i)
    gaps_csv += format_double(res.betas[i]) + ',' + format_double(res.gaps[i]) + ',' +
                std::to_string(res.iterations[i]) + ',' + format_double(res.residuals[i]) + '\n';
  write_text_file(out_dir / "gaps.csv", gaps_csv);

  json summary;
  summary["infimum"] = res.infimum;
  summary["betas"] = res.betas;
  summary["gaps"] = res.gaps;
  summary["uniqueness_gap_1d"] = res.uniqueness_gap_1d;
  summary["uniqueness_gap_2d"] = res.uniqueness_gap_2d;
  summary["linear_case_iterations"] = res.linear_case_iterations;
  write_text_file(out_dir / "summary.json", summary.dump(2) + "\n");

  json params;
  params["dataset_seed"] = 42;
  params["grid_cells"] = 512;
  params["regularizer"] = to_json(RegularizerSpec::quadratic(0.5));
  params["damping"] = 0.5;
  params["tol"] = 1e-10;
  write_meta(out_dir, "boltzmann_fixed_point", params);
  return res;
}

// ------------------------------------------------------------- consistency

ConsistencyResult preset_consistency(const fs::path& out_dir) {
  ensure_dir(out_dir);
  RunConfig base;
  base.d = 10;
  base.n0 = 5;
  base.m = 50;
  base.gamma = 1.0;
  base.beta = 100.0;
  base.dt = 0.02;
  base.steps = 5000;
  base.record_every = 50;
  base.integrator = Integrator::SHB;
  base.regularizer = RegularizerSpec::none();
  const std::uint64_t data_seed = 77;

  const Dataset data = sample_dataset(base.d, base.n0, base.m, data_seed);
  const std::vector<int> n_values = {25, 50, 100, 200, 400};
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 1; s <= 10; ++s) seeds.push_back(s);

  ConsistencyResult res;
  res.table = consistency_sweep(base, data, n_values, seeds);

  std::string curves = "n,record,risk\n";
  for (const auto& row : res.table.rows)
    for (std::size_t k = 0; k < row.mean_curve.size(); ++k)
      curves += std::to_string(row.n) + ',' + std::to_string(k) + ',' +
                format_double(row.mean_curve[k]) + '\n';
  write_text_file(out_dir / "curves.csv", curves);

  std::string diffs = "n_low,n_high,sup_diff\n";
  for (std::size_t k = 0; k + 1 < n_values.size(); ++k)
    diffs += std::to_string(n_values[k]) + ',' + std::to_string(n_values[k + 1]) + ',' +
             format_double(res.table.pairwise_sup[k]) + '\n';
  write_text_file(out_dir / "diffs.csv", diffs);

  json params;
  params["config"] = to_json(base);
  params["dataset_seed"] = data_seed;
  params["n_values"] = n_values;
  params["seeds"] = seeds;
  write_meta(out_dir, "consistency", params);
  return res;
}

int run_preset(const std::string& name, const fs::path& out_dir) {
  if (name == "width_sweep") {
    preset_width_sweep(out_dir);
  } else if (name == "stationary_marginals") {
    preset_stationary_marginals(out_dir);
  } else if (name == "potential_evolution") {
    preset_potential_evolution(out_dir);
  } else if (name == "linear_fp") {
    preset_linear_fp(out_dir);
  } else if (name == "boltzmann_fixed_point") {
    preset_boltzmann_fixed_point(out_dir);
  } else if (name == "consistency") {
    preset_consistency(out_dir);
  } else {
    return 2;
  }
  return 0;
}

}  // namespace mfhb
