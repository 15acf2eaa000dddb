#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mfhb/boltzmann.hpp"
#include "mfhb/diagnostics.hpp"
#include "mfhb/dynamics.hpp"
#include "mfhb/grid.hpp"
#include "mfhb/kinetic_pde.hpp"

namespace mfhb {

// Desk-scale experiment presets. Each writes plot-ready CSV/JSON files into
// out_dir (created if needed) and returns the numbers the acceptance suite
// checks. All hyperparameters are pinned here and recorded in meta.json.

extern const std::vector<std::string> kPresetNames;

struct WidthSweepCell {
  std::string method;  // "shb_beta1e2", "shb_beta1e4", "hb", "agd"
  double beta;
  int n;
  std::uint64_t seed;
  double initial_risk;
  double final_risk;
};

struct WidthSweepResult {
  std::vector<WidthSweepCell> cells;
  // mean final risk per (method, n), in the row order methods x n_values
  std::vector<std::string> methods;
  std::vector<int> n_values;
  std::vector<std::vector<double>> mean_final;  // [method][n index]
};

WidthSweepResult preset_width_sweep(const std::filesystem::path& out_dir);

struct StationaryMarginalsResult {
  EmpiricalComparison comparison;
  VelocityGaps velocity;
  IndependenceResult independence;
  bool argmax_match = false;
  double final_risk = 0.0;
};

StationaryMarginalsResult preset_stationary_marginals(const std::filesystem::path& out_dir);

void preset_potential_evolution(const std::filesystem::path& out_dir);

struct LinearFpResult {
  double final_l1_to_gibbs = 0.0;
  double max_energy_increase = 0.0;
  double mass_error = 0.0;
  std::vector<FpRunRecord> records;
};

LinearFpResult preset_linear_fp(const std::filesystem::path& out_dir);

struct BoltzmannSweepResult {
  std::vector<double> betas;
  std::vector<double> gaps;           // F_{1-1/beta}(rho*) - inf_grid F
  std::vector<int> iterations;
  std::vector<double> residuals;
  double infimum = 0.0;
  double uniqueness_gap_1d = 0.0;     // max pairwise L1 over three inits (beta=4)
  double uniqueness_gap_2d = 0.0;
  int linear_case_iterations = 0;     // eta = 1 on the linear problem
};

BoltzmannSweepResult preset_boltzmann_fixed_point(const std::filesystem::path& out_dir);

struct ConsistencyResult {
  ConsistencyTable table;
};

ConsistencyResult preset_consistency(const std::filesystem::path& out_dir);

int run_preset(const std::string& name, const std::filesystem::path& out_dir);

// The 1-d quadratic-loss desk problem shared by the fixed-point sweep, the
// PDE agreement check, and the uniqueness tests: d=2 dataset, grid over the
// first-layer weight with b frozen at 1.
struct DeskProblem1d {
  Dataset data;
  ThetaGrid grid;
  ThetaSlice slice;
  RegularizerSpec reg;
  ActivationSpec act;
  GridKernels kernels;
};

DeskProblem1d desk_problem_1d(int grid_cells = 512);

// 2-d companion (both theta coordinates on the grid), used by the uniqueness
// criterion.
struct DeskProblem2d {
  Dataset data;
  ThetaGrid grid;
  ThetaSlice slice;
  RegularizerSpec reg;
  ActivationSpec act;
  GridKernels kernels;
};

DeskProblem2d desk_problem_2d(int cells_per_axis = 48);

}  // namespace mfhb
