#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mfhb/dynamics.hpp"
#include "mfhb/types.hpp"

namespace mfhb {

// Kozachenko-Leonenko differential entropy estimate from k-th nearest
// neighbor distances. Returns entropy (so the paper's H(rho) = <log rho, rho>
// is MINUS this value). Duplicate points are handled by a 1e-12 distance floor.
double knn_entropy(const std::vector<std::vector<double>>& samples, int k_neighbors = 3);

// F(mu^n) + mean kinetic + beta^{-1} * (-entropy estimate). A statistical
// estimate; exactness lives in the grid solver.
double particle_free_energy(const Ensemble& ens, const Dataset& data, ActivationSpec act,
                            const RegularizerSpec& reg, double beta);

// Same three-term sum with a caller-supplied loss value (synthetic benchmarks).
double particle_free_energy_terms(const Ensemble& ens, double f_value, double beta);

struct VelocityGaps {
  double mean_gap = 0.0;  // ||sample mean of r||
  double cov_gap = 0.0;   // max-abs entry of sample covariance - beta^{-1} I
};

VelocityGaps velocity_stationarity(const Ensemble& ens, double beta);

struct IndependenceResult {
  double max_abs_correlation = 0.0;
  bool degenerate = false;  // some coordinate had zero variance
};

IndependenceResult theta_r_independence(const Ensemble& ens);

struct ConsistencyRow {
  int n = 0;
  std::vector<double> mean_curve;  // seed-averaged risk at the recorded steps
};

struct ConsistencyTable {
  std::vector<ConsistencyRow> rows;
  std::vector<double> pairwise_sup;  // |rows[k+1] - rows[k]|_sup
};

// Runs run_trajectory for each n (same dataset, per-seed configs) and compares
// successive seed-averaged loss curves in sup norm.
ConsistencyTable consistency_sweep(const RunConfig& base_cfg, const Dataset& data,
                                   std::span<const int> n_values,
                                   std::span<const std::uint64_t> seeds);

}  // namespace mfhb
