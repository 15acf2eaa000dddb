#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mfhb/dynamics.hpp"
#include "mfhb/grid.hpp"
#include "mfhb/types.hpp"

namespace mfhb {

// Shortest round-trip decimal form (std::to_chars); locale independent, so
// emitted files are byte-stable across reruns.
std::string format_double(double v);

// Flat dotted-key config: one `key = value` per line, `#` comments.
using FlatConfig = std::map<std::string, std::string>;

FlatConfig parse_flat_config(const std::string& text);
FlatConfig load_flat_config(const std::filesystem::path& path);
void apply_override(FlatConfig& cfg, const std::string& key_value);  // "key=value"

// Keys: d, n, n0, m, gamma, beta, dt, steps, seed, integrator, record_every,
// init_scale, activation, t_floor, regularizer.kind, regularizer.c,
// regularizer.eps, dataset.seed, diagnostics.free_energy.
struct ResolvedConfig {
  RunConfig run;
  std::uint64_t dataset_seed = 0;
  bool dataset_seed_set = false;
  bool free_energy_diagnostics = false;
};

ResolvedConfig resolve_config(const FlatConfig& flat);

void write_text_file(const std::filesystem::path& path, const std::string& content);

std::string trajectory_csv(const std::vector<TrajectoryRecord>& records);
std::string marginals_csv(const Ensemble& ens);
std::string phase_density_csv(const GridDensity& rho);
std::string theta_field_csv(const ThetaGrid& grid, const std::vector<double>& values);

}  // namespace mfhb
