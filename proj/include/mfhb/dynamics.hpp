#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mfhb/model.hpp"
#include "mfhb/types.hpp"

namespace mfhb {

// One recorded point of a trajectory. risk is the unregularized F_0, loss the
// regularized F; kinetic is the ensemble mean of |r|^2/2.
struct TrajectoryRecord {
  std::int64_t step = 0;
  double time = 0.0;
  double risk = 0.0;
  double loss = 0.0;
  double kinetic = 0.0;
  std::optional<double> entropy_est;
  std::optional<double> free_energy_est;
};

// Raised when a step produces a non-finite state (step size too large).
struct NumericalAbort : std::runtime_error {
  std::int64_t step;
  explicit NumericalAbort(std::int64_t s)
      : std::runtime_error("non-finite particle state at step " + std::to_string(s) +
                           " (step size too large?)"),
        step(s) {}
};

double mean_kinetic(const Ensemble& ens);

// One explicit Euler(-Maruyama) step of the chosen dynamics. Gradients for all
// particles are evaluated at the pre-step ensemble; per-particle noise comes
// from the stream keyed (seed, kStepNoise, rng_id, step_index). When rng_ids is
// empty the particle index is used.
Ensemble shb_step(const Ensemble& ens, const Dataset& data, const RunConfig& cfg,
                  std::int64_t step_index, std::span<const std::uint64_t> rng_ids = {});
Ensemble hb_step(const Ensemble& ens, const Dataset& data, const RunConfig& cfg,
                 std::int64_t step_index);
Ensemble agd_step(const Ensemble& ens, const Dataset& data, const RunConfig& cfg,
                  std::int64_t step_index);
Ensemble gf_step(const Ensemble& ens, const Dataset& data, const RunConfig& cfg,
                 std::int64_t step_index);

Ensemble integrator_step(const Ensemble& ens, const Dataset& data, const RunConfig& cfg,
                         std::int64_t step_index, std::span<const std::uint64_t> rng_ids = {});

// In-place variant for long custom loops; grad_buffer is reused across calls.
void advance_inplace(Ensemble& ens, const Dataset& data, const RunConfig& cfg,
                     std::int64_t step_index, std::vector<double>& grad_buffer);

// Optional per-record hook (e.g. entropy/free-energy estimates); it must not
// mutate the ensemble.
using RecordHook = std::function<void(const Ensemble&, TrajectoryRecord&)>;

struct TrajectoryResult {
  Ensemble final_ensemble;
  std::vector<TrajectoryRecord> records;
};

// Runs cfg.steps integrator steps from init_ensemble(cfg), recording step 0,
// every record_every-th step, and the final step.
TrajectoryResult run_trajectory(const RunConfig& cfg, const Dataset& data,
                                const RecordHook& hook = nullptr);

// As above but starting from a caller-provided ensemble (used by sweeps).
TrajectoryResult run_trajectory_from(Ensemble start, const RunConfig& cfg, const Dataset& data,
                                     const RecordHook& hook = nullptr);

}  // namespace mfhb
