#include "mfhb/dynamics.hpp"

#include <atomic>
#include <cmath>

#include "mfhb/batch_math.hpp"
#include "mfhb/parallel.hpp"
#include "mfhb/rng.hpp"

namespace mfhb {

double mean_kinetic(const Ensemble& ens) {
  double acc = 0.0;
  for (const auto& p : ens.particles)
    for (double v : p.r) acc += 0.5 * v * v;
  return acc / static_cast<double>(ens.size());
}

namespace {

enum class NoiseMode { Diffusion, None };

bool finite_state(const ParticleState& p) {
  if (!p.theta.finite()) return false;
  for (double v : p.r)
    if (!std::isfinite(v)) return false;
  return true;
}

// In-place update: gradients are already evaluated at the pre-step ensemble,
// and each particle only reads its own previous state.
void second_order_apply(Ensemble& ens, const std::vector<double>& grads, const RunConfig& cfg,
                        std::int64_t step_index, double damping, NoiseMode noise,
                        std::span<const std::uint64_t> rng_ids) {
  const int n = ens.size();
  const int d = ens.dim;
  const double dt = cfg.dt;
  const double sigma =
      noise == NoiseMode::Diffusion ? std::sqrt(2.0 * cfg.gamma * dt / cfg.beta) : 0.0;

  ens.time += dt;
  std::atomic<std::int64_t> bad{-1};
  parallel_for(0, n, [&](std::int64_t i) {
    auto& p = ens.particles[i];
    const double* g = grads.data() + static_cast<std::size_t>(i) * d;
    constexpr int kStackD = 128;
    double xi_buf[kStackD];
    std::vector<double> xi_heap;
    double* xi = xi_buf;
    if (noise == NoiseMode::Diffusion) {
      if (d > kStackD) {
        xi_heap.resize(d);
        xi = xi_heap.data();
      }
      const std::uint64_t id =
          rng_ids.empty() ? static_cast<std::uint64_t>(i) : rng_ids[i];
      RngStream stream(cfg.seed, rng_tag::kStepNoise, id,
                       static_cast<std::uint64_t>(step_index));
      normal_row(stream, xi, d);
    }
    // theta' = theta + r dt (pre-step r); r' = r + (-G - gamma r) dt + sigma xi
    for (int k = 0; k < d; ++k) {
      const double rk = p.r[k];
      const double pos = (k + 1 < d ? p.theta.a[k] : p.theta.b) + rk * dt;
      if (k + 1 < d)
        p.theta.a[k] = pos;
      else
        p.theta.b = pos;
      p.r[k] = rk + (-g[k] - damping * rk) * dt +
               (noise == NoiseMode::Diffusion ? sigma * xi[k] : 0.0);
    }
    if (!finite_state(p)) bad = step_index;  // flag only; message carries the step
  });
  if (bad.load() >= 0) throw NumericalAbort(bad.load());
}

Ensemble second_order_step(const Ensemble& ens, const Dataset& data, const RunConfig& cfg,
                           std::int64_t step_index, double damping, NoiseMode noise,
                           std::span<const std::uint64_t> rng_ids) {
  ActivationSpec act{cfg.activation};
  std::vector<double> grads;
  interaction_gradient_flat(ens, data, act, cfg.regularizer, grads);
  Ensemble out = ens;
  second_order_apply(out, grads, cfg, step_index, damping, noise, rng_ids);
  return out;
}

}  // namespace

Ensemble shb_step(const Ensemble& ens, const Dataset& data, const RunConfig& cfg,
                  std::int64_t step_index, std::span<const std::uint64_t> rng_ids) {
  return second_order_step(ens, data, cfg, step_index, cfg.gamma, NoiseMode::Diffusion,
                           rng_ids);
}

Ensemble hb_step(const Ensemble& ens, const Dataset& data, const RunConfig& cfg,
                 std::int64_t step_index) {
  return second_order_step(ens, data, cfg, step_index, cfg.gamma, NoiseMode::None, {});
}

Ensemble agd_step(const Ensemble& ens, const Dataset& data, const RunConfig& cfg,
                  std::int64_t step_index) {
  const double damping = cfg.gamma / std::max(ens.time, cfg.t_floor);
  return second_order_step(ens, data, cfg, step_index, damping, NoiseMode::None, {});
}

namespace {

void gf_apply(Ensemble& ens, const std::vector<double>& grads, const RunConfig& cfg,
              std::int64_t step_index) {
  const int n = ens.size();
  const int d = ens.dim;
  ens.time += cfg.dt;
  std::atomic<std::int64_t> bad{-1};
  parallel_for(0, n, [&](std::int64_t i) {
    auto& p = ens.particles[i];
    const double* g = grads.data() + static_cast<std::size_t>(i) * d;
    for (int k = 0; k < d; ++k) {
      const double pos = (k + 1 < d ? p.theta.a[k] : p.theta.b) - g[k] * cfg.dt;
      if (k + 1 < d)
        p.theta.a[k] = pos;
      else
        p.theta.b = pos;
      p.r[k] = 0.0;
    }
    if (!finite_state(p)) bad = step_index;
  });
  if (bad.load() >= 0) throw NumericalAbort(bad.load());
}

void step_inplace(Ensemble& ens, const Dataset& data, const RunConfig& cfg,
                  std::int64_t step_index, std::vector<double>& grads,
                  std::span<const std::uint64_t> rng_ids) {
  ActivationSpec act{cfg.activation};
  interaction_gradient_flat(ens, data, act, cfg.regularizer, grads);
  switch (cfg.integrator) {
    case Integrator::SHB:
      second_order_apply(ens, grads, cfg, step_index, cfg.gamma, NoiseMode::Diffusion, rng_ids);
      return;
    case Integrator::HB:
      second_order_apply(ens, grads, cfg, step_index, cfg.gamma, NoiseMode::None, {});
      return;
    case Integrator::AGD: {
      const double damping = cfg.gamma / std::max(ens.time, cfg.t_floor);
      second_order_apply(ens, grads, cfg, step_index, damping, NoiseMode::None, {});
      return;
    }
    case Integrator::GF:
      gf_apply(ens, grads, cfg, step_index);
      return;
  }
  throw std::invalid_argument("unknown integrator");
}

}  // namespace

Ensemble gf_step(const Ensemble& ens, const Dataset& data, const RunConfig& cfg,
                 std::int64_t step_index) {
  ActivationSpec act{cfg.activation};
  std::vector<double> grads;
  interaction_gradient_flat(ens, data, act, cfg.regularizer, grads);
  Ensemble out = ens;
  gf_apply(out, grads, cfg, step_index);
  return out;
}

Ensemble integrator_step(const Ensemble& ens, const Dataset& data, const RunConfig& cfg,
                         std::int64_t step_index, std::span<const std::uint64_t> rng_ids) {
  Ensemble out = ens;
  std::vector<double> grads;
  step_inplace(out, data, cfg, step_index, grads, rng_ids);
  return out;
}

void advance_inplace(Ensemble& ens, const Dataset& data, const RunConfig& cfg,
                     std::int64_t step_index, std::vector<double>& grad_buffer) {
  step_inplace(ens, data, cfg, step_index, grad_buffer, {});
}

namespace {

TrajectoryRecord make_record(const Ensemble& ens, const Dataset& data, const RunConfig& cfg,
                             std::int64_t step, const RecordHook& hook) {
  ActivationSpec act{cfg.activation};
  TrajectoryRecord rec;
  rec.step = step;
  rec.time = ens.time;
  rec.risk = risk(ens, data, act);
  rec.loss = rec.risk + mean_regularizer(ens, cfg.regularizer);
  rec.kinetic = mean_kinetic(ens);
  if (hook) hook(ens, rec);
  return rec;
}

}  // namespace

TrajectoryResult run_trajectory(const RunConfig& cfg, const Dataset& data,
                                const RecordHook& hook) {
  return run_trajectory_from(init_ensemble(cfg), cfg, data, hook);
}

TrajectoryResult run_trajectory_from(Ensemble start, const RunConfig& cfg, const Dataset& data,
                                     const RecordHook& hook) {
  cfg.validate();
  data.validate();
  TrajectoryResult out;
  out.records.push_back(make_record(start, data, cfg, 0, hook));
  Ensemble ens = std::move(start);
  std::vector<double> grads;
  for (std::int64_t k = 0; k < cfg.steps; ++k) {
    step_inplace(ens, data, cfg, k, grads, {});
    const std::int64_t step = k + 1;
    if (step % cfg.record_every == 0 || step == cfg.steps)
      out.records.push_back(make_record(ens, data, cfg, step, hook));
  }
  out.final_ensemble = std::move(ens);
  return out;
}

}  // namespace mfhb
