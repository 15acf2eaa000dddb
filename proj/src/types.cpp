#include "mfhb/types.hpp"

#include <cmath>

#include "mfhb/model.hpp"
#include "mfhb/rng.hpp"

namespace mfhb {

bool ParamPoint::finite() const {
  if (!std::isfinite(b)) return false;
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

void Ensemble::validate() const {
  if (particles.empty()) throw std::invalid_argument("Ensemble: needs n >= 1 particles");
  for (const auto& p : particles) {
    if (p.dim() != dim || static_cast<int>(p.r.size()) != dim)
      throw std::invalid_argument("Ensemble: particle dimension mismatch");
  }
}

void Dataset::validate() const {
  if (labels.empty()) throw std::invalid_argument("Dataset: needs m >= 1 samples");
  if (features.size() != labels.size())
    throw std::invalid_argument("Dataset: features/labels length mismatch");
  const auto fd = features.front().size();
  for (const auto& f : features)
    if (f.size() != fd) throw std::invalid_argument("Dataset: ragged features");
}

void RunConfig::validate() const {
  if (d < 2) throw std::invalid_argument("RunConfig: d must be >= 2");
  if (n < 1) throw std::invalid_argument("RunConfig: n must be >= 1");
  if (n0 < 1) throw std::invalid_argument("RunConfig: n0 must be >= 1");
  if (m < 1) throw std::invalid_argument("RunConfig: m must be >= 1");
  if (!(dt > 0)) throw std::invalid_argument("RunConfig: dt must be > 0");
  if (!(gamma > 0)) throw std::invalid_argument("RunConfig: gamma must be > 0");
  if (!(beta > 0)) throw std::invalid_argument("RunConfig: beta must be > 0");
  if (steps < 0) throw std::invalid_argument("RunConfig: steps must be >= 0");
  if (record_every < 1) throw std::invalid_argument("RunConfig: record_every must be >= 1");
  if (!(init_scale > 0)) throw std::invalid_argument("RunConfig: init_scale must be > 0");
  if (!(t_floor > 0)) throw std::invalid_argument("RunConfig: t_floor must be > 0");
}

std::string to_string(Integrator v) {
  switch (v) {
    case Integrator::SHB: return "shb";
    case Integrator::HB: return "hb";
    case Integrator::AGD: return "agd";
    case Integrator::GF: return "gf";
  }
  return "shb";
}

std::string to_string(RegularizerKind v) {
  switch (v) {
    case RegularizerKind::None: return "none";
    case RegularizerKind::SmoothedNorm: return "smoothed_norm";
    case RegularizerKind::Quadratic: return "quadratic";
  }
  return "none";
}

std::string to_string(ActivationKind v) {
  return v == ActivationKind::Sigmoid ? "sigmoid" : "tanh";
}

Integrator integrator_from_string(const std::string& s) {
  if (s == "shb") return Integrator::SHB;
  if (s == "hb") return Integrator::HB;
  if (s == "agd") return Integrator::AGD;
  if (s == "gf") return Integrator::GF;
  throw std::invalid_argument("unknown integrator: " + s);
}

RegularizerKind regularizer_kind_from_string(const std::string& s) {
  if (s == "none") return RegularizerKind::None;
  if (s == "smoothed_norm") return RegularizerKind::SmoothedNorm;
  if (s == "quadratic") return RegularizerKind::Quadratic;
  throw std::invalid_argument("unknown regularizer kind: " + s);
}

ActivationKind activation_from_string(const std::string& s) {
  if (s == "sigmoid") return ActivationKind::Sigmoid;
  if (s == "tanh") return ActivationKind::Tanh;
  throw std::invalid_argument("unknown activation: " + s);
}

Ensemble init_ensemble(const RunConfig& config) {
  config.validate();
  const int d = config.d;
  Ensemble ens;
  ens.dim = d;
  ens.time = 0.0;
  ens.particles.resize(config.n);
  const double vel_scale = std::sqrt(1.0 / config.beta);
  for (int i = 0; i < config.n; ++i) {
    auto& p = ens.particles[i];
    std::vector<double> flat(d);
    RngStream theta_stream(config.seed, rng_tag::kInitTheta, static_cast<std::uint64_t>(i));
    theta_stream.fill_normal(flat, config.init_scale);
    p.theta = ParamPoint::from_flat(flat);
    p.r.resize(d);
    RngStream vel_stream(config.seed, rng_tag::kInitVelocity, static_cast<std::uint64_t>(i));
    vel_stream.fill_normal(p.r, vel_scale);
  }
  return ens;
}

Dataset sample_dataset(int d, int n0, int m, std::uint64_t seed, ActivationKind act,
                       double init_scale) {
  if (d < 2) throw std::invalid_argument("sample_dataset: d must be >= 2");
  if (n0 < 1) throw std::invalid_argument("sample_dataset: n0 must be >= 1");
  if (m < 1) throw std::invalid_argument("sample_dataset: m must be >= 1");

  Dataset data;
  data.features.resize(m);
  for (int j = 0; j < m; ++j) {
    data.features[j].resize(d - 1);
    RngStream s(seed, rng_tag::kFeatures, static_cast<std::uint64_t>(j));
    s.fill_normal(data.features[j]);
  }

  TeacherSpec teacher;
  teacher.neurons.resize(n0);
  for (int i = 0; i < n0; ++i) {
    std::vector<double> flat(d);
    RngStream s(seed, rng_tag::kTeacher, static_cast<std::uint64_t>(i));
    s.fill_normal(flat, init_scale);
    teacher.neurons[i] = ParamPoint::from_flat(flat);
  }

  ActivationSpec activation{act};
  data.labels.resize(m);
  for (int j = 0; j < m; ++j)
    data.labels[j] = network_output(teacher.neurons, data.features[j], activation);
  data.teacher = std::move(teacher);
  return data;
}

}  // namespace mfhb
