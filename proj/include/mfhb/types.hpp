#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfhb {

// A neuron's parameters theta = (a, b): first-layer weights a in R^{d-1}
// and second-layer weight b. The flattened vector [a..., b] has length d.
struct ParamPoint {
  std::vector<double> a;
  double b = 0.0;

  int dim() const { return static_cast<int>(a.size()) + 1; }

  std::vector<double> flatten() const {
    std::vector<double> out(a);
    out.push_back(b);
    return out;
  }

  static ParamPoint from_flat(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("ParamPoint: empty flat vector");
    ParamPoint p;
    p.a.assign(v.begin(), v.end() - 1);
    p.b = v.back();
    return p;
  }

  bool finite() const;
};

// Position-velocity pair (theta, r) of one particle.
struct ParticleState {
  ParamPoint theta;
  std::vector<double> r;  // length dim(): one rate per flattened coordinate

  int dim() const { return theta.dim(); }
};

// n particles carrying the empirical measure mu^n (mass 1/n each).
struct Ensemble {
  std::vector<ParticleState> particles;
  int dim = 0;
  double time = 0.0;

  int size() const { return static_cast<int>(particles.size()); }
  void validate() const;
};

struct TeacherSpec {
  std::vector<ParamPoint> neurons;
};

// m feature/label pairs; labels come from a fixed teacher network when present.
struct Dataset {
  std::vector<std::vector<double>> features;  // each of length d-1
  std::vector<double> labels;
  std::optional<TeacherSpec> teacher;

  int size() const { return static_cast<int>(labels.size()); }
  int feature_dim() const {
    return features.empty() ? 0 : static_cast<int>(features.front().size());
  }
  void validate() const;
};

enum class Integrator { SHB, HB, AGD, GF };

enum class RegularizerKind { None, SmoothedNorm, Quadratic };

enum class ActivationKind { Sigmoid, Tanh };

struct RegularizerSpec {
  RegularizerKind kind = RegularizerKind::None;
  double c = 0.0;     // coefficient, >= 0
  double eps = 1e-3;  // smoothing radius (SmoothedNorm only)

  static RegularizerSpec none() { return {}; }
  static RegularizerSpec smoothed_norm(double c, double eps = 1e-3) {
    return {RegularizerKind::SmoothedNorm, c, eps};
  }
  static RegularizerSpec quadratic(double c) { return {RegularizerKind::Quadratic, c, 0.0}; }
};

struct RunConfig {
  int d = 2;
  int n = 100;
  int n0 = 10;
  int m = 100;
  double gamma = 1.0;
  double beta = 100.0;
  double dt = 1e-2;
  std::int64_t steps = 1000;
  std::uint64_t seed = 0;
  Integrator integrator = Integrator::SHB;
  RegularizerSpec regularizer;
  std::int64_t record_every = 100;
  // Extras beyond the required fields; defaults match the paper-facing setup.
  double init_scale = 1.0;
  ActivationKind activation = ActivationKind::Sigmoid;
  double t_floor = 1.0;  // AGD damping floor: gamma_t = gamma / max(t, t_floor)

  void validate() const;
};

std::string to_string(Integrator v);
std::string to_string(RegularizerKind v);
std::string to_string(ActivationKind v);
Integrator integrator_from_string(const std::string& s);
RegularizerKind regularizer_kind_from_string(const std::string& s);
ActivationKind activation_from_string(const std::string& s);

// --- core operations ---

// n particles: theta ~ N(0, init_scale^2 I_d), r ~ N(0, beta^{-1} I_d),
// one keyed stream per particle; time = 0.
Ensemble init_ensemble(const RunConfig& config);

// m standard-Gaussian features in R^{d-1}; teacher with n0 neurons drawn from
// the init_ensemble law; labels are exact teacher outputs.
Dataset sample_dataset(int d, int n0, int m, std::uint64_t seed,
                       ActivationKind act = ActivationKind::Sigmoid,
                       double init_scale = 1.0);

}  // namespace mfhb
