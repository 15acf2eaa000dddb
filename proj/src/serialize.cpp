#include "mfhb/serialize.hpp"

namespace mfhb {

using nlohmann::json;

json to_json(const ParamPoint& p) {
  return json{{"a", p.a}, {"b", p.b}};
}

json to_json(const ParticleState& p) {
  return json{{"theta", to_json(p.theta)}, {"r", p.r}};
}

json to_json(const Ensemble& e) {
  json particles = json::array();
  for (const auto& p : e.particles) particles.push_back(to_json(p));
  return json{{"particles", std::move(particles)}, {"dim", e.dim}, {"time", e.time}};
}

json to_json(const Dataset& d) {
  json out{{"features", d.features}, {"labels", d.labels}};
  if (d.teacher) {
    json neurons = json::array();
    for (const auto& t : d.teacher->neurons) neurons.push_back(to_json(t));
    out["teacher"] = json{{"neurons", std::move(neurons)}};
  } else {
    out["teacher"] = nullptr;
  }
  return out;
}

json to_json(const RegularizerSpec& r) {
  json out{{"kind", to_string(r.kind)}};
  if (r.kind != RegularizerKind::None) out["c"] = r.c;
  if (r.kind == RegularizerKind::SmoothedNorm) out["eps"] = r.eps;
  return out;
}

json to_json(const RunConfig& c) {
  return json{{"d", c.d},
              {"n", c.n},
              {"n0", c.n0},
              {"m", c.m},
              {"gamma", c.gamma},
              {"beta", c.beta},
              {"dt", c.dt},
              {"steps", c.steps},
              {"seed", c.seed},
              {"integrator", to_string(c.integrator)},
              {"regularizer", to_json(c.regularizer)},
              {"record_every", c.record_every},
              {"init_scale", c.init_scale},
              {"activation", to_string(c.activation)},
              {"t_floor", c.t_floor}};
}

ParamPoint param_point_from_json(const json& j) {
  ParamPoint p;
  p.a = j.at("a").get<std::vector<double>>();
  p.b = j.at("b").get<double>();
  return p;
}

ParticleState particle_state_from_json(const json& j) {
  ParticleState p;
  p.theta = param_point_from_json(j.at("theta"));
  p.r = j.at("r").get<std::vector<double>>();
  return p;
}

Ensemble ensemble_from_json(const json& j) {
  Ensemble e;
  for (const auto& pj : j.at("particles")) e.particles.push_back(particle_state_from_json(pj));
  e.dim = j.at("dim").get<int>();
  e.time = j.at("time").get<double>();
  return e;
}

Dataset dataset_from_json(const json& j) {
  Dataset d;
  d.features = j.at("features").get<std::vector<std::vector<double>>>();
  d.labels = j.at("labels").get<std::vector<double>>();
  if (j.contains("teacher") && !j.at("teacher").is_null()) {
    TeacherSpec t;
    for (const auto& nj : j.at("teacher").at("neurons"))
      t.neurons.push_back(param_point_from_json(nj));
    d.teacher = std::move(t);
  }
  return d;
}

RegularizerSpec regularizer_from_json(const json& j) {
  RegularizerSpec r;
  r.kind = regularizer_kind_from_string(j.at("kind").get<std::string>());
  if (r.kind != RegularizerKind::None) r.c = j.at("c").get<double>();
  if (r.kind == RegularizerKind::SmoothedNorm) r.eps = j.at("eps").get<double>();
  return r;
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  c.d = j.at("d").get<int>();
  c.n = j.at("n").get<int>();
  c.n0 = j.at("n0").get<int>();
  c.m = j.at("m").get<int>();
  c.gamma = j.at("gamma").get<double>();
  c.beta = j.at("beta").get<double>();
  c.dt = j.at("dt").get<double>();
  c.steps = j.at("steps").get<std::int64_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.integrator = integrator_from_string(j.at("integrator").get<std::string>());
  c.regularizer = regularizer_from_json(j.at("regularizer"));
  c.record_every = j.at("record_every").get<std::int64_t>();
  if (j.contains("init_scale")) c.init_scale = j.at("init_scale").get<double>();
  if (j.contains("activation"))
    c.activation = activation_from_string(j.at("activation").get<std::string>());
  if (j.contains("t_floor")) c.t_floor = j.at("t_floor").get<double>();
  return c;
}

}  // namespace mfhb
