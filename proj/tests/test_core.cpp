#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mfhb/model.hpp"
#include "mfhb/rng.hpp"
#include "mfhb/serialize.hpp"
#include "mfhb/types.hpp"

using namespace mfhb;

namespace {

bool ensembles_identical(const Ensemble& a, const Ensemble& b) {
  if (a.size() != b.size() || a.dim != b.dim || a.time != b.time) return false;
  for (int i = 0; i < a.size(); ++i) {
    if (a.particles[i].theta.a != b.particles[i].theta.a) return false;
    if (a.particles[i].theta.b != b.particles[i].theta.b) return false;
    if (a.particles[i].r != b.particles[i].r) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("param point flattening round-trips") {
  ParamPoint p;
  p.a = {1.5, -2.25, 0.0};
  p.b = 7.125;
  CHECK(ParamPoint::from_flat(p.flatten()).a == p.a);
  CHECK(ParamPoint::from_flat(p.flatten()).b == p.b);
  CHECK(p.dim() == 4);
}

TEST_CASE("init_ensemble is bitwise deterministic") {
  RunConfig cfg;
  cfg.n = 3;
  cfg.d = 2;
  cfg.seed = 7;
  CHECK(ensembles_identical(init_ensemble(cfg), init_ensemble(cfg)));
}

TEST_CASE("init_ensemble velocity marginal starts at its stationary shape") {
  RunConfig cfg;
  cfg.n = 10000;
  cfg.d = 2;
  cfg.beta = 4.0;
  cfg.seed = 3;
  const auto ens = init_ensemble(cfg);
  // sample covariance of r within 0.05 of 0.25 I
  double c00 = 0, c01 = 0, c11 = 0, m0 = 0, m1 = 0;
  for (const auto& p : ens.particles) {
    m0 += p.r[0];
    m1 += p.r[1];
  }
  m0 /= cfg.n;
  m1 /= cfg.n;
  for (const auto& p : ens.particles) {
    c00 += (p.r[0] - m0) * (p.r[0] - m0);
    c01 += (p.r[0] - m0) * (p.r[1] - m1);
    c11 += (p.r[1] - m1) * (p.r[1] - m1);
  }
  CHECK(std::abs(c00 / cfg.n - 0.25) < 0.05);
  CHECK(std::abs(c11 / cfg.n - 0.25) < 0.05);
  CHECK(std::abs(c01 / cfg.n) < 0.05);
}

TEST_CASE("single-particle ensemble carries all the mass") {
  RunConfig cfg;
  cfg.n = 1;
  cfg.d = 3;
  cfg.seed = 99;
  const auto ens = init_ensemble(cfg);
  CHECK(ens.size() == 1);
  CHECK(ens.particles[0].dim() == 3);
  CHECK(ens.time == 0.0);
}

TEST_CASE("init_ensemble rejects bad configs") {
  RunConfig cfg;
  cfg.n = 0;
  CHECK_THROWS_AS(init_ensemble(cfg), std::invalid_argument);
  cfg.n = 5;
  cfg.d = 1;
  CHECK_THROWS_AS(init_ensemble(cfg), std::invalid_argument);
}

TEST_CASE("teacher with zero second-layer weights labels everything zero") {
  auto data = sample_dataset(4, 3, 20, 11);
  for (auto& t : data.teacher->neurons) t.b = 0.0;
  ActivationSpec act{ActivationKind::Sigmoid};
  for (int j = 0; j < data.size(); ++j)
    CHECK(network_output(data.teacher->neurons, data.features[j], act) == 0.0);
}

TEST_CASE("sigmoid teacher with a = 0, b = 2 labels everything 1") {
  Dataset data = sample_dataset(2, 1, 10, 5);
  data.teacher->neurons[0].a = {0.0};
  data.teacher->neurons[0].b = 2.0;
  ActivationSpec act{ActivationKind::Sigmoid};
  for (int j = 0; j < data.size(); ++j) {
    data.labels[j] = network_output(data.teacher->neurons, data.features[j], act);
    CHECK(data.labels[j] == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("dataset labels are exact teacher outputs and deterministic") {
  const auto a = sample_dataset(5, 4, 30, 123);
  const auto b = sample_dataset(5, 4, 30, 123);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  ActivationSpec act{ActivationKind::Sigmoid};
  for (int j = 0; j < a.size(); ++j)
    CHECK(a.labels[j] == network_output(a.teacher->neurons, a.features[j], act));
  CHECK_THROWS_AS(sample_dataset(5, 4, 0, 1), std::invalid_argument);
}

TEST_CASE("label variance matches a large-m Monte Carlo oracle") {
  // oracle: fresh features at m = 10^6 through the same fixed teacher
  const int d = 100, n0 = 20;
  const auto data = sample_dataset(d, n0, 1000, 2024);
  double mean = 0, var = 0;
  for (double y : data.labels) mean += y;
  mean /= data.size();
  for (double y : data.labels) var += (y - mean) * (y - mean);
  var /= data.size();

  ActivationSpec act{ActivationKind::Sigmoid};
  const int big_m = 1000000;
  double o_mean = 0, o_sq = 0;
  std::vector<double> x(d - 1);
  for (int j = 0; j < big_m; ++j) {
    RngStream s(909, 77, static_cast<std::uint64_t>(j));
    s.fill_normal(x);
    const double y = network_output(data.teacher->neurons, x, act);
    o_mean += y;
    o_sq += y * y;
  }
  o_mean /= big_m;
  const double o_var = o_sq / big_m - o_mean * o_mean;
  CHECK(std::abs(var - o_var) < 0.2 * o_var);
}

TEST_CASE("json round-trip is exact for core types") {
  RunConfig cfg;
  cfg.d = 3;
  cfg.n = 4;
  cfg.seed = 0x123456789abcdef0ULL;
  cfg.beta = 16.0;
  cfg.dt = 0.01;
  cfg.integrator = Integrator::AGD;
  cfg.regularizer = RegularizerSpec::smoothed_norm(0.01, 1e-3);
  const auto cfg2 = run_config_from_json(to_json(cfg));
  CHECK(to_json(cfg2) == to_json(cfg));
  CHECK(cfg2.seed == cfg.seed);

  const auto data = sample_dataset(cfg.d, 2, 7, 5);
  const auto data2 = dataset_from_json(to_json(data));
  CHECK(to_json(data2) == to_json(data));
  CHECK(data2.features == data.features);
  CHECK(data2.labels == data.labels);

  const auto ens = init_ensemble(cfg);
  const auto ens2 = ensemble_from_json(to_json(ens));
  CHECK(to_json(ens2) == to_json(ens));
  CHECK(ensembles_identical(ens, ens2));

  // byte-stability of the dump itself
  CHECK(to_json(ens).dump() == to_json(ens2).dump());
}
