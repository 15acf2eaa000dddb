#include "mfhb/model.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "mfhb/batch_math.hpp"
#include "mfhb/parallel.hpp"

namespace mfhb {

double ActivationSpec::value(double z) const {
  if (kind == ActivationKind::Sigmoid) return 1.0 / (1.0 + std::exp(-z));
  return std::tanh(z);
}

double ActivationSpec::deriv(double z) const {
  if (kind == ActivationKind::Sigmoid) {
    const double s = 1.0 / (1.0 + std::exp(-z));
    return s * (1.0 - s);
  }
  const double t = std::tanh(z);
  return 1.0 - t * t;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void check_dims(const ParamPoint& theta, std::span<const double> x) {
  if (theta.a.size() != x.size())
    throw std::invalid_argument("basis_eval: feature dimension mismatch");
}

}  // namespace

double basis_eval(const ParamPoint& theta, std::span<const double> x, ActivationSpec act) {
  check_dims(theta, x);
  return theta.b * act.value(dot(theta.a, x));
}

double network_output(const std::vector<ParamPoint>& thetas, std::span<const double> x,
                      ActivationSpec act) {
  if (thetas.empty()) throw std::invalid_argument("network_output: empty neuron list");
  double acc = 0.0;
  for (const auto& t : thetas) acc += basis_eval(t, x, act);
  return acc / static_cast<double>(thetas.size());
}

double network_output(const Ensemble& ens, std::span<const double> x, ActivationSpec act) {
  if (ens.particles.empty()) throw std::invalid_argument("network_output: empty ensemble");
  double acc = 0.0;
  for (const auto& p : ens.particles) acc += basis_eval(p.theta, x, act);
  return acc / static_cast<double>(ens.particles.size());
}

namespace {

// Shared forward pass over the (particle, sample) grid: one activation matrix
// S[i*m+j] = s(<a_i, x_j>), reused by the residuals and the gradient loop so
// the activation is evaluated once per pair.
struct ForwardPass {
  int n = 0, m = 0;
  std::vector<double> features_t;  // (d-1) x m, sample-contiguous rows
  std::vector<double> S;           // n x m
  std::vector<double> resid;       // m
};

ForwardPass forward_pass(const Ensemble& ens, const Dataset& data, ActivationSpec act) {
  data.validate();
  ForwardPass fp;
  fp.n = ens.size();
  fp.m = data.size();
  const int f_dim = data.feature_dim();
  if (f_dim != ens.dim - 1)
    throw std::invalid_argument("forward_pass: feature dimension mismatch");

  fp.features_t.resize(static_cast<std::size_t>(f_dim) * fp.m);
  for (int j = 0; j < fp.m; ++j)
    for (int k = 0; k < f_dim; ++k)
      fp.features_t[static_cast<std::size_t>(k) * fp.m + j] = data.features[j][k];

  fp.S.resize(static_cast<std::size_t>(fp.n) * fp.m);
  parallel_for(0, fp.n, [&](std::int64_t i) {
    const auto& a = ens.particles[i].theta.a;
    double* row = fp.S.data() + static_cast<std::size_t>(i) * fp.m;
    constexpr int kStackM = 512;
    double zbuf[kStackM];
    std::vector<double> zheap;
    double* z = zbuf;
    if (fp.m > kStackM) {
      zheap.resize(fp.m);
      z = zheap.data();
    }
    for (int j = 0; j < fp.m; ++j) z[j] = 0.0;
    for (int k = 0; k < f_dim; ++k) {
      const double ak = a[k];
      const double* xk = fp.features_t.data() + static_cast<std::size_t>(k) * fp.m;
      for (int j = 0; j < fp.m; ++j) z[j] += ak * xk[j];
    }
    activation_row(act.kind, z, row, fp.m);
  });

  // psi accumulates over particles in index order (thread-count independent)
  fp.resid.assign(fp.m, 0.0);
  for (int i = 0; i < fp.n; ++i) {
    const double b = ens.particles[i].theta.b;
    const double* row = fp.S.data() + static_cast<std::size_t>(i) * fp.m;
    for (int j = 0; j < fp.m; ++j) fp.resid[j] += b * row[j];
  }
  const double inv_n = 1.0 / fp.n;
  for (int j = 0; j < fp.m; ++j) fp.resid[j] = fp.resid[j] * inv_n - data.labels[j];
  return fp;
}

}  // namespace

std::vector<double> residuals(const Ensemble& ens, const Dataset& data, ActivationSpec act) {
  return forward_pass(ens, data, act).resid;
}

double risk(const Ensemble& ens, const Dataset& data, ActivationSpec act) {
  const auto e = residuals(ens, data, act);
  double acc = 0.0;
  for (double v : e) acc += v * v;
  return 0.5 * acc / static_cast<double>(e.size());
}

std::pair<double, std::vector<double>> regularizer_value_grad(const ParamPoint& theta,
                                                              const RegularizerSpec& reg) {
  const int d = theta.dim();
  std::vector<double> grad(d, 0.0);
  switch (reg.kind) {
    case RegularizerKind::None:
      return {0.0, grad};
    case RegularizerKind::SmoothedNorm: {
      double sq = theta.b * theta.b + reg.eps * reg.eps;
      for (double v : theta.a) sq += v * v;
      const double nrm = std::sqrt(sq);
      const double scale = reg.c / nrm;
      for (int k = 0; k + 1 < d; ++k) grad[k] = scale * theta.a[k];
      grad[d - 1] = scale * theta.b;
      return {reg.c * nrm, grad};
    }
    case RegularizerKind::Quadratic: {
      double sq = theta.b * theta.b;
      for (double v : theta.a) sq += v * v;
      for (int k = 0; k + 1 < d; ++k) grad[k] = reg.c * theta.a[k];
      grad[d - 1] = reg.c * theta.b;
      return {0.5 * reg.c * sq, grad};
    }
  }
  return {0.0, grad};
}

double regularizer_value(const ParamPoint& theta, const RegularizerSpec& reg) {
  switch (reg.kind) {
    case RegularizerKind::None:
      return 0.0;
    case RegularizerKind::SmoothedNorm: {
      double sq = theta.b * theta.b + reg.eps * reg.eps;
      for (double v : theta.a) sq += v * v;
      return reg.c * std::sqrt(sq);
    }
    case RegularizerKind::Quadratic: {
      double sq = theta.b * theta.b;
      for (double v : theta.a) sq += v * v;
      return 0.5 * reg.c * sq;
    }
  }
  return 0.0;
}

double mean_regularizer(const Ensemble& ens, const RegularizerSpec& reg) {
  if (reg.kind == RegularizerKind::None || ens.particles.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& p : ens.particles) acc += regularizer_value(p.theta, reg);
  return acc / static_cast<double>(ens.particles.size());
}

double loss(const Ensemble& ens, const Dataset& data, ActivationSpec act,
            const RegularizerSpec& reg) {
  return risk(ens, data, act) + mean_regularizer(ens, reg);
}

namespace {

void regularizer_grad_into(const ParamPoint& theta, const RegularizerSpec& reg, double* out) {
  const int d = theta.dim();
  switch (reg.kind) {
    case RegularizerKind::None:
      for (int k = 0; k < d; ++k) out[k] = 0.0;
      return;
    case RegularizerKind::SmoothedNorm: {
      double sq = theta.b * theta.b + reg.eps * reg.eps;
      for (double v : theta.a) sq += v * v;
      const double scale = reg.c / std::sqrt(sq);
      for (int k = 0; k + 1 < d; ++k) out[k] = scale * theta.a[k];
      out[d - 1] = scale * theta.b;
      return;
    }
    case RegularizerKind::Quadratic:
      for (int k = 0; k + 1 < d; ++k) out[k] = reg.c * theta.a[k];
      out[d - 1] = reg.c * theta.b;
      return;
  }
}

}  // namespace

void interaction_gradient_flat(const Ensemble& ens, const Dataset& data, ActivationSpec act,
                               const RegularizerSpec& reg, std::vector<double>& out) {
  const auto fp = forward_pass(ens, data, act);  // shared pass, O(nm)
  const int n = ens.size();
  const int m = data.size();
  const int d = ens.dim;
  const int f_dim = d - 1;
  const double inv_m = 1.0 / static_cast<double>(m);
  out.resize(static_cast<std::size_t>(n) * d);

  parallel_for(0, n, [&](std::int64_t i) {
    const ParamPoint& theta = ens.particles[i].theta;
    double* grad = out.data() + static_cast<std::size_t>(i) * d;
    regularizer_grad_into(theta, reg, grad);
    const double* srow = fp.S.data() + static_cast<std::size_t>(i) * m;
    // dPsi/da = b s'(z) x with s' recovered from s; dPsi/db = s(z)
    constexpr int kStackM = 512;
    double wbuf[kStackM];
    std::vector<double> wheap;
    double* w = wbuf;
    if (m > kStackM) {
      wheap.resize(m);
      w = wheap.data();
    }
    double gb = 0.0;
    if (act.kind == ActivationKind::Sigmoid) {
      for (int j = 0; j < m; ++j) {
        const double s = srow[j];
        w[j] = fp.resid[j] * inv_m * theta.b * s * (1.0 - s);
        gb += fp.resid[j] * s;
      }
    } else {
      for (int j = 0; j < m; ++j) {
        const double t = srow[j];
        w[j] = fp.resid[j] * inv_m * theta.b * (1.0 - t * t);
        gb += fp.resid[j] * t;
      }
    }
    grad[d - 1] += gb * inv_m;
    for (int k = 0; k < f_dim; ++k) {
      const double* xk = fp.features_t.data() + static_cast<std::size_t>(k) * m;
      double acc = 0.0;
      for (int j = 0; j < m; ++j) acc += w[j] * xk[j];
      grad[k] += acc;
    }
  });
}

std::vector<std::vector<double>> interaction_gradient(const Ensemble& ens, const Dataset& data,
                                                      ActivationSpec act,
                                                      const RegularizerSpec& reg) {
  std::vector<double> flat;
  interaction_gradient_flat(ens, data, act, reg, flat);
  const int n = ens.size();
  const int d = ens.dim;
  std::vector<std::vector<double>> grads(n);
  for (int i = 0; i < n; ++i)
    grads[i].assign(flat.begin() + static_cast<std::size_t>(i) * d,
                    flat.begin() + static_cast<std::size_t>(i + 1) * d);
  return grads;
}

double potential_value(std::span<const double> resid, const Dataset& data,
                       const ParamPoint& theta, ActivationSpec act,
                       const RegularizerSpec& reg) {
  const int m = data.size();
  double acc = 0.0;
  for (int j = 0; j < m; ++j) acc += resid[j] * basis_eval(theta, data.features[j], act);
  return acc / static_cast<double>(m) + regularizer_value(theta, reg);
}

std::vector<double> potential_field(const Ensemble& ens, const Dataset& data,
                                    const std::vector<ParamPoint>& grid_points,
                                    ActivationSpec act, const RegularizerSpec& reg) {
  const auto resid = residuals(ens, data, act);
  std::vector<double> out(grid_points.size());
  parallel_for(0, static_cast<std::int64_t>(grid_points.size()), [&](std::int64_t i) {
    out[i] = potential_value(resid, data, grid_points[i], act, reg);
  });
  return out;
}

UVKernels uv_kernels(const Dataset& data, ActivationSpec act) {
  data.validate();
  UVKernels k;
  auto data_copy = std::make_shared<Dataset>(data);  // closures own a copy
  k.U = [data_copy, act](const ParamPoint& t1, const ParamPoint& t2) {
    double acc = 0.0;
    for (const auto& x : data_copy->features)
      acc += basis_eval(t1, x, act) * basis_eval(t2, x, act);
    return acc / static_cast<double>(data_copy->size());
  };
  k.V = [data_copy, act](const ParamPoint& t) {
    double acc = 0.0;
    for (int j = 0; j < data_copy->size(); ++j)
      acc += data_copy->labels[j] * basis_eval(t, data_copy->features[j], act);
    return -acc / static_cast<double>(data_copy->size());
  };
  double y2 = 0.0;
  for (double y : data.labels) y2 += y * y;
  k.half_y_sq = 0.5 * y2 / static_cast<double>(data.size());
  return k;
}

}  // namespace mfhb
