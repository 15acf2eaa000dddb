#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "mfhb/types.hpp"

namespace mfhb {

// Activation s and its derivative. Both kinds are bounded with |s| <= 1, |s'| <= 1.
struct ActivationSpec {
  ActivationKind kind = ActivationKind::Sigmoid;

  double value(double z) const;
  double deriv(double z) const;
};

// Psi(theta)(x) = b * s(<a, x>)
double basis_eval(const ParamPoint& theta, std::span<const double> x, ActivationSpec act);

// psi(x) = (1/n) sum_i Psi(theta_i)(x)
double network_output(const std::vector<ParamPoint>& thetas, std::span<const double> x,
                      ActivationSpec act);
double network_output(const Ensemble& ens, std::span<const double> x, ActivationSpec act);

// R = (1/2m) sum_j (psi(x_j) - y_j)^2
double risk(const Ensemble& ens, const Dataset& data, ActivationSpec act);

// Residuals psi(x_j) - y_j, computed once per ensemble state and shared by the
// gradient and field evaluations below.
std::vector<double> residuals(const Ensemble& ens, const Dataset& data, ActivationSpec act);

// g(theta) and its gradient w.r.t. the flattened theta.
std::pair<double, std::vector<double>> regularizer_value_grad(const ParamPoint& theta,
                                                              const RegularizerSpec& reg);

double regularizer_value(const ParamPoint& theta, const RegularizerSpec& reg);

// Mean regularizer <g, mu^n> over the ensemble.
double mean_regularizer(const Ensemble& ens, const RegularizerSpec& reg);

// Regularized loss F(mu^n) = risk + <g, mu^n>.
double loss(const Ensemble& ens, const Dataset& data, ActivationSpec act,
            const RegularizerSpec& reg);

// Per-particle gradient of the interaction potential:
//   grad F'([mu^n]^theta)(theta_i) = (1/m) sum_j e_j * grad_theta Psi(theta_i)(x_j) + grad g,
// which equals n * grad_{theta_i} f(theta_1..theta_n). One flattened d-vector per particle.
std::vector<std::vector<double>> interaction_gradient(const Ensemble& ens, const Dataset& data,
                                                      ActivationSpec act,
                                                      const RegularizerSpec& reg);

// Same gradients written contiguously (particle i at out[i*d .. i*d+d)); the
// allocation-free core used by the step loops.
void interaction_gradient_flat(const Ensemble& ens, const Dataset& data, ActivationSpec act,
                               const RegularizerSpec& reg, std::vector<double>& out);

// F'([mu^n]^theta)(theta) = (1/m) sum_j e_j Psi(theta)(x_j) + g(theta) at given points.
std::vector<double> potential_field(const Ensemble& ens, const Dataset& data,
                                    const std::vector<ParamPoint>& grid_points,
                                    ActivationSpec act, const RegularizerSpec& reg);

// Same field from precomputed residuals (shared across snapshot averaging).
double potential_value(std::span<const double> resid, const Dataset& data,
                       const ParamPoint& theta, ActivationSpec act, const RegularizerSpec& reg);

// Quadratic-loss kernel decomposition over the empirical data measure:
//   U(t, t~) = E_x[Psi(t)(x) Psi(t~)(x)],  V(t) = -E_{x,y}[y Psi(t)(x)],
// with F_0 = (1/2) U[mu,mu] + <V,mu> + (1/2)|y|^2.
struct UVKernels {
  std::function<double(const ParamPoint&, const ParamPoint&)> U;
  std::function<double(const ParamPoint&)> V;
  double half_y_sq = 0.0;  // (1/2) E[y^2]
};

UVKernels uv_kernels(const Dataset& data, ActivationSpec act);

}  // namespace mfhb
