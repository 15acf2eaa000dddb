// Hot activation rows. This file is compiled with vector-math options (see
// CMakeLists); keep it free of control flow that depends on NaN/Inf.

#include "mfhb/batch_math.hpp"

#include <cmath>
#include <numbers>

namespace mfhb {

namespace {

void sigmoid_row(const double* __restrict__ z, double* __restrict__ s, int n) {
  for (int j = 0; j < n; ++j) s[j] = 1.0 / (1.0 + std::exp(-z[j]));
}

void tanh_row(const double* __restrict__ z, double* __restrict__ s, int n) {
  for (int j = 0; j < n; ++j) s[j] = std::tanh(z[j]);
}

// Separate elementwise passes over deinterleaved inputs so each loop carries
// exactly one libm call.
void box_muller_rows(const double* __restrict__ u1, const double* __restrict__ u2,
                     double* __restrict__ cos_out, double* __restrict__ sin_out,
                     double* __restrict__ rad, double* __restrict__ ang, int pairs) {
  for (int p = 0; p < pairs; ++p) rad[p] = std::log(u1[p]);
  for (int p = 0; p < pairs; ++p) rad[p] = std::sqrt(-2.0 * rad[p]);
  for (int p = 0; p < pairs; ++p) ang[p] = 2.0 * std::numbers::pi * u2[p];
  for (int p = 0; p < pairs; ++p) cos_out[p] = std::cos(ang[p]);
  for (int p = 0; p < pairs; ++p) sin_out[p] = std::sin(ang[p]);
  for (int p = 0; p < pairs; ++p) cos_out[p] *= rad[p];
  for (int p = 0; p < pairs; ++p) sin_out[p] *= rad[p];
}

}  // namespace

void activation_row(ActivationKind kind, const double* z, double* s, int n) {
  if (kind == ActivationKind::Sigmoid)
    sigmoid_row(z, s, n);
  else
    tanh_row(z, s, n);
}

void normal_row(RngStream& stream, double* out, int n) {
  constexpr int kMaxPairs = 64;
  const int pairs = (n + 1) / 2;
  if (pairs > kMaxPairs) {
    for (int i = 0; i < n; ++i) out[i] = stream.next_normal();
    return;
  }
  double u1[kMaxPairs], u2[kMaxPairs], c[kMaxPairs], s[kMaxPairs], rad[kMaxPairs],
      ang[kMaxPairs];
  for (int p = 0; p < pairs; ++p) {
    u1[p] = stream.next_uniform();
    u2[p] = stream.next_uniform();
  }
  box_muller_rows(u1, u2, c, s, rad, ang, pairs);
  for (int i = 0; i < n; ++i) out[i] = (i % 2 == 0) ? c[i / 2] : s[i / 2];
}

}  // namespace mfhb
