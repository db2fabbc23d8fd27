#pragma once

namespace relu1d {

// Infinite-width limit of a 1-input ReLU network with weight variance 2/fan_in
// and bias variance sigma_b^2: pre-activations converge to a Gaussian process
// whose covariance obeys a layer recursion through the arc-cosine kernel.
// This header exposes the recursion, its closed-form consequences (variance
// growth, local correlation expansion, zero-crossing density), and the
// sign-change probability used by the crossing-count predictions.

// Joint second-moment state of one pre-activation evaluated at two inputs.
struct GpPairState {
  int layer = 1;
  double u = 0.0, v = 0.0;      // the two input points
  double var_u = 0.0, var_v = 0.0;
  double cov = 0.0;
  double rho = 0.0;             // cov normalized, clamped into [-1, 1]
  double theta = 0.0;           // arccos(rho), in [0, pi]

  // Layer-1 state: var(t) = 2 t^2 + sigma_b^2, cov = 2 u v + sigma_b^2.
  static GpPairState base(double u, double v, double sigma_b);
};

// Pre-activation variance at layer >= 1: 2 x^2 + layer * sigma_b^2.
double variance(int layer, double x, double sigma_b);

// E[relu(Z1) relu(Z2)] for jointly Gaussian mean-zero (Z1, Z2) with the given
// variances and correlation: sqrt(var1*var2)/(2 pi) * (sin t + (pi - t) cos t)
// with t = arccos(rho).
double arccos_kernel(double var_u, double var_v, double rho);

// One layer of the covariance recursion.
GpPairState cov_step(const GpPairState& prev, double sigma_b);

// Iterate the recursion from the base case up to the requested layer.
GpPairState rho_pair(int layer, double u, double v, double sigma_b);

// Leading coefficient A_l(x) in rho_l(x, x+eps) = 1 - A_l(x) eps^2 + O(eps^3):
// layer * sigma_b^2 / (2 x^2 + layer * sigma_b^2)^2.
double expansion_coefficient(int layer, double x, double sigma_b);

// Small-separation angle: theta_l(x, x+eps) ~ sqrt(2 l) sigma_b |eps| /
// (2 x^2 + l sigma_b^2).
double theta_linearized(int layer, double x, double eps, double sigma_b);

// P(Z1 Z2 < 0) = arccos(rho) / pi for jointly Gaussian mean-zero pairs.
// rho slightly outside [-1,1] (within 1e-12) is clamped; beyond that throws.
double sign_change_prob(double rho);

// Expected zero crossings of a layer-l pre-activation per unit length.
double crossing_density(int layer, double x, double sigma_b);

// Integral of the density over [lo, hi]:
// (1/pi) [ arctan(sqrt(2) hi / (sqrt(l) sigma_b)) - arctan(... lo ...) ].
// Infinite endpoints are accepted and give the arctan limits, so the integral
// over the whole line is exactly 1.
double expected_crossings(int layer, double lo, double hi, double sigma_b);

}  // namespace relu1d
