#include "relu1d/gp_limit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "relu1d/errors.hpp"

namespace relu1d {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRhoSlack = 1e-12;  // tolerated numerical overshoot of |rho|

void require_layer(int layer) {
  if (layer < 1)
    raise(ErrorKind::invalid_layer,
          "layer index must be >= 1, got " + std::to_string(layer));
}

void require_sigma(double sigma_b) {
  if (!(sigma_b > 0.0) || !std::isfinite(sigma_b))
    raise(ErrorKind::invalid_sigma, "sigma_b must be strictly positive");
}

void require_finite(double x, const char* what) {
  if (!std::isfinite(x))
    raise(ErrorKind::invalid_value, std::string(what) + " must be finite");
}

double clamp_rho(double rho) {
  if (!std::isfinite(rho) || std::abs(rho) > 1.0 + kRhoSlack)
    raise(ErrorKind::invalid_correlation,
          "correlation must lie in [-1, 1] (up to 1e-12 slack)");
  return std::clamp(rho, -1.0, 1.0);
}

}  // namespace

double variance(int layer, double x, double sigma_b) {
  require_layer(layer);
  require_sigma(sigma_b);
  require_finite(x, "input point");
  return 2.0 * x * x + static_cast<double>(layer) * sigma_b * sigma_b;
}

double arccos_kernel(double var_u, double var_v, double rho) {
  if (!(var_u > 0.0) || !(var_v > 0.0) || !std::isfinite(var_u) ||
      !std::isfinite(var_v))
    raise(ErrorKind::invalid_variance, "variances must be strictly positive");
  const double r = clamp_rho(rho);
  const double theta = std::acos(r);
  return std::sqrt(var_u * var_v) / (2.0 * kPi) *
         (std::sin(theta) + (kPi - theta) * std::cos(theta));
}

GpPairState GpPairState::base(double u, double v, double sigma_b) {
  require_sigma(sigma_b);
  require_finite(u, "input point");
  require_finite(v, "input point");
  GpPairState s;
  s.layer = 1;
  s.u = u;
  s.v = v;
  s.var_u = variance(1, u, sigma_b);
  s.var_v = variance(1, v, sigma_b);
  s.cov = 2.0 * u * v + sigma_b * sigma_b;
  s.rho = clamp_rho(s.cov / std::sqrt(s.var_u * s.var_v));
  s.theta = std::acos(s.rho);
  return s;
}

GpPairState cov_step(const GpPairState& prev, double sigma_b) {
  require_sigma(sigma_b);
  require_layer(prev.layer);
  // The closed-form variance must agree with the recursion; a mismatch means
  // the state was built inconsistently.
  const double vu = variance(prev.layer, prev.u, sigma_b);
  const double vv = variance(prev.layer, prev.v, sigma_b);
  if (std::abs(prev.var_u - vu) > 1e-12 * (1.0 + vu) ||
      std::abs(prev.var_v - vv) > 1e-12 * (1.0 + vv))
    raise(ErrorKind::invariant_error,
          "pair state variances inconsistent with 2x^2 + layer*sigma_b^2");

  GpPairState next;
  next.layer = prev.layer + 1;
  next.u = prev.u;
  next.v = prev.v;
  next.var_u = variance(next.layer, prev.u, sigma_b);
  next.var_v = variance(next.layer, prev.v, sigma_b);
  next.cov = sigma_b * sigma_b + 2.0 * arccos_kernel(prev.var_u, prev.var_v, prev.rho);
  next.rho = clamp_rho(next.cov / std::sqrt(next.var_u * next.var_v));
  next.theta = std::acos(next.rho);
  return next;
}

GpPairState rho_pair(int layer, double u, double v, double sigma_b) {
  require_layer(layer);
  GpPairState s = GpPairState::base(u, v, sigma_b);
  while (s.layer < layer) s = cov_step(s, sigma_b);
  return s;
}

double expansion_coefficient(int layer, double x, double sigma_b) {
  const double var = variance(layer, x, sigma_b);
  return static_cast<double>(layer) * sigma_b * sigma_b / (var * var);
}

double theta_linearized(int layer, double x, double eps, double sigma_b) {
  require_finite(eps, "separation");
  const double var = variance(layer, x, sigma_b);
  return std::sqrt(2.0 * static_cast<double>(layer)) * sigma_b *
         std::abs(eps) / var;
}

double sign_change_prob(double rho) {
  return std::acos(clamp_rho(rho)) / kPi;
}

double crossing_density(int layer, double x, double sigma_b) {
  const double var = variance(layer, x, sigma_b);
  return std::sqrt(2.0 * static_cast<double>(layer)) * sigma_b / (kPi * var);
}

double expected_crossings(int layer, double lo, double hi, double sigma_b) {
  require_layer(layer);
  require_sigma(sigma_b);
  if (std::isnan(lo) || std::isnan(hi) || !(lo < hi))
    raise(ErrorKind::invalid_interval, "need lo < hi (infinities allowed)");
  const double scale = std::sqrt(2.0) / (std::sqrt(static_cast<double>(layer)) * sigma_b);
  // atan(+-inf) = +-pi/2, so infinite endpoints fall out naturally and the
  // whole-line integral is exactly (pi/2 + pi/2)/pi = 1.
  return (std::atan(scale * hi) - std::atan(scale * lo)) / kPi;
}

}  // namespace relu1d
