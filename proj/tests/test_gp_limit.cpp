#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "relu1d/gp_limit.hpp"
#include "relu1d/errors.hpp"

using namespace relu1d;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("variance closed form") {
  CHECK(variance(1, 0.0, 1.0) == 1.0);
  CHECK(variance(3, 1.0, 0.5) == doctest::Approx(2.75).epsilon(1e-15));
  CHECK(variance(2, -1.5, 1.0) == doctest::Approx(6.5).epsilon(1e-15));

  CHECK_THROWS_AS(variance(0, 0.0, 1.0), Error);
  CHECK_THROWS_AS(variance(1, 0.0, 0.0), Error);
  CHECK_THROWS_AS(variance(1, 0.0, -1.0), Error);
  try {
    variance(0, 0.0, 1.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_layer);
  }
  try {
    variance(1, 0.0, 0.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_sigma);
  }
}

TEST_CASE("arccos kernel special values") {
  // Perfect correlation: E[relu(Z)^2] = var/2 by symmetry of Z.
  CHECK(arccos_kernel(3.0, 3.0, 1.0) == doctest::Approx(1.5).epsilon(1e-15));
  // Independent: E[relu(Z1)] E[relu(Z2)] = sqrt(v1 v2) / (2 pi).
  CHECK(arccos_kernel(1.0, 4.0, 0.0) ==
        doctest::Approx(2.0 / (2.0 * kPi)).epsilon(1e-15));
  // Perfectly anti-correlated: the two relus never fire together.
  CHECK(arccos_kernel(1.0, 1.0, -1.0) == doctest::Approx(0.0).epsilon(1e-15));

  CHECK_THROWS_AS(arccos_kernel(0.0, 1.0, 0.5), Error);
  CHECK_THROWS_AS(arccos_kernel(1.0, -2.0, 0.5), Error);
  try {
    arccos_kernel(-1.0, 1.0, 0.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_variance);
  }
}

TEST_CASE("arccos kernel against direct Gaussian simulation") {
  // Independent estimator: sample correlated normals with the standard
  // library generator and average relu(Z1) relu(Z2).
  const double rho = 0.3;
  const double want = arccos_kernel(1.0, 1.0, rho);
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> normal(0.0, 1.0);
  const long n = 2'000'000;
  double sum = 0.0, sumsq = 0.0;
  for (long i = 0; i < n; ++i) {
    const double g1 = normal(gen);
    const double g2 = rho * g1 + std::sqrt(1.0 - rho * rho) * normal(gen);
    const double prod = std::max(g1, 0.0) * std::max(g2, 0.0);
    sum += prod;
    sumsq += prod * prod;
  }
  const double mean = sum / n;
  const double sample_var = (sumsq - n * mean * mean) / (n - 1.0);
  const double stderr_ = std::sqrt(sample_var / n);
  CHECK(std::abs(mean - want) <= 4.0 * stderr_);
}

TEST_CASE("correlation clamping tolerates only tiny overshoot") {
  CHECK(sign_change_prob(1.0 + 1e-13) == 0.0);
  CHECK(sign_change_prob(-1.0 - 1e-13) == 1.0);
  CHECK_THROWS_AS(sign_change_prob(1.0 + 1e-11), Error);
  CHECK_THROWS_AS(sign_change_prob(std::nan("")), Error);
  try {
    sign_change_prob(-1.5);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_correlation);
  }
}

TEST_CASE("sign change probability exact points") {
  CHECK(sign_change_prob(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sign_change_prob(1.0) == 0.0);
  CHECK(sign_change_prob(-1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sign_change_prob(0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("base pair state and one recursion step") {
  const auto s = GpPairState::base(0.0, 0.1, 1.0);
  CHECK(s.layer == 1);
  CHECK(s.var_u == 1.0);
  CHECK(s.var_v == doctest::Approx(1.02).epsilon(1e-15));
  CHECK(s.cov == 1.0);
  CHECK(s.rho == doctest::Approx(1.0 / std::sqrt(1.02)).epsilon(1e-15));

  // Equal points stay perfectly correlated and the variance recursion
  // reproduces the closed form layer by layer.
  auto eq = GpPairState::base(0.7, 0.7, 0.8);
  for (int l = 2; l <= 6; ++l) {
    eq = cov_step(eq, 0.8);
    CHECK(eq.layer == l);
    CHECK(eq.rho == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(eq.cov ==
          doctest::Approx(variance(l, 0.7, 0.8)).epsilon(1e-14));
  }

  // Base at the origin: C(1) = sigma^2 = 1, then C(2) = 1 + 2 * (1/2) = 2.
  const auto origin = cov_step(GpPairState::base(0.0, 0.0, 1.0), 1.0);
  CHECK(origin.cov == doctest::Approx(2.0).epsilon(1e-14));

  // Tampered state is rejected.
  auto bad = GpPairState::base(0.0, 0.1, 1.0);
  bad.var_u = 2.0;
  CHECK_THROWS_AS(cov_step(bad, 1.0), Error);
}

TEST_CASE("correlations stay in [-1, 1] across layers and inputs") {
  for (int layer : {1, 2, 3, 5, 8}) {
    for (double u : {-2.0, -0.3, 0.0, 0.4, 1.7}) {
      for (double v : {-1.1, 0.0, 0.2, 2.5}) {
        for (double sigma : {0.5, 1.0, 2.0}) {
          const auto s = rho_pair(layer, u, v, sigma);
          CHECK(s.rho >= -1.0);
          CHECK(s.rho <= 1.0);
          CHECK(s.theta >= 0.0);
          CHECK(s.theta <= kPi);
        }
      }
    }
  }
}

TEST_CASE("expansion coefficient closed form") {
  CHECK(expansion_coefficient(1, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(expansion_coefficient(2, 0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(expansion_coefficient(2, 1.0, 1.0) == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("quadratic correlation drop matches the expansion coefficient") {
  // (1 - rho_l(x, x+eps)) / eps^2 approaches A_l(x).
  const double eps = 0.01;
  const double drop = (1.0 - rho_pair(2, 0.0, eps, 1.0).rho) / (eps * eps);
  CHECK(drop == doctest::Approx(0.5).epsilon(0.05));

  for (int layer : {1, 2, 4}) {
    for (double x : {0.0, 0.5, 1.5}) {
      const double a = expansion_coefficient(layer, x, 1.0);
      const double d =
          (1.0 - rho_pair(layer, x, x + eps, 1.0).rho) / (eps * eps);
      CHECK(d == doctest::Approx(a).epsilon(0.05));
    }
  }
}

TEST_CASE("expansion error shrinks as the separation shrinks") {
  for (int layer : {1, 3}) {
    for (double x : {0.0, 1.0}) {
      const double a = expansion_coefficient(layer, x, 1.0);
      double prev = 1e300;
      for (double eps : {1e-1, 1e-2, 1e-3}) {
        const double d =
            (1.0 - rho_pair(layer, x, x + eps, 1.0).rho) / (eps * eps);
        const double err = std::abs(d - a) / a;
        CHECK(err < prev);
        prev = err;
      }
      CHECK(prev <= 0.01);
    }
  }
}

TEST_CASE("cubic remainder of the layer-1 correlation expansion") {
  // rho_1(x, x+eps) = 1 - A eps^2 + O(eps^3): the remainder must decay at
  // least cubically, i.e. with log-log slope about 3 per decade of eps.
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> xs(0.2, 2.0);
  std::uniform_real_distribution<double> sig(0.5, 2.0);
  for (int rep = 0; rep < 20; ++rep) {
    const double x = xs(gen);
    const double sigma = sig(gen);
    const double a = expansion_coefficient(1, x, sigma);
    auto residual = [&](double eps) {
      return std::abs(1.0 - a * eps * eps - rho_pair(1, x, x + eps, sigma).rho);
    };
    const double r2 = residual(1e-2);
    const double r3 = residual(1e-3);
    REQUIRE(r3 > 1e-14);  // above the double noise floor
    const double slope = std::log10(r2 / r3);
    CHECK(slope >= 2.7);
  }
}

TEST_CASE("linearized angle converges to the exact angle") {
  const int layer = 3;
  const double x = 0.5, sigma = 1.0;
  double prev = 1e300;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    const double exact = rho_pair(layer, x, x + eps, sigma).theta;
    const double lin = theta_linearized(layer, x, eps, sigma);
    const double err = std::abs(exact / lin - 1.0);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev <= 0.02);

  CHECK(theta_linearized(1, 0.0, 0.001, 1.0) ==
        doctest::Approx(std::sqrt(2.0) * 1e-3).epsilon(1e-15));
  CHECK(theta_linearized(1, 0.0, -0.001, 1.0) ==
        theta_linearized(1, 0.0, 0.001, 1.0));
}

TEST_CASE("crossing density closed form and symmetry") {
  CHECK(crossing_density(1, 0.0, 1.0) ==
        doctest::Approx(std::sqrt(2.0) / kPi).epsilon(1e-15));
  CHECK(crossing_density(2, 0.0, 1.0) == doctest::Approx(1.0 / kPi).epsilon(1e-15));
  CHECK(crossing_density(3, 0.0, 1.0) ==
        doctest::Approx(std::sqrt(6.0) / (3.0 * kPi)).epsilon(1e-15));
  for (double x : {0.3, 1.0, 2.7})
    CHECK(crossing_density(4, x, 0.7) == crossing_density(4, -x, 0.7));
}

TEST_CASE("expected crossings: closed form, additivity, whole line") {
  CHECK(expected_crossings(2, -3.0, 3.0, 1.0) ==
        doctest::Approx(2.0 * std::atan(3.0) / kPi).epsilon(1e-15));

  // Interval additivity holds to rounding.
  const double whole = expected_crossings(3, -2.0, 5.0, 0.8);
  const double split = expected_crossings(3, -2.0, 1.0, 0.8) +
                       expected_crossings(3, 1.0, 5.0, 0.8);
  CHECK(std::abs(whole - split) <= 1e-15);

  // The whole-line integral is exactly one crossing in expectation.
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(expected_crossings(1, -inf, inf, 1.0) == 1.0);
  CHECK(expected_crossings(7, -inf, inf, 0.3) == 1.0);

  CHECK_THROWS_AS(expected_crossings(1, 2.0, 2.0, 1.0), Error);
  CHECK_THROWS_AS(expected_crossings(1, 3.0, -3.0, 1.0), Error);
  CHECK_THROWS_AS(expected_crossings(1, std::nan(""), 1.0, 1.0), Error);
  try {
    expected_crossings(1, 1.0, 0.0, 1.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_interval);
  }
}

TEST_CASE("expected crossings integrate the density") {
  // Fundamental-theorem check at a point.
  const double h = 1e-6;
  const double fd = expected_crossings(3, 0.4, 0.4 + h, 1.2) / h;
  CHECK(fd == doctest::Approx(crossing_density(3, 0.4 + h / 2, 1.2)).epsilon(1e-6));

  // Trapezoid rule over a window agrees with the closed form.
  const int layer = 2;
  const double sigma = 0.9, lo = -3.0, hi = 3.0;
  const int n = 200'000;
  double acc = 0.0;
  double prev = crossing_density(layer, lo, sigma);
  for (int i = 1; i <= n; ++i) {
    const double x = lo + (hi - lo) * i / n;
    const double cur = crossing_density(layer, x, sigma);
    acc += 0.5 * (prev + cur) * (hi - lo) / n;
    prev = cur;
  }
  CHECK(acc == doctest::Approx(expected_crossings(layer, lo, hi, sigma))
                   .epsilon(1e-9));
}
