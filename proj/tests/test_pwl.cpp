#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "relu1d/pwl.hpp"

using relu1d::Error;
using relu1d::ErrorKind;
using relu1d::PwlFunction;

namespace {

PwlFunction hat() {
  // 0 outside [-1,1], rising to 1 at 0.
  return PwlFunction({-1.0, 0.0, 1.0}, {0.0, 1.0, -1.0, 0.0}, 0.0);
}

PwlFunction abs_fn() { return PwlFunction({0.0}, {-1.0, 1.0}, 0.0); }

// Random canonical piecewise-linear function with up to 6 knots.
PwlFunction random_pwl(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> nknots(0, 6);
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  std::normal_distribution<double> slope(0.0, 2.0);
  const int k = nknots(gen);
  std::vector<double> knots;
  while (static_cast<int>(knots.size()) < k) {
    const double x = coord(gen);
    bool dup = false;
    for (double e : knots) dup = dup || std::abs(e - x) < 1e-6;
    if (!dup) knots.push_back(x);
  }
  std::sort(knots.begin(), knots.end());
  std::vector<double> slopes(knots.size() + 1);
  for (auto& s : slopes) s = slope(gen);
  return PwlFunction(knots, slopes, coord(gen)).canonicalized();
}

bool same_representation(const PwlFunction& a, const PwlFunction& b) {
  return a.knots() == b.knots() && a.slopes() == b.slopes() &&
         a.anchor_x() == b.anchor_x() && a.anchor_y() == b.anchor_y();
}

}  // namespace

TEST_CASE("affine construction and evaluation") {
  const auto id = PwlFunction::affine(1.0, 0.0);
  CHECK(id.eval(0.0) == 0.0);
  CHECK(id.eval(3.5) == 3.5);
  CHECK(id.breakpoint_count() == 0);

  const auto c = PwlFunction::affine(0.0, -2.5);
  CHECK(c.eval(100.0) == -2.5);

  CHECK_THROWS_AS(PwlFunction::affine(std::nan(""), 0.0), Error);
  CHECK_THROWS_AS(PwlFunction::affine(1.0, INFINITY), Error);
}

TEST_CASE("construction validates shapes and ordering") {
  CHECK_THROWS_AS(PwlFunction({0.0}, {1.0}, 0.0), Error);          // slope count
  CHECK_THROWS_AS(PwlFunction({1.0, 1.0}, {0.0, 1.0, 2.0}, 0.0), Error);
  CHECK_THROWS_AS(PwlFunction({2.0, 1.0}, {0.0, 1.0, 2.0}, 0.0), Error);
  try {
    PwlFunction({2.0, 1.0}, {0.0, 1.0, 2.0}, 0.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invariant_error);
  }
}

TEST_CASE("evaluation reconstructs values from the anchor") {
  const auto h = hat();
  CHECK(h.eval(0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(h.eval(-0.25) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(h.eval(-3.0) == 0.0);
  CHECK(h.eval(7.0) == 0.0);
  CHECK(h.eval(0.0) == 1.0);  // knot value is exact
  CHECK_THROWS_AS(h.eval(std::nan("")), Error);
}

TEST_CASE("relu of identity") {
  const auto r = relu(PwlFunction::affine(1.0, 0.0));
  CHECK(r.eval(-2.0) == 0.0);
  CHECK(r.eval(3.0) == 3.0);
  REQUIRE(r.knots() == std::vector<double>{0.0});
  CHECK(r.slopes() == std::vector<double>{0.0, 1.0});
  CHECK(r.breakpoint_count() == 1);
}

TEST_CASE("relu of a general affine function places the kink at the root") {
  const auto r = relu(PwlFunction::affine(2.0, -1.0));
  REQUIRE(r.knots() == std::vector<double>{0.5});
  CHECK(r.slopes() == std::vector<double>{0.0, 2.0});
  CHECK(r.eval(1.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("relu of |x|-1 keeps two kinks and drops the interior one") {
  const auto f = PwlFunction({0.0}, {-1.0, 1.0}, -1.0);  // |x| - 1
  const auto r = relu(f);
  REQUIRE(r.knots() == std::vector<double>{-1.0, 1.0});
  CHECK(r.slopes() == std::vector<double>{-1.0, 0.0, 1.0});
  CHECK(r.breakpoint_count() == 2);
  CHECK(r.eval(0.0) == 0.0);
  CHECK(r.eval(-2.0) == 1.0);
  CHECK(r.eval(3.0) == 2.0);
}

TEST_CASE("relu of nonpositive and nonnegative functions") {
  CHECK(relu(PwlFunction::affine(0.0, -3.0)).eval(0.0) == 0.0);
  const auto z = relu(PwlFunction::affine(0.0, -3.0));
  CHECK(z.breakpoint_count() == 0);
  // Touching zero from above: relu is the identity on it.
  const auto touch = relu(hat());
  CHECK(same_representation(touch, hat()));
}

TEST_CASE("relu matches pointwise max(f, 0) on random functions") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> xdist(-8.0, 8.0);
  for (int rep = 0; rep < 200; ++rep) {
    const auto f = random_pwl(gen);
    const auto r = relu(f);
    CHECK(r.is_canonical());
    for (int s = 0; s < 50; ++s) {
      const double x = xdist(gen);
      const double want = std::max(f.eval(x), 0.0);
      const double got = r.eval(x);
      CHECK(got == doctest::Approx(want).epsilon(1e-12));
      CHECK(got >= 0.0);
    }
  }
}

TEST_CASE("relu is idempotent with identical representation") {
  std::mt19937_64 gen(11);
  for (int rep = 0; rep < 100; ++rep) {
    const auto r = relu(random_pwl(gen));
    CHECK(same_representation(relu(r), r));
  }
}

TEST_CASE("linear_combine basic identities") {
  const auto g = hat();
  const std::vector<PwlFunction> gg{g, g};

  SUBCASE("exact cancellation collapses to the zero function") {
    const std::vector<double> coeffs{1.0, -1.0};
    const auto z = linear_combine(coeffs, gg, 0.0);
    CHECK(z.knots().empty());
    CHECK(z.eval(0.3) == 0.0);
    CHECK(z.breakpoint_count() == 0);
  }

  SUBCASE("shifting relu(x) by a constant") {
    const std::vector<double> coeffs{1.0};
    const std::vector<PwlFunction> fs{relu(PwlFunction::affine(1.0, 0.0))};
    const auto f = linear_combine(coeffs, fs, 1.0);
    REQUIRE(f.knots() == std::vector<double>{0.0});
    CHECK(f.eval(-5.0) == 1.0);
    CHECK(f.eval(2.0) == 3.0);
  }

  SUBCASE("relu(x) + relu(-x) builds |x|") {
    const std::vector<double> coeffs{1.0, 1.0};
    const std::vector<PwlFunction> fs{relu(PwlFunction::affine(1.0, 0.0)),
                                      relu(PwlFunction::affine(-1.0, 0.0))};
    const auto a = linear_combine(coeffs, fs, 0.0);
    REQUIRE(a.knots() == std::vector<double>{0.0});
    CHECK(a.slopes() == std::vector<double>{-1.0, 1.0});
  }

  SUBCASE("empty input is rejected") {
    const std::vector<double> none;
    const std::vector<PwlFunction> fs;
    CHECK_THROWS_AS(linear_combine(none, fs, 0.0), Error);
  }
}

TEST_CASE("linear_combine is pointwise linear on random inputs") {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> xdist(-8.0, 8.0);
  std::normal_distribution<double> cdist(0.0, 3.0);
  for (int rep = 0; rep < 200; ++rep) {
    const std::vector<PwlFunction> fs{random_pwl(gen), random_pwl(gen),
                                      random_pwl(gen)};
    const std::vector<double> coeffs{cdist(gen), cdist(gen), cdist(gen)};
    const double constant = cdist(gen);
    const auto combo = linear_combine(coeffs, fs, constant);
    CHECK(combo.is_canonical());

    std::size_t total = 0;
    for (const auto& f : fs) total += f.breakpoint_count();
    CHECK(combo.breakpoint_count() <= total);

    for (int s = 0; s < 40; ++s) {
      const double x = xdist(gen);
      double want = constant;
      for (std::size_t i = 0; i < fs.size(); ++i)
        want += coeffs[i] * fs[i].eval(x);
      const double scale = 1.0 + std::abs(want);
      CHECK(std::abs(combo.eval(x) - want) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("canonicalization drops collinear knots without changing values") {
  // Three knots, middle one collinear.
  const PwlFunction raw({-1.0, 0.0, 1.0}, {2.0, 1.0, 1.0, -0.5}, 0.0);
  CHECK_FALSE(raw.is_canonical());
  CHECK_THROWS_AS(raw.breakpoint_count(), Error);

  const auto canon = raw.canonicalized();
  CHECK(canon.is_canonical());
  CHECK(canon.knots() == std::vector<double>{-1.0, 1.0});
  for (double x : {-3.0, -1.0, -0.5, 0.0, 0.7, 1.0, 4.2}) {
    const double scale = 1.0 + std::abs(raw.eval(x));
    CHECK(std::abs(canon.eval(x) - raw.eval(x)) <= 1e-12 * scale);
  }

  // All pieces collinear: collapses to an affine function.
  const PwlFunction flat({0.0, 1.0}, {3.0, 3.0, 3.0}, 5.0);
  const auto affine = flat.canonicalized();
  CHECK(affine.knots().empty());
  CHECK(affine.eval(2.0) == doctest::Approx(flat.eval(2.0)).epsilon(1e-15));
}

TEST_CASE("slope tolerance knob merges nearly collinear pieces") {
  const PwlFunction raw({0.0}, {1.0, 1.0 + 1e-9}, 0.0);
  CHECK(raw.is_canonical());            // exact comparison keeps the knot
  CHECK_FALSE(raw.is_canonical(1e-6));  // relative tolerance merges it
  CHECK(raw.canonicalized(1e-6).knots().empty());
}

TEST_CASE("sup_norm_diff exact values") {
  const auto a = abs_fn();
  CHECK(sup_norm_diff(a, a, -2.0, 2.0) == 0.0);
  CHECK(sup_norm_diff(a, PwlFunction::affine(0.0, 0.5), -1.0, 1.0) ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sup_norm_diff(PwlFunction::affine(1.0, 0.0),
                      PwlFunction::affine(0.0, 0.0), 0.0, 2.0) ==
        doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(sup_norm_diff(a, a, 1.0, 1.0), Error);
  CHECK_THROWS_AS(sup_norm_diff(a, a, 2.0, -2.0), Error);
  try {
    sup_norm_diff(a, a, 2.0, -2.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_interval);
  }
}

TEST_CASE("sup_norm_diff agrees with a dense scan on random pairs") {
  std::mt19937_64 gen(41);
  for (int rep = 0; rep < 100; ++rep) {
    const auto f = random_pwl(gen);
    const auto g = random_pwl(gen);
    const double lo = -6.0, hi = 6.0;
    const double sup = sup_norm_diff(f, g, lo, hi);

    double dense = 0.0;
    double lip = 0.0;
    for (double s : f.slopes()) lip = std::max(lip, std::abs(s));
    for (double s : g.slopes()) lip += 0.0;  // bound below uses both
    double lip_g = 0.0;
    for (double s : g.slopes()) lip_g = std::max(lip_g, std::abs(s));
    lip += lip_g;
    const int n = 4000;
    for (int i = 0; i <= n; ++i) {
      const double x = lo + (hi - lo) * i / n;
      dense = std::max(dense, std::abs(f.eval(x) - g.eval(x)));
    }
    const double step = (hi - lo) / n;
    CHECK(dense <= sup + 1e-12);
    CHECK(sup <= dense + lip * step + 1e-12);
  }
}

TEST_CASE("count_sign_changes strict-crossing semantics") {
  CHECK(count_sign_changes(PwlFunction::affine(1.0, 0.0), -1.0, 1.0) == 1);
  CHECK(count_sign_changes(abs_fn(), -1.0, 1.0) == 0);  // touch, no crossing

  // hat - 0.5 crosses twice on [-2, 2].
  const std::vector<double> ones{1.0};
  const std::vector<PwlFunction> hs{hat()};
  const auto shifted = linear_combine(ones, hs, -0.5);
  CHECK(count_sign_changes(shifted, -2.0, 2.0) == 2);

  // Crossing outside the window is not counted.
  CHECK(count_sign_changes(PwlFunction::affine(1.0, 0.0), 1.0, 2.0) == 0);
  CHECK_THROWS_AS(count_sign_changes(abs_fn(), 1.0, -1.0), Error);
}

TEST_CASE("zero plateaus count once when flanking signs differ") {
  // Comes up from below, flat at zero on [0,1], then rises: one crossing.
  const PwlFunction updown({0.0, 1.0}, {1.0, 0.0, 1.0}, 0.0);
  CHECK(count_sign_changes(updown, -1.0, 2.0) == 1);

  // Dips to zero, stays flat, then falls back: same flanking sign, none.
  const PwlFunction vee({0.0, 1.0}, {-1.0, 0.0, 1.0}, 0.0);
  CHECK(count_sign_changes(vee, -1.0, 2.0) == 0);
}

TEST_CASE("breakpoint_count examples") {
  CHECK(PwlFunction::affine(2.0, 1.0).breakpoint_count() == 0);
  CHECK(relu(PwlFunction::affine(1.0, 0.0)).breakpoint_count() == 1);
  const auto m = relu(PwlFunction({0.0}, {-1.0, 1.0}, -1.0));  // max(|x|-1, 0)
  CHECK(m.breakpoint_count() == 2);
}

TEST_CASE("knots remain strictly increasing through all operations") {
  std::mt19937_64 gen(59);
  std::normal_distribution<double> cdist(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const std::vector<PwlFunction> fs{relu(random_pwl(gen)),
                                      relu(random_pwl(gen))};
    const std::vector<double> coeffs{cdist(gen), cdist(gen)};
    const auto combo = relu(linear_combine(coeffs, fs, cdist(gen)));
    for (std::size_t i = 1; i < combo.knots().size(); ++i)
      REQUIRE(combo.knots()[i - 1] < combo.knots()[i]);
  }
}

TEST_CASE("JSON round trip preserves the representation exactly") {
  std::mt19937_64 gen(67);
  for (int rep = 0; rep < 50; ++rep) {
    const auto f = random_pwl(gen);
    const auto j = relu1d::pwl_to_json(f);
    const auto back = relu1d::pwl_from_json(j);
    CHECK(same_representation(f, back));
  }

  const auto j = relu1d::pwl_to_json(hat());
  CHECK(j.at("anchor").at(0).get<double>() == -1.0);
  CHECK_THROWS_AS(relu1d::pwl_from_json(nlohmann::json::array()), Error);
  auto bad = j;
  bad["anchor"][0] = 0.5;  // anchor x must match the first knot
  CHECK_THROWS_AS(relu1d::pwl_from_json(bad), Error);
}
