#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "relu1d/pwl.hpp"

namespace relu1d {

// A target function known through samples on a finite grid: strictly
// increasing x including both domain endpoints. Approximation quality is
// measured on this grid, so all derived quantities are grid-relative: they
// agree with the continuum versions up to the grid resolution.
struct TargetFunction {
  double domain_lo = 0.0, domain_hi = 0.0;
  std::vector<double> xs, ys;

  TargetFunction(double lo, double hi, std::vector<double> xs_in,
                 std::vector<double> ys_in);

  static TargetFunction from_samples(std::vector<double> xs,
                                     std::vector<double> ys);
  // family: "abs", "quadratic", or "sine", sampled on a uniform grid of
  // `points` nodes over [lo, hi].
  static TargetFunction builtin(std::string_view family, double lo, double hi,
                                int points);
  // CSV with columns x,y; an optional "x,y" header row is skipped.
  static TargetFunction from_csv(std::istream& in);

  std::size_t size() const noexcept { return xs.size(); }
  // Piecewise-linear interpolant through the samples (end pieces extended).
  PwlFunction interpolant() const;
};

// Feasibility in min_linear_complexity is decided against eps0 widened by
// this guard, relative to the data scale (1 + max|y| + eps0). Fits that sit
// exactly on the tolerance boundary in real arithmetic are common (alternating
// max-error chains on symmetric targets) and land O(1 ulp) off it in doubles;
// the guard is far above rounding noise and far below any meaningful
// tolerance, so such fits resolve the way the real-arithmetic problem does.
inline constexpr double kComplexityToleranceGuard = 1e-9;

// Minimum piece count of a continuous piecewise-linear function matching the
// samples within eps0 at every grid point, pieces joining at grid points
// (boundary fits honored per kComplexityToleranceGuard).
// Exact: a breadth-first search over piece count propagates, for every
// candidate joint, the interval of values the function may take there.
// (Greedy farthest-reach extension is not optimal for this problem: stopping
// a piece short at a different joint can let the next piece reach farther.)
int min_linear_complexity(const TargetFunction& target, double eps0);

// expected_regions / l_min.
double region_inefficiency(double expected_regions, int l_min);

// Where the expected-regions figure came from, echoed into reports.
enum class RegionsSource { theorem, montecarlo, provided };

const char* regions_source_name(RegionsSource source);

struct SparsityReport {
  double eps0 = 0.0;
  double alpha = 1.0;  // error allowance factor, at least 1
  double c = 0.0;      // inefficiency threshold
  int l_min = 0;
  double expected_regions = 0.0;
  RegionsSource regions_source = RegionsSource::provided;
  double eta_region = 0.0;
  double sup_error = 0.0;
  bool approximating = false;    // sup_error <= alpha * eps0
  bool region_efficient = false; // eta_region <= c
};

// Evaluate the region-adaptive sparsity predicate for a candidate function
// phi against the target: phi must approximate within alpha*eps0 in sup norm
// over the domain, and its expected region count must stay within a factor c
// of the minimal piece count at tolerance eps0.
SparsityReport check_region_adaptive_sparsity(const PwlFunction& phi,
                                              const TargetFunction& target,
                                              double eps0, double alpha,
                                              double c, double expected_regions,
                                              RegionsSource source);

nlohmann::json report_to_json(const SparsityReport& report);

}  // namespace relu1d
