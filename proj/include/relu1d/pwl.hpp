#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "json.hpp"
#include "relu1d/errors.hpp"

namespace relu1d {

// A continuous piecewise-linear function on the whole real line, stored as
// strictly increasing breakpoint coordinates, one slope per maximal piece
// (one more slope than knots), and the function value at the first knot.
// Values at the remaining knots are cached; continuity holds by construction:
// there is no way to represent a jump. Operations that know their knot values
// exactly (relu pins zeros at crossings) seed the cache directly instead of
// accumulating slope*gap from the anchor, so clamped pieces evaluate to an
// exact 0.0 rather than picking up rounding noise.
//
// Canonical form means adjacent slopes differ; all operations in this module
// return canonical results. Non-canonical instances can be built directly and
// are valid transient values, but breakpoint_count() rejects them.
class PwlFunction {
public:
  // The zero function.
  PwlFunction();

  // knots: strictly increasing (may be empty); slopes: one per piece,
  // left-to-right, size knots.size()+1; anchor_value: f(knots[0]), or f(0)
  // when there are no knots.
  PwlFunction(std::vector<double> knots, std::vector<double> slopes,
              double anchor_value);

  static PwlFunction affine(double slope, double intercept);

  double eval(double x) const;
  double operator()(double x) const { return eval(x); }

  const std::vector<double>& knots() const noexcept { return knots_; }
  const std::vector<double>& slopes() const noexcept { return slopes_; }
  double knot_value(std::size_t i) const { return knot_values_.at(i); }

  // Anchor point (x0, y0): x0 is the first knot, or 0 for affine functions.
  double anchor_x() const noexcept { return anchor_x_; }
  double anchor_y() const noexcept { return anchor_y_; }

  // Slopes within tau of each other (relative) are treated as equal; the
  // default demands exact equality.
  bool is_canonical(double tau_slope = 0.0) const;
  PwlFunction canonicalized(double tau_slope = 0.0) const;

  // Number of knots in canonical form. Throws invariant_error when called on
  // a non-canonical instance, because the count would overstate the true
  // number of slope changes.
  std::size_t breakpoint_count() const;

private:
  // Trusted path for operations that computed the knot values themselves;
  // bypasses the anchor accumulation. Requires at least one knot.
  PwlFunction(std::vector<double> knots, std::vector<double> slopes,
              std::vector<double> values);

  std::vector<double> knots_;
  std::vector<double> slopes_;
  std::vector<double> knot_values_;  // exact values at the knots
  double anchor_x_ = 0.0;
  double anchor_y_ = 0.0;

  void validate();

  friend PwlFunction relu(const PwlFunction& f);
};

// sum_i coeffs[i] * fs[i] + constant, knot set the union of the input knot
// sets, canonicalized. Exact in the sense that slopes and knot coordinates
// are combined directly (no resampling).
PwlFunction linear_combine(std::span<const double> coeffs,
                           std::span<const PwlFunction> fs, double constant);

// max(f, 0): inserts a knot at every strict sign crossing, flattens the
// negative pieces, canonicalizes. Idempotent.
PwlFunction relu(const PwlFunction& f);

// Exact sup norm of f - g over [lo, hi]; the difference is affine between
// merged knots, so scanning knots and endpoints is exact.
double sup_norm_diff(const PwlFunction& f, const PwlFunction& g, double lo,
                     double hi);

// Number of strict sign changes of f on (lo, hi). A zero plateau counts as
// one crossing when the flanking signs differ, zero otherwise; touching zero
// without changing sign does not count.
std::size_t count_sign_changes(const PwlFunction& f, double lo, double hi);

// JSON round-trip: {"knots": [...], "slopes": [...], "anchor": [x0, y0]}.
nlohmann::json pwl_to_json(const PwlFunction& f);
PwlFunction pwl_from_json(const nlohmann::json& j);

}  // namespace relu1d
