#include "relu1d/pwl.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace relu1d {

namespace {

bool slopes_equal(double a, double b, double tau) {
  if (a == b) return true;
  return std::abs(a - b) <= tau * std::max(std::abs(a), std::abs(b));
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

PwlFunction::PwlFunction() : slopes_{0.0} {}

PwlFunction::PwlFunction(std::vector<double> knots, std::vector<double> slopes,
                         double anchor_value)
    : knots_(std::move(knots)),
      slopes_(std::move(slopes)),
      anchor_y_(anchor_value) {
  validate();
  knot_values_.resize(knots_.size());
  if (!knots_.empty()) {
    knot_values_[0] = anchor_y_;
    for (std::size_t i = 1; i < knots_.size(); ++i)
      knot_values_[i] =
          knot_values_[i - 1] + slopes_[i] * (knots_[i] - knots_[i - 1]);
  }
}

PwlFunction::PwlFunction(std::vector<double> knots, std::vector<double> slopes,
                         std::vector<double> values)
    : knots_(std::move(knots)),
      slopes_(std::move(slopes)),
      knot_values_(std::move(values)) {
  if (knot_values_.size() != knots_.size() || knots_.empty())
    raise(ErrorKind::internal_error, "trusted construction needs one value per knot");
  for (double v : knot_values_)
    if (!std::isfinite(v))
      raise(ErrorKind::invalid_value, "knot values must be finite");
  anchor_y_ = knot_values_.front();
  validate();
}

void PwlFunction::validate() {
  if (slopes_.size() != knots_.size() + 1)
    raise(ErrorKind::shape_error,
          "need exactly one slope per piece (knots+1 slopes)");
  for (double k : knots_)
    if (!std::isfinite(k))
      raise(ErrorKind::invalid_value, "knot coordinates must be finite");
  for (double s : slopes_)
    if (!std::isfinite(s))
      raise(ErrorKind::invalid_value, "slopes must be finite");
  if (!std::isfinite(anchor_y_))
    raise(ErrorKind::invalid_value, "anchor value must be finite");
  for (std::size_t i = 1; i < knots_.size(); ++i)
    if (!(knots_[i - 1] < knots_[i]))
      raise(ErrorKind::invariant_error, "knots must be strictly increasing");
  anchor_x_ = knots_.empty() ? 0.0 : knots_.front();
}

PwlFunction PwlFunction::affine(double slope, double intercept) {
  return PwlFunction({}, {slope}, intercept);
}

double PwlFunction::eval(double x) const {
  if (!std::isfinite(x))
    raise(ErrorKind::invalid_value, "eval requires a finite point");
  if (knots_.empty()) return anchor_y_ + slopes_[0] * (x - anchor_x_);
  // j = index of the slope governing x; piece j lies left of knots_[j].
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - knots_.begin());
  if (j == 0) return knot_values_[0] + slopes_[0] * (x - knots_[0]);
  return knot_values_[j - 1] + slopes_[j] * (x - knots_[j - 1]);
}

bool PwlFunction::is_canonical(double tau_slope) const {
  for (std::size_t i = 0; i + 1 < slopes_.size(); ++i)
    if (slopes_equal(slopes_[i], slopes_[i + 1], tau_slope)) return false;
  return true;
}

PwlFunction PwlFunction::canonicalized(double tau_slope) const {
  if (is_canonical(tau_slope)) return *this;
  std::vector<double> new_knots, new_slopes, new_values;
  new_slopes.push_back(slopes_[0]);
  double run_slope = slopes_[0];  // representative of the current slope run
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (slopes_equal(run_slope, slopes_[i + 1], tau_slope)) continue;
    run_slope = slopes_[i + 1];
    new_knots.push_back(knots_[i]);
    new_slopes.push_back(run_slope);
    new_values.push_back(knot_values_[i]);  // kept knots keep exact values
  }
  if (new_knots.empty()) return PwlFunction({}, {slopes_[0]}, eval(0.0));
  return PwlFunction(std::move(new_knots), std::move(new_slopes),
                     std::move(new_values));
}

std::size_t PwlFunction::breakpoint_count() const {
  if (!is_canonical())
    raise(ErrorKind::invariant_error,
          "breakpoint_count requires canonical form; canonicalize first");
  return knots_.size();
}

PwlFunction linear_combine(std::span<const double> coeffs,
                           std::span<const PwlFunction> fs, double constant) {
  if (coeffs.empty() || coeffs.size() != fs.size())
    raise(ErrorKind::shape_error,
          "coefficients and functions must have the same nonzero length");
  if (!std::isfinite(constant))
    raise(ErrorKind::invalid_value, "constant must be finite");
  for (double c : coeffs)
    if (!std::isfinite(c))
      raise(ErrorKind::invalid_value, "coefficients must be finite");

  // Slope-change events: walking left to right, the combined slope changes by
  // c_i * (slope jump of f_i) at each knot of f_i.
  std::size_t total = 0;
  for (const auto& f : fs) total += f.knots().size();
  std::vector<std::pair<double, double>> events;
  events.reserve(total);
  double base_slope = 0.0;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const auto& ks = fs[i].knots();
    const auto& ss = fs[i].slopes();
    base_slope += coeffs[i] * ss[0];
    for (std::size_t j = 0; j < ks.size(); ++j)
      events.emplace_back(ks[j], coeffs[i] * (ss[j + 1] - ss[j]));
  }
  std::sort(events.begin(), events.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<double> knots, slopes;
  knots.reserve(events.size());
  slopes.reserve(events.size() + 1);
  slopes.push_back(base_slope);
  std::size_t i = 0;
  while (i < events.size()) {
    const double x = events[i].first;
    double jump = 0.0;
    for (; i < events.size() && events[i].first == x; ++i)
      jump += events[i].second;  // coincident knots merge exactly
    knots.push_back(x);
    slopes.push_back(slopes.back() + jump);
  }

  const double x0 = knots.empty() ? 0.0 : knots.front();
  double y0 = constant;
  for (std::size_t k = 0; k < fs.size(); ++k)
    y0 += coeffs[k] * fs[k].eval(x0);
  return PwlFunction(std::move(knots), std::move(slopes), y0)
      .canonicalized();
}

PwlFunction relu(const PwlFunction& f) {
  const auto& ks = f.knots();
  const auto& ss = f.slopes();

  if (ks.empty()) {
    const double m = ss[0];
    const double y = f.anchor_y();
    if (m == 0.0) return PwlFunction::affine(0.0, std::max(y, 0.0));
    // Affine with nonzero slope always crosses zero exactly once.
    const double star = f.anchor_x() - y / m;
    std::vector<double> slopes =
        m > 0.0 ? std::vector<double>{0.0, m} : std::vector<double>{m, 0.0};
    return PwlFunction({star}, std::move(slopes), 0.0);
  }

  // Event points: original knots plus strict interior zero crossings.
  // Inserted crossings carry the exact value 0 and remember the slope of the
  // original piece continuing to their right.
  struct Event {
    double x, v, right_slope;
  };
  std::vector<Event> pts;
  pts.reserve(ks.size() + 2);

  const double v_first = f.knot_value(0);
  if (ss[0] != 0.0 && v_first * ss[0] > 0.0) {
    const double star = ks[0] - v_first / ss[0];
    if (star < ks[0]) pts.push_back({star, 0.0, ss[0]});
  }
  for (std::size_t i = 0; i < ks.size(); ++i) {
    pts.push_back({ks[i], f.knot_value(i), ss[i + 1]});
    if (i + 1 < ks.size()) {
      const double vl = f.knot_value(i), vr = f.knot_value(i + 1);
      if (vl * vr < 0.0) {
        const double star = ks[i] + (ks[i + 1] - ks[i]) * (vl / (vl - vr));
        if (ks[i] < star && star < ks[i + 1])
          pts.push_back({star, 0.0, ss[i + 1]});
      }
    }
  }
  const double v_last = f.knot_value(ks.size() - 1);
  const double m_last = ss.back();
  if (m_last != 0.0 && v_last * m_last < 0.0) {
    const double star = ks.back() - v_last / m_last;
    if (star > ks.back()) pts.push_back({star, 0.0, m_last});
  }
  // Events were emitted in left-to-right order already; keep it defensive.
  std::sort(pts.begin(), pts.end(),
            [](const Event& a, const Event& b) { return a.x < b.x; });

  // Between adjacent event points f is affine with no strict crossing inside,
  // so one positive endpoint means the whole open piece is positive.
  const std::size_t n = pts.size();
  std::vector<double> knots(n), slopes(n + 1), values(n);
  for (std::size_t i = 0; i < n; ++i) {
    knots[i] = pts[i].x;
    values[i] = std::max(pts[i].v, 0.0);
  }

  const bool left_pos = pts[0].v > 0.0 || (pts[0].v == 0.0 && ss[0] < 0.0);
  slopes[0] = left_pos ? ss[0] : 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const bool pos = pts[i].v > 0.0 || pts[i + 1].v > 0.0;
    slopes[i + 1] = pos ? pts[i].right_slope : 0.0;
  }
  const bool right_pos =
      pts[n - 1].v > 0.0 || (pts[n - 1].v == 0.0 && m_last > 0.0);
  slopes[n] = right_pos ? pts[n - 1].right_slope : 0.0;

  return PwlFunction(std::move(knots), std::move(slopes), std::move(values))
      .canonicalized();
}

double sup_norm_diff(const PwlFunction& f, const PwlFunction& g, double lo,
                     double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
    raise(ErrorKind::invalid_interval, "need finite lo < hi");
  double best = std::max(std::abs(f.eval(lo) - g.eval(lo)),
                         std::abs(f.eval(hi) - g.eval(hi)));
  auto scan = [&](const std::vector<double>& ks) {
    for (double x : ks) {
      if (x <= lo || x >= hi) continue;
      best = std::max(best, std::abs(f.eval(x) - g.eval(x)));
    }
  };
  scan(f.knots());
  scan(g.knots());
  return best;
}

std::size_t count_sign_changes(const PwlFunction& f, double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
    raise(ErrorKind::invalid_interval, "need finite lo < hi");
  // f is affine between consecutive sample points (endpoints plus interior
  // knots), so tracking the last nonzero sign counts each strict crossing
  // once and collapses zero plateaus to the flanking-sign rule.
  std::size_t count = 0;
  int last = 0;
  auto feed = [&](double v) {
    const int s = sign_of(v);
    if (s == 0) return;
    if (last != 0 && s != last) ++count;
    last = s;
  };
  feed(f.eval(lo));
  for (double x : f.knots())
    if (lo < x && x < hi) feed(f.eval(x));
  feed(f.eval(hi));
  return count;
}

nlohmann::json pwl_to_json(const PwlFunction& f) {
  return nlohmann::json{{"knots", f.knots()},
                        {"slopes", f.slopes()},
                        {"anchor", {f.anchor_x(), f.anchor_y()}}};
}

PwlFunction pwl_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("knots") || !j.contains("slopes") ||
      !j.contains("anchor"))
    raise(ErrorKind::invalid_value,
          "expected object with knots, slopes, anchor");
  auto knots = j.at("knots").get<std::vector<double>>();
  auto slopes = j.at("slopes").get<std::vector<double>>();
  auto anchor = j.at("anchor").get<std::vector<double>>();
  if (anchor.size() != 2)
    raise(ErrorKind::invalid_value, "anchor must be [x0, y0]");
  PwlFunction f(std::move(knots), std::move(slopes), anchor[1]);
  if (anchor[0] != f.anchor_x())
    raise(ErrorKind::invalid_value,
          "anchor x must equal the first knot (or 0 when affine)");
  return f;
}

}  // namespace relu1d
