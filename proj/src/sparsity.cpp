#include "relu1d/sparsity.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <sstream>
#include <utility>

namespace relu1d {

TargetFunction::TargetFunction(double lo, double hi, std::vector<double> xs_in,
                               std::vector<double> ys_in)
    : domain_lo(lo), domain_hi(hi), xs(std::move(xs_in)), ys(std::move(ys_in)) {
  if (xs.size() != ys.size())
    raise(ErrorKind::shape_error, "xs and ys must have the same length");
  if (xs.size() < 2)
    raise(ErrorKind::insufficient_samples, "need at least two samples");
  for (double x : xs)
    if (!std::isfinite(x))
      raise(ErrorKind::invalid_value, "sample x must be finite");
  for (double y : ys)
    if (!std::isfinite(y))
      raise(ErrorKind::invalid_value, "sample y must be finite");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i - 1] < xs[i]))
      raise(ErrorKind::invariant_error, "sample x must be strictly increasing");
  if (!(domain_lo < domain_hi) || xs.front() != domain_lo ||
      xs.back() != domain_hi)
    raise(ErrorKind::domain_error,
          "samples must span the declared domain endpoints");
}

TargetFunction TargetFunction::from_samples(std::vector<double> xs,
                                            std::vector<double> ys) {
  if (xs.size() < 2)
    raise(ErrorKind::insufficient_samples, "need at least two samples");
  const double lo = xs.front(), hi = xs.back();
  return TargetFunction(lo, hi, std::move(xs), std::move(ys));
}

TargetFunction TargetFunction::builtin(std::string_view family, double lo,
                                       double hi, int points) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    raise(ErrorKind::invalid_interval, "need finite lo < hi");
  if (points < 2)
    raise(ErrorKind::insufficient_samples, "need at least two grid points");
  double (*f)(double) = nullptr;
  if (family == "abs")
    f = [](double x) { return std::abs(x); };
  else if (family == "quadratic")
    f = [](double x) { return x * x; };
  else if (family == "sine")
    f = [](double x) { return std::sin(x); };
  else
    raise(ErrorKind::invalid_value,
          "unknown target family '" + std::string(family) +
              "' (expected abs, quadratic, or sine)");
  std::vector<double> xs(static_cast<std::size_t>(points));
  std::vector<double> ys(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(points - 1);
    double x = lo + t * (hi - lo);
    if (i == points - 1) x = hi;  // land exactly on the endpoint
    xs[static_cast<std::size_t>(i)] = x;
    ys[static_cast<std::size_t>(i)] = f(x);
  }
  return TargetFunction(lo, hi, std::move(xs), std::move(ys));
}

TargetFunction TargetFunction::from_csv(std::istream& in) {
  std::vector<double> xs, ys;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      // Tolerate a header row.
      if (line.find_first_not_of("xy, \t\r") == std::string::npos) continue;
    }
    std::istringstream row(line);
    std::string a, b;
    if (!std::getline(row, a, ',') || !std::getline(row, b))
      raise(ErrorKind::invalid_value, "CSV rows must be 'x,y'");
    try {
      xs.push_back(std::stod(a));
      ys.push_back(std::stod(b));
    } catch (const std::exception&) {
      raise(ErrorKind::invalid_value, "CSV cell is not a number: " + line);
    }
  }
  return from_samples(std::move(xs), std::move(ys));
}

PwlFunction TargetFunction::interpolant() const {
  const std::size_t m = xs.size();
  std::vector<double> slopes(m + 1);
  for (std::size_t i = 0; i + 1 < m; ++i)
    slopes[i + 1] = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
  slopes[0] = slopes[1];
  slopes[m] = slopes[m - 1];
  return PwlFunction(xs, std::move(slopes), ys[0]).canonicalized();
}

namespace {

// Convex feasible set of (entry value v, slope s) pairs for the piece being
// grown, maintained as a polygon under halfplane clipping. Clipping is plain
// double arithmetic with inclusive boundaries; no iterative tolerances.
struct Polygon {
  struct Pt {
    double v, s;
  };
  std::vector<Pt> pts;

  bool empty() const noexcept { return pts.empty(); }

  // Keep the side a*v + b*s <= c.
  void clip(double a, double b, double c) {
    if (pts.empty()) return;
    std::vector<Pt> out;
    out.reserve(pts.size() + 1);
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Pt& p = pts[i];
      const Pt& q = pts[(i + 1) % n];
      const double dp = a * p.v + b * p.s - c;
      const double dq = a * q.v + b * q.s - c;
      if (dp <= 0.0) out.push_back(p);
      if ((dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0)) {
        const double t = dp / (dp - dq);
        out.push_back({p.v + t * (q.v - p.v), p.s + t * (q.s - p.s)});
      }
    }
    pts = std::move(out);
  }

  // Range of a linear functional a*v + b*s over the polygon.
  std::pair<double, double> range(double a, double b) const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const Pt& p : pts) {
      const double val = a * p.v + b * p.s;
      lo = std::min(lo, val);
      hi = std::max(hi, val);
    }
    return {lo, hi};
  }
};

}  // namespace

namespace {

struct Interval {
  double lo, hi;  // closed; lo <= hi
};

// Union maintenance for achievable joint values: sorted, disjoint (touching
// intervals are coalesced).
void add_interval(std::vector<Interval>& set, Interval in) {
  std::vector<Interval> out;
  out.reserve(set.size() + 1);
  for (const Interval& s : set) {
    if (s.hi < in.lo || in.hi < s.lo) {
      out.push_back(s);
    } else {
      in.lo = std::min(in.lo, s.lo);
      in.hi = std::max(in.hi, s.hi);
    }
  }
  out.push_back(in);
  std::sort(out.begin(), out.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  set = std::move(out);
}

// Closed-set difference in \ covered, used to skip value ranges that an
// earlier (hence no worse) search level already explored from this joint.
std::vector<Interval> subtract(Interval in, const std::vector<Interval>& covered) {
  std::vector<Interval> out{in};
  for (const Interval& c : covered) {
    std::vector<Interval> next;
    for (const Interval& p : out) {
      if (c.hi < p.lo || p.hi < c.lo) {
        next.push_back(p);
        continue;
      }
      if (c.lo > p.lo) next.push_back({p.lo, std::min(p.hi, c.lo)});
      if (c.hi < p.hi) next.push_back({std::max(p.lo, c.hi), p.hi});
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace

int min_linear_complexity(const TargetFunction& target, double eps0) {
  if (!(eps0 > 0.0) || !std::isfinite(eps0))
    raise(ErrorKind::invalid_tolerance, "eps0 must be strictly positive");
  const std::size_t m = target.size();
  const auto& xs = target.xs;
  const auto& ys = target.ys;

  // Closed-inequality feasibility on FP-rounded samples: widen the band by
  // the documented guard so boundary-tight fits survive rounding (see
  // kComplexityToleranceGuard).
  double y_scale = 0.0;
  for (double y : ys) y_scale = std::max(y_scale, std::abs(y));
  const double eps = eps0 + kComplexityToleranceGuard * (1.0 + y_scale + eps0);

  // Any piece touching two grid points within the band has slope bounded by
  // the sample spread over the smallest gap; the initial box uses that bound
  // so clipping never discards a feasible pair.
  const auto [ymin_it, ymax_it] = std::minmax_element(ys.begin(), ys.end());
  const double spread = (*ymax_it - *ymin_it) + 2.0 * eps;
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < m; ++i) min_gap = std::min(min_gap, xs[i] - xs[i - 1]);
  const double slope_bound = spread / min_gap + 1.0;

  // Breadth-first search over piece count. A state is (joint index, interval
  // of values the function may take there); one search level grows every
  // state by one piece, sweeping it right and recording the exact interval of
  // exit values at every grid point the piece can stop at. Greedy maximal
  // extension is not enough: stopping a piece short at a different joint can
  // let the next piece reach much farther, so all stopping points are kept.
  struct State {
    std::size_t j;
    Interval values;
  };
  std::vector<State> frontier{{0, {ys[0] - eps, ys[0] + eps}}};
  // Value ranges already expanded per joint; re-expanding a subset at a later
  // level cannot reach anything new with a smaller total count.
  std::vector<std::vector<Interval>> seen(m);
  seen[0].push_back(frontier[0].values);

  for (int pieces = 1; pieces < static_cast<int>(m); ++pieces) {
    // Farthest joints first: they finish earliest when the level succeeds.
    std::sort(frontier.begin(), frontier.end(),
              [](const State& a, const State& b) { return a.j > b.j; });
    std::vector<State> next;
    for (const State& st : frontier) {
      Polygon poly;
      poly.pts = {{st.values.lo, -slope_bound},
                  {st.values.hi, -slope_bound},
                  {st.values.hi, slope_bound},
                  {st.values.lo, slope_bound}};
      for (std::size_t j = st.j + 1; j < m; ++j) {
        const double dx = xs[j] - xs[st.j];
        poly.clip(1.0, dx, ys[j] + eps);    //  v + s*dx <= y + eps
        poly.clip(-1.0, -dx, eps - ys[j]);  // -v - s*dx <= eps - y
        if (poly.empty()) break;
        if (j + 1 == m) return pieces;
        const auto [lo, hi] = poly.range(1.0, dx);
        for (const Interval& frag : subtract({lo, hi}, seen[j])) {
          next.push_back({j, frag});
          add_interval(seen[j], frag);
        }
      }
    }
    if (next.empty())
      raise(ErrorKind::internal_error,
            "search stalled before the last grid point");  // cannot happen
    frontier = std::move(next);
  }
  raise(ErrorKind::internal_error, "piece count exceeded the grid size");
}

double region_inefficiency(double expected_regions, int l_min) {
  if (l_min < 1)
    raise(ErrorKind::invalid_complexity, "l_min must be >= 1");
  if (!(expected_regions > 0.0) || !std::isfinite(expected_regions))
    raise(ErrorKind::invalid_value, "expected_regions must be positive");
  return expected_regions / static_cast<double>(l_min);
}

const char* regions_source_name(RegionsSource source) {
  switch (source) {
    case RegionsSource::theorem: return "theorem";
    case RegionsSource::montecarlo: return "montecarlo";
    case RegionsSource::provided: return "provided";
  }
  raise(ErrorKind::internal_error, "unknown regions source");
}

SparsityReport check_region_adaptive_sparsity(const PwlFunction& phi,
                                              const TargetFunction& target,
                                              double eps0, double alpha,
                                              double c, double expected_regions,
                                              RegionsSource source) {
  if (!(alpha >= 1.0) || !std::isfinite(alpha))
    raise(ErrorKind::invalid_value, "alpha must be >= 1");
  if (!(c >= 0.0) || !std::isfinite(c))
    raise(ErrorKind::invalid_value, "c must be >= 0");

  SparsityReport report;
  report.eps0 = eps0;
  report.alpha = alpha;
  report.c = c;
  report.expected_regions = expected_regions;
  report.regions_source = source;
  report.l_min = min_linear_complexity(target, eps0);
  report.eta_region = region_inefficiency(expected_regions, report.l_min);
  report.sup_error = sup_norm_diff(phi, target.interpolant(), target.domain_lo,
                                   target.domain_hi);
  report.approximating = report.sup_error <= alpha * eps0;
  report.region_efficient = report.eta_region <= c;
  return report;
}

nlohmann::json report_to_json(const SparsityReport& report) {
  return nlohmann::json{
      {"eps0", report.eps0},
      {"alpha", report.alpha},
      {"c", report.c},
      {"l_min", report.l_min},
      {"expected_regions", report.expected_regions},
      {"regions_source", regions_source_name(report.regions_source)},
      {"eta_region", report.eta_region},
      {"sup_error", report.sup_error},
      {"approximating", report.approximating},
      {"region_efficient", report.region_efficient}};
}

}  // namespace relu1d
