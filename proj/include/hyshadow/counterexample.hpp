#ifndef HYSHADOW_COUNTEREXAMPLE_HPP
#define HYSHADOW_COUNTEREXAMPLE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hyshadow/error.hpp"
#include "hyshadow/flow.hpp"
#include "hyshadow/geometry.hpp"
#include "hyshadow/hyperspace.hpp"
#include "hyshadow/morse.hpp"
#include "hyshadow/parallel.hpp"
#include "hyshadow/spatial.hpp"

namespace hyshadow {

/// Upper bound on |grad F| over the manifold.
inline double gradient_bound(const MorseSystem& sys) {
  return sys.function_id() == FunctionId::SphereHeight ? 1.0 : 2.0 * kPi * std::sqrt(2.0);
}

/// a = F(q) < a1 < b1 < b = F(p).
struct BandConfig {
  double a = 0.0;
  double b = 0.0;
  double a1 = 0.0;
  double b1 = 0.0;

  void validate() const {
    for (double v : {a, b, a1, b1})
      if (!std::isfinite(v)) throw Error(ErrorKind::InvalidBand, "band levels must be finite");
    if (!(a < a1 && a1 < b1 && b1 < b))
      throw Error(ErrorKind::InvalidBand, "band must satisfy a < a1 < b1 < b");
  }
};

/// Quarter points of [F(q), F(p)].
inline BandConfig default_band(const TrajectoryPair& pair) {
  const double a = pair.q.value;
  const double b = pair.p.value;
  return {a, b, a + 0.25 * (b - a), b - 0.25 * (b - a)};
}

// ---------------------------------------------------------------------------
// Curve sampling

/// Point of the trajectory at time t, flowed exactly from the nearest earlier
/// sample. Times outside the sampled range clamp to the end samples.
inline Point point_at_time(const MorseSystem& sys, const Trajectory& tr, double t, const FlowParams& params = {}) {
  const auto& s = tr.samples;
  if (t <= s.front().t) return s.front().x;
  if (t >= s.back().t) return s.back().x;
  const auto it = std::upper_bound(s.begin(), s.end(), t, [](double v, const TrajectorySample& x) { return v < x.t; });
  const auto& base = *(it - 1);
  return detail::integrate_unchecked(sys, base.x, t - base.t, params);
}

/// Time at which the trajectory crosses the level, refined by Newton along
/// the flow (dF/dt = -|grad F|^2).
inline std::optional<double> time_at_level(const MorseSystem& sys, const Trajectory& tr, double level,
                                           const FlowParams& params = {}) {
  const auto& s = tr.samples;
  if (s.empty() || level > sys.value(s.front().x) || level < sys.value(s.back().x)) return std::nullopt;
  std::size_t lo = 0;
  std::size_t hi = s.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (sys.value(s[mid].x) >= level) lo = mid;
    else hi = mid;
  }
  const double f0 = sys.value(s[lo].x);
  const double f1 = sys.value(s[hi].x);
  const double w = f0 == f1 ? 0.0 : (f0 - level) / (f0 - f1);
  double t = s[lo].t + std::clamp(w, 0.0, 1.0) * (s[hi].t - s[lo].t);
  for (int it = 0; it < 4; ++it) {
    const Point x = point_at_time(sys, tr, t, params);
    const Vec3 g = sys.gradient(x);
    const double g2 = dot(g, g);
    if (g2 < 1e-24) break;
    t = std::clamp(t + (sys.value(x) - level) / g2, s[lo].t, s[hi].t);
  }
  return t;
}

struct CurveSample {
  std::vector<Point> points;
  std::vector<double> times;
};

/// Samples the trajectory between t_lo and t_hi (infinite bounds mean the
/// sampled ends) so consecutive points are at most h apart along the
/// polyline. Both bounding points are included.
inline CurveSample sample_curve(const MorseSystem& sys, const Trajectory& tr, double t_lo, double t_hi, double h,
                                const FlowParams& params = {}) {
  if (!(h > 0.0)) throw Error(ErrorKind::Resolution, "sampling step must be positive");
  const Manifold& m = sys.manifold();
  std::vector<TrajectorySample> poly;
  const bool lo_inf = std::isinf(t_lo);
  const bool hi_inf = std::isinf(t_hi);
  if (!lo_inf) poly.push_back({t_lo, point_at_time(sys, tr, t_lo, params)});
  for (const auto& s : tr.samples) {
    if ((lo_inf || s.t > t_lo) && (hi_inf || s.t < t_hi)) poly.push_back(s);
  }
  if (!hi_inf) poly.push_back({t_hi, point_at_time(sys, tr, t_hi, params)});

  CurveSample out;
  if (poly.empty()) return out;
  out.points.push_back(poly.front().x);
  out.times.push_back(poly.front().t);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
    const Point& a = poly[i].x;
    const Point& b = poly[i + 1].x;
    const double len = m.distance(a, b);
    double pos = 0.0;
    while (acc + (len - pos) >= h) {
      pos += h - acc;
      acc = 0.0;
      const double w = len > 0.0 ? pos / len : 1.0;
      out.points.push_back(m.interpolate(a, b, w));
      out.times.push_back(poly[i].t + w * (poly[i + 1].t - poly[i].t));
    }
    acc += len - pos;
  }
  if (acc > 0.0) {
    out.points.push_back(poly.back().x);
    out.times.push_back(poly.back().t);
  }
  return out;
}

/// X0 with per-point provenance: curve 1 or 2, or 0 for the endpoints p and
/// q (whose times are -inf and +inf).
struct X0Sample {
  Continuum X0;
  std::vector<int> curve;
  std::vector<double> time;
};

inline X0Sample build_X0_sample(const MorseSystem& sys, const TrajectoryPair& pair, double h,
                                const FlowParams& params = {}) {
  const double inf = std::numeric_limits<double>::infinity();
  X0Sample s;
  s.X0.h = h;
  auto add = [&](const Point& x, int c, double t) {
    s.X0.points.push_back(x);
    s.curve.push_back(c);
    s.time.push_back(t);
  };
  add(pair.p.location, 0, -inf);
  const auto c1 = sample_curve(sys, pair.gamma1, -inf, inf, h, params);
  for (std::size_t i = 0; i < c1.points.size(); ++i) add(c1.points[i], 1, c1.times[i]);
  add(pair.q.location, 0, inf);
  const auto c2 = sample_curve(sys, pair.gamma2, -inf, inf, h, params);
  for (std::size_t i = 0; i < c2.points.size(); ++i) add(c2.points[i], 2, c2.times[i]);
  if (!is_h_connected(sys.manifold(), s.X0))
    throw Error(ErrorKind::Resolution, "X0 sample is disconnected at resolution h");
  return s;
}

/// gamma1 and gamma2 with both endpoints, sampled at spacing h.
inline Continuum build_X0(const MorseSystem& sys, const TrajectoryPair& pair, double h, const FlowParams& params = {}) {
  return build_X0_sample(sys, pair, h, params).X0;
}

// ---------------------------------------------------------------------------
// Band sets

struct LevelSets {
  BandConfig band;
  double eps = 0.0;
  double h = 0.0;
  double lipschitz = 1.0;
  Point p;
  Point q;
  Continuum X0;
  Continuum A1;
  Continuum A2;
  PointIndex X0_index;
  PointIndex A1_index;
  PointIndex A2_index;

  double dist_X0(const Point& x) const { return X0_index.nearest(x).dist; }
  double dist_A(int i, const Point& x) const { return (i == 1 ? A1_index : A2_index).nearest(x).dist; }

  /// x in U_eps(X0) and F(x) >= b1, shrunk by slack (a length) in both.
  bool in_A(const MorseSystem& sys, const Point& x, double slack = 0.0) const {
    return sys.value(x) >= band.b1 + lipschitz * slack && dist_X0(x) < eps - slack;
  }
  bool in_B(const MorseSystem& sys, const Point& x, double slack = 0.0) const {
    return sys.value(x) <= band.a1 - lipschitz * slack && dist_X0(x) < eps - slack;
  }
};

namespace detail {

inline Continuum band_segment(const MorseSystem& sys, const Trajectory& tr, const BandConfig& band, double h,
                              const FlowParams& params) {
  const auto tb = time_at_level(sys, tr, band.b1, params);
  const auto ta = time_at_level(sys, tr, band.a1, params);
  if (!tb || !ta || !(*ta > *tb)) throw Error(ErrorKind::EmptyBand, "band misses the trajectory");
  return {sample_curve(sys, tr, *tb, *ta, h, params).points, h};
}

}  // namespace detail

/// A1, A2: the parts of gamma1, gamma2 with a1 <= F <= b1, sampled at h with
/// exact end points on the two levels.
inline LevelSets band_sets(const MorseSystem& sys, const TrajectoryPair& pair, const BandConfig& band, double eps,
                           double h, const FlowParams& params = {}) {
  band.validate();
  const Manifold& m = sys.manifold();
  Continuum X0 = build_X0(sys, pair, h, params);
  Continuum A1 = detail::band_segment(sys, pair.gamma1, band, h, params);
  Continuum A2 = detail::band_segment(sys, pair.gamma2, band, h, params);
  PointIndex i0(m, X0.points, nearest_cell_hint(m, X0.points.size()));
  PointIndex i1(m, A1.points, nearest_cell_hint(m, A1.points.size()));
  PointIndex i2(m, A2.points, nearest_cell_hint(m, A2.points.size()));
  return LevelSets{band,
                   eps,
                   h,
                   gradient_bound(sys),
                   pair.p.location,
                   pair.q.location,
                   std::move(X0),
                   std::move(A1),
                   std::move(A2),
                   std::move(i0),
                   std::move(i1),
                   std::move(i2)};
}

/// Minimum sample distance between A1 and A2.
inline double band_gap(const LevelSets& ls) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& x : ls.A1.points) best = std::min(best, ls.A2_index.nearest(x).dist);
  return best;
}

// ---------------------------------------------------------------------------
// Epsilon certificate

struct SearchParams {
  double h = 1e-3;                 ///< resolution of the band sets
  std::size_t samples = 10000;     ///< minimum sample count per condition
  int bisection_steps = 12;
  double margin_floor = 1e-3;      ///< every margin must reach this
  int max_a1_lowerings = 6;
};

struct SampleCounts {
  std::size_t disjointness = 0;
  std::size_t nojump = 0;
  std::size_t stays = 0;
  std::size_t ball = 0;
};

/// Margins of the four conditions at one eps. A margin that was not computed
/// is NaN and counts as failing.
struct EpsilonCertificate {
  double eps = 0.0;
  BandConfig band;
  double disjointness_bound = 0.0;   ///< half the A1-A2 gap
  double disjointness_margin = 0.0;  ///< gap - 2 eps - 2h
  double nojump_min_excess = 0.0;    ///< min F(f(x)) - a1
  double stays_min_clearance = 0.0;  ///< min d(f(x), A_other) - eps - 2h
  double ball_condition_margin = 0.0;  ///< min F over B(p, 2 eps) - b1
  SampleCounts sample_counts;
  int trials = 0;
  int a1_lowerings = 0;

  /// Name of the first evaluated condition below floor, "unevaluated" when
  /// the evaluated ones pass but some were skipped, or empty.
  std::string failing_condition(double floor) const {
    const std::pair<const char*, double> conds[] = {{"disjointness", disjointness_margin},
                                                    {"no-jump", nojump_min_excess},
                                                    {"stays", stays_min_clearance},
                                                    {"ball", ball_condition_margin}};
    for (const auto& [name, v] : conds)
      if (!std::isnan(v) && v < floor) return name;
    for (const auto& [name, v] : conds)
      if (std::isnan(v)) return "unevaluated";
    return {};
  }
  bool passes(double floor) const { return failing_condition(floor).empty(); }
};

namespace detail {

inline constexpr double kGoldenAngle = 2.39996322972865332;

/// Vogel-spiral discs of the given chord radius around each center; every
/// sample lies strictly inside its disc.
inline std::vector<Point> disc_samples(const Manifold& m, const std::vector<Point>& centers, double radius,
                                       std::size_t per_center) {
  std::vector<Point> out;
  out.reserve(centers.size() * per_center);
  for (const auto& c : centers) {
    const auto [e1, e2] = m.tangent_basis(c);
    for (std::size_t k = 0; k < per_center; ++k) {
      const double rho = radius * std::sqrt((static_cast<double>(k) + 0.5) / static_cast<double>(per_center));
      out.push_back(m.offset(c, e1, e2, rho, kGoldenAngle * static_cast<double>(k)));
    }
  }
  return out;
}

inline std::size_t per_center(std::size_t target, std::size_t centers) {
  return std::max<std::size_t>(1, (target + centers - 1) / std::max<std::size_t>(centers, 1));
}

inline std::vector<Point> centers_along(const Manifold& m, const std::vector<Point>& pts, double spacing) {
  return thin(m, pts, spacing);
}

/// Moves x along grad F onto the level set F = level.
inline std::optional<Point> project_to_level(const MorseSystem& sys, Point x, double level) {
  const Manifold& m = sys.manifold();
  for (int it = 0; it < 6; ++it) {
    const Vec3 g = sys.gradient(x);
    const double g2 = dot(g, g);
    if (g2 < 1e-12) return std::nullopt;
    x = m.project(x + g * ((level - sys.value(x)) / g2));
  }
  if (std::abs(sys.value(x) - level) > 1e-12) return std::nullopt;
  return x;
}

inline std::vector<double> map_values(const MorseSystem& sys, const std::vector<Point>& xs,
                                      const FlowParams& params, std::vector<Point>* images = nullptr) {
  std::vector<Point> ys(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) { ys[i] = integrate_unchecked(sys, xs[i], 1.0, params); });
  std::vector<double> v(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) v[i] = sys.value(ys[i]);
  if (images) *images = std::move(ys);
  return v;
}

inline double min_of(const std::vector<double>& v) {
  double best = std::numeric_limits<double>::infinity();
  for (double x : v) best = std::min(best, x);
  return best;
}

inline double disjointness(const MorseSystem& sys, const LevelSets& ls, double eps, const SearchParams& sp,
                           std::size_t& count) {
  const Manifold& m = sys.manifold();
  double sampled = std::numeric_limits<double>::infinity();
  count = 0;
  for (int side = 1; side <= 2; ++side) {
    const auto& own = side == 1 ? ls.A1 : ls.A2;
    const auto centers = centers_along(m, own.points, 0.25 * eps);
    const auto xs = disc_samples(m, centers, eps, per_center(sp.samples / 2, centers.size()));
    for (const auto& x : xs) sampled = std::min(sampled, ls.dist_A(3 - side, x) - eps);
    count += xs.size();
  }
  return std::min(band_gap(ls) - 2.0 * eps, sampled) - 2.0 * ls.h;
}

inline double nojump(const MorseSystem& sys, const LevelSets& ls, double eps, const SearchParams& sp,
                     const FlowParams& params, std::size_t& count) {
  const Manifold& m = sys.manifold();
  const double b1 = ls.band.b1;
  std::vector<Point> near_top;
  for (const auto& x : ls.X0.points)
    if (sys.value(x) >= b1 - ls.lipschitz * eps) near_top.push_back(x);
  const auto centers = centers_along(m, near_top, 0.25 * eps);
  std::vector<Point> kept;
  for (std::size_t k = per_center(sp.samples, centers.size()); kept.size() < sp.samples; k *= 2) {
    kept.clear();
    for (const auto& x : disc_samples(m, centers, eps, k)) {
      if (sys.value(x) >= b1) kept.push_back(x);
      if (const auto y = project_to_level(sys, x, b1); y && ls.dist_X0(*y) < eps) kept.push_back(*y);
    }
    if (centers.empty()) break;
  }
  count = kept.size();
  return min_of(map_values(sys, kept, params)) - ls.band.a1;
}

inline double stays(const MorseSystem& sys, const LevelSets& ls, double eps, const SearchParams& sp,
                    const FlowParams& params, std::size_t& count) {
  const Manifold& m = sys.manifold();
  double clearance = std::numeric_limits<double>::infinity();
  count = 0;
  for (int side = 1; side <= 2; ++side) {
    const auto& own = side == 1 ? ls.A1 : ls.A2;
    const auto centers = centers_along(m, own.points, 0.25 * eps);
    const auto xs = disc_samples(m, centers, eps, per_center(sp.samples / 2, centers.size()));
    std::vector<Point> ys;
    map_values(sys, xs, params, &ys);
    std::vector<double> d(ys.size());
    parallel_for(ys.size(), [&](std::size_t i) { d[i] = ls.dist_A(3 - side, ys[i]); });
    clearance = std::min(clearance, min_of(d) - eps - 2.0 * ls.h);
    count += xs.size();
  }
  return clearance;
}

inline double ball(const MorseSystem& sys, const LevelSets& ls, double eps, const SearchParams& sp,
                   std::size_t& count) {
  const Manifold& m = sys.manifold();
  const std::size_t ring = std::min<std::size_t>(1000, sp.samples / 4);
  auto xs = disc_samples(m, {ls.p}, 2.0 * eps, sp.samples - ring);
  const auto [e1, e2] = m.tangent_basis(ls.p);
  for (std::size_t k = 0; k < ring; ++k)
    xs.push_back(m.offset(ls.p, e1, e2, 2.0 * eps, 2.0 * kPi * static_cast<double>(k) / ring));
  count = xs.size();
  double low = std::numeric_limits<double>::infinity();
  for (const auto& x : xs) low = std::min(low, sys.value(x));
  return low - ls.band.b1;
}

}  // namespace detail

/// Evaluates the four conditions at eps by dense sampling. With stop_early
/// the cheap conditions (disjointness, ball) run first and the flow-based
/// ones are skipped once any margin is below the floor.
inline EpsilonCertificate certify_epsilon(const MorseSystem& sys, const LevelSets& ls, double eps,
                                          const SearchParams& sp = {}, const FlowParams& params = {},
                                          bool stop_early = false) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(ErrorKind::Precondition, "eps must be positive");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EpsilonCertificate c;
  c.eps = eps;
  c.band = ls.band;
  c.disjointness_bound = 0.5 * band_gap(ls);
  c.nojump_min_excess = c.stays_min_clearance = nan;
  c.disjointness_margin = detail::disjointness(sys, ls, eps, sp, c.sample_counts.disjointness);
  c.ball_condition_margin = detail::ball(sys, ls, eps, sp, c.sample_counts.ball);
  const bool cheap_ok = c.disjointness_margin >= sp.margin_floor && c.ball_condition_margin >= sp.margin_floor;
  if (stop_early && !cheap_ok) return c;
  c.stays_min_clearance = detail::stays(sys, ls, eps, sp, params, c.sample_counts.stays);
  if (stop_early && !(c.stays_min_clearance >= sp.margin_floor)) return c;
  c.nojump_min_excess = detail::nojump(sys, ls, eps, sp, params, c.sample_counts.nojump);
  return c;
}

/// Bisection on eps over (0, gap/2]. When a trial fails only the no-jump
/// condition, a1 is first halved toward a (the band sets are rebuilt) before
/// eps is lowered. Returns the largest passing trial.
inline EpsilonCertificate search_epsilon(const MorseSystem& sys, const TrajectoryPair& pair, BandConfig band,
                                         const SearchParams& sp = {}, const FlowParams& params = {}) {
  band.validate();
  LevelSets ls = band_sets(sys, pair, band, 0.0, sp.h, params);
  double lo = 0.0;
  double hi = 0.5 * band_gap(ls);
  std::optional<EpsilonCertificate> best;
  std::string last_failure = "disjointness";
  double last_failed_eps = hi;
  int trials = 0;
  int lowerings = 0;
  for (int step = 0; step < sp.bisection_steps; ++step) {
    const double eps = 0.5 * (lo + hi);
    EpsilonCertificate c = certify_epsilon(sys, ls, eps, sp, params, true);
    ++trials;
    while (c.failing_condition(sp.margin_floor) == "no-jump" && lowerings < sp.max_a1_lowerings) {
      band.a1 = 0.5 * (band.a1 + band.a);
      ++lowerings;
      ls = band_sets(sys, pair, band, 0.0, sp.h, params);
      c = certify_epsilon(sys, ls, eps, sp, params, true);
      ++trials;
    }
    if (c.passes(sp.margin_floor)) {
      lo = eps;
      best = c;
    } else {
      hi = eps;
      last_failure = c.failing_condition(sp.margin_floor);
      last_failed_eps = eps;
    }
  }
  if (!best) {
    throw Error(ErrorKind::SearchFailed, "no eps passed; condition '" + last_failure + "' failed at eps = " +
                                             std::to_string(last_failed_eps));
  }
  best->trials = trials;
  best->a1_lowerings = lowerings;
  return *best;
}

// ---------------------------------------------------------------------------
// Pseudo-orbit

struct OrbitConfig {
  double eps = 0.3;
  double delta = 0.05;
  int N = 40;
  double h = 0.0;  ///< 0 selects delta / 8
  BandConfig band;
};

struct PseudoOrbit {
  std::string system;
  BandConfig band;
  double eps = 0.0;
  double delta = 0.0;
  int M = 0;
  int N = 0;
  double h = 0.0;
  Point p;
  Point q;
  std::vector<Continuum> X;  ///< X[n + N] for n in [-N, N]

  const Continuum& at(int n) const { return X.at(static_cast<std::size_t>(n + N)); }
  Continuum& at(int n) { return X.at(static_cast<std::size_t>(n + N)); }
};

namespace detail {

/// Points of X0 with time in [t_lo, t_hi] plus the exact curve points at the
/// finite bound, keeping p and/or q.
inline Continuum time_window(const MorseSystem& sys, const TrajectoryPair& pair, const X0Sample& s, double t_lo,
                             double t_hi, const FlowParams& params) {
  Continuum out{{}, s.X0.h};
  const Trajectory* curves[] = {&pair.gamma1, &pair.gamma2};
  for (std::size_t i = 0; i < s.X0.points.size(); ++i) {
    const double t = s.time[i];
    const int c = s.curve[i];
    if (c == 0) {
      if ((t < 0 && std::isinf(t_lo)) || (t > 0 && std::isinf(t_hi))) out.points.push_back(s.X0.points[i]);
      continue;
    }
    const bool first_of_curve = i == 0 || s.curve[i - 1] != c;
    if (first_of_curve && !std::isinf(t_lo)) out.points.push_back(point_at_time(sys, *curves[c - 1], t_lo, params));
    if (t > t_lo && t < t_hi) out.points.push_back(s.X0.points[i]);
    const bool last_of_curve = i + 1 == s.X0.points.size() || s.curve[i + 1] != c;
    if (last_of_curve && !std::isinf(t_hi)) out.points.push_back(point_at_time(sys, *curves[c - 1], t_hi, params));
  }
  return out;
}

}  // namespace detail

/// X0 = gamma1 u gamma2; X1 = the parts with t >= -M plus q; X_{-1} = the
/// parts with t <= M plus p; M is the smallest integer with
/// d_H(X_{+-1}, X0) < delta / 2. Other indices are induced iterates.
inline PseudoOrbit build_pseudo_orbit(const MorseSystem& sys, const TrajectoryPair& pair, const OrbitConfig& cfg,
                                      const FlowParams& params = {}) {
  const Manifold& m = sys.manifold();
  cfg.band.validate();
  const double h = cfg.h > 0.0 ? cfg.h : cfg.delta / 8.0;
  if (!(cfg.delta > 4.0 * h)) throw Error(ErrorKind::Precondition, "delta must exceed 4h");
  if (!(cfg.eps > 0.0)) throw Error(ErrorKind::Precondition, "eps must be positive");
  if (cfg.N < 1) throw Error(ErrorKind::Precondition, "window half-width N must be at least 1");

  const X0Sample s = build_X0_sample(sys, pair, h, params);
  const double inf = std::numeric_limits<double>::infinity();
  PseudoOrbit po;
  po.system = sys.name();
  po.band = cfg.band;
  po.eps = cfg.eps;
  po.delta = cfg.delta;
  po.N = cfg.N;
  po.h = h;
  po.p = pair.p.location;
  po.q = pair.q.location;
  po.X.resize(static_cast<std::size_t>(2 * cfg.N + 1));

  constexpr int kMaxM = 64;
  Continuum fwd;
  Continuum bwd;
  for (po.M = 1;; ++po.M) {
    if (po.M > kMaxM) throw Error(ErrorKind::Precondition, "no truncation time meets delta / 2");
    fwd = detail::time_window(sys, pair, s, -po.M, inf, params);
    bwd = detail::time_window(sys, pair, s, -inf, po.M, params);
    if (hausdorff(m, fwd, s.X0).value < 0.5 * cfg.delta && hausdorff(m, bwd, s.X0).value < 0.5 * cfg.delta)
      break;
  }
  po.at(0) = s.X0;
  po.at(1) = std::move(fwd);
  po.at(-1) = std::move(bwd);
  for (int n = 2; n <= cfg.N; ++n) po.at(n) = induced_step(sys, po.at(n - 1), 1, params);
  for (int n = -2; n >= -cfg.N; --n) po.at(n) = induced_step(sys, po.at(n + 1), -1, params);

  const double end_q = hausdorff(m, po.at(cfg.N), singleton(po.q, h)).value;
  const double end_p = hausdorff(m, po.at(-cfg.N), singleton(po.p, h)).value;
  if (!(end_q < 0.5 * cfg.eps) || !(end_p < 0.5 * cfg.eps))
    throw Error(ErrorKind::WindowTooSmall, "window ends are not within eps/2 of the critical points");
  return po;
}

struct ValidationReport {
  std::vector<double> links;  ///< links[n + N] = d_H(X_{n+1}, C(f)(X_n)), n in [-N, N-1]
  double min_link = 0.0;
  double max_link = 0.0;
  int argmax_link = 0;
  double link_threshold = 0.0;  ///< delta - 2h
  std::vector<int> failing_links;
  double end_p = 0.0;  ///< d_H(X_{-N}, {p})
  double end_q = 0.0;  ///< d_H(X_N, {q})
  double end_threshold = 0.0;  ///< eps / 2
  bool links_pass = false;
  bool ends_pass = false;
  bool pass = false;
};

/// Recomputes every link and both end conditions. Failures are reported, not
/// thrown.
inline ValidationReport validate_pseudo_orbit(const MorseSystem& sys, const PseudoOrbit& po,
                                              const FlowParams& params = {}) {
  const Manifold& m = sys.manifold();
  ValidationReport r;
  r.link_threshold = po.delta - 2.0 * po.h;
  r.end_threshold = 0.5 * po.eps;
  r.links.assign(static_cast<std::size_t>(2 * po.N), 0.0);
  for (int n = -po.N; n < po.N; ++n) {
    const Continuum image = induced_step(sys, po.at(n), 1, params);
    r.links[static_cast<std::size_t>(n + po.N)] = hausdorff(m, po.at(n + 1), image).value;
  }
  r.min_link = std::numeric_limits<double>::infinity();
  r.max_link = -1.0;
  for (int n = -po.N; n < po.N; ++n) {
    const double v = r.links[static_cast<std::size_t>(n + po.N)];
    r.min_link = std::min(r.min_link, v);
    if (v > r.max_link) {
      r.max_link = v;
      r.argmax_link = n;
    }
    if (!(v < r.link_threshold)) r.failing_links.push_back(n);
  }
  r.end_q = hausdorff(m, po.at(po.N), singleton(po.q, po.h)).value;
  r.end_p = hausdorff(m, po.at(-po.N), singleton(po.p, po.h)).value;
  r.links_pass = r.failing_links.empty();
  r.ends_pass = r.end_q < r.end_threshold && r.end_p < r.end_threshold;
  r.pass = r.links_pass && r.ends_pass;
  return r;
}

}  // namespace hyshadow

#endif  // HYSHADOW_COUNTEREXAMPLE_HPP
