#ifndef HYSHADOW_FLOW_HPP
#define HYSHADOW_FLOW_HPP

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <vector>

#include "hyshadow/error.hpp"
#include "hyshadow/geometry.hpp"
#include "hyshadow/morse.hpp"
#include "hyshadow/parallel.hpp"

namespace hyshadow {

struct FlowParams {
  double step = 1e-3;          ///< RK4 time step
  double endpoint_tol = 1e-6;  ///< "arrived at a critical point" radius
  double max_time = 50.0;      ///< per direction, for trajectory tracing
  double record_spacing = 1e-3;  ///< minimum chord between stored trajectory samples

  void validate() const {
    if (!(step > 0.0) || !(endpoint_tol > 0.0) || !(max_time > 0.0) || !(record_spacing > 0.0))
      throw Error(ErrorKind::Precondition, "flow parameters must be positive");
  }
};

namespace detail {

inline constexpr double kDriftLimit = 1e-6;
inline constexpr int kMaxHalvings = 8;

inline Vec3 flow_field(const MorseSystem& sys, const Vec3& x) {
  if (sys.function_id() == FunctionId::SphereHeight) return {x.z * x.x, x.z * x.y, x.z * x.z - 1.0};
  return {2.0 * kPi * std::sin(2.0 * kPi * x.x), 2.0 * kPi * std::sin(2.0 * kPi * x.y), 0.0};
}

/// One classical RK4 step of dx/dt = -grad F followed by re-projection.
/// Returns false when the raw step leaves the sphere by more than the drift
/// limit.
inline bool rk4_step(const MorseSystem& sys, Point& x, double h) {
  const Vec3 k1 = flow_field(sys, x);
  const Vec3 k2 = flow_field(sys, x + k1 * (0.5 * h));
  const Vec3 k3 = flow_field(sys, x + k2 * (0.5 * h));
  const Vec3 k4 = flow_field(sys, x + k3 * h);
  const Vec3 y = x + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
  if (sys.manifold().is_sphere()) {
    const double n = norm(y);
    if (std::abs(n - 1.0) > kDriftLimit || !std::isfinite(n)) return false;
    x = y * (1.0 / n);
  } else {
    x = {wrap_unit(y.x), wrap_unit(y.y), 0.0};
  }
  return true;
}

inline Point integrate_unchecked(const MorseSystem& sys, const Point& x, double t, const FlowParams& params) {
  if (t == 0.0) return x;
  double step = params.step;
  for (int attempt = 0; attempt <= kMaxHalvings; ++attempt, step *= 0.5) {
    const auto n = static_cast<long>(std::max(1.0, std::ceil(std::abs(t) / step - 1e-9)));
    const double h = t / static_cast<double>(n);
    Point y = x;
    bool ok = true;
    for (long k = 0; k < n && ok; ++k) ok = rk4_step(sys, y, h);
    if (ok) return y;
  }
  throw Error(ErrorKind::Instability, "integrator drift persists after step halving");
}

}  // namespace detail

/// Flows x for time t under the negative gradient (t < 0 follows +grad F).
inline Point integrate(const MorseSystem& sys, const Point& x, double t, const FlowParams& params = {}) {
  sys.manifold().check(x);
  return detail::integrate_unchecked(sys, x, t, params);
}

/// n-th iterate of the time-one map f; negative n applies the inverse map.
/// Composed one unit of time at a time, so iterate(x, m + n) is literally
/// iterate(iterate(x, m), n) when m and n share a sign.
inline Point iterate(const MorseSystem& sys, const Point& x, int n, const FlowParams& params = {}) {
  sys.manifold().check(x);
  Point y = x;
  const double dir = n < 0 ? -1.0 : 1.0;
  for (int k = 0; k < std::abs(n); ++k) y = detail::integrate_unchecked(sys, y, dir, params);
  return y;
}

struct TrajectorySample {
  double t = 0.0;
  Point x;
};

/// A sampled flow line. Time 0 is the crossing of the mid-level
/// (F(origin) + F(terminus)) / 2.
struct Trajectory {
  std::vector<TrajectorySample> samples;
  CriticalPoint origin;
  CriticalPoint terminus;
};

struct TrajectoryPair {
  CriticalPoint p;
  CriticalPoint q;
  Trajectory gamma1;
  Trajectory gamma2;
  double separation = 0.0;
};

namespace detail {

inline std::size_t nearest_critical(const Manifold& m, const std::vector<CriticalPoint>& crit, const Point& x,
                                    double& d) {
  std::size_t best = 0;
  d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < crit.size(); ++i) {
    const double di = m.distance(crit[i].location, x);
    if (di < d) {
      d = di;
      best = i;
    }
  }
  return best;
}

struct HalfTrajectory {
  std::vector<TrajectorySample> samples;  // excludes the start point
  std::size_t endpoint = 0;
};

inline HalfTrajectory trace_half(const MorseSystem& sys, const Point& x, double dir,
                                 const std::vector<CriticalPoint>& crit, const FlowParams& params) {
  const Manifold& m = sys.manifold();
  HalfTrajectory out;
  Point y = x;
  Point last = x;
  const auto max_steps = static_cast<long>(std::ceil(params.max_time / params.step));
  for (long k = 1; k <= max_steps; ++k) {
    if (!rk4_step(sys, y, dir * params.step))
      throw Error(ErrorKind::Instability, "integrator drift while tracing a trajectory");
    const double t = dir * static_cast<double>(k) * params.step;
    double d = 0.0;
    const std::size_t c = nearest_critical(m, crit, y, d);
    if (d < params.endpoint_tol) {
      out.samples.push_back({t, y});
      out.endpoint = c;
      return out;
    }
    if (m.distance(last, y) >= params.record_spacing) {
      out.samples.push_back({t, y});
      last = y;
    }
  }
  throw Error(ErrorKind::NoConvergence, "trajectory did not reach a critical point within max_time");
}

}  // namespace detail

/// Position where the trajectory crosses the given level (F decreases along
/// samples). Returns nullopt when the level is outside the sampled range.
inline std::optional<Point> point_at_level(const MorseSystem& sys, const Trajectory& tr, double level) {
  const auto& s = tr.samples;
  if (s.empty()) return std::nullopt;
  if (level > sys.value(s.front().x) || level < sys.value(s.back().x)) return std::nullopt;
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
  return sys.manifold().interpolate(s[lo].x, s[hi].x, std::clamp(w, 0.0, 1.0));
}

inline Trajectory trajectory_through(const MorseSystem& sys, const Point& x, const FlowParams& params,
                                     const std::vector<CriticalPoint>& crit) {
  params.validate();
  const Manifold& m = sys.manifold();
  m.check(x);
  double d0 = 0.0;
  detail::nearest_critical(m, crit, x, d0);
  if (d0 < params.endpoint_tol)
    throw Error(ErrorKind::Precondition, "start point sits on a critical point");

  const auto fwd = detail::trace_half(sys, x, 1.0, crit, params);
  const auto bwd = detail::trace_half(sys, x, -1.0, crit, params);

  Trajectory tr;
  tr.origin = crit[bwd.endpoint];
  tr.terminus = crit[fwd.endpoint];
  tr.samples.reserve(fwd.samples.size() + bwd.samples.size() + 1);
  for (auto it = bwd.samples.rbegin(); it != bwd.samples.rend(); ++it) tr.samples.push_back(*it);
  tr.samples.push_back({0.0, x});
  for (const auto& s : fwd.samples) tr.samples.push_back(s);

  const double mid = 0.5 * (tr.origin.value + tr.terminus.value);
  for (std::size_t i = 0; i + 1 < tr.samples.size(); ++i) {
    const double f0 = sys.value(tr.samples[i].x);
    const double f1 = sys.value(tr.samples[i + 1].x);
    if (f0 >= mid && f1 < mid) {
      const double w = (f0 - mid) / (f0 - f1);
      const double shift = tr.samples[i].t + w * (tr.samples[i + 1].t - tr.samples[i].t);
      for (auto& s : tr.samples) s.t -= shift;
      break;
    }
  }
  return tr;
}

inline Trajectory trajectory_through(const MorseSystem& sys, const Point& x, const FlowParams& params = {}) {
  return trajectory_through(sys, x, params, find_critical_points(sys));
}

namespace detail {

inline constexpr int kSeparationLevels = 256;

inline std::vector<Point> level_profile(const MorseSystem& sys, const Trajectory& tr, double a, double b) {
  std::vector<Point> out;
  out.reserve(kSeparationLevels - 1);
  for (int k = 1; k < kSeparationLevels; ++k) {
    const double level = a + (b - a) * static_cast<double>(k) / kSeparationLevels;
    out.push_back(point_at_level(sys, tr, level).value_or(tr.samples.front().x));
  }
  return out;
}

}  // namespace detail

/// Largest distance between the two curves over matched F-levels strictly
/// between F(terminus) and F(origin).
inline double trajectory_separation(const MorseSystem& sys, const Trajectory& g1, const Trajectory& g2) {
  const double a = g1.terminus.value;
  const double b = g1.origin.value;
  const auto p1 = detail::level_profile(sys, g1, a, b);
  const auto p2 = detail::level_profile(sys, g2, a, b);
  double sep = 0.0;
  for (std::size_t k = 0; k < p1.size(); ++k) sep = std::max(sep, sys.manifold().distance(p1[k], p2[k]));
  return sep;
}

/// Shoots flow lines from a ring of radius 100 * endpoint_tol around the
/// maximum p and returns the two that reach a common minimum q with the
/// largest level-matched separation. Ties (within 1e-9) keep the lowest ring
/// indices.
inline TrajectoryPair find_trajectory_pair(const MorseSystem& sys, const FlowParams& params = {},
                                           int ring_count = 64) {
  params.validate();
  if (ring_count < 2) throw Error(ErrorKind::Precondition, "ring needs at least two shots");
  const Manifold& m = sys.manifold();
  const auto crit = find_critical_points(sys);
  const CriticalPoint& p = crit.front();
  const auto [e1, e2] = m.tangent_basis(p.location);
  const double radius = 100.0 * params.endpoint_tol;

  std::vector<std::optional<Trajectory>> shots(static_cast<std::size_t>(ring_count));
  parallel_for(
      shots.size(),
      [&](std::size_t k) {
        const double theta = 2.0 * kPi * static_cast<double>(k) / ring_count;
        const Point seed = m.offset(p.location, e1, e2, radius, theta);
        try {
          shots[k] = trajectory_through(sys, seed, params, crit);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::NoConvergence) throw;
        }
      },
      1);

  std::vector<std::vector<Point>> profiles(shots.size());
  for (std::size_t k = 0; k < shots.size(); ++k) {
    if (!shots[k] || m.distance(shots[k]->origin.location, p.location) > 1e-9) {
      shots[k].reset();
      continue;
    }
    profiles[k] = detail::level_profile(sys, *shots[k], shots[k]->terminus.value, p.value);
  }

  double best = -1.0;
  std::size_t bi = 0;
  std::size_t bj = 0;
  for (std::size_t i = 0; i < shots.size(); ++i) {
    if (!shots[i]) continue;
    for (std::size_t j = i + 1; j < shots.size(); ++j) {
      if (!shots[j]) continue;
      if (m.distance(shots[i]->terminus.location, shots[j]->terminus.location) > 1e-9) continue;
      double sep = 0.0;
      for (std::size_t k = 0; k < profiles[i].size(); ++k)
        sep = std::max(sep, m.distance(profiles[i][k], profiles[j][k]));
      if (sep > best + 1e-9) {
        best = sep;
        bi = i;
        bj = j;
      }
    }
  }
  if (best <= 0.0) throw Error(ErrorKind::PairNotFound, "fewer than two distinct trajectories to a common minimum");

  TrajectoryPair pair;
  pair.p = p;
  pair.q = shots[bi]->terminus;
  pair.gamma1 = std::move(*shots[bi]);
  pair.gamma2 = std::move(*shots[bj]);
  pair.separation = best;
  return pair;
}

}  // namespace hyshadow

#endif  // HYSHADOW_FLOW_HPP
