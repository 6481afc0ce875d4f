#ifndef HYSHADOW_HYPERSPACE_HPP
#define HYSHADOW_HYPERSPACE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <utility>
#include <vector>

#include "hyshadow/error.hpp"
#include "hyshadow/flow.hpp"
#include "hyshadow/geometry.hpp"
#include "hyshadow/morse.hpp"
#include "hyshadow/parallel.hpp"
#include "hyshadow/spatial.hpp"

namespace hyshadow {

/// Finite sample standing for a subcontinuum: every point is on the manifold
/// and the graph joining points at distance <= 2h is connected.
struct Continuum {
  std::vector<Point> points;
  double h = 0.0;
};

struct HausdorffResult {
  double value = 0.0;
  double directed_ab = 0.0;  ///< sup over A of the distance to B
  double directed_ba = 0.0;
  std::pair<Point, Point> witness_ab;  ///< (a in A, its nearest point in B)
  std::pair<Point, Point> witness_ba;  ///< (b in B, its nearest point in A)

  /// Witness pair attaining value.
  std::pair<Point, Point> witness() const { return directed_ab >= directed_ba ? witness_ab : witness_ba; }
};

using Edge = std::pair<std::size_t, std::size_t>;

/// Cell size for nearest-neighbour grids: a few points per occupied cell for
/// curve-like samples.
inline double nearest_cell_hint(const Manifold& m, std::size_t n) {
  const double count = static_cast<double>(std::max<std::size_t>(n, 1));
  if (m.is_sphere()) return 2.0 / std::max(1.0, 1.5 * std::cbrt(count));
  return 1.0 / std::max(1.0, std::sqrt(count));
}

/// BFS spanning forest of the graph with edges of length <= radius. Trees are
/// rooted at the lowest unvisited index and children are visited in index
/// order, so the forest is a pure function of the point list.
inline std::vector<Edge> spanning_forest(const Manifold& m, const std::vector<Point>& pts, double radius,
                                         std::size_t* components = nullptr) {
  std::vector<Edge> edges;
  std::size_t comps = 0;
  if (!pts.empty()) {
    const PointIndex index(m, pts, radius);
    std::vector<char> seen(pts.size(), 0);
    std::deque<std::size_t> queue;
    for (std::size_t root = 0; root < pts.size(); ++root) {
      if (seen[root]) continue;
      ++comps;
      seen[root] = 1;
      queue.push_back(root);
      while (!queue.empty()) {
        const std::size_t u = queue.front();
        queue.pop_front();
        for (std::size_t v : index.within(pts[u], radius)) {
          if (seen[v]) continue;
          seen[v] = 1;
          edges.emplace_back(u, v);
          queue.push_back(v);
        }
      }
    }
  }
  if (components) *components = comps;
  return edges;
}

inline bool is_h_connected(const Manifold& m, const Continuum& c) {
  if (c.points.empty()) return false;
  std::size_t comps = 0;
  spanning_forest(m, c.points, 2.0 * c.h, &comps);
  return comps == 1;
}

inline void validate_continuum(const Manifold& m, const Continuum& c) {
  if (c.points.empty()) throw Error(ErrorKind::EmptyContinuum, "continuum has no points");
  if (!(c.h > 0.0) || !std::isfinite(c.h)) throw Error(ErrorKind::Resolution, "resolution h must be positive");
  for (const auto& p : c.points) m.check(p);
  if (!is_h_connected(m, c)) throw Error(ErrorKind::Resolution, "sample is not connected at resolution h");
}

inline Continuum make_continuum(const Manifold& m, std::vector<Point> pts, double h) {
  Continuum c{std::move(pts), h};
  validate_continuum(m, c);
  return c;
}

inline Continuum singleton(const Point& p, double h) { return {{p}, h}; }

namespace detail {

struct Directed {
  double value = -1.0;
  std::size_t from = 0;
  std::size_t to = 0;
};

inline Directed reduce_directed(const std::vector<PointIndex::Hit>& hits) {
  Directed d;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i].dist > d.value) d = {hits[i].dist, i, hits[i].index};
  }
  return d;
}

inline HausdorffResult assemble(const Continuum& A, const Continuum& B, const Directed& ab, const Directed& ba) {
  HausdorffResult r;
  r.directed_ab = ab.value;
  r.directed_ba = ba.value;
  r.value = std::max(ab.value, ba.value);
  r.witness_ab = {A.points[ab.from], B.points[ab.to]};
  r.witness_ba = {B.points[ba.from], A.points[ba.to]};
  return r;
}

inline void require_nonempty(const Continuum& A, const Continuum& B) {
  if (A.points.empty() || B.points.empty()) throw Error(ErrorKind::EmptyContinuum, "Hausdorff distance of an empty set");
}

}  // namespace detail

/// Reference O(|A||B|) double sup-inf.
inline HausdorffResult hausdorff_brute(const Manifold& m, const Continuum& A, const Continuum& B) {
  detail::require_nonempty(A, B);
  auto directed = [&](const Continuum& X, const Continuum& Y) {
    std::vector<PointIndex::Hit> hits(X.points.size());
    for (std::size_t i = 0; i < X.points.size(); ++i) {
      PointIndex::Hit best;
      for (std::size_t j = 0; j < Y.points.size(); ++j) {
        const double d = m.distance(X.points[i], Y.points[j]);
        if (d < best.dist) best = {d, j};
      }
      hits[i] = best;
    }
    return detail::reduce_directed(hits);
  };
  return detail::assemble(A, B, directed(A, B), directed(B, A));
}

/// Grid-accelerated Hausdorff distance; bit-identical to hausdorff_brute,
/// witnesses included.
inline HausdorffResult hausdorff(const Manifold& m, const Continuum& A, const Continuum& B) {
  detail::require_nonempty(A, B);
  auto directed = [&](const Continuum& X, const Continuum& Y) {
    const PointIndex index(m, Y.points, nearest_cell_hint(m, Y.points.size()));
    std::vector<PointIndex::Hit> hits(X.points.size());
    parallel_for(X.points.size(), [&](std::size_t i) { hits[i] = index.nearest(X.points[i]); }, 64);
    return detail::reduce_directed(hits);
  };
  return detail::assemble(A, B, directed(A, B), directed(B, A));
}

/// d(x, A) over the sample points.
inline double distance_to(const Manifold& m, const Point& x, const Continuum& A) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& a : A.points) best = std::min(best, m.distance(x, a));
  return best;
}

/// d(x, A) < eps. Infinite or non-positive eps is rejected.
inline bool in_neighborhood(const Manifold& m, const Point& x, const Continuum& A, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(ErrorKind::Precondition, "eps must be finite and positive");
  return distance_to(m, x, A) < eps;
}

/// Subdivides the edges of the 2h spanning forest until each is at most
/// target_gap; the result has resolution target_gap / 2.
inline Continuum refine(const Manifold& m, const Continuum& A, double target_gap) {
  if (!(target_gap > 0.0)) throw Error(ErrorKind::Precondition, "target_gap must be positive");
  Continuum out{A.points, 0.5 * target_gap};
  for (const auto& [i, j] : spanning_forest(m, A.points, 2.0 * A.h)) {
    const Point& a = A.points[i];
    const Point& b = A.points[j];
    const double d = m.distance(a, b);
    if (d <= target_gap) continue;
    auto pieces = static_cast<long>(std::ceil(d / target_gap));
    while (m.distance(a, m.interpolate(a, b, 1.0 / pieces)) > target_gap) ++pieces;
    for (long s = 1; s < pieces; ++s) out.points.push_back(m.interpolate(a, b, static_cast<double>(s) / pieces));
  }
  return out;
}

/// Greedy thinning: a point is kept unless an already kept point lies within
/// r. Points flagged in first (when given) are visited before the rest; each
/// group is visited in index order and the output keeps index order.
inline std::vector<Point> thin(const Manifold& m, const std::vector<Point>& pts, double r,
                               const std::vector<char>* first = nullptr) {
  const PointIndex index(m, pts, r);
  std::vector<char> kept(pts.size(), 0);
  auto visit = [&](std::size_t i) {
    for (std::size_t j : index.within(pts[i], r))
      if (kept[j]) return;
    kept[i] = 1;
  };
  if (first) {
    for (std::size_t i = 0; i < pts.size(); ++i)
      if ((*first)[i]) visit(i);
  }
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (!first || !(*first)[i]) visit(i);
  std::vector<Point> out;
  out.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (kept[i]) out.push_back(pts[i]);
  return out;
}

namespace detail {

inline constexpr double kThinFactor = 0.45;
inline constexpr int kMaxRefineRounds = 24;
inline constexpr long kMaxPiecesPerEdge = 1 << 16;

inline void map_range(const MorseSystem& sys, const std::vector<Point>& src, std::vector<Point>& dst,
                      std::size_t first, double t, const FlowParams& params) {
  parallel_for(src.size() - first, [&](std::size_t k) {
    dst[first + k] = integrate_unchecked(sys, src[first + k], t, params);
  });
}

}  // namespace detail

/// One application of C(f) (dir = +1) or of its inverse (dir = -1).
///
/// Points are mapped with the integrator. Each spanning edge whose image is
/// longer than h is split using its own finite-difference expansion estimate
/// with a safety factor of 2, and the new points are mapped, until every
/// image edge is at most h. The image is then thinned at radius 0.45h, which
/// keeps it connected at 2h and moves it by less than h/2 in d_H; exact
/// fixed points survive the thinning.
inline Continuum induced_step(const MorseSystem& sys, const Continuum& A, int dir, const FlowParams& params = {}) {
  const Manifold& m = sys.manifold();
  if (A.points.empty()) throw Error(ErrorKind::EmptyContinuum, "cannot map an empty continuum");
  const double h = A.h;
  const double t = dir < 0 ? -1.0 : 1.0;
  std::vector<Point> src = A.points;
  std::vector<Point> img(src.size());
  detail::map_range(sys, src, img, 0, t, params);

  std::vector<Edge> pending = spanning_forest(m, src, 2.0 * h);
  for (int round = 0; !pending.empty(); ++round) {
    if (round >= detail::kMaxRefineRounds)
      throw Error(ErrorKind::Resolution, "image edges did not resolve under refinement");
    std::vector<Edge> next;
    const std::size_t first_new = src.size();
    for (const auto& [i, j] : pending) {
      const double di = m.distance(img[i], img[j]);
      if (di <= h) continue;
      const auto pieces = std::max<long>(2, static_cast<long>(std::ceil(2.0 * di / h)));
      if (pieces > detail::kMaxPiecesPerEdge)
        throw Error(ErrorKind::Resolution, "local expansion too large to resolve");
      std::size_t prev = i;
      const Point a = src[i];
      const Point b = src[j];
      for (long s = 1; s < pieces; ++s) {
        src.push_back(m.interpolate(a, b, static_cast<double>(s) / pieces));
        next.emplace_back(prev, src.size() - 1);
        prev = src.size() - 1;
      }
      next.emplace_back(prev, j);
    }
    img.resize(src.size());
    detail::map_range(sys, src, img, first_new, t, params);
    pending = std::move(next);
  }
  // Exact fixed points of the integrator are kept first: a nearby sample
  // standing in for one would drift off under the expanding direction.
  std::vector<char> fixed(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) fixed[i] = img[i] == src[i];
  return {thin(m, img, detail::kThinFactor * h, &fixed), h};
}

/// C(f)^n, composed one step at a time; n = 0 returns A unchanged.
inline Continuum induced_iterate(const MorseSystem& sys, const Continuum& A, int n, const FlowParams& params = {}) {
  Continuum out = A;
  for (int k = 0; k < std::abs(n); ++k) out = induced_step(sys, out, n < 0 ? -1 : 1, params);
  return out;
}

}  // namespace hyshadow

#endif  // HYSHADOW_HYPERSPACE_HPP
