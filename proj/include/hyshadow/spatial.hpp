#ifndef HYSHADOW_SPATIAL_HPP
#define HYSHADOW_SPATIAL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "hyshadow/geometry.hpp"

namespace hyshadow {

/// Uniform-grid bucketing of a point set for exact nearest-neighbour and
/// radius queries. Sphere points are bucketed in a bounded 3-D grid over
/// their bounding box; torus points in a periodic 2-D grid over the square.
///
/// Queries visit cells in Chebyshev shells around the query cell and stop
/// only once every unvisited point is provably farther than the best
/// candidate, so results (including lowest-index tie-breaking) are identical
/// to a linear scan.
class PointIndex {
 public:
  struct Hit {
    double dist = std::numeric_limits<double>::infinity();
    std::size_t index = 0;
  };

  PointIndex(const Manifold& m, std::vector<Point> pts, double cell) : m_(m), pts_(std::move(pts)) {
    if (m_.is_sphere()) {
      lo_ = pts_.empty() ? Vec3{} : pts_.front();
      Vec3 hi = lo_;
      for (const auto& p : pts_) {
        lo_ = {std::min(lo_.x, p.x), std::min(lo_.y, p.y), std::min(lo_.z, p.z)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
      }
      const double ext = std::max({hi.x - lo_.x, hi.y - lo_.y, hi.z - lo_.z});
      cell_ = std::max({cell, ext / kMaxSphereCells, 1e-9});
      n_[0] = axis_count(hi.x - lo_.x);
      n_[1] = axis_count(hi.y - lo_.y);
      n_[2] = axis_count(hi.z - lo_.z);
    } else {
      const auto n = static_cast<int>(std::clamp(std::floor(1.0 / std::max(cell, 1e-9)), 1.0,
                                                 static_cast<double>(kMaxTorusCells)));
      n_[0] = n_[1] = n;
      n_[2] = 1;
      cell_ = 1.0 / n;
    }
    const std::size_t ncells = static_cast<std::size_t>(n_[0]) * n_[1] * n_[2];
    std::vector<std::size_t> cell_of(pts_.size());
    start_.assign(ncells + 1, 0);
    for (std::size_t i = 0; i < pts_.size(); ++i) {
      const auto c = cell_coords(pts_[i]);
      cell_of[i] = flat(clamp_axis(c[0], 0), clamp_axis(c[1], 1), clamp_axis(c[2], 2));
      ++start_[cell_of[i] + 1];
    }
    for (std::size_t c = 0; c < ncells; ++c) start_[c + 1] += start_[c];
    order_.resize(pts_.size());
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < pts_.size(); ++i) order_[fill[cell_of[i]]++] = i;
  }

  const std::vector<Point>& points() const { return pts_; }
  std::size_t size() const { return pts_.size(); }
  double cell_size() const { return cell_; }

  Hit nearest(const Point& q) const {
    Hit best;
    if (pts_.empty()) return best;
    const auto qc = cell_coords(q);
    for (int k = 0;; ++k) {
      visit_shell(qc, k, [&](std::size_t c) {
        for (std::size_t s = start_[c]; s < start_[c + 1]; ++s) {
          const std::size_t i = order_[s];
          const double d = m_.distance(q, pts_[i]);
          if (d < best.dist || (d == best.dist && i < best.index)) best = {d, i};
        }
      });
      if (covers_all(qc, k)) break;
      if (k > 0 && best.dist < k * cell_ * (1.0 - 1e-12) - 1e-12) break;
    }
    return best;
  }

  /// Indices of points within distance r (inclusive), ascending.
  std::vector<std::size_t> within(const Point& q, double r) const {
    std::vector<std::size_t> out;
    if (pts_.empty()) return out;
    const auto qc = cell_coords(q);
    const int kmax = static_cast<int>(std::ceil(r / cell_)) + 1;
    for (int k = 0; k <= kmax; ++k) {
      visit_shell(qc, k, [&](std::size_t c) {
        for (std::size_t s = start_[c]; s < start_[c + 1]; ++s) {
          const std::size_t i = order_[s];
          if (m_.distance(q, pts_[i]) <= r) out.push_back(i);
        }
      });
      if (covers_all(qc, k)) break;
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  static constexpr double kMaxSphereCells = 64.0;
  static constexpr int kMaxTorusCells = 256;

  int axis_count(double extent) const { return static_cast<int>(std::floor(extent / cell_)) + 1; }

  std::array<std::int64_t, 3> cell_coords(const Point& p) const {
    if (m_.is_sphere()) {
      return {static_cast<std::int64_t>(std::floor((p.x - lo_.x) / cell_)),
              static_cast<std::int64_t>(std::floor((p.y - lo_.y) / cell_)),
              static_cast<std::int64_t>(std::floor((p.z - lo_.z) / cell_))};
    }
    const auto n = static_cast<std::int64_t>(n_[0]);
    return {std::min(n - 1, static_cast<std::int64_t>(std::floor(wrap_unit(p.x) * n))),
            std::min(n - 1, static_cast<std::int64_t>(std::floor(wrap_unit(p.y) * n))), 0};
  }

  std::int64_t clamp_axis(std::int64_t c, int axis) const {
    return std::clamp<std::int64_t>(c, 0, n_[axis] - 1);
  }

  std::size_t flat(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return static_cast<std::size_t>((k * n_[1] + j) * n_[0] + i);
  }

  bool covers_all(const std::array<std::int64_t, 3>& qc, int k) const {
    if (!m_.is_sphere()) return k >= n_[0] / 2;
    for (int a = 0; a < 3; ++a)
      if (qc[a] - k > 0 || qc[a] + k < n_[a] - 1) return false;
    return true;
  }

  template <typename Fn>
  void visit_shell(const std::array<std::int64_t, 3>& qc, int k, Fn&& fn) const {
    if (m_.is_sphere()) {
      for (std::int64_t dx = -k; dx <= k; ++dx) {
        const std::int64_t ix = qc[0] + dx;
        if (ix < 0 || ix >= n_[0]) continue;
        for (std::int64_t dy = -k; dy <= k; ++dy) {
          const std::int64_t iy = qc[1] + dy;
          if (iy < 0 || iy >= n_[1]) continue;
          const bool face = std::abs(dx) == k || std::abs(dy) == k;
          const std::int64_t step = face ? 1 : std::max<std::int64_t>(2 * k, 1);
          for (std::int64_t dz = -k; dz <= k; dz += step) {
            const std::int64_t iz = qc[2] + dz;
            if (iz < 0 || iz >= n_[2]) continue;
            fn(flat(ix, iy, iz));
          }
        }
      }
      return;
    }
    const std::int64_t n = n_[0];
    if (k > n / 2) return;
    const std::int64_t lo = (2 * k == n) ? -k + 1 : -k;
    for (std::int64_t dx = lo; dx <= k; ++dx) {
      const std::int64_t ix = ((qc[0] + dx) % n + n) % n;
      for (std::int64_t dy = lo; dy <= k; ++dy) {
        if (std::abs(dx) != k && std::abs(dy) != k) continue;
        const std::int64_t iy = ((qc[1] + dy) % n + n) % n;
        fn(flat(ix, iy, 0));
      }
    }
  }

  Manifold m_;
  std::vector<Point> pts_;
  Vec3 lo_;
  double cell_ = 1.0;
  std::array<std::int64_t, 3> n_{1, 1, 1};
  std::vector<std::size_t> start_;
  std::vector<std::size_t> order_;
};

}  // namespace hyshadow

#endif  // HYSHADOW_SPATIAL_HPP
