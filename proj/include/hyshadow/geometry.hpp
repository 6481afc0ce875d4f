#ifndef HYSHADOW_GEOMETRY_HPP
#define HYSHADOW_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "hyshadow/error.hpp"

namespace hyshadow {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr bool operator==(const Vec3&) const = default;
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }
constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

/// A point of a model manifold in its ambient coordinates. Sphere2 uses all
/// three components; FlatTorus2 stores (u, v) in x, y with z = 0.
using Point = Vec3;

enum class ManifoldKind { Sphere2, FlatTorus2 };

inline const char* to_string(ManifoldKind k) {
  return k == ManifoldKind::Sphere2 ? "sphere2" : "torus2";
}

inline ManifoldKind manifold_kind_from_string(const std::string& s) {
  if (s == "sphere2") return ManifoldKind::Sphere2;
  if (s == "torus2") return ManifoldKind::FlatTorus2;
  throw Error(ErrorKind::Parse, "unknown manifold '" + s + "'");
}

/// Reduces a real into [0, 1).
inline double wrap_unit(double t) {
  double r = t - std::floor(t);
  return r >= 1.0 ? 0.0 : r;
}

/// Signed representative of t mod 1 in [-1/2, 1/2).
inline double wrap_signed(double t) {
  double r = wrap_unit(t + 0.5) - 0.5;
  return r;
}

/// Unit 2-sphere (chordal metric) or the flat torus [0,1)^2 (quotient metric).
class Manifold {
 public:
  explicit Manifold(ManifoldKind kind, double on_manifold_tol = 1e-9)
      : kind_(kind), tol_(on_manifold_tol) {}

  static Manifold sphere() { return Manifold(ManifoldKind::Sphere2); }
  static Manifold torus() { return Manifold(ManifoldKind::FlatTorus2); }

  ManifoldKind kind() const { return kind_; }
  bool is_sphere() const { return kind_ == ManifoldKind::Sphere2; }
  int dimension() const { return 2; }
  double on_manifold_tol() const { return tol_; }

  bool is_valid(const Point& p) const {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) return false;
    if (is_sphere()) return std::abs(dot(p, p) - 1.0) <= tol_;
    return p.z == 0.0 && p.x >= 0.0 && p.x < 1.0 && p.y >= 0.0 && p.y < 1.0;
  }

  void check(const Point& p) const {
    if (!is_valid(p)) throw Error(ErrorKind::InvalidPoint, "point is not on " + std::string(to_string(kind_)));
  }

  /// Distance without validation; the hot loops call this.
  double distance(const Point& a, const Point& b) const {
    if (is_sphere()) return norm(a - b);
    const double du = torus_gap(a.x - b.x);
    const double dv = torus_gap(a.y - b.y);
    return std::sqrt(du * du + dv * dv);
  }

  double dist(const Point& a, const Point& b) const {
    check(a);
    check(b);
    return distance(a, b);
  }

  Point project(const Vec3& raw) const {
    if (is_sphere()) {
      const double n = norm(raw);
      if (!(n > 0.0) || !std::isfinite(n))
        throw Error(ErrorKind::ProjectionUndefined, "cannot normalize a zero vector");
      return raw * (1.0 / n);
    }
    return {wrap_unit(raw.x), wrap_unit(raw.y), 0.0};
  }

  /// Orthonormal tangent frame at p. On the sphere the frame at the poles is
  /// (e_x, e_y), so "azimuth 0" there points along +x.
  std::pair<Vec3, Vec3> tangent_basis(const Point& p) const {
    if (!is_sphere()) return {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
    Vec3 seed = std::abs(p.z) > 0.5 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 0.0, 1.0};
    Vec3 e1 = seed - p * dot(seed, p);
    e1 = e1 * (1.0 / norm(e1));
    Vec3 e2 = cross(p, e1);
    return {e1, e2};
  }

  /// Moves from p along tangent vector v: geodesic on the sphere, translation
  /// mod 1 on the torus.
  Point exp(const Point& p, const Vec3& v) const {
    if (!is_sphere()) return project(p + v);
    const double len = norm(v);
    if (len == 0.0) return p;
    return project(p * std::cos(len) + v * (std::sin(len) / len));
  }

  /// Point at chord distance rho from p in direction angle theta of the
  /// tangent frame.
  Point offset(const Point& p, const Vec3& e1, const Vec3& e2, double rho, double theta) const {
    const Vec3 dir = e1 * std::cos(theta) + e2 * std::sin(theta);
    if (!is_sphere()) return project(p + dir * rho);
    const double angle = 2.0 * std::asin(std::min(1.0, rho / 2.0));
    return exp(p, dir * angle);
  }

  /// Shortest-path interpolation: slerp on the sphere, straight mod-1
  /// segment on the torus. s in [0, 1].
  Point interpolate(const Point& a, const Point& b, double s) const {
    if (!is_sphere()) {
      const double du = wrap_signed(b.x - a.x);
      const double dv = wrap_signed(b.y - a.y);
      return {wrap_unit(a.x + s * du), wrap_unit(a.y + s * dv), 0.0};
    }
    const double c = std::clamp(dot(a, b), -1.0, 1.0);
    const double angle = std::acos(c);
    if (angle < 1e-12) return project(a * (1.0 - s) + b * s);
    const double sn = std::sin(angle);
    return project(a * (std::sin((1.0 - s) * angle) / sn) + b * (std::sin(s * angle) / sn));
  }

 private:
  static double torus_gap(double d) {
    d = std::abs(d);
    d -= std::floor(d);
    return std::min(d, 1.0 - d);
  }

  ManifoldKind kind_;
  double tol_;
};

}  // namespace hyshadow

#endif  // HYSHADOW_GEOMETRY_HPP
