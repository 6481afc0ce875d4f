#ifndef HYSHADOW_MORSE_HPP
#define HYSHADOW_MORSE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "hyshadow/error.hpp"
#include "hyshadow/geometry.hpp"

namespace hyshadow {

enum class FunctionId { SphereHeight, TorusCosCos };

struct Evaluation {
  double value = 0.0;
  Vec3 gradient;
};

struct CriticalPoint {
  Point location;
  double value = 0.0;
  int index = 0;
  std::array<double, 2> hessian_eigenvalues{};
};

struct ModuliDimension {
  int dim_M = 0;
  int dim_Mhat = 0;
};

/// A built-in Morse function together with the manifold it lives on.
///
/// SphereHeight: F(x, y, z) = z on the unit sphere; its gradient is the
/// tangential part of e_z. TorusCosCos: F(u, v) = cos 2*pi*u + cos 2*pi*v on
/// the flat torus.
class MorseSystem {
 public:
  MorseSystem(Manifold manifold, FunctionId id, double newton_tol = 1e-12)
      : manifold_(manifold), id_(id), newton_tol_(newton_tol) {
    const bool ok = (id == FunctionId::SphereHeight) == manifold.is_sphere();
    if (!ok) throw Error(ErrorKind::Precondition, "function is not defined on this manifold");
  }

  static MorseSystem sphere_height() { return {Manifold::sphere(), FunctionId::SphereHeight}; }
  static MorseSystem torus_coscos() { return {Manifold::torus(), FunctionId::TorusCosCos}; }

  static MorseSystem from_name(const std::string& name) {
    if (name == "sphere") return sphere_height();
    if (name == "torus") return torus_coscos();
    throw Error(ErrorKind::Parse, "unknown system '" + name + "'");
  }

  std::string name() const { return id_ == FunctionId::SphereHeight ? "sphere" : "torus"; }

  const Manifold& manifold() const { return manifold_; }
  FunctionId function_id() const { return id_; }
  double newton_tol() const { return newton_tol_; }

  double value(const Point& x) const {
    if (id_ == FunctionId::SphereHeight) return x.z;
    return std::cos(2.0 * kPi * x.x) + std::cos(2.0 * kPi * x.y);
  }

  Vec3 gradient(const Point& x) const {
    if (id_ == FunctionId::SphereHeight) return Vec3{0.0, 0.0, 1.0} - x * x.z;
    return {-2.0 * kPi * std::sin(2.0 * kPi * x.x), -2.0 * kPi * std::sin(2.0 * kPi * x.y), 0.0};
  }

  Evaluation evaluate(const Point& x) const {
    manifold_.check(x);
    return {value(x), gradient(x)};
  }

  /// Eigenvalues of the Riemannian Hessian at x, closed form. On the round
  /// sphere Hess(z) = -z * Id on the tangent plane; on the flat torus the
  /// coordinate Hessian is diagonal.
  std::array<double, 2> hessian_eigenvalues(const Point& x) const {
    if (id_ == FunctionId::SphereHeight) return {-x.z, -x.z};
    const double c = -4.0 * kPi * kPi;
    std::array<double, 2> ev{c * std::cos(2.0 * kPi * x.x), c * std::cos(2.0 * kPi * x.y)};
    std::sort(ev.begin(), ev.end());
    return ev;
  }

  /// Number of critical points the built-in function is known to have.
  std::size_t expected_critical_count() const { return id_ == FunctionId::SphereHeight ? 2 : 4; }

 private:
  Manifold manifold_;
  FunctionId id_;
  double newton_tol_;
};

namespace detail {

inline bool newton_step(const MorseSystem& sys, Point& x) {
  const Manifold& m = sys.manifold();
  const Vec3 g = sys.gradient(x);
  if (sys.function_id() == FunctionId::SphereHeight) {
    // Hess = -z Id, so the Newton update is x + g / z followed by the
    // radial retraction.
    if (std::abs(x.z) < 1e-14) return false;
    x = m.project(x + g * (1.0 / x.z));
  } else {
    const double hu = -4.0 * kPi * kPi * std::cos(2.0 * kPi * x.x);
    const double hv = -4.0 * kPi * kPi * std::cos(2.0 * kPi * x.y);
    if (std::abs(hu) < 1e-14 || std::abs(hv) < 1e-14) return false;
    x = m.project({x.x - g.x / hu, x.y - g.y / hv, 0.0});
  }
  return true;
}

inline Point newton_refine(const MorseSystem& sys, Point x, bool& converged) {
  converged = false;
  for (int it = 0; it < 100; ++it) {
    if (norm(sys.gradient(x)) < sys.newton_tol()) {
      converged = true;
      break;
    }
    if (!newton_step(sys, x)) return x;
  }
  if (!converged) return x;
  // Polish while the gradient keeps shrinking, so that the point is a fixed
  // point of the integrator when the arithmetic allows it.
  for (int it = 0; it < 4; ++it) {
    const double g0 = norm(sys.gradient(x));
    if (g0 == 0.0) break;
    Point y = x;
    if (!newton_step(sys, y) || !(norm(sys.gradient(y)) < g0)) break;
    x = y;
  }
  return x;
}

}  // namespace detail

/// Newton refinement from a 32x32 seed grid, deduplicated within 1e-6. Sorted
/// by decreasing value, then by coordinates.
inline std::vector<CriticalPoint> find_critical_points(const MorseSystem& sys) {
  const Manifold& m = sys.manifold();
  constexpr int kGrid = 32;
  std::vector<CriticalPoint> found;
  for (int i = 0; i < kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      const double s = (i + 0.5) / kGrid;
      const double t = (j + 0.5) / kGrid;
      Point seed;
      if (m.is_sphere()) {
        const double theta = kPi * s;
        const double phi = 2.0 * kPi * t;
        seed = {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
      } else {
        seed = {s, t, 0.0};
      }
      bool converged = false;
      const Point x = detail::newton_refine(sys, seed, converged);
      if (!converged) continue;
      const bool duplicate = std::any_of(found.begin(), found.end(), [&](const CriticalPoint& c) {
        return m.distance(c.location, x) < 1e-6;
      });
      if (duplicate) continue;
      CriticalPoint cp;
      cp.location = x;
      cp.value = sys.value(x);
      cp.hessian_eigenvalues = sys.hessian_eigenvalues(x);
      for (double ev : cp.hessian_eigenvalues) {
        if (std::abs(ev) <= sys.newton_tol())
          throw Error(ErrorKind::IncompleteDetection, "degenerate critical point encountered");
        if (ev < 0.0) ++cp.index;
      }
      found.push_back(cp);
    }
  }
  if (found.size() != sys.expected_critical_count())
    throw Error(ErrorKind::IncompleteDetection,
                "found " + std::to_string(found.size()) + " critical points, expected " +
                    std::to_string(sys.expected_critical_count()));
  std::sort(found.begin(), found.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.location.x != b.location.x) return a.location.x < b.location.x;
    if (a.location.y != b.location.y) return a.location.y < b.location.y;
    return a.location.z < b.location.z;
  });
  return found;
}

inline ModuliDimension moduli_dimension(const MorseSystem& sys, const CriticalPoint& p,
                                        const CriticalPoint& q) {
  if (sys.manifold().distance(p.location, q.location) < 1e-9)
    throw Error(ErrorKind::DegeneratePair, "moduli space needs two distinct critical points");
  const int dim = p.index - q.index;
  return {dim, dim - 1};
}

/// Sum of (-1)^index over the critical points.
inline int alternating_index_sum(const std::vector<CriticalPoint>& cps) {
  int sum = 0;
  for (const auto& c : cps) sum += (c.index % 2 == 0) ? 1 : -1;
  return sum;
}

}  // namespace hyshadow

#endif  // HYSHADOW_MORSE_HPP
