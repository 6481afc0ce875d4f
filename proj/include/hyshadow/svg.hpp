#ifndef HYSHADOW_SVG_HPP
#define HYSHADOW_SVG_HPP

#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "hyshadow/counterexample.hpp"

namespace hyshadow {

/// Everything a figure can show. Empty members are simply not drawn.
struct FigureData {
  std::string system;
  BandConfig band;
  double eps = 0.0;
  std::vector<std::pair<int, Continuum>> snapshots;
  std::vector<Continuum> candidates;
  std::vector<std::pair<Point, Point>> witnesses;
};

/// Five evenly spaced indices -N, -N/2, 0, N/2, N (fewer when N is small).
inline std::vector<int> snapshot_indices(int N) {
  std::vector<int> out;
  for (int k = 0; k <= 4; ++k) {
    const int n = -N + static_cast<int>(std::lround(k * (2.0 * N) / 4.0));
    if (out.empty() || out.back() != n) out.push_back(n);
  }
  return out;
}

inline FigureData figure_from_orbit(const PseudoOrbit& po) {
  FigureData d;
  d.system = po.system;
  d.band = po.band;
  d.eps = po.eps;
  for (int n : snapshot_indices(po.N)) d.snapshots.emplace_back(n, po.at(n));
  return d;
}

namespace detail {

inline constexpr double kCanvas = 640.0;
inline constexpr double kPlotResolution = 0.01;

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s(buf);
  if (s == "-0.00") s = "0.00";
  return s;
}

struct ScreenPoint {
  double x = 0.0;
  double y = 0.0;
  bool front = true;
};

/// Orthographic camera for the sphere; the flat square for the torus.
class Camera {
 public:
  Camera(const Manifold& m, const Point& gamma_mid) : sphere_(m.is_sphere()) {
    if (!sphere_) return;
    // Look at the trajectory plane from 50 degrees off its normal, slightly
    // from above.
    Vec3 e{gamma_mid.x, gamma_mid.y, 0.0};
    if (norm(e) < 1e-9) e = {1.0, 0.0, 0.0};
    e = e * (1.0 / norm(e));
    const Vec3 ep{-e.y, e.x, 0.0};
    const double beta = 50.0 * kPi / 180.0;
    const double elev = 20.0 * kPi / 180.0;
    const Vec3 horiz = ep * std::cos(beta) + e * std::sin(beta);
    view_ = horiz * std::cos(elev) + Vec3{0.0, 0.0, std::sin(elev)};
    right_ = cross(Vec3{0.0, 0.0, 1.0}, view_);
    right_ = right_ * (1.0 / norm(right_));
    up_ = cross(view_, right_);
  }

  ScreenPoint project(const Point& p) const {
    const double c = 0.5 * kCanvas;
    if (sphere_) {
      const double r = 0.42 * kCanvas;
      return {c + r * dot(p, right_), c - r * dot(p, up_), dot(p, view_) >= 0.0};
    }
    const double lo = 0.08 * kCanvas;
    const double side = 0.84 * kCanvas;
    return {lo + side * wrap_unit(p.x), lo + side * (1.0 - wrap_unit(p.y)), true};
  }

  /// Screen jumps that are not real segments: torus wrap-around.
  bool breaks(const Point& a, const Point& b) const {
    if (sphere_) return false;
    return std::abs(wrap_unit(a.x) - wrap_unit(b.x)) > 0.5 || std::abs(wrap_unit(a.y) - wrap_unit(b.y)) > 0.5;
  }

 private:
  bool sphere_;
  Vec3 view_{0.0, 0.0, 1.0};
  Vec3 right_{1.0, 0.0, 0.0};
  Vec3 up_{0.0, 1.0, 0.0};
};

/// Polyline through pts, split where visibility flips or the torus wraps.
/// Front runs use cls, back runs cls + " back".
inline void polyline(std::string& out, const Camera& cam, const std::vector<Point>& pts, const std::string& cls) {
  std::vector<ScreenPoint> run;
  auto flush = [&] {
    if (run.size() >= 2) {
      out += "<polyline class=\"" + cls + (run.back().front ? "" : " back") + "\" points=\"";
      for (std::size_t i = 0; i < run.size(); ++i) {
        if (i) out += ' ';
        out += num(run[i].x) + "," + num(run[i].y);
      }
      out += "\"/>\n";
    }
    run.clear();
  };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const ScreenPoint sp = cam.project(pts[i]);
    if (!run.empty() && (run.back().front != sp.front || cam.breaks(pts[i - 1], pts[i]))) {
      const ScreenPoint keep = run.back();
      flush();
      if (keep.front != sp.front) run.push_back(keep);
    }
    run.push_back(sp);
  }
  flush();
}

inline void dots(std::string& out, const Camera& cam, const std::vector<Point>& pts, const std::string& cls) {
  for (const auto& p : pts) {
    const ScreenPoint sp = cam.project(p);
    out += "<circle class=\"" + cls + (sp.front ? "" : " back") + "\" cx=\"" + num(sp.x) + "\" cy=\"" + num(sp.y) +
           "\" r=\"1.6\"/>\n";
  }
}

/// Closed outline of the eps-neighbourhood of a sampled arc: both offset
/// sides joined by half-circle caps.
inline std::vector<Point> neighbourhood_outline(const Manifold& m, const std::vector<Point>& arc, double eps) {
  std::vector<Point> out;
  if (arc.size() < 2) return out;
  const double rho = m.is_sphere() ? 2.0 * std::asin(std::min(1.0, 0.5 * eps)) : eps;
  auto normal_at = [&](std::size_t i) {
    const Point& a = arc[i == 0 ? 0 : i - 1];
    const Point& b = arc[i + 1 < arc.size() ? i + 1 : i];
    const auto [e1, e2] = m.tangent_basis(arc[i]);
    Vec3 t = m.is_sphere() ? b - a : Vec3{wrap_signed(b.x - a.x), wrap_signed(b.y - a.y), 0.0};
    const double t1 = dot(t, e1);
    const double t2 = dot(t, e2);
    const double l = std::hypot(t1, t2);
    return std::pair{e1 * (-t2 / l) + e2 * (t1 / l), e1 * (t1 / l) + e2 * (t2 / l)};
  };
  constexpr int kCap = 12;
  for (std::size_t i = 0; i < arc.size(); ++i) out.push_back(m.exp(arc[i], normal_at(i).first * rho));
  {
    const auto [n, t] = normal_at(arc.size() - 1);
    for (int k = 1; k < kCap; ++k) {
      const double a = kPi * k / kCap;
      out.push_back(m.exp(arc.back(), (n * std::cos(a) + t * std::sin(a)) * rho));
    }
  }
  for (std::size_t i = arc.size(); i-- > 0;) out.push_back(m.exp(arc[i], normal_at(i).first * -rho));
  {
    const auto [n, t] = normal_at(0);
    for (int k = 1; k <= kCap; ++k) {
      const double a = kPi * k / kCap;
      out.push_back(m.exp(arc.front(), (n * -std::cos(a) - t * std::sin(a)) * rho));
    }
  }
  return out;
}

inline const char* snapshot_colour(std::size_t k) {
  static const char* colours[] = {"#b2182b", "#ef8a62", "#7f7f7f", "#67a9cf", "#2166ac"};
  return colours[k % 5];
}

}  // namespace detail

/// SVG 1.1 figure of the two trajectories, the band sets A1 and A2 with
/// their eps outlines, the chosen X_n snapshots, candidates and witness
/// segments. The bytes depend only on the input.
inline std::string render_svg(const MorseSystem& sys, const TrajectoryPair& pair, const FigureData& d,
                              const FlowParams& params = {}) {
  using namespace detail;
  const Manifold& m = sys.manifold();
  const double inf = std::numeric_limits<double>::infinity();
  const Camera cam(m, point_at_time(sys, pair.gamma1, 0.0, params));

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(kCanvas) + "\" height=\"" +
         num(kCanvas) + "\" viewBox=\"0 0 " + num(kCanvas) + " " + num(kCanvas) + "\">\n";
  out += "<style type=\"text/css\">\n"
         ".frame{fill:#fafafa;stroke:#444;stroke-width:1}\n"
         ".gamma{fill:none;stroke:#222;stroke-width:1.2}\n"
         ".band{fill:none;stroke:#1b9e77;stroke-width:4;stroke-linecap:round}\n"
         ".eps{fill:none;stroke:#1b9e77;stroke-width:1;stroke-dasharray:4 3}\n"
         ".cand{fill:#7570b3}\n"
         ".witness{stroke:#d95f02;stroke-width:2}\n"
         ".back{opacity:0.3}\n"
         "text{font-family:sans-serif;font-size:12px}\n"
         "</style>\n";

  out += "<g id=\"frame\">\n";
  if (m.is_sphere()) {
    out += "<circle class=\"frame\" cx=\"" + num(0.5 * kCanvas) + "\" cy=\"" + num(0.5 * kCanvas) + "\" r=\"" +
           num(0.42 * kCanvas) + "\"/>\n";
  } else {
    out += "<rect class=\"frame\" x=\"" + num(0.08 * kCanvas) + "\" y=\"" + num(0.08 * kCanvas) + "\" width=\"" +
           num(0.84 * kCanvas) + "\" height=\"" + num(0.84 * kCanvas) + "\"/>\n";
  }
  out += "</g>\n";

  out += "<g id=\"gamma\">\n";
  for (const Trajectory* g : {&pair.gamma1, &pair.gamma2}) {
    std::vector<Point> pts{pair.p.location};
    for (const auto& x : sample_curve(sys, *g, -inf, inf, kPlotResolution, params).points) pts.push_back(x);
    pts.push_back(pair.q.location);
    polyline(out, cam, pts, "gamma");
  }
  for (const auto& [label, c] : {std::pair{"p", &pair.p}, std::pair{"q", &pair.q}}) {
    const ScreenPoint sp = cam.project(c->location);
    out += "<circle cx=\"" + num(sp.x) + "\" cy=\"" + num(sp.y) + "\" r=\"3\" fill=\"#222\"/>\n";
    out += "<text x=\"" + num(sp.x + 6.0) + "\" y=\"" + num(sp.y - 6.0) + "\">" + label + "</text>\n";
  }
  out += "</g>\n";

  if (d.eps > 0.0) {
    const LevelSets ls = band_sets(sys, pair, d.band, d.eps, kPlotResolution, params);
    out += "<g id=\"bands\">\n";
    polyline(out, cam, ls.A1.points, "band");
    polyline(out, cam, ls.A2.points, "band");
    out += "</g>\n<g id=\"eps-outline\">\n";
    polyline(out, cam, neighbourhood_outline(m, ls.A1.points, d.eps), "eps");
    polyline(out, cam, neighbourhood_outline(m, ls.A2.points, d.eps), "eps");
    out += "</g>\n";
  }

  if (!d.snapshots.empty()) {
    out += "<g id=\"snapshots\">\n";
    for (std::size_t k = 0; k < d.snapshots.size(); ++k) {
      const auto& [n, X] = d.snapshots[k];
      const std::string cls = "snap" + std::to_string(k);
      out += "<g id=\"X_" + std::to_string(n) + "\" fill=\"" + snapshot_colour(k) + "\">\n";
      dots(out, cam, thin(m, X.points, kPlotResolution), cls);
      out += "</g>\n";
    }
    out += "</g>\n";
  }

  if (!d.candidates.empty()) {
    out += "<g id=\"candidates\">\n";
    for (const auto& K : d.candidates) dots(out, cam, thin(m, K.points, kPlotResolution), "cand");
    out += "</g>\n";
  }

  if (!d.witnesses.empty()) {
    out += "<g id=\"witness\">\n";
    for (const auto& [a, b] : d.witnesses) {
      const ScreenPoint sa = cam.project(a);
      const ScreenPoint sb = cam.project(b);
      out += "<line class=\"witness\" x1=\"" + num(sa.x) + "\" y1=\"" + num(sa.y) + "\" x2=\"" + num(sb.x) +
             "\" y2=\"" + num(sb.y) + "\"/>\n";
    }
    out += "</g>\n";
  }

  out += "<g id=\"legend\">\n";
  std::string caption = d.system + "  eps = " + num(d.eps);
  if (!d.snapshots.empty()) {
    caption += "  n =";
    for (const auto& s : d.snapshots) caption += " " + std::to_string(s.first);
  }
  out += "<text x=\"12\" y=\"20\">" + caption + "</text>\n";
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace hyshadow

#endif  // HYSHADOW_SVG_HPP
