#ifndef HYSHADOW_REFUTER_HPP
#define HYSHADOW_REFUTER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hyshadow/counterexample.hpp"
#include "hyshadow/error.hpp"
#include "hyshadow/flow.hpp"
#include "hyshadow/hyperspace.hpp"
#include "hyshadow/morse.hpp"
#include "hyshadow/parallel.hpp"
#include "hyshadow/rng.hpp"

namespace hyshadow {

enum class CandidateFamily { X0Itself, SingleTrajectory, TruncatedX0, ArcThroughP, OrbitTranslate };

inline const char* to_string(CandidateFamily f) {
  switch (f) {
    case CandidateFamily::X0Itself: return "x0_itself";
    case CandidateFamily::SingleTrajectory: return "single_trajectory";
    case CandidateFamily::TruncatedX0: return "truncated_x0";
    case CandidateFamily::ArcThroughP: return "arc_through_p";
    case CandidateFamily::OrbitTranslate: return "orbit_translate";
  }
  return "?";
}

inline CandidateFamily candidate_family_from_string(const std::string& s) {
  for (auto f : {CandidateFamily::X0Itself, CandidateFamily::SingleTrajectory, CandidateFamily::TruncatedX0,
                 CandidateFamily::ArcThroughP, CandidateFamily::OrbitTranslate})
    if (s == to_string(f)) return f;
  throw Error(ErrorKind::Parse, "unknown candidate family '" + s + "'");
}

struct ShadowCandidate {
  Continuum K;
  CandidateFamily family = CandidateFamily::X0Itself;
  std::vector<double> params;
  std::uint64_t seed = 0;
};

enum class Verdict { DirectViolation, ClassificationContradiction, Inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::DirectViolation: return "DirectViolation";
    case Verdict::ClassificationContradiction: return "ClassificationContradiction";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

/// Exit labels of the classifier: 0 marks a timeout.
enum PhiLabel : int { kTimeout = 0, kLabel1 = 1, kLabel2 = 2 };

struct DirectEvidence {
  int n = 0;
  double value = 0.0;      ///< d_H(C(f)^n(K), X_n)
  double threshold = 0.0;  ///< eps + 2h
  Point witness_a;         ///< attaining pair: first point on the side with the larger directed distance
  Point witness_b;
};

struct StructuralEvidence {
  int n0 = -1;
  std::vector<int> labels;
  std::optional<int> constant_label;
  int horizon = 0;
  bool contains_p = false;
  bool non_entry_verified = false;
  std::optional<int> m;
  double contact = std::numeric_limits<double>::infinity();  ///< d(X_m, A_other) at m
  std::vector<std::pair<Point, Point>> witnesses;           ///< label changes after bisection
  std::string reason;
};

struct RefutationCertificate {
  Verdict verdict = Verdict::Inconclusive;
  std::optional<DirectEvidence> direct;
  std::optional<StructuralEvidence> structural;
};

/// Runs the refutation argument against one pseudo-orbit. Holds the band sets
/// rebuilt from the orbit header.
class Refuter {
 public:
  Refuter(const MorseSystem& sys, const TrajectoryPair& pair, const PseudoOrbit& po, FlowParams params = {})
      : sys_(sys), po_(po), params_(params), ls_(band_sets(sys, pair, po.band, po.eps, po.h, params)) {}

  const LevelSets& level_sets() const { return ls_; }
  const PseudoOrbit& orbit() const { return po_; }
  int horizon() const { return 4 * po_.N; }

  double threshold(const Continuum& K) const { return po_.eps + 2.0 * std::max(po_.h, K.h); }

  /// First k in [0, T] where f^k(x) enters U_eps(A1) or U_eps(A2).
  int classify_phi(const Point& x, int T) const {
    if (T < 1) throw Error(ErrorKind::Precondition, "horizon must be at least 1");
    Point y = x;
    for (int k = 0; k <= T; ++k) {
      if (ls_.dist_A(1, y) < po_.eps) return kLabel1;
      if (ls_.dist_A(2, y) < po_.eps) return kLabel2;
      if (k < T) y = detail::integrate_unchecked(sys_, y, 1.0, params_);
    }
    return kTimeout;
  }

  /// Phase 1: scans n = 0, 1, -1, 2, -2, ... and stops at the first index
  /// with d_H(C(f)^n(K), X_n) >= eps + 2h.
  std::optional<DirectEvidence> direct_scan(const Continuum& K) const {
    const double thr = threshold(K);
    auto check = [&](const Continuum& Kn, int n) -> std::optional<DirectEvidence> {
      const auto r = hausdorff(sys_.manifold(), Kn, po_.at(n));
      if (r.value < thr) return std::nullopt;
      const auto [a, b] = r.witness();
      return DirectEvidence{n, r.value, thr, a, b};
    };
    if (auto ev = check(K, 0)) return ev;
    Continuum fwd = K;
    Continuum bwd = K;
    for (int j = 1; j <= po_.N; ++j) {
      fwd = induced_step(sys_, fwd, 1, params_);
      if (auto ev = check(fwd, j)) return ev;
      bwd = induced_step(sys_, bwd, -1, params_);
      if (auto ev = check(bwd, -j)) return ev;
    }
    return std::nullopt;
  }

  /// Recomputes the cited iterate and its distance by brute force.
  bool verify_direct(const Continuum& K, const DirectEvidence& ev) const {
    const Continuum Kn = induced_iterate(sys_, K, ev.n, params_);
    const auto r = hausdorff_brute(sys_.manifold(), Kn, po_.at(ev.n));
    const auto [a, b] = r.witness();
    return r.value == ev.value && r.value >= ev.threshold && a == ev.witness_a && b == ev.witness_b;
  }

  /// Smallest n0 <= N with every point of C(f)^{-n0}(K) inside A, shrunk by
  /// 2h. Also returns that iterate.
  std::pair<int, Continuum> find_n0(const Continuum& K) const {
    const double slack = 2.0 * std::max(po_.h, K.h);
    Continuum Kn = K;
    for (int n = 0; n <= po_.N; ++n) {
      if (n > 0) Kn = induced_step(sys_, Kn, -1, params_);
      const bool inside = std::all_of(Kn.points.begin(), Kn.points.end(),
                                      [&](const Point& x) { return ls_.in_A(sys_, x, slack); });
      if (inside) return {n, std::move(Kn)};
    }
    throw Error(ErrorKind::NoN0, "no backward iterate within the window lies inside A");
  }

  /// Phase 2. Labels the points of K0 = C(f)^{-n0}(K) by their exit band.
  /// Points within 2h of p get no label and route to the window-end direct
  /// check. A constant label i is confirmed by checking that no forward
  /// image of K0 comes within eps + 2h of A_{3-i}; the contradiction index m
  /// is then the first window index whose sample touches A_{3-i} (within h),
  /// where d_H(C(f)^m(K), X_m) > eps follows.
  RefutationCertificate structural_check(const Continuum& K) const {
    RefutationCertificate cert;
    StructuralEvidence ev;
    ev.horizon = horizon();
    const double h = std::max(po_.h, K.h);
    const double thr = threshold(K);
    Continuum K0;
    try {
      auto [n0, k0] = find_n0(K);
      ev.n0 = n0;
      K0 = std::move(k0);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoN0) throw;
      ev.reason = "no-n0";
      cert.structural = std::move(ev);
      return cert;
    }

    const Manifold& m = sys_.manifold();
    ev.labels.assign(K0.points.size(), kTimeout);
    std::vector<char> near_p(K0.points.size(), 0);
    for (std::size_t i = 0; i < K0.points.size(); ++i) near_p[i] = m.distance(K0.points[i], ls_.p) <= 2.0 * h;
    ev.contains_p = std::any_of(near_p.begin(), near_p.end(), [](char c) { return c != 0; });
    parallel_for(K0.points.size(), [&](std::size_t i) {
      if (!near_p[i]) ev.labels[i] = classify_phi(K0.points[i], ev.horizon);
    });

    if (ev.contains_p) {
      const Continuum KN = induced_iterate(sys_, K, po_.N, params_);
      const auto r = hausdorff(m, KN, po_.at(po_.N));
      if (r.value >= thr) {
        const auto [a, b] = r.witness();
        cert.verdict = Verdict::DirectViolation;
        cert.direct = DirectEvidence{po_.N, r.value, thr, a, b};
        ev.reason = "contains-p";
      } else {
        ev.reason = "contains-p without end violation";
      }
      cert.structural = std::move(ev);
      return cert;
    }

    bool has1 = false;
    bool has2 = false;
    for (int l : ev.labels) {
      has1 |= l == kLabel1;
      has2 |= l == kLabel2;
    }
    if (!has1 && !has2) {
      ev.reason = "all-timeout";
      cert.structural = std::move(ev);
      return cert;
    }
    if (has1 && has2) {
      ev.witnesses = bisect_label_changes(K0, ev.labels);
      ev.reason = "mixed-labels";
      cert.structural = std::move(ev);
      return cert;
    }

    const int label = has1 ? kLabel1 : kLabel2;
    const int other = 3 - label;
    ev.constant_label = label;
    ev.non_entry_verified = true;
    Continuum Kk = K0;
    for (int k = 0; k <= ev.horizon && ev.non_entry_verified; ++k) {
      if (k > 0) Kk = induced_step(sys_, Kk, 1, params_);
      for (const auto& x : Kk.points) {
        if (ls_.dist_A(other, x) < thr) {
          ev.non_entry_verified = false;
          break;
        }
      }
    }
    if (!ev.non_entry_verified) {
      ev.reason = "entered-other-band";
      cert.structural = std::move(ev);
      return cert;
    }
    const int m_lo = std::max(-po_.N, -ev.n0);
    const int m_hi = std::min(po_.N, ev.horizon - ev.n0);
    for (int mi = m_lo; mi <= m_hi; ++mi) {
      double contact = std::numeric_limits<double>::infinity();
      for (const auto& y : po_.at(mi).points) contact = std::min(contact, ls_.dist_A(other, y));
      if (contact <= h) {
        ev.m = mi;
        ev.contact = contact;
        break;
      }
    }
    if (ev.m) {
      cert.verdict = Verdict::ClassificationContradiction;
      ev.reason = "constant-label";
    } else {
      ev.reason = "no-contact-index";
    }
    cert.structural = std::move(ev);
    return cert;
  }

  /// Phase 1, then phase 2 when phase 1 finds nothing.
  RefutationCertificate refute(const Continuum& K) const {
    if (auto ev = direct_scan(K)) {
      RefutationCertificate cert;
      cert.verdict = Verdict::DirectViolation;
      cert.direct = *ev;
      return cert;
    }
    return structural_check(K);
  }

 private:
  static constexpr double kBisectGap = 1e-6;
  static constexpr std::size_t kMaxBisectedEdges = 8;

  std::vector<std::pair<Point, Point>> bisect_label_changes(const Continuum& K0, const std::vector<int>& labels) const {
    const Manifold& m = sys_.manifold();
    std::vector<std::pair<Point, Point>> out;
    for (const auto& [i, j] : spanning_forest(m, K0.points, 2.0 * K0.h)) {
      if (out.size() >= kMaxBisectedEdges) break;
      const int li = labels[i];
      const int lj = labels[j];
      if (li == lj) continue;
      Point a = K0.points[i];
      Point b = K0.points[j];
      while (m.distance(a, b) > kBisectGap) {
        const Point mid = m.interpolate(a, b, 0.5);
        const int lm = classify_phi(mid, horizon());
        if (lm == li) a = mid;
        else if (lm == lj) b = mid;
        else break;
      }
      out.emplace_back(a, b);
    }
    return out;
  }

  const MorseSystem& sys_;
  const PseudoOrbit& po_;
  FlowParams params_;
  LevelSets ls_;
};

// ---------------------------------------------------------------------------
// Candidate families

namespace detail {

inline std::uint64_t family_seed(std::uint64_t seed, CandidateFamily f) {
  return seed * 1000003ULL + static_cast<std::uint64_t>(f) + 1;
}

inline Continuum arc_through(const Manifold& m, const Point& p, double azimuth, double back, double forward,
                             double h) {
  const auto [e1, e2] = m.tangent_basis(p);
  const Vec3 dir = e1 * std::cos(azimuth) + e2 * std::sin(azimuth);
  const double len = back + forward;
  const auto n = std::max<long>(1, static_cast<long>(std::ceil(len / h)));
  Continuum K{{}, h};
  for (long i = 0; i <= n; ++i) {
    const double s = -back + len * static_cast<double>(i) / n;
    K.points.push_back(m.exp(p, dir * s));
  }
  // p itself, exactly.
  K.points.push_back(p);
  return K;
}

}  // namespace detail

/// Seeded members of one family. single_trajectory has at most two members
/// and x0_itself one.
inline std::vector<ShadowCandidate> generate_candidates(const MorseSystem& sys, const TrajectoryPair& pair,
                                                        const PseudoOrbit& po, CandidateFamily family, int count,
                                                        std::uint64_t seed, const FlowParams& params = {}) {
  if (count < 1) throw Error(ErrorKind::Precondition, "count must be at least 1");
  const Manifold& m = sys.manifold();
  const double h = po.h;
  const double inf = std::numeric_limits<double>::infinity();
  Rng rng(detail::family_seed(seed, family));
  std::vector<ShadowCandidate> out;
  auto push = [&](Continuum K, std::vector<double> prm) {
    validate_continuum(m, K);
    out.push_back({std::move(K), family, std::move(prm), seed});
  };
  switch (family) {
    case CandidateFamily::X0Itself:
      push(build_X0(sys, pair, h, params), {});
      break;
    case CandidateFamily::SingleTrajectory:
      for (int i = 1; i <= std::min(count, 2); ++i) {
        const Trajectory& g = i == 1 ? pair.gamma1 : pair.gamma2;
        Continuum K{{pair.p.location}, h};
        for (const auto& x : sample_curve(sys, g, -inf, inf, h, params).points) K.points.push_back(x);
        K.points.push_back(pair.q.location);
        push(std::move(K), {static_cast<double>(i)});
      }
      break;
    case CandidateFamily::TruncatedX0:
      for (int k = 0; k < count; ++k) {
        const double c1 = rng.uniform(pair.q.value, pair.p.value);
        const double c2 = rng.uniform(pair.q.value, pair.p.value);
        Continuum K{{pair.p.location}, h};
        for (const auto& [g, c] : {std::pair{&pair.gamma1, c1}, std::pair{&pair.gamma2, c2}}) {
          const auto t = time_at_level(sys, *g, c, params);
          if (!t && c >= sys.value(g->samples.front().x)) continue;
          const double t_hi = t ? *t : inf;
          for (const auto& x : sample_curve(sys, *g, -inf, t_hi, h, params).points) K.points.push_back(x);
        }
        push(std::move(K), {c1, c2});
      }
      break;
    case CandidateFamily::ArcThroughP:
      for (int k = 0; k < count; ++k) {
        const double az = rng.uniform(0.0, 2.0 * kPi);
        const double scale = m.is_sphere() ? 1.5 : 0.45;
        const double back = rng.uniform(0.02, scale);
        const double fwd = rng.uniform(0.02, scale);
        push(detail::arc_through(m, pair.p.location, az, back, fwd, h), {az, back, fwd});
      }
      break;
    case CandidateFamily::OrbitTranslate:
      for (int k = 0; k < count; ++k) {
        int shift = 0;
        while (shift == 0) shift = static_cast<int>(rng.integer(-po.N, po.N));
        push(po.at(shift), {static_cast<double>(shift)});
      }
      break;
  }
  return out;
}

/// The standard suite: X0, both single trajectories and per_family members
/// of each seeded family.
inline std::vector<ShadowCandidate> generate_suite(const MorseSystem& sys, const TrajectoryPair& pair,
                                                   const PseudoOrbit& po, int per_family, std::uint64_t seed,
                                                   const FlowParams& params = {}) {
  std::vector<ShadowCandidate> all;
  for (auto f : {CandidateFamily::X0Itself, CandidateFamily::SingleTrajectory, CandidateFamily::TruncatedX0,
                 CandidateFamily::ArcThroughP, CandidateFamily::OrbitTranslate}) {
    auto part = generate_candidates(sys, pair, po, f, per_family, seed, params);
    for (auto& c : part) all.push_back(std::move(c));
  }
  return all;
}

struct RefutationRecord {
  ShadowCandidate candidate;
  RefutationCertificate certificate;
};

struct RefutationSummary {
  int total = 0;
  int direct = 0;
  int structural = 0;
  int inconclusive = 0;
};

inline RefutationSummary summarize(const std::vector<RefutationRecord>& records) {
  RefutationSummary s;
  for (const auto& r : records) {
    ++s.total;
    switch (r.certificate.verdict) {
      case Verdict::DirectViolation: ++s.direct; break;
      case Verdict::ClassificationContradiction: ++s.structural; break;
      case Verdict::Inconclusive: ++s.inconclusive; break;
    }
  }
  return s;
}

/// Candidates run one after another in list order; each uses the internal
/// parallelism of the Hausdorff and mapping kernels.
inline std::vector<RefutationRecord> refute_all(const Refuter& refuter, std::vector<ShadowCandidate> cands) {
  std::vector<RefutationRecord> out;
  out.reserve(cands.size());
  for (auto& c : cands) {
    auto cert = refuter.refute(c.K);
    out.push_back({std::move(c), std::move(cert)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Base-space shadowing

struct ShadowParams {
  int max_evals = 200;
  double min_step = 1e-9;
  int jitter_starts = 4;
};

struct ShadowResult {
  bool found = false;
  Point x;
  double sup_err = 0.0;
  int evaluations = 0;
};

/// Largest per-step defect d(x_{n+1}, f(x_n)).
inline double max_defect(const MorseSystem& sys, const std::vector<Point>& po, const FlowParams& params = {}) {
  double worst = 0.0;
  for (std::size_t n = 0; n + 1 < po.size(); ++n)
    worst = std::max(worst, sys.manifold().distance(po[n + 1], detail::integrate_unchecked(sys, po[n], 1.0, params)));
  return worst;
}

/// sup_n d(f^n(x), x_n), abandoned once it reaches cutoff.
inline double orbit_error(const MorseSystem& sys, const Point& x, const std::vector<Point>& po, double cutoff,
                          const FlowParams& params = {}) {
  const Manifold& m = sys.manifold();
  double err = 0.0;
  Point y = x;
  for (std::size_t n = 0; n < po.size(); ++n) {
    err = std::max(err, m.distance(y, po[n]));
    if (err >= cutoff) return err;
    if (n + 1 < po.size()) y = detail::integrate_unchecked(sys, y, 1.0, params);
  }
  return err;
}

/// Multi-start compass search in a 2-D tangent chart. Starts: x0, the
/// backward images f^{-k}(x_k) for k = 1, 2, 4, ..., 32, and seeded jitter
/// around x0; the search polls 8 directions from the best start, halving the
/// step on failure.
inline ShadowResult base_shadow_search(const MorseSystem& sys, const std::vector<Point>& po, double delta, double eps,
                                       std::uint64_t seed, const ShadowParams& sp = {},
                                       const FlowParams& params = {}) {
  const Manifold& m = sys.manifold();
  if (po.empty()) throw Error(ErrorKind::Precondition, "empty pseudo-orbit");
  for (const auto& x : po)
    if (!m.is_valid(x)) throw Error(ErrorKind::Precondition, "pseudo-orbit point off the manifold");
  if (!(max_defect(sys, po, params) < delta)) throw Error(ErrorKind::Precondition, "not a delta-pseudo-orbit");

  ShadowResult res;
  res.sup_err = std::numeric_limits<double>::infinity();
  auto consider = [&](const Point& x) {
    ++res.evaluations;
    const double e = orbit_error(sys, x, po, res.sup_err, params);
    if (e < res.sup_err) {
      res.sup_err = e;
      res.x = x;
      return true;
    }
    return false;
  };

  consider(po.front());
  for (int k = 1; k <= 32; k *= 2)
    if (static_cast<std::size_t>(k) < po.size()) consider(iterate(sys, po[static_cast<std::size_t>(k)], -k, params));
  Rng rng(seed);
  const auto [f1, f2] = m.tangent_basis(po.front());
  for (int j = 0; j < sp.jitter_starts; ++j)
    consider(m.offset(po.front(), f1, f2, delta * rng.uniform(), 2.0 * kPi * rng.uniform()));

  const Point center = res.x;
  const auto [e1, e2] = m.tangent_basis(center);
  auto chart = [&](double s1, double s2) { return m.exp(center, e1 * s1 + e2 * s2); };
  double s1 = 0.0;
  double s2 = 0.0;
  double step = delta;
  while (res.evaluations < sp.max_evals && step >= sp.min_step && res.sup_err > 0.0) {
    bool moved = false;
    for (int d = 0; d < 8 && res.evaluations < sp.max_evals; ++d) {
      const double c = std::cos(kPi * d / 4.0);
      const double s = std::sin(kPi * d / 4.0);
      if (consider(chart(s1 + step * c, s2 + step * s))) {
        s1 += step * c;
        s2 += step * s;
        moved = true;
        break;
      }
    }
    if (!moved) step *= 0.5;
  }
  res.found = res.sup_err < eps;
  return res;
}

/// Seeded delta-pseudo-orbit: each step flows the previous point and then
/// moves it by a chord below 0.99 delta in a random direction. With linger >
/// 0 the orbit starts near the maximum and, for linger steps, is pulled back
/// toward it instead.
inline std::vector<Point> random_base_pseudo_orbit(const MorseSystem& sys, std::size_t length, double delta,
                                                   std::uint64_t seed, int linger = 0,
                                                   const FlowParams& params = {}) {
  const Manifold& m = sys.manifold();
  Rng rng(seed);
  const Point p = find_critical_points(sys).front().location;
  std::vector<Point> po;
  if (linger > 0) {
    const auto [e1, e2] = m.tangent_basis(p);
    po.push_back(m.offset(p, e1, e2, 0.2 * delta, 2.0 * kPi * rng.uniform()));
  } else if (m.is_sphere()) {
    Point x;
    do {
      x = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    } while (dot(x, x) > 1.0 || dot(x, x) < 1e-6);
    po.push_back(m.project(x));
  } else {
    po.push_back({rng.uniform(), rng.uniform(), 0.0});
  }
  while (po.size() < length) {
    const Point y = detail::integrate_unchecked(sys, po.back(), 1.0, params);
    const bool pulling = static_cast<int>(po.size()) <= linger;
    if (pulling) {
      const double d = m.distance(y, p);
      const double step = 0.9 * delta;
      // Fraction of the path toward p whose chord is exactly step.
      const double w = m.is_sphere() ? std::asin(step / 2.0) / std::asin(std::min(1.0, d / 2.0)) : step / d;
      po.push_back(d <= step ? p : m.interpolate(y, p, w));
    } else {
      const auto [e1, e2] = m.tangent_basis(y);
      po.push_back(m.offset(y, e1, e2, 0.99 * delta * rng.uniform(), 2.0 * kPi * rng.uniform()));
    }
  }
  return po;
}

}  // namespace hyshadow

#endif  // HYSHADOW_REFUTER_HPP
