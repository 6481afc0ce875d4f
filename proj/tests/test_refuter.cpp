#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "hyshadow/refuter.hpp"

using namespace hyshadow;

namespace {

// eps returned by the certificate search on the sphere with the default band.
constexpr double kEps = 0.499402;

const MorseSystem& sphere() {
  static const MorseSystem s = MorseSystem::sphere_height();
  return s;
}

const TrajectoryPair& pair() {
  static const TrajectoryPair p = find_trajectory_pair(sphere());
  return p;
}

const PseudoOrbit& orbit() {
  static const PseudoOrbit po = [] {
    OrbitConfig cfg;
    cfg.eps = kEps;
    cfg.delta = kEps / 10.0;
    cfg.band = default_band(pair());
    return build_pseudo_orbit(sphere(), pair(), cfg);
  }();
  return po;
}

const Refuter& refuter() {
  static const Refuter r(sphere(), pair(), orbit());
  return r;
}

Continuum gamma1_arc(double t_lo, double t_hi) {
  return {sample_curve(sphere(), pair().gamma1, t_lo, t_hi, orbit().h).points, orbit().h};
}

// Half of the latitude circle at height z, from gamma1 round to gamma2.
Continuum latitude_arc(double z, double h) {
  const Point a = *point_at_level(sphere(), pair().gamma1, z);
  const double r = std::sqrt(1.0 - z * z);
  const double phi0 = std::atan2(a.y, a.x);
  const auto n = static_cast<int>(std::ceil(kPi * r / h));
  Continuum K{{}, h};
  for (int i = 0; i <= n; ++i) {
    const double phi = phi0 + kPi * i / n;
    K.points.push_back(sphere().manifold().project({r * std::cos(phi), r * std::sin(phi), z}));
  }
  return K;
}

}  // namespace

TEST(Families, NamesRoundTrip) {
  for (auto f : {CandidateFamily::X0Itself, CandidateFamily::SingleTrajectory, CandidateFamily::TruncatedX0,
                 CandidateFamily::ArcThroughP, CandidateFamily::OrbitTranslate})
    EXPECT_EQ(candidate_family_from_string(to_string(f)), f);
  EXPECT_THROW(candidate_family_from_string("sideways"), Error);
}

TEST(Classify, ExitBands) {
  const auto& r = refuter();
  EXPECT_EQ(r.classify_phi(*point_at_level(sphere(), pair().gamma1, 0.9), r.horizon()), kLabel1);
  EXPECT_EQ(r.classify_phi(*point_at_level(sphere(), pair().gamma2, 0.9), r.horizon()), kLabel2);
  EXPECT_EQ(r.classify_phi(pair().p.location, r.horizon()), kTimeout);
  EXPECT_THROW(r.classify_phi(pair().p.location, 0), Error);
}

TEST(FindN0, ArcNearPIsAlreadyInside) {
  const auto [n0, K0] = refuter().find_n0(gamma1_arc(-4.0, -2.0));
  EXPECT_EQ(n0, 0);
}

TEST(FindN0, TruncatedArcNeedsBackwardSteps) {
  // gamma(3 - k) reaches F >= b1 + 2h = 0.5125 once tanh(k - 3) >= 0.5125,
  // that is k >= 3.57.
  const auto [n0, K0] = refuter().find_n0(gamma1_arc(-1.0, 3.0));
  EXPECT_EQ(n0, 4);
  for (const auto& x : K0.points) EXPECT_TRUE(refuter().level_sets().in_A(sphere(), x));
}

TEST(FindN0, ContinuumThroughQHasNone) {
  Continuum K = gamma1_arc(2.0, std::numeric_limits<double>::infinity());
  K.points.push_back(pair().q.location);
  try {
    refuter().find_n0(K);
    FAIL() << "expected NoN0";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoN0);
  }
}

TEST(Direct, X0ItselfIsRefuted) {
  const auto cands = generate_candidates(sphere(), pair(), orbit(), CandidateFamily::X0Itself, 1, 0);
  ASSERT_EQ(cands.size(), 1u);
  const auto cert = refuter().refute(cands[0].K);
  ASSERT_EQ(cert.verdict, Verdict::DirectViolation);
  ASSERT_TRUE(cert.direct);
  EXPECT_NE(cert.direct->n, 0);
  EXPECT_GE(cert.direct->value, cert.direct->threshold);
  EXPECT_TRUE(refuter().verify_direct(cands[0].K, *cert.direct));
}

TEST(Direct, SingleTrajectoriesFailAtZero) {
  const auto cands = generate_candidates(sphere(), pair(), orbit(), CandidateFamily::SingleTrajectory, 16, 0);
  ASSERT_EQ(cands.size(), 2u);
  for (const auto& c : cands) {
    const auto cert = refuter().refute(c.K);
    ASSERT_EQ(cert.verdict, Verdict::DirectViolation);
    EXPECT_EQ(cert.direct->n, 0);
    // The missing trajectory's equator point is sqrt 2 from everything in K,
    // the nearest points being p and q.
    EXPECT_NEAR(cert.direct->value, std::sqrt(2.0), orbit().h);
    EXPECT_TRUE(refuter().verify_direct(c.K, *cert.direct));
  }
}

TEST(Direct, ArcsThroughPAreRefuted) {
  const auto cands = generate_candidates(sphere(), pair(), orbit(), CandidateFamily::ArcThroughP, 3, 7);
  for (const auto& c : cands) {
    const auto cert = refuter().refute(c.K);
    ASSERT_EQ(cert.verdict, Verdict::DirectViolation);
    EXPECT_TRUE(refuter().verify_direct(c.K, *cert.direct));
  }
}

TEST(Direct, VerificationRejectsAlteredEvidence) {
  const auto cands = generate_candidates(sphere(), pair(), orbit(), CandidateFamily::SingleTrajectory, 1, 0);
  auto ev = *refuter().direct_scan(cands[0].K);
  ev.value = std::nextafter(ev.value, 10.0);
  EXPECT_FALSE(refuter().verify_direct(cands[0].K, ev));
}

TEST(Structural, ConstantLabelContradiction) {
  const auto cert = refuter().structural_check(gamma1_arc(-4.0, -2.0));
  ASSERT_TRUE(cert.structural);
  const auto& s = *cert.structural;
  EXPECT_EQ(cert.verdict, Verdict::ClassificationContradiction);
  EXPECT_EQ(s.reason, "constant-label");
  EXPECT_EQ(s.n0, 0);
  ASSERT_TRUE(s.constant_label);
  EXPECT_EQ(*s.constant_label, kLabel1);
  EXPECT_TRUE(s.non_entry_verified);
  EXPECT_FALSE(s.contains_p);
  ASSERT_TRUE(s.m);
  EXPECT_EQ(*s.m, 0);
  EXPECT_LE(s.contact, orbit().h);
  for (int l : s.labels) EXPECT_EQ(l, kLabel1);
}

TEST(Structural, MixedLabelsAreLocated) {
  const auto cert = refuter().structural_check(latitude_arc(0.95, orbit().h));
  ASSERT_TRUE(cert.structural);
  const auto& s = *cert.structural;
  EXPECT_EQ(s.reason, "mixed-labels");
  EXPECT_EQ(cert.verdict, Verdict::Inconclusive);
  ASSERT_FALSE(s.witnesses.empty());
  for (const auto& [a, b] : s.witnesses) {
    EXPECT_LE(sphere().manifold().distance(a, b), 1e-6);
    EXPECT_NE(refuter().classify_phi(a, s.horizon), refuter().classify_phi(b, s.horizon));
  }
}

TEST(Structural, ContinuumThroughPUsesWindowEnd) {
  Continuum K = gamma1_arc(-std::numeric_limits<double>::infinity(), -2.0);
  K.points.push_back(pair().p.location);
  const auto cert = refuter().structural_check(K);
  ASSERT_TRUE(cert.structural);
  EXPECT_TRUE(cert.structural->contains_p);
  EXPECT_EQ(cert.structural->reason, "contains-p");
  ASSERT_EQ(cert.verdict, Verdict::DirectViolation);
  EXPECT_EQ(cert.direct->n, orbit().N);
}

TEST(Candidates, SeededAndDeterministic) {
  for (auto f : {CandidateFamily::TruncatedX0, CandidateFamily::ArcThroughP, CandidateFamily::OrbitTranslate}) {
    const auto a = generate_candidates(sphere(), pair(), orbit(), f, 4, 3);
    const auto b = generate_candidates(sphere(), pair(), orbit(), f, 4, 3);
    const auto c = generate_candidates(sphere(), pair(), orbit(), f, 4, 4);
    ASSERT_EQ(a.size(), 4u);
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].params, b[i].params);
      EXPECT_EQ(a[i].K.points, b[i].K.points);
    }
    EXPECT_NE(a[0].params, c[0].params) << to_string(f);
  }
}

TEST(Candidates, ArcsAreValidAndContainP) {
  const auto cands = generate_candidates(sphere(), pair(), orbit(), CandidateFamily::ArcThroughP, 50, 0);
  ASSERT_EQ(cands.size(), 50u);
  for (const auto& c : cands) {
    EXPECT_NO_THROW(validate_continuum(sphere().manifold(), c.K));
    EXPECT_EQ(c.K.points.back(), pair().p.location);
    ASSERT_EQ(c.params.size(), 3u);
    EXPECT_GT(c.params[1], 0.0);
    EXPECT_GT(c.params[2], 0.0);
  }
}

TEST(Candidates, TranslatesAreNonzeroShifts) {
  const auto cands = generate_candidates(sphere(), pair(), orbit(), CandidateFamily::OrbitTranslate, 20, 0);
  for (const auto& c : cands) {
    const int k = static_cast<int>(c.params[0]);
    EXPECT_NE(k, 0);
    EXPECT_EQ(c.K.points, orbit().at(k).points);
  }
}

TEST(Candidates, SuiteCoversFamilies) {
  const auto suite = generate_suite(sphere(), pair(), orbit(), 16, 0);
  EXPECT_EQ(suite.size(), 51u);
  EXPECT_EQ(suite.front().family, CandidateFamily::X0Itself);
}

TEST(Candidates, CountMustBePositive) {
  EXPECT_THROW(generate_candidates(sphere(), pair(), orbit(), CandidateFamily::ArcThroughP, 0, 0), Error);
}

TEST(Summary, CountsVerdicts) {
  std::vector<RefutationRecord> recs(4);
  recs[0].certificate.verdict = Verdict::DirectViolation;
  recs[1].certificate.verdict = Verdict::DirectViolation;
  recs[2].certificate.verdict = Verdict::ClassificationContradiction;
  const auto s = summarize(recs);
  EXPECT_EQ(s.total, 4);
  EXPECT_EQ(s.direct, 2);
  EXPECT_EQ(s.structural, 1);
  EXPECT_EQ(s.inconclusive, 1);
}

TEST(BaseShadow, TrueOrbitIsItsOwnShadow) {
  std::vector<Point> po{Point{0.6, 0.0, 0.8}};
  while (po.size() < 30) po.push_back(iterate(sphere(), po.back(), 1));
  const auto r = base_shadow_search(sphere(), po, 0.01, 0.15, 0);
  EXPECT_TRUE(r.found);
  EXPECT_EQ(r.sup_err, 0.0);
  EXPECT_EQ(r.x, po.front());
}

TEST(BaseShadow, RandomOrbitsAreShadowed) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto po = random_base_pseudo_orbit(sphere(), 50, 0.01, seed);
    EXPECT_LT(max_defect(sphere(), po), 0.01);
    const auto r = base_shadow_search(sphere(), po, 0.01, 0.15, seed);
    EXPECT_TRUE(r.found) << "seed " << seed << " sup_err " << r.sup_err;
    EXPECT_DOUBLE_EQ(orbit_error(sphere(), r.x, po, std::numeric_limits<double>::infinity()), r.sup_err);
  }
}

TEST(BaseShadow, LingeringOrbitIsShadowed) {
  const auto po = random_base_pseudo_orbit(sphere(), 50, 0.01, 11, 10);
  EXPECT_LT(max_defect(sphere(), po), 0.01);
  // The orbit stays near the maximum for the lingering steps.
  EXPECT_GT(sphere().value(po[10]), 0.999);
  const auto r = base_shadow_search(sphere(), po, 0.01, 0.15, 11);
  EXPECT_TRUE(r.found) << r.sup_err;
}

TEST(BaseShadow, RejectsNonPseudoOrbit) {
  std::vector<Point> po{Point{0.0, 0.0, 1.0}, Point{0.0, 0.0, -1.0}};
  try {
    base_shadow_search(sphere(), po, 0.01, 0.15, 0);
    FAIL() << "expected Precondition";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Precondition);
  }
}
