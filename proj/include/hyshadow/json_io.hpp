#ifndef HYSHADOW_JSON_IO_HPP
#define HYSHADOW_JSON_IO_HPP

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hyshadow/counterexample.hpp"
#include "hyshadow/error.hpp"
#include "hyshadow/refuter.hpp"

namespace hyshadow {

using json = nlohmann::ordered_json;

// Doubles go through nlohmann's shortest round-trip formatting, so parsing
// the text gives back the same bits.

inline json point_to_json(const Manifold& m, const Point& p) {
  if (m.is_sphere()) return json::array({p.x, p.y, p.z});
  return json::array({p.x, p.y});
}

inline Point point_from_json(const Manifold& m, const json& j) {
  if (!j.is_array()) throw Error(ErrorKind::Parse, "point must be an array");
  const std::size_t want = m.is_sphere() ? 3 : 2;
  if (j.size() != want) throw Error(ErrorKind::Parse, "point has the wrong number of coordinates");
  for (const auto& c : j)
    if (!c.is_number()) throw Error(ErrorKind::Parse, "point coordinates must be numbers");
  Point p;
  p.x = j[0].get<double>();
  p.y = j[1].get<double>();
  if (want == 3) p.z = j[2].get<double>();
  m.check(p);
  return p;
}

inline json continuum_to_json(const Manifold& m, const Continuum& c) {
  json pts = json::array();
  for (const auto& p : c.points) pts.push_back(point_to_json(m, p));
  return json{{"manifold", to_string(m.kind())}, {"h", c.h}, {"points", std::move(pts)}};
}

namespace detail {

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorKind::Parse, std::string("missing field '") + key + "'");
  return j.at(key);
}

template <typename T>
T get(const json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::Parse, std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace detail

/// Parses a Continuum record; the manifold named in the record must match m
/// when m is given.
inline Continuum continuum_from_json(const json& j, const Manifold* expect = nullptr) {
  const Manifold m(manifold_kind_from_string(detail::get<std::string>(j, "manifold")));
  if (expect && expect->kind() != m.kind()) throw Error(ErrorKind::Parse, "continuum is on the wrong manifold");
  Continuum c;
  c.h = detail::get<double>(j, "h");
  const json& pts = detail::field(j, "points");
  if (!pts.is_array()) throw Error(ErrorKind::Parse, "points must be an array");
  for (const auto& p : pts) c.points.push_back(point_from_json(m, p));
  if (c.points.empty()) throw Error(ErrorKind::EmptyContinuum, "continuum has no points");
  return c;
}

inline json band_to_json(const BandConfig& b) { return json{{"a", b.a}, {"b", b.b}, {"a1", b.a1}, {"b1", b.b1}}; }

inline BandConfig band_from_json(const json& j) {
  BandConfig b{detail::get<double>(j, "a"), detail::get<double>(j, "b"), detail::get<double>(j, "a1"),
               detail::get<double>(j, "b1")};
  b.validate();
  return b;
}

inline json orbit_header_to_json(const Manifold& m, const PseudoOrbit& po) {
  return json{{"system", po.system}, {"band", band_to_json(po.band)}, {"eps", po.eps},     {"delta", po.delta},
              {"M", po.M},           {"N", po.N},                     {"h", po.h},         {"p", point_to_json(m, po.p)},
              {"q", point_to_json(m, po.q)}};
}

inline json pseudo_orbit_to_json(const PseudoOrbit& po) {
  const MorseSystem sys = MorseSystem::from_name(po.system);
  const Manifold& m = sys.manifold();
  json j = orbit_header_to_json(m, po);
  json xs = json::array();
  for (int n = -po.N; n <= po.N; ++n) {
    json rec{{"n", n}};
    const json c = continuum_to_json(m, po.at(n));
    for (const auto& [k, v] : c.items()) rec[k] = v;
    xs.push_back(std::move(rec));
  }
  j["X"] = std::move(xs);
  return j;
}

inline PseudoOrbit pseudo_orbit_from_json(const json& j) {
  PseudoOrbit po;
  po.system = detail::get<std::string>(j, "system");
  const MorseSystem sys = MorseSystem::from_name(po.system);
  const Manifold& m = sys.manifold();
  po.band = band_from_json(detail::field(j, "band"));
  po.eps = detail::get<double>(j, "eps");
  po.delta = detail::get<double>(j, "delta");
  po.M = detail::get<int>(j, "M");
  po.N = detail::get<int>(j, "N");
  po.h = detail::get<double>(j, "h");
  po.p = point_from_json(m, detail::field(j, "p"));
  po.q = point_from_json(m, detail::field(j, "q"));
  if (po.N < 1 || !(po.h > 0.0) || !(po.eps > 0.0) || !(po.delta > 0.0))
    throw Error(ErrorKind::Parse, "pseudo-orbit header out of range");
  const json& xs = detail::field(j, "X");
  if (!xs.is_array() || xs.size() != static_cast<std::size_t>(2 * po.N + 1))
    throw Error(ErrorKind::Parse, "X must list every index in [-N, N]");
  po.X.resize(xs.size());
  std::vector<char> seen(xs.size(), 0);
  for (const auto& rec : xs) {
    const int n = detail::get<int>(rec, "n");
    if (n < -po.N || n > po.N || seen[static_cast<std::size_t>(n + po.N)])
      throw Error(ErrorKind::Parse, "X has a bad or repeated index");
    seen[static_cast<std::size_t>(n + po.N)] = 1;
    po.at(n) = continuum_from_json(rec, &m);
  }
  return po;
}

inline json critical_points_to_json(const Manifold& m, const std::vector<CriticalPoint>& cps) {
  json arr = json::array();
  for (const auto& c : cps) {
    arr.push_back(json{{"location", point_to_json(m, c.location)},
                       {"value", c.value},
                       {"index", c.index},
                       {"hessian_eigenvalues", json::array({c.hessian_eigenvalues[0], c.hessian_eigenvalues[1]})}});
  }
  return arr;
}

inline json certificate_to_json(const EpsilonCertificate& c) {
  return json{{"eps", c.eps},
              {"band", band_to_json(c.band)},
              {"disjointness_bound", c.disjointness_bound},
              {"disjointness_margin", c.disjointness_margin},
              {"nojump_min_excess", c.nojump_min_excess},
              {"stays_min_clearance", c.stays_min_clearance},
              {"ball_condition_margin", c.ball_condition_margin},
              {"sample_counts",
               json{{"disjointness", c.sample_counts.disjointness},
                    {"nojump", c.sample_counts.nojump},
                    {"stays", c.sample_counts.stays},
                    {"ball", c.sample_counts.ball}}},
              {"trials", c.trials},
              {"a1_lowerings", c.a1_lowerings}};
}

inline json validation_to_json(const ValidationReport& r) {
  return json{{"pass", r.pass},
              {"links_pass", r.links_pass},
              {"ends_pass", r.ends_pass},
              {"min_link", r.min_link},
              {"max_link", r.max_link},
              {"argmax_link", r.argmax_link},
              {"link_threshold", r.link_threshold},
              {"failing_links", r.failing_links},
              {"end_p", r.end_p},
              {"end_q", r.end_q},
              {"end_threshold", r.end_threshold},
              {"links", r.links}};
}

inline json certificate_details_to_json(const Manifold& m, const RefutationCertificate& c) {
  json d = json::object();
  if (c.direct) {
    d["direct"] = json{{"n", c.direct->n},
                       {"value", c.direct->value},
                       {"threshold", c.direct->threshold},
                       {"witness", json::array({point_to_json(m, c.direct->witness_a),
                                                point_to_json(m, c.direct->witness_b)})}};
  }
  if (c.structural) {
    const auto& s = *c.structural;
    json w = json::array();
    for (const auto& [a, b] : s.witnesses) w.push_back(json::array({point_to_json(m, a), point_to_json(m, b)}));
    d["structural"] = json{{"reason", s.reason},
                           {"n0", s.n0},
                           {"horizon", s.horizon},
                           {"contains_p", s.contains_p},
                           {"labels", s.labels},
                           {"constant_label", s.constant_label ? json(*s.constant_label) : json(nullptr)},
                           {"non_entry_verified", s.non_entry_verified},
                           {"m", s.m ? json(*s.m) : json(nullptr)},
                           {"contact", s.contact},
                           {"witnesses", std::move(w)}};
  }
  return d;
}

inline json summary_to_json(const RefutationSummary& s) {
  return json{{"total", s.total}, {"direct", s.direct}, {"structural", s.structural}, {"inconclusive", s.inconclusive}};
}

/// One record per candidate plus the summary. With include_candidates the
/// candidate samples are embedded so figures can draw them.
inline json refutation_report_to_json(const PseudoOrbit& po, const std::vector<RefutationRecord>& records,
                                      const std::vector<char>* verified = nullptr, bool include_candidates = false) {
  const Manifold& m = MorseSystem::from_name(po.system).manifold();
  json j = orbit_header_to_json(m, po);
  json arr = json::array();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    json rec{{"family", to_string(r.candidate.family)},
             {"params", r.candidate.params},
             {"seed", r.candidate.seed},
             {"verdict", to_string(r.certificate.verdict)},
             {"details", certificate_details_to_json(m, r.certificate)}};
    if (verified && r.certificate.direct) rec["details"]["direct"]["brute_force_verified"] = (*verified)[i] != 0;
    if (include_candidates) rec["K"] = continuum_to_json(m, r.candidate.K);
    arr.push_back(std::move(rec));
  }
  j["candidates"] = std::move(arr);
  j["summary"] = summary_to_json(summarize(records));
  return j;
}

inline json shadow_result_to_json(const Manifold& m, const ShadowResult& r) {
  return json{{"found", r.found}, {"sup_err", r.sup_err}, {"x", point_to_json(m, r.x)}, {"evaluations", r.evaluations}};
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, "'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Parse, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorKind::Parse, "failed writing '" + path + "'");
}

}  // namespace hyshadow

#endif  // HYSHADOW_JSON_IO_HPP
