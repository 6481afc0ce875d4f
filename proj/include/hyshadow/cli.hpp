#ifndef HYSHADOW_CLI_HPP
#define HYSHADOW_CLI_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hyshadow/counterexample.hpp"
#include "hyshadow/json_io.hpp"
#include "hyshadow/parallel.hpp"
#include "hyshadow/refuter.hpp"
#include "hyshadow/svg.hpp"

namespace hyshadow {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitInput = 2;

/// Failures caused by the caller's input map to exit 2, the rest to exit 1.
inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Parse:
    case ErrorKind::InvalidPoint:
    case ErrorKind::InvalidBand:
    case ErrorKind::EmptyContinuum:
    case ErrorKind::Precondition:
      return kExitInput;
    default:
      return kExitDomain;
  }
}

/// Flag values shared by the subcommands; unset optionals mean "derive".
struct RunConfig {
  std::string system = "sphere";
  std::optional<double> a1;
  std::optional<double> b1;
  std::optional<double> delta;
  std::optional<double> eps;
  int N = 40;
  double h = 0.0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out_path;

  /// Checked before any computation.
  void validate() const {
    MorseSystem::from_name(system);
    auto positive = [](const std::optional<double>& v, const char* name) {
      if (v && !(*v > 0.0 && std::isfinite(*v))) throw Error(ErrorKind::Precondition, std::string(name) + " must be positive");
    };
    positive(delta, "--delta");
    positive(eps, "--eps");
    if (N < 1) throw Error(ErrorKind::Precondition, "--N must be at least 1");
    if (!(h >= 0.0) || !std::isfinite(h)) throw Error(ErrorKind::Precondition, "--h must be non-negative");
  }

  BandConfig band_for(const TrajectoryPair& pair) const {
    BandConfig b = default_band(pair);
    if (a1) b.a1 = *a1;
    if (b1) b.b1 = *b1;
    b.validate();
    return b;
  }
};

namespace detail {

inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) out << text;
  else write_text_file(path, text);
}

inline void emit(const json& j, const std::string& path, std::ostream& out, bool pretty = true) {
  emit(j.dump(pretty ? 2 : -1) + "\n", path, out);
}

inline json trajectory_to_json(const Manifold& m, const Trajectory& tr) {
  json t = json::array();
  json x = json::array();
  for (const auto& s : tr.samples) {
    t.push_back(s.t);
    x.push_back(point_to_json(m, s.x));
  }
  return json{{"origin", point_to_json(m, tr.origin.location)},
              {"terminus", point_to_json(m, tr.terminus.location)},
              {"t", std::move(t)},
              {"x", std::move(x)}};
}

inline json critical_point_to_json(const Manifold& m, const CriticalPoint& c) {
  return json{{"location", point_to_json(m, c.location)}, {"value", c.value}, {"index", c.index}};
}

struct ReportLayers {
  std::vector<Continuum> candidates;
  std::vector<std::pair<Point, Point>> witnesses;
};

inline ReportLayers report_layers(const Manifold& m, const json& report) {
  ReportLayers out;
  const json& cands = field(report, "candidates");
  if (!cands.is_array()) throw Error(ErrorKind::Parse, "candidates must be an array");
  for (const auto& rec : cands) {
    if (rec.contains("K")) out.candidates.push_back(continuum_from_json(rec.at("K"), &m));
    if (!rec.contains("details") || !rec.at("details").contains("direct")) continue;
    const json& w = field(rec.at("details").at("direct"), "witness");
    if (!w.is_array() || w.size() != 2) throw Error(ErrorKind::Parse, "witness must be a pair of points");
    out.witnesses.emplace_back(point_from_json(m, w[0]), point_from_json(m, w[1]));
  }
  return out;
}

}  // namespace detail

/// Entry point of the hyshadow tool; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Hyperspace shadowing experiments on Morse gradient flows"};
  app.name("hyshadow");
  // Plain --help only, so that --h is free for the resolution flag.
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.add_option("--threads", cfg.threads, "worker threads (0 = machine parallelism)");
  app.add_option("--seed", cfg.seed, "seed for every random choice")->capture_default_str();

  auto add_system = [&](CLI::App* sub) {
    sub->add_option("--system", cfg.system, "sphere or torus")
        ->check(CLI::IsMember({"sphere", "torus"}))
        ->capture_default_str();
  };
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", cfg.out_path, "output file (default: stdout)"); };
  auto add_band = [&](CLI::App* sub) {
    sub->add_option("--a1", cfg.a1, "lower band level");
    sub->add_option("--b1", cfg.b1, "upper band level");
  };

  auto* critpoints = app.add_subcommand("critpoints", "list the critical points as JSON");
  add_system(critpoints);
  add_out(critpoints);

  auto* pair_cmd = app.add_subcommand("pair", "find two trajectories from the maximum to the minimum");
  add_system(pair_cmd);
  add_out(pair_cmd);

  SearchParams sp;
  auto* epsilon = app.add_subcommand("epsilon", "search for a certified eps");
  add_system(epsilon);
  add_band(epsilon);
  add_out(epsilon);
  epsilon->add_option("--samples", sp.samples, "samples per condition")->capture_default_str();
  epsilon->add_option("--bisection-steps", sp.bisection_steps)->capture_default_str();
  epsilon->add_option("--resolution", sp.h, "sample spacing of the band sets")->capture_default_str();

  auto* build = app.add_subcommand("build", "build the hyperspace pseudo-orbit");
  add_system(build);
  add_band(build);
  add_out(build);
  build->add_option("--eps", cfg.eps, "eps (default: certificate search)");
  build->add_option("--delta", cfg.delta, "pseudo-orbit bound (default: eps / 10)");
  build->add_option("--N", cfg.N, "window half-width")->capture_default_str();
  build->add_option("--h", cfg.h, "sample resolution (default: delta / 8)");

  std::string input;
  auto* validate = app.add_subcommand("validate", "recheck a pseudo-orbit file");
  validate->add_option("input", input, "pseudo-orbit JSON")->required();
  add_out(validate);

  std::string family;
  int count = 16;
  bool verify = false;
  bool include_candidates = false;
  auto* refute = app.add_subcommand("refute", "try to refute shadowing candidates");
  refute->add_option("input", input, "pseudo-orbit JSON")->required();
  refute->add_option("--family", family, "one candidate family (default: the whole suite)")
      ->check(CLI::IsMember({"x0_itself", "single_trajectory", "truncated_x0", "arc_through_p", "orbit_translate"}));
  refute->add_option("--count", count, "members per seeded family")->capture_default_str();
  refute->add_flag("--verify", verify, "recompute every direct violation by brute force");
  refute->add_flag("--include-candidates", include_candidates, "embed candidate samples in the report");
  add_out(refute);

  double sb_delta = 0.01;
  double sb_eps = 0.15;
  int sb_length = 50;
  int sb_count = 100;
  int linger_every = 10;
  int linger_steps = 10;
  auto* shadow = app.add_subcommand("shadow-base", "shadow seeded point pseudo-orbits in the base space");
  add_system(shadow);
  shadow->add_option("input", input, "optional JSON with a 'points' array to shadow instead");
  shadow->add_option("--delta", sb_delta)->capture_default_str();
  shadow->add_option("--eps", sb_eps)->capture_default_str();
  shadow->add_option("--length", sb_length)->capture_default_str();
  shadow->add_option("--count", sb_count)->capture_default_str();
  shadow->add_option("--linger-every", linger_every, "every k-th orbit lingers at the maximum (0: none)")
      ->capture_default_str();
  shadow->add_option("--linger-steps", linger_steps)->capture_default_str();
  add_out(shadow);

  std::string report_path;
  auto* plot = app.add_subcommand("plot", "render a pseudo-orbit or refutation report as SVG");
  plot->add_option("input", input, "pseudo-orbit or report JSON")->required();
  plot->add_option("--report", report_path, "refutation report drawn over the pseudo-orbit");
  add_out(plot);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return kExitInput;
  }

  try {
    cfg.validate();
    if (cfg.threads > 0) set_thread_count(cfg.threads);
    const MorseSystem sys = MorseSystem::from_name(cfg.system);
    const Manifold& m = sys.manifold();

    if (*critpoints) {
      const auto cps = find_critical_points(sys);
      detail::emit(json{{"system", sys.name()},
                        {"critical_points", critical_points_to_json(m, cps)},
                        {"alternating_sum", alternating_index_sum(cps)}},
                   cfg.out_path, out);
      return kExitOk;
    }

    if (*pair_cmd) {
      const auto pr = find_trajectory_pair(sys);
      detail::emit(json{{"system", sys.name()},
                        {"p", detail::critical_point_to_json(m, pr.p)},
                        {"q", detail::critical_point_to_json(m, pr.q)},
                        {"separation", pr.separation},
                        {"gamma1", detail::trajectory_to_json(m, pr.gamma1)},
                        {"gamma2", detail::trajectory_to_json(m, pr.gamma2)}},
                   cfg.out_path, out, false);
      return kExitOk;
    }

    if (*epsilon) {
      const auto pr = find_trajectory_pair(sys);
      const BandConfig band = cfg.band_for(pr);
      json j{{"system", sys.name()}};
      const json cert = certificate_to_json(search_epsilon(sys, pr, band, sp));
      for (const auto& [k, v] : cert.items()) j[k] = v;
      detail::emit(j, cfg.out_path, out);
      return kExitOk;
    }

    if (*build) {
      const auto pr = find_trajectory_pair(sys);
      OrbitConfig oc;
      oc.band = cfg.band_for(pr);
      oc.eps = cfg.eps ? *cfg.eps : search_epsilon(sys, pr, oc.band).eps;
      oc.delta = cfg.delta ? *cfg.delta : oc.eps / 10.0;
      oc.N = cfg.N;
      oc.h = cfg.h;
      detail::emit(pseudo_orbit_to_json(build_pseudo_orbit(sys, pr, oc)), cfg.out_path, out, false);
      return kExitOk;
    }

    if (*validate) {
      const PseudoOrbit po = pseudo_orbit_from_json(read_json_file(input));
      const MorseSystem osys = MorseSystem::from_name(po.system);
      const auto r = validate_pseudo_orbit(osys, po);
      detail::emit(validation_to_json(r), cfg.out_path, out);
      return r.pass ? kExitOk : kExitDomain;
    }

    if (*refute) {
      if (count < 1) throw Error(ErrorKind::Precondition, "--count must be at least 1");
      const PseudoOrbit po = pseudo_orbit_from_json(read_json_file(input));
      const MorseSystem osys = MorseSystem::from_name(po.system);
      const auto pr = find_trajectory_pair(osys);
      const Refuter refuter(osys, pr, po);
      auto cands = family.empty()
                       ? generate_suite(osys, pr, po, count, cfg.seed)
                       : generate_candidates(osys, pr, po, candidate_family_from_string(family), count, cfg.seed);
      const auto records = refute_all(refuter, std::move(cands));
      std::vector<char> verified(records.size(), 0);
      if (verify) {
        for (std::size_t i = 0; i < records.size(); ++i)
          if (records[i].certificate.direct)
            verified[i] = refuter.verify_direct(records[i].candidate.K, *records[i].certificate.direct);
      }
      detail::emit(refutation_report_to_json(po, records, verify ? &verified : nullptr, include_candidates),
                   cfg.out_path, out, !include_candidates);
      const auto s = summarize(records);
      bool ok = s.inconclusive == 0;
      if (verify)
        for (std::size_t i = 0; i < records.size(); ++i) ok = ok && (!records[i].certificate.direct || verified[i]);
      return ok ? kExitOk : kExitDomain;
    }

    if (*shadow) {
      if (sb_length < 1 || sb_count < 1 || linger_every < 0 || linger_steps < 0 || !(sb_delta > 0.0) ||
          !(sb_eps > 0.0))
        throw Error(ErrorKind::Precondition, "shadow-base parameters out of range");
      std::vector<std::vector<Point>> orbits;
      std::vector<std::uint64_t> seeds;
      if (!input.empty()) {
        const json j = read_json_file(input);
        const json& pts = detail::field(j, "points");
        if (!pts.is_array() || pts.empty()) throw Error(ErrorKind::Parse, "points must be a non-empty array");
        orbits.emplace_back();
        for (const auto& p : pts) orbits.back().push_back(point_from_json(m, p));
        seeds.push_back(cfg.seed);
      } else {
        for (int i = 0; i < sb_count; ++i) {
          const std::uint64_t s = cfg.seed + static_cast<std::uint64_t>(i);
          const int linger = linger_every > 0 && i % linger_every == 0 ? linger_steps : 0;
          orbits.push_back(random_base_pseudo_orbit(sys, static_cast<std::size_t>(sb_length), sb_delta, s, linger));
          seeds.push_back(s);
        }
      }
      json results = json::array();
      int found = 0;
      double worst = 0.0;
      for (std::size_t i = 0; i < orbits.size(); ++i) {
        const auto r = base_shadow_search(sys, orbits[i], sb_delta, sb_eps, seeds[i]);
        json rec{{"seed", seeds[i]}};
        const json res = shadow_result_to_json(m, r);
        for (const auto& [k, v] : res.items()) rec[k] = v;
        results.push_back(std::move(rec));
        found += r.found ? 1 : 0;
        worst = std::max(worst, r.sup_err);
      }
      const int total = static_cast<int>(orbits.size());
      detail::emit(json{{"system", sys.name()},
                        {"delta", sb_delta},
                        {"eps", sb_eps},
                        {"length", orbits.front().size()},
                        {"results", std::move(results)},
                        {"summary", json{{"total", total}, {"found", found}, {"worst_sup_err", worst}}}},
                   cfg.out_path, out);
      return found == total ? kExitOk : kExitDomain;
    }

    if (*plot) {
      const json j = read_json_file(input);
      FigureData fig;
      std::optional<json> report;
      if (j.contains("X")) {
        fig = figure_from_orbit(pseudo_orbit_from_json(j));
      } else if (j.contains("candidates")) {
        fig.system = detail::get<std::string>(j, "system");
        fig.band = band_from_json(detail::field(j, "band"));
        fig.eps = detail::get<double>(j, "eps");
        report = j;
      } else {
        throw Error(ErrorKind::Parse, "input is neither a pseudo-orbit nor a refutation report");
      }
      if (!report_path.empty()) report = read_json_file(report_path);
      const MorseSystem psys = MorseSystem::from_name(fig.system);
      if (report) {
        auto layers = detail::report_layers(psys.manifold(), *report);
        fig.candidates = std::move(layers.candidates);
        fig.witnesses = std::move(layers.witnesses);
      }
      detail::emit(render_svg(psys, find_trajectory_pair(psys), fig), cfg.out_path, out);
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "hyshadow: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "hyshadow: " << e.what() << "\n";
    return kExitDomain;
  }
  err << app.help();
  return kExitInput;
}

}  // namespace hyshadow

#endif  // HYSHADOW_CLI_HPP
